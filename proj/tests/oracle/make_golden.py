#!/usr/bin/env python3
"""Regenerates tests/oracle/golden_values.hpp.

Every value here comes from mpmath at >= 60 significant digits or from a
dense closed-form grid search; none of it touches the C++ implementation.
"""
import math
import numpy as np
from mpmath import mp, mpf, besselj, bessely, gamma, quad, quadosc, inf, cos, sqrt, pi, nstr

mp.dps = 80


def series_j(a, t, terms=400):
    a = mpf(a)
    t = mpf(t)
    z = (t / 2) ** 2
    s = mpf(0)
    term = 1 / gamma(a + 1)
    for k in range(terms):
        if k > 0:
            term *= -z / (k * (k + a))
        s += term
    return s


def main():
    out = []
    emit = lambda name, v: out.append(f"inline constexpr double {name} = {nstr(v, 20, strip_zeros=False)};")

    # ascending series, 80 digits, 400 terms
    j_025_1 = (mpf(1) / 2) ** mpf("0.25") * series_j("0.25", 1)
    emit("kBesselJ_0p25_at_1", j_025_1)
    emit("kScaledBessel_0p25_at_2", series_j("0.25", 2) / mpf(2) ** mpf("0.25"))

    # large-argument table (series done by mpmath's hypergeometric engine)
    orders = ["-13.4", "-2.7", "-0.5", "0", "0.25", "1", "2.5", "7.3", "20.5", "45.6"]
    ts = ["55", "100", "234.5", "500", "999.9"]
    rows = []
    for a in orders:
        for t in ts:
            rows.append((a, t, besselj(mpf(a), mpf(t))))
    out.append("struct BesselTableRow { double order; double t; double value; };")
    out.append("inline constexpr BesselTableRow kLargeArgumentTable[] = {")
    for a, t, v in rows:
        out.append(f"    {{{a}, {t}, {nstr(v, 20, strip_zeros=False)}}},")
    out.append("};")

    # moderate-argument table for large |order| (recurrence regime)
    rows = []
    for a in ["-31.7", "-9.9", "12.25", "30.5", "49.9"]:
        for t in ["13", "25", "40", "77"]:
            rows.append((a, t, besselj(mpf(a), mpf(t))))
    out.append("inline constexpr BesselTableRow kLargeOrderTable[] = {")
    for a, t, v in rows:
        out.append(f"    {{{a}, {t}, {nstr(v, 20, strip_zeros=False)}}},")
    out.append("};")

    # classical integral 2 * int_1^inf (y^2-1)^(-alpha) cos(s y) dy
    mp.dps = 30
    def xi_hat(alpha, s):
        alpha = mpf(alpha)
        s = mpf(s)
        # y = 1 + u keeps the endpoint singularity representable
        g = lambda u: (u * (2 + u)) ** (-alpha) * cos(s * (1 + u))
        near = quad(g, [0, mpf("0.001"), mpf("0.1"), 1])
        f = lambda y: (y * y - 1) ** (-alpha) * cos(s * y)
        tail = quadosc(f, [2, inf], omega=s)
        return 2 * (near + tail)
    emit("kXiHat_0p75_at_1", xi_hat("0.75", 1))
    emit("kXiHat_0p6_at_2", xi_hat("0.6", 2))
    # integral-table closed form at the same points, for cross-reference
    ref = lambda a, s: -sqrt(pi) * gamma(1 - mpf(a)) * (2 / mpf(s)) ** (mpf("0.5") - mpf(a)) * bessely(mpf(a) - mpf("0.5"), mpf(s))
    emit("kXiHatClosedForm_0p75_at_1", ref("0.75", 1))
    emit("kXiHatClosedForm_0p6_at_2", ref("0.6", 2))

    # envelope for order 1/2 on (0, 100]: sqrt(2/pi) |sin t| (1+t)/t, 1e6-point log grid
    t = np.exp(np.linspace(math.log(1e-6), math.log(100.0), 1_000_000))
    env = math.sqrt(2 / math.pi) * np.abs(np.sin(t)) * (1 + t) / t
    out.append(f"inline constexpr double kEnvelopeHalfOrder_tmax100 = {env.max():.17g};")

    print("// Generated by tests/oracle/make_golden.py; do not edit by hand.")
    print("#pragma once")
    print()
    print("namespace sconv::golden {")
    print()
    for line in out:
        print(line)
    print()
    print("}  // namespace sconv::golden")


if __name__ == "__main__":
    main()
