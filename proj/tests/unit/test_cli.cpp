#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

fs::path workdir(const std::string& name) {
  const fs::path dir = fs::path(SCONV_TEST_WORKDIR) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Run run(const std::string& args, const fs::path& dir) {
  const fs::path out = dir / "stdout.txt";
  const fs::path err = dir / "stderr.txt";
  const std::string cmd = std::string("\"") + SCONV_CLI_PATH + "\" " + args + " >\"" + out.string() + "\" 2>\"" +
                          err.string() + "\"";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> v;
  std::istringstream is(text);
  for (std::string line; std::getline(is, line);) v.push_back(line);
  return v;
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "run.ini";
  std::ofstream(p) << text;
  return p;
}

}  // namespace

TEST(Cli, HelpListsEveryField) {
  const auto dir = workdir("help");
  const auto r = run("--help", dir);
  EXPECT_EQ(r.code, 0);
  for (const char* name :
       {"--config", "--out", "--workers", "--seed", "--orders", "--recurrence-orders", "--t-max", "--samples",
        "--closed-form-tol", "--recurrence-tol", "--stability-tol", "--gamma-tol", "--alphas", "--s-values", "--tol",
        "--jacobi-order", "--panel-count", "--truncation-radius", "--tail-tol", "--max-tail-terms", "--misparse-hook",
        "--n", "--alpha", "--half-width", "--points", "--input", "--kind", "--scale", "--frequency", "--form",
        "--calibration", "--direct", "--p-grid", "--q-grid", "--gaussian-sigmas", "--bump-scales", "--dilate-lambdas",
        "--modulated-omegas", "--modulated-sigma", "--random-items", "--output-name"}) {
    EXPECT_NE(r.out.find(name), std::string::npos) << name;
  }
  // every documented field line carries a rule
  std::size_t field_lines = 0;
  for (const auto& line : lines(r.out)) {
    if (line.rfind("    --", 0) != 0) continue;
    ++field_lines;
    EXPECT_NE(line.find("; rule: "), std::string::npos) << line;
  }
  EXPECT_GE(field_lines, 50u);
  EXPECT_NE(r.out.find("[sweep]"), std::string::npos);
}

TEST(Cli, NoSubcommandIsInputError) {
  const auto dir = workdir("nosub");
  EXPECT_EQ(run("", dir).code, 2);
  EXPECT_EQ(run("frobnicate", dir).code, 2);
  EXPECT_EQ(run("apply --alpha notanumber", dir).code, 2);
}

TEST(Cli, BesselCheckDefault) {
  const auto dir = workdir("bessel");
  const auto r = run("--out \"" + dir.string() + "\" bessel-check", dir);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto csv = lines(slurp(dir / "bessel_envelopes.csv"));
  ASSERT_EQ(csv.size(), 6u);
  EXPECT_EQ(csv[0], "a,constant,t_max,samples");
  const char* orders[] = {"-0.5,", "0,", "0.5,", "1,", "2,"};
  for (int i = 0; i < 5; ++i) EXPECT_EQ(csv[i + 1].rfind(orders[i], 0), 0u) << csv[i + 1];
  EXPECT_TRUE(fs::exists(dir / "bessel_check.txt"));
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
}

TEST(Cli, BesselCheckUnsupportedOrder) {
  const auto dir = workdir("bessel99");
  const auto r = run("--out \"" + dir.string() + "\" bessel-check --orders 99", dir);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("RangeError"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("bessel-check"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(dir / "bessel_envelopes.csv"));
}

TEST(Cli, BesselCheckTamperedTolerance) {
  const auto dir = workdir("bessel_tol");
  const auto r = run("--out \"" + dir.string() + "\" bessel-check --closed-form-tol 1e-20 --samples 2000", dir);
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("closed_form_half_orders"), std::string::npos) << r.err;
  EXPECT_NE(slurp(dir / "bessel_check.txt").find("FAIL closed_form_half_orders"), std::string::npos);
}

TEST(Cli, FourierCheck) {
  const auto dir = workdir("fourier");
  const auto r = run("--out \"" + dir.string() + "\" fourier-check", dir);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto csv = lines(slurp(dir / "fourier_check.csv"));
  ASSERT_EQ(csv.size(), 13u);
  EXPECT_EQ(csv[0], "alpha,s,oracle,m_paper,m_reference,ratio_paper,ratio_reference");
  EXPECT_NE(r.out.find("paper: not constant"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("reference: constant"), std::string::npos) << r.out;

  const std::string cal = slurp(dir / "calibration.txt");
  EXPECT_NE(cal.find("form = reference"), std::string::npos);
  std::smatch m;
  ASSERT_TRUE(std::regex_search(cal, m, std::regex("calibration = ([-0-9.e+]+)")));
  EXPECT_NEAR(std::stod(m[1]), 1.0, 1e-6);

  // oracle at (0.75, 1)
  for (const auto& line : csv) {
    if (line.rfind("0.75,1,", 0) == 0) {
      const double oracle = std::stod(line.substr(7, line.find(',', 7) - 7));
      EXPECT_NEAR(oracle, 1.0506144460629649, 1e-5);
    }
  }
}

TEST(Cli, FourierCheckMisparseHook) {
  const auto dir = workdir("fourier_hook");
  const auto r = run("--out \"" + dir.string() + "\" fourier-check --misparse-hook", dir);
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("paper: not constant"), std::string::npos) << r.out;
}

TEST(Cli, FourierCheckBadAlpha) {
  const auto dir = workdir("fourier_bad");
  const auto r = run("--out \"" + dir.string() + "\" fourier-check --alphas 0.4", dir);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("fourier-check"), std::string::npos) << r.err;
}

TEST(Cli, FourierCheckNonConvergence) {
  const auto dir = workdir("fourier_conv");
  const auto r = run("--out \"" + dir.string() + "\" fourier-check --tail-tol 1e-300 --max-tail-terms 16", dir);
  EXPECT_EQ(r.code, 3) << r.err;
}

TEST(Cli, ApplySpectralOnly) {
  const auto dir = workdir("apply");
  const auto r = run("--out \"" + dir.string() + "\" apply --alpha 0.75 --kind gaussian", dir);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "spectral.scnv"));
  EXPECT_TRUE(fs::exists(dir / "spectral.csv"));
  EXPECT_NE(r.out.find("realness = passed"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir / "direct.scnv"));
}

TEST(Cli, ApplyWithDirect) {
  const auto dir = workdir("apply_direct");
  const auto r = run("--out \"" + dir.string() + "\" apply --alpha 0.75 --kind gaussian --direct", dir);
  ASSERT_EQ(r.code, 0) << r.err;
  std::smatch m;
  ASSERT_TRUE(std::regex_search(r.out, m, std::regex("l2_discrepancy = ([-0-9.e+]+)")));
  EXPECT_LE(std::stod(m[1]), 1e-3);
  EXPECT_TRUE(fs::exists(dir / "direct.scnv"));
}

TEST(Cli, ApplyReadsInputWithoutModifyingIt) {
  const auto dir = workdir("apply_input");
  ASSERT_EQ(run("--out \"" + dir.string() + "\" apply --alpha 0.6 --half-width 16 --points 512", dir).code, 0);
  const fs::path in = dir / "copy.scnv";
  fs::copy_file(dir / "input.scnv", in);
  const std::string before = slurp(in);
  const auto out2 = dir / "second";
  const auto r = run("--out \"" + out2.string() + "\" apply --alpha 0.6 --input \"" + in.string() + "\"", dir);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(in), before);
  EXPECT_EQ(slurp(out2 / "spectral.scnv"), slurp(dir / "spectral.scnv"));
}

TEST(Cli, ApplyDirectInTwoDimensions) {
  const auto dir = workdir("apply_2d");
  const auto r = run("--out \"" + dir.string() + "\" apply --n 2 --alpha 1.3 --half-width 8 --points 128 --direct", dir);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("direct oracle is n=1 only"), std::string::npos) << r.err;
}

TEST(Cli, ApplyMissingInputIsIoError) {
  const auto dir = workdir("apply_missing");
  const auto r = run("--out \"" + dir.string() + "\" apply --input \"" + (dir / "nope.scnv").string() + "\"", dir);
  EXPECT_EQ(r.code, 4);
}

TEST(Cli, ApplyPoleIsInputError) {
  const auto dir = workdir("apply_pole");
  const auto r = run("--out \"" + dir.string() + "\" apply --n 2 --alpha 2 --half-width 8 --points 128", dir);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("PoleError"), std::string::npos);
}

TEST(Cli, SweepDefaultGrid) {
  const auto dir = workdir("sweep");
  const auto a = run("--out \"" + dir.string() + "\" sweep", dir);
  ASSERT_EQ(a.code, 0) << a.err;
  const std::string first = slurp(dir / "sweep.csv");
  const auto rows = lines(first);
  ASSERT_EQ(rows.size(), 65u);
  EXPECT_EQ(rows[0], "n,alpha,p,q,main,strichartz,one_dim,hl,a_needed,max_ratio,argmax,battery_size,seed");
  const auto b = run("--out \"" + dir.string() + "\" --workers 2 sweep", dir);
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(slurp(dir / "sweep.csv"), first);
}

TEST(Cli, SweepSeedMandatoryForRandomItems) {
  const auto dir = workdir("sweep_seed");
  const std::string small = " sweep --p-grid 2 --q-grid 2 --points 8192 --random-items 2";
  const auto r = run("--out \"" + dir.string() + "\"" + small, dir);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("seed"), std::string::npos) << r.err;
  const auto a = run("--out \"" + dir.string() + "\" --seed 7" + small, dir);
  ASSERT_EQ(a.code, 0) << a.err;
  const std::string first = slurp(dir / "sweep.csv");
  EXPECT_NE(first.find(",7\n"), std::string::npos);
  ASSERT_EQ(run("--out \"" + dir.string() + "\" --seed 7" + small, dir).code, 0);
  EXPECT_EQ(slurp(dir / "sweep.csv"), first);
}

TEST(Cli, SweepEqualityCellAtAlphaOne) {
  const auto dir = workdir("sweep_alpha1");
  const auto r = run("--out \"" + dir.string() + "\" sweep --alpha 1 --points 8192", dir);
  ASSERT_EQ(r.code, 0) << r.err;
  bool found = false;
  for (const auto& row : lines(slurp(dir / "sweep.csv"))) {
    if (row.rfind("1,1,1.3333333333333333,4,", 0) == 0) {
      found = true;
      EXPECT_NE(row.find(",true,"), std::string::npos);
      EXPECT_EQ(row.substr(row.find(",4,") + 3, 5), "true,");
    }
  }
  EXPECT_TRUE(found);
}

TEST(Cli, ConfigFileAndPrecedence) {
  const auto dir = workdir("config");
  const auto cfg = write_config(dir,
                                "out = \"" + (dir / "from_config").string() +
                                    "\"\n[sweep]\nalpha = 0.8\np-grid = 2\nq-grid = 2 4\npoints = 8192\n"
                                    "output-name = \"cells.csv\"\n");
  const auto a = run("--config \"" + cfg.string() + "\" sweep", dir);
  ASSERT_EQ(a.code, 0) << a.err;
  const auto rows = lines(slurp(dir / "from_config" / "cells.csv"));
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[1].rfind("1,0.80000000000000004,2,2,", 0), 0u) << rows[1];

  // flags win over the file
  const auto b = run("--config \"" + cfg.string() + "\" sweep --alpha 0.9", dir);
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(lines(slurp(dir / "from_config" / "cells.csv"))[1].rfind("1,0.90000000000000002,2,2,", 0), 0u);
}

TEST(Cli, ConfigUnknownKeyRejected) {
  const auto dir = workdir("config_bad");
  const auto cfg = write_config(dir, "[sweep]\nalpah = 0.8\n");
  EXPECT_EQ(run("--config \"" + cfg.string() + "\" sweep", dir).code, 2);
}

TEST(Cli, ConfigInvalidValueFailsFast) {
  const auto dir = workdir("config_invalid");
  const auto cfg = write_config(dir, "out = \"" + (dir / "o").string() + "\"\n[sweep]\npoints = 3000\n");
  const auto r = run("--config \"" + cfg.string() + "\" sweep", dir);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("sweep.grid"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(dir / "o" / "sweep.csv"));
}

TEST(Cli, ShippedExampleConfigIsValid) {
  const auto dir = workdir("example_config");
  const auto r = run("--config \"" SCONV_CONFIG_DIR "/example.ini\" --out \"" + dir.string() + "\" fourier-check", dir);
  EXPECT_EQ(r.code, 0) << r.err;
}
