#pragma once
#include <cstddef>
// gaussian sigma=1, alpha=0.75, N=4096, L=64, direct_defaults
namespace sconv::golden {
inline constexpr std::size_t kDirectGoldenStride = 128;
inline constexpr std::size_t kDirectGoldenCount = 32;
inline constexpr double kDirectGaussian0p75[] = {
    0.011695319760065596,
    0.011747757570115485,
    0.011908285667257922,
    0.012187015652713051,
    0.012602484262457057,
    0.013184673206316897,
    0.013980458247515145,
    0.015063423043982066,
    0.016552158559576431,
    0.018646411087937277,
    0.021704352894060409,
    0.026426083715518085,
    0.034356932862245657,
    0.049590892078734725,
    0.086925526178011289,
    0.25859022262465658,
    1.2389179099330203,
    0.25859022262465736,
    0.086925526178012899,
    0.049590892078734669,
    0.034356932862245768,
    0.026426083715518422,
    0.02170435289406026,
    0.01864641108793709,
    0.016552158559576518,
    0.015063423043982145,
    0.013980458247515273,
    0.013184673206316846,
    0.012602484262457046,
    0.01218701565271282,
    0.011908285667257872,
    0.011747757570115303,
};
}  // namespace sconv::golden
