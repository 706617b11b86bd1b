#pragma once

#include <cmath>
#include <cstddef>
#include <utility>

namespace ell {

// Wilson score interval for a binomial proportion (default ~95%).
inline std::pair<double, double> wilson_interval(std::size_t successes, std::size_t trials,
                                                 double zscore = 1.959963984540054) {
    if (trials == 0) return {0.0, 1.0};
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = zscore * zscore;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double half = zscore * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    const double lo = (successes == 0) ? 0.0 : std::max(0.0, center - half);
    const double hi = (successes == trials) ? 1.0 : std::min(1.0, center + half);
    return {lo, hi};
}

}  // namespace ell
