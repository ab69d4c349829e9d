#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace depscore {

/// Linear-interpolation quantile (R type 7) of unsorted values, q in [0, 1].
inline double quantile(std::span<const double> values, double q) {
    if (values.empty()) throw std::invalid_argument("quantile of an empty sample");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

/// Middle value, or the mean of the two middle values for even sizes.
inline double median(std::span<const double> values) { return quantile(values, 0.5); }

}  // namespace depscore
