#pragma once

#include <cstddef>

namespace floodsom::detail {

/**
 * Squared Euclidean distance, abandoning the sum once it exceeds `bound`.
 * Terms are non-negative, so a partial sum above the bound proves the full
 * sum is too. Any returned value <= bound is the exact full sum, which keeps
 * lowest-index tie-breaking exact when the bound comes from a candidate.
 */
inline double squared_distance_bounded(const double* a, const double* b, std::size_t n,
                                       double bound) {
    double sum = 0.0;
    std::size_t j = 0;
    for (; j + 8 <= n; j += 8) {
        for (std::size_t k = j; k < j + 8; ++k) {
            const double d = a[k] - b[k];
            sum += d * d;
        }
        if (sum > bound) return sum;
    }
    for (; j < n; ++j) {
        const double d = a[j] - b[j];
        sum += d * d;
    }
    return sum;
}

}  // namespace floodsom::detail
