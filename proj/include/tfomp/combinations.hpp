#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

namespace tfomp {

/// C(p, k), saturating at UINT64_MAX.
inline std::uint64_t binomial(std::uint64_t p, std::uint64_t k) {
    if (k > p) return 0;
    k = std::min(k, p - k);
    std::uint64_t result = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        const std::uint64_t num = p - k + i;
        if (result > std::numeric_limits<std::uint64_t>::max() / num) {
            return std::numeric_limits<std::uint64_t>::max();
        }
        // exact: result * num is divisible by i at this point
        result = result * num / i;
    }
    return result;
}

/// Visit every size-k subset of {0..p-1} in lexicographic order.
template <class Fn>
void for_each_combination(Eigen::Index p, Eigen::Index k, Fn&& fn) {
    if (k < 0 || k > p) return;
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(k));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    while (true) {
        fn(static_cast<const std::vector<Eigen::Index>&>(idx));
        Eigen::Index i = k - 1;
        while (i >= 0 && idx[static_cast<std::size_t>(i)] == p - k + i) --i;
        if (i < 0) return;
        ++idx[static_cast<std::size_t>(i)];
        for (Eigen::Index j = i + 1; j < k; ++j) {
            idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
        }
    }
}

} // namespace tfomp
