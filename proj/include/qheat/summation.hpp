#pragma once

#include <cstddef>
#include <span>

namespace qheat {

/// Pairwise (cascade) summation with a fixed split order, so the rounding
/// pattern depends only on the input sequence.
template <class T>
T pairwise_sum(std::span<const T> v) {
    constexpr std::size_t kLeaf = 8;
    if (v.size() <= kLeaf) {
        T acc{};
        for (const auto& x : v) acc += x;
        return acc;
    }
    const std::size_t half = v.size() / 2;
    return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

}  // namespace qheat
