#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "spectral.hpp"

namespace qheat {

/// Strictly increasing multi-index L selecting the d z-bar^L component of a
/// (0,q)-form. Stored 0-based; configs and reports use 1-based indices.
class FormIndex {
public:
    FormIndex() = default;

    static FormIndex from_zero_based(std::vector<std::size_t> idx, std::size_t n) {
        for (std::size_t i = 0; i < idx.size(); ++i) {
            if (idx[i] >= n)
                throw InputError("L: index " + std::to_string(idx[i] + 1) + " out of range 1.." + std::to_string(n));
            if (i > 0 && idx[i] <= idx[i - 1])
                throw InputError(idx[i] == idx[i - 1] ? "L: repeated index " + std::to_string(idx[i] + 1)
                                                      : "L: indices must be strictly increasing");
        }
        FormIndex out;
        out.idx_ = std::move(idx);
        out.n_ = n;
        return out;
    }

    static FormIndex from_one_based(std::span<const long long> idx, std::size_t n) {
        std::vector<std::size_t> zero_based;
        zero_based.reserve(idx.size());
        for (long long v : idx) {
            if (v < 1 || static_cast<std::size_t>(v) > n)
                throw InputError("L: index " + std::to_string(v) + " out of range 1.." + std::to_string(n));
            zero_based.push_back(static_cast<std::size_t>(v - 1));
        }
        return from_zero_based(std::move(zero_based), n);
    }

    /// L = {1, ..., n}.
    static FormIndex full(std::size_t n) {
        std::vector<std::size_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        return from_zero_based(std::move(idx), n);
    }

    bool contains(std::size_t j) const {
        for (std::size_t v : idx_)
            if (v == j) return true;
        return false;
    }

    std::size_t q() const { return idx_.size(); }
    const std::vector<std::size_t>& indices() const { return idx_; }

    std::vector<long long> one_based() const {
        std::vector<long long> out;
        for (std::size_t v : idx_) out.push_back(static_cast<long long>(v) + 1);
        return out;
    }

    /// Largest admissible dimension check; an empty L fits any n.
    void check_dimension(std::size_t n) const {
        if (!idx_.empty() && idx_.back() >= n)
            throw InputError("L: index " + std::to_string(idx_.back() + 1) + " exceeds n = " + std::to_string(n));
    }

private:
    std::vector<std::size_t> idx_;
    std::size_t n_ = 0;
};

/// eps_j = sgn(mu_j) for j in L, -sgn(mu_j) otherwise; only j < nu.
using EpsilonVector = std::vector<int>;

inline EpsilonVector epsilon(const FormIndex& L, const SpectralData& S) {
    L.check_dimension(S.n());
    EpsilonVector eps(S.nu);
    for (std::size_t j = 0; j < S.nu; ++j) {
        const int sgn = S.mu[j] > 0.0 ? 1 : -1;
        eps[j] = L.contains(j) ? sgn : -sgn;
    }
    return eps;
}

}  // namespace qheat
