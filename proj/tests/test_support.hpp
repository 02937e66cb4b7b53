#pragma once

#include <random>
#include <vector>

#include "oracles.hpp"
#include "qheat/json_io.hpp"
#include "qheat/qheat.hpp"

namespace testing_support {

inline qheat::CMatrix to_cmatrix(const oracle::Mat& a) {
    qheat::CMatrix out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a.size(); ++j) out(i, j) = a[i][j];
    return out;
}

inline oracle::Mat to_mat(const qheat::CMatrix& a) {
    oracle::Mat out = oracle::zeros(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a.size(); ++j) out[i][j] = a(i, j);
    return out;
}

inline qheat::QuadricForm single(const oracle::Mat& a) {
    return qheat::QuadricForm(a.size(), 1, {to_cmatrix(a)});
}

inline qheat::QuadricForm random_quadric(std::size_t n, std::size_t m, std::mt19937_64& rng) {
    std::vector<qheat::CMatrix> As;
    for (std::size_t k = 0; k < m; ++k) As.push_back(to_cmatrix(oracle::random_hermitian(n, rng)));
    return qheat::QuadricForm(n, m, As);
}

}  // namespace testing_support
