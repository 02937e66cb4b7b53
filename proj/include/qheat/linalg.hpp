#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"

namespace qheat {

using complex = std::complex<double>;
using CVector = std::vector<complex>;
using RVector = std::vector<double>;

/// Dense square complex matrix, row-major. Sizes here are desk-scale (n <= 16).
class CMatrix {
public:
    CMatrix() = default;
    explicit CMatrix(std::size_t n) : n_(n), data_(n * n) {}
    CMatrix(std::size_t n, std::initializer_list<complex> rows) : n_(n), data_(rows) {
        if (data_.size() != n * n) throw InputError("CMatrix: expected " + std::to_string(n * n) + " entries");
    }

    static CMatrix identity(std::size_t n) {
        CMatrix m(n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    static CMatrix diagonal(std::span<const double> d) {
        CMatrix m(d.size());
        for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
        return m;
    }

    std::size_t size() const { return n_; }

    complex& operator()(std::size_t r, std::size_t c) { return data_[r * n_ + c]; }
    const complex& operator()(std::size_t r, std::size_t c) const { return data_[r * n_ + c]; }

    std::span<const complex> data() const { return data_; }

    CMatrix adjoint() const {
        CMatrix out(n_);
        for (std::size_t r = 0; r < n_; ++r)
            for (std::size_t c = 0; c < n_; ++c) out(c, r) = std::conj((*this)(r, c));
        return out;
    }

    double frobenius_norm() const {
        double acc = 0.0;
        for (const auto& v : data_) acc += std::norm(v);
        return std::sqrt(acc);
    }

    CMatrix& operator+=(const CMatrix& o) {
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
        return *this;
    }
    CMatrix& operator-=(const CMatrix& o) {
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
        return *this;
    }
    CMatrix& operator*=(complex a) {
        for (auto& v : data_) v *= a;
        return *this;
    }

    friend CMatrix operator+(CMatrix a, const CMatrix& b) { return a += b; }
    friend CMatrix operator-(CMatrix a, const CMatrix& b) { return a -= b; }
    friend CMatrix operator*(complex s, CMatrix a) { return a *= s; }

    friend CMatrix operator*(const CMatrix& a, const CMatrix& b) {
        const std::size_t n = a.n_;
        CMatrix out(n);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t k = 0; k < n; ++k) {
                const complex ark = a(r, k);
                for (std::size_t c = 0; c < n; ++c) out(r, c) += ark * b(k, c);
            }
        return out;
    }

    friend CVector operator*(const CMatrix& a, std::span<const complex> v) {
        CVector out(a.n_);
        for (std::size_t r = 0; r < a.n_; ++r)
            for (std::size_t c = 0; c < a.n_; ++c) out[r] += a(r, c) * v[c];
        return out;
    }

    friend bool operator==(const CMatrix&, const CMatrix&) = default;

private:
    std::size_t n_ = 0;
    std::vector<complex> data_;
};

inline double norm2(std::span<const complex> v) {
    double acc = 0.0;
    for (const auto& x : v) acc += std::norm(x);
    return acc;
}

inline double norm2(std::span<const double> v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return acc;
}

inline void require_size(std::size_t got, std::size_t want, const char* what) {
    if (got != want)
        throw InputError(std::string(what) + ": expected dimension " + std::to_string(want) + ", got " +
                         std::to_string(got));
}

}  // namespace qheat
