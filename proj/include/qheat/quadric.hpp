#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "linalg.hpp"

namespace qheat {

/// The vector-valued Hermitian form phi = (phi_1, ..., phi_m) on C^n, with
/// phi_k(z, w) = w^H A_k z. Immutable after construction.
class QuadricForm {
public:
    /// Relative Hermitian defect accepted (and symmetrized away) on construction.
    static constexpr double kHermitianTolerance = 1e-10;

    QuadricForm(std::size_t n, std::size_t m, std::vector<CMatrix> A) : n_(n), m_(m), A_(std::move(A)) {
        if (n == 0) throw InputError("quadric: n must be positive");
        if (m == 0) throw InputError("quadric: m must be positive");
        if (A_.size() != m) throw InputError("quadric: expected " + std::to_string(m) + " matrices in A, got " +
                                            std::to_string(A_.size()));
        for (std::size_t k = 0; k < m; ++k) {
            auto& a = A_[k];
            if (a.size() != n)
                throw InputError("quadric: A[" + std::to_string(k) + "] must be " + std::to_string(n) + "x" +
                                 std::to_string(n));
            const CMatrix ah = a.adjoint();
            const double defect = (a - ah).frobenius_norm();
            const double scale = std::max(1.0, a.frobenius_norm());
            if (defect > kHermitianTolerance * scale)
                throw InputError("quadric: A[" + std::to_string(k) + "] is not Hermitian (defect " +
                                 std::to_string(defect) + ")");
            a = 0.5 * (a + ah);
        }
    }

    /// phi(z, w) = w-bar z, i.e. the Heisenberg group H^n (m = 1, A = I).
    static QuadricForm heisenberg(std::size_t n) { return QuadricForm(n, 1, {CMatrix::identity(n)}); }

    std::size_t n() const { return n_; }
    std::size_t m() const { return m_; }
    const std::vector<CMatrix>& matrices() const { return A_; }
    const CMatrix& matrix(std::size_t k) const { return A_.at(k); }

private:
    std::size_t n_;
    std::size_t m_;
    std::vector<CMatrix> A_;
};

/// g = (z, t) in C^n x R^m.
struct GroupElement {
    CVector z;
    RVector t;

    friend bool operator==(const GroupElement&, const GroupElement&) = default;
};

/// (phi_1(z, w), ..., phi_m(z, w)); linear in z, conjugate-linear in w.
inline CVector phi_eval(const QuadricForm& Q, std::span<const complex> z, std::span<const complex> w) {
    require_size(z.size(), Q.n(), "phi_eval z");
    require_size(w.size(), Q.n(), "phi_eval w");
    CVector out(Q.m());
    for (std::size_t k = 0; k < Q.m(); ++k) {
        const CMatrix& a = Q.matrix(k);
        complex acc = 0.0;
        for (std::size_t r = 0; r < Q.n(); ++r) {
            complex row = 0.0;
            for (std::size_t c = 0; c < Q.n(); ++c) row += a(r, c) * z[c];
            acc += std::conj(w[r]) * row;
        }
        out[k] = acc;
    }
    return out;
}

/// lambda . Im phi(z, w), the scalar entering the group law and the twisted phase.
inline double lambda_im_phi(const QuadricForm& Q, std::span<const double> lambda, std::span<const complex> z,
                            std::span<const complex> w) {
    require_size(lambda.size(), Q.m(), "lambda");
    const CVector p = phi_eval(Q, z, w);
    double acc = 0.0;
    for (std::size_t k = 0; k < Q.m(); ++k) acc += lambda[k] * p[k].imag();
    return acc;
}

/// A^lambda = sum_k lambda_k A_k, the matrix of phi^lambda.
inline CMatrix phi_lambda_matrix(const QuadricForm& Q, std::span<const double> lambda) {
    require_size(lambda.size(), Q.m(), "lambda");
    CMatrix out(Q.n());
    for (std::size_t k = 0; k < Q.m(); ++k) {
        if (lambda[k] == 0.0) continue;
        out += lambda[k] * Q.matrix(k);
    }
    return out;
}

inline GroupElement group_mul(const QuadricForm& Q, const GroupElement& g, const GroupElement& h) {
    require_size(g.z.size(), Q.n(), "group_mul g.z");
    require_size(h.z.size(), Q.n(), "group_mul h.z");
    require_size(g.t.size(), Q.m(), "group_mul g.t");
    require_size(h.t.size(), Q.m(), "group_mul h.t");
    GroupElement out{CVector(Q.n()), RVector(Q.m())};
    for (std::size_t j = 0; j < Q.n(); ++j) out.z[j] = g.z[j] + h.z[j];
    const CVector p = phi_eval(Q, g.z, h.z);
    for (std::size_t k = 0; k < Q.m(); ++k) out.t[k] = g.t[k] + h.t[k] + 2.0 * p[k].imag();
    return out;
}

inline GroupElement group_inverse(const GroupElement& g) {
    GroupElement out = g;
    for (auto& v : out.z) v = -v;
    for (auto& v : out.t) v = -v;
    return out;
}

}  // namespace qheat
