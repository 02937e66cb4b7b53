#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "linalg.hpp"
#include "quadric.hpp"

namespace qheat {

/// Eigen-structure of phi^lambda at one lambda.
///
/// Columns of V are the eigenvectors v_j; mu holds the matching eigenvalues with
/// the nu nonzero ones first (descending |mu|, positive before negative on ties,
/// then by solver index) and the numerically-zero block last.
struct SpectralData {
    RVector lambda;
    RVector mu;
    CMatrix V;
    std::size_t nu = 0;
    double tol = 0.0;

    std::size_t n() const { return mu.size(); }
    std::size_t m() const { return lambda.size(); }
};

/// Coordinates of z in the eigenbasis, split into the rank block z' and kernel block z''.
struct AdaptedPoint {
    CVector zp;
    CVector zpp;
};

inline constexpr double kDefaultRankTolerance = 1e-10;

inline std::size_t rank_nu(std::span<const double> mu, double tol) {
    return static_cast<std::size_t>(std::count_if(mu.begin(), mu.end(), [tol](double m) { return std::abs(m) > tol; }));
}

namespace detail {

struct JacobiResult {
    RVector values;
    CMatrix vectors;
};

inline double off_diagonal_norm(const CMatrix& a) {
    double acc = 0.0;
    for (std::size_t r = 0; r < a.size(); ++r)
        for (std::size_t c = 0; c < a.size(); ++c)
            if (r != c) acc += std::norm(a(r, c));
    return std::sqrt(acc);
}

// Cyclic complex Jacobi. Each rotation is J = D * P with D = diag(1, e^{-i arg a_pq})
// making the (p, q) block real symmetric, and P the classical real rotation.
inline JacobiResult jacobi_hermitian(const CMatrix& input, int max_sweeps = 100) {
    const std::size_t n = input.size();
    CMatrix a = input;
    CMatrix v = CMatrix::identity(n);
    const double scale = input.frobenius_norm();
    const double target = 1e-14 * scale;

    int sweep = 0;
    double off = off_diagonal_norm(a);
    for (; sweep < max_sweeps && off > target; ++sweep) {
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const complex apq = a(p, q);
                const double g = std::abs(apq);
                if (g == 0.0) continue;
                const complex phase = std::conj(apq / g);
                const double app = a(p, p).real();
                const double aqq = a(q, q).real();
                const double tau = (aqq - app) / (2.0 * g);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;

                const complex jpp = c;
                const complex jpq = s;
                const complex jqp = -s * phase;
                const complex jqq = c * phase;

                for (std::size_t r = 0; r < n; ++r) {
                    const complex arp = a(r, p);
                    const complex arq = a(r, q);
                    a(r, p) = arp * jpp + arq * jqp;
                    a(r, q) = arp * jpq + arq * jqq;
                }
                for (std::size_t col = 0; col < n; ++col) {
                    const complex apc = a(p, col);
                    const complex aqc = a(q, col);
                    a(p, col) = std::conj(jpp) * apc + std::conj(jqp) * aqc;
                    a(q, col) = std::conj(jpq) * apc + std::conj(jqq) * aqc;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                a(p, p) = a(p, p).real();
                a(q, q) = a(q, q).real();
                for (std::size_t r = 0; r < n; ++r) {
                    const complex vrp = v(r, p);
                    const complex vrq = v(r, q);
                    v(r, p) = vrp * jpp + vrq * jqp;
                    v(r, q) = vrp * jpq + vrq * jqq;
                }
            }
        }
        off = off_diagonal_norm(a);
    }
    if (off > target)
        throw NumericError("eigendecompose: Jacobi did not converge after " + std::to_string(max_sweeps) +
                           " sweeps (off-diagonal residual " + std::to_string(off) + ")");

    JacobiResult out{RVector(n), std::move(v)};
    for (std::size_t i = 0; i < n; ++i) out.values[i] = a(i, i).real();
    return out;
}

inline void normalize_phase(CMatrix& V, std::size_t col) {
    const std::size_t n = V.size();
    double biggest = 0.0;
    for (std::size_t r = 0; r < n; ++r) biggest = std::max(biggest, std::abs(V(r, col)));
    if (biggest == 0.0) return;
    for (std::size_t r = 0; r < n; ++r) {
        if (std::abs(V(r, col)) >= biggest * (1.0 - 1e-9)) {
            const complex rot = std::conj(V(r, col)) / std::abs(V(r, col));
            for (std::size_t k = 0; k < n; ++k) V(k, col) *= rot;
            V(r, col) = V(r, col).real();
            return;
        }
    }
}

// Modified Gram-Schmidt over the given columns, in the order supplied.
inline void orthonormalize(CMatrix& V, std::span<const std::size_t> cols) {
    const std::size_t n = V.size();
    for (std::size_t i = 0; i < cols.size(); ++i) {
        const std::size_t ci = cols[i];
        for (std::size_t j = 0; j < i; ++j) {
            const std::size_t cj = cols[j];
            complex dot = 0.0;
            for (std::size_t r = 0; r < n; ++r) dot += std::conj(V(r, cj)) * V(r, ci);
            for (std::size_t r = 0; r < n; ++r) V(r, ci) -= dot * V(r, cj);
        }
        double nrm = 0.0;
        for (std::size_t r = 0; r < n; ++r) nrm += std::norm(V(r, ci));
        nrm = std::sqrt(nrm);
        for (std::size_t r = 0; r < n; ++r) V(r, ci) /= nrm;
    }
}

}  // namespace detail

/// Diagonalizes a Hermitian matrix into deterministic SpectralData.
/// The rank cut is tol = tol_rel * max(1, ||A||_F).
inline SpectralData eigendecompose(const CMatrix& A, double tol_rel = kDefaultRankTolerance) {
    const std::size_t n = A.size();
    if (n == 0) throw InputError("eigendecompose: empty matrix");
    const double scale = std::max(1.0, A.frobenius_norm());
    const double hermitian_defect = (A - A.adjoint()).frobenius_norm();
    if (hermitian_defect > 1e-10 * scale)
        throw InputError("eigendecompose: matrix is not Hermitian (defect " + std::to_string(hermitian_defect) + ")");

    const detail::JacobiResult raw = detail::jacobi_hermitian(A);
    const double tol = tol_rel * scale;

    std::vector<std::size_t> nonzero;
    std::vector<std::size_t> zero;
    for (std::size_t i = 0; i < n; ++i) (std::abs(raw.values[i]) > tol ? nonzero : zero).push_back(i);

    std::stable_sort(nonzero.begin(), nonzero.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(raw.values[a]) > std::abs(raw.values[b]);
    });
    // Runs of equal |mu| (up to round-off): positive first, then solver index.
    const double tie_tol = 1e-12 * scale;
    for (std::size_t lo = 0; lo < nonzero.size();) {
        std::size_t hi = lo + 1;
        while (hi < nonzero.size() &&
               std::abs(raw.values[nonzero[hi - 1]]) - std::abs(raw.values[nonzero[hi]]) <= tie_tol)
            ++hi;
        std::sort(nonzero.begin() + static_cast<std::ptrdiff_t>(lo), nonzero.begin() + static_cast<std::ptrdiff_t>(hi),
                  [&](std::size_t a, std::size_t b) {
                      const bool pa = raw.values[a] > 0.0;
                      const bool pb = raw.values[b] > 0.0;
                      if (pa != pb) return pa;
                      return a < b;
                  });
        lo = hi;
    }

    std::vector<std::size_t> order = nonzero;
    order.insert(order.end(), zero.begin(), zero.end());

    SpectralData out;
    out.mu.resize(n);
    out.V = CMatrix(n);
    out.nu = nonzero.size();
    out.tol = tol;
    for (std::size_t j = 0; j < n; ++j) {
        out.mu[j] = raw.values[order[j]];
        for (std::size_t r = 0; r < n; ++r) out.V(r, j) = raw.vectors(r, order[j]);
    }

    // Degenerate clusters by eigenvalue gap, re-orthonormalized in index order.
    const double gap_tol = 1e-8 * scale;
    std::vector<std::size_t> by_value(n);
    std::iota(by_value.begin(), by_value.end(), std::size_t{0});
    std::stable_sort(by_value.begin(), by_value.end(),
                     [&](std::size_t a, std::size_t b) { return out.mu[a] < out.mu[b]; });
    for (std::size_t lo = 0; lo < n;) {
        std::size_t hi = lo + 1;
        while (hi < n && out.mu[by_value[hi]] - out.mu[by_value[hi - 1]] < gap_tol) ++hi;
        if (hi - lo > 1) {
            std::vector<std::size_t> cluster(by_value.begin() + static_cast<std::ptrdiff_t>(lo),
                                             by_value.begin() + static_cast<std::ptrdiff_t>(hi));
            std::sort(cluster.begin(), cluster.end());
            detail::orthonormalize(out.V, cluster);
        }
        lo = hi;
    }
    for (std::size_t j = 0; j < n; ++j) detail::normalize_phase(out.V, j);
    return out;
}

/// Spectral data of phi^lambda for a quadric.
inline SpectralData spectral_data(const QuadricForm& Q, std::span<const double> lambda,
                                  double tol_rel = kDefaultRankTolerance) {
    SpectralData out = eigendecompose(phi_lambda_matrix(Q, lambda), tol_rel);
    out.lambda.assign(lambda.begin(), lambda.end());
    return out;
}

/// Coefficients c_j = v_j^H z, so that z = sum_j c_j v_j.
inline CVector adapted_coefficients(const SpectralData& S, std::span<const complex> z) {
    const std::size_t n = S.n();
    require_size(z.size(), n, "to_adapted z");
    CVector c(n);
    for (std::size_t j = 0; j < n; ++j) {
        complex acc = 0.0;
        for (std::size_t r = 0; r < n; ++r) acc += std::conj(S.V(r, j)) * z[r];
        c[j] = acc;
    }
    return c;
}

inline AdaptedPoint to_adapted(const SpectralData& S, std::span<const complex> z) {
    CVector c = adapted_coefficients(S, z);
    AdaptedPoint out;
    out.zp.assign(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(S.nu));
    out.zpp.assign(c.begin() + static_cast<std::ptrdiff_t>(S.nu), c.end());
    return out;
}

/// Reassembles z from coefficients in the eigenbasis (all n of them).
inline CVector from_coefficients(const SpectralData& S, std::span<const complex> c) {
    const std::size_t n = S.n();
    require_size(c.size(), n, "from_adapted coefficients");
    CVector z(n);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t r = 0; r < n; ++r) z[r] += c[j] * S.V(r, j);
    return z;
}

inline CVector from_adapted(const SpectralData& S, const AdaptedPoint& p) {
    require_size(p.zp.size(), S.nu, "from_adapted z'");
    require_size(p.zpp.size(), S.n() - S.nu, "from_adapted z''");
    CVector c = p.zp;
    c.insert(c.end(), p.zpp.begin(), p.zpp.end());
    return from_coefficients(S, c);
}

}  // namespace qheat
