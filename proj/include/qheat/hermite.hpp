#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "form_index.hpp"
#include "linalg.hpp"
#include "spectral.hpp"

namespace qheat {

inline constexpr int kMaxHermiteDegree = 10000;

/// psi_0 .. psi_N at x, the L2-normalized Hermite functions.
///
/// Three-term recurrence on values scaled by e^{x^2/2}; the scale is tracked in
/// log form and rebalanced when the running values grow, so the recurrence never
/// underflows in the classically forbidden region.
inline RVector psi_all(int N, double x) {
    if (N < 0 || N > kMaxHermiteDegree)
        throw InputError("psi: degree " + std::to_string(N) + " outside 0.." + std::to_string(kMaxHermiteDegree));
    RVector out(static_cast<std::size_t>(N) + 1);
    double log_scale = -0.5 * x * x;
    double prev = std::pow(std::numbers::pi, -0.25);
    out[0] = prev * std::exp(log_scale);
    if (N == 0) return out;
    double cur = std::numbers::sqrt2 * x * prev;
    out[1] = cur * std::exp(log_scale);
    constexpr double kBig = 1e150;
    for (int l = 1; l < N; ++l) {
        const double next = std::sqrt(2.0 / (l + 1)) * x * cur - std::sqrt(static_cast<double>(l) / (l + 1)) * prev;
        prev = cur;
        cur = next;
        if (std::abs(cur) > kBig) {
            prev /= kBig;
            cur /= kBig;
            log_scale += std::log(kBig);
        }
        out[static_cast<std::size_t>(l) + 1] = cur * std::exp(log_scale);
    }
    return out;
}

inline double psi(int l, double x) { return psi_all(l, x).back(); }

/// psi_l(|mu|^{1/2} xi) |mu|^{1/4}; unit L2-norm in xi.
inline double psi_scaled(int l, double mu_abs, double xi) {
    if (!(mu_abs > 0.0)) throw DomainError("psi_scaled: mu_abs must be positive");
    return psi(l, std::sqrt(mu_abs) * xi) * std::pow(mu_abs, 0.25);
}

/// Closed form of sum_l w^l psi_l(x) psi_l(y) for |w| < 1 (principal square root).
inline complex mehler_closed(complex w, double x, double y) {
    if (!(std::abs(w) < 1.0)) throw DomainError("mehler_closed: |w| must be < 1");
    const complex w2 = w * w;
    const complex one_minus = 1.0 - w2;
    const complex expo = -0.5 * ((1.0 + w2) / one_minus) * (x * x + y * y) + 2.0 * w * x * y / one_minus;
    return std::exp(expo) / (std::sqrt(std::numbers::pi) * std::sqrt(one_minus));
}

/// Per-direction quantities of the transform-side solution at time s.
struct MehlerFactors {
    RVector S;      ///< e^{-2|mu_j| s}
    RVector alpha;  ///< a_j / (2|mu_j|^{1/2})
    RVector beta;   ///< -b_j |mu_j|^{1/2} / (2 mu_j), sign of mu_j kept
    EpsilonVector eps;
};

/// Arguments of u-tilde^{lambda,eta}(s, a, b).
struct UTildeParams {
    double s = 0.0;
    RVector a;    ///< dual to x', length nu
    RVector b;    ///< dual to y', length nu
    CVector eta;  ///< dual to z'', length n - nu (may be empty: eta = 0)
    const SpectralData* spectral = nullptr;
    const FormIndex* L = nullptr;
};

namespace detail {

inline void check_params(const UTildeParams& p) {
    if (!(p.s > 0.0)) throw DomainError("u_tilde: s must be positive");
    if (p.spectral == nullptr || p.L == nullptr) throw InputError("u_tilde: spectral data and L are required");
    const SpectralData& S = *p.spectral;
    if (S.m() == 0) throw InputError("u_tilde: spectral data carries no lambda (m unknown)");
    require_size(p.a.size(), S.nu, "u_tilde a");
    require_size(p.b.size(), S.nu, "u_tilde b");
    if (!p.eta.empty()) require_size(p.eta.size(), S.n() - S.nu, "u_tilde eta");
}

// (2 pi)^{-(m/2+n)} e^{-s|eta|^2/4}: the direction-independent prefactor.
inline double u_tilde_log_base(const UTildeParams& p) {
    const SpectralData& S = *p.spectral;
    const double m = static_cast<double>(S.m());
    const double n = static_cast<double>(S.n());
    return -(0.5 * m + n) * std::log(2.0 * std::numbers::pi) - 0.25 * p.s * norm2(std::span<const complex>(p.eta));
}

}  // namespace detail

inline MehlerFactors mehler_factors(const UTildeParams& p) {
    detail::check_params(p);
    const SpectralData& S = *p.spectral;
    MehlerFactors f;
    f.eps = epsilon(*p.L, S);
    for (std::size_t j = 0; j < S.nu; ++j) {
        const double mu = S.mu[j];
        const double mu_abs = std::abs(mu);
        f.S.push_back(std::exp(-2.0 * mu_abs * p.s));
        f.alpha.push_back(p.a[j] / (2.0 * std::sqrt(mu_abs)));
        f.beta.push_back(-p.b[j] * std::sqrt(mu_abs) / (2.0 * mu));
    }
    return f;
}

/// Mehler-collapsed closed form of u-tilde.
inline complex u_tilde_closed(const UTildeParams& p) {
    const MehlerFactors f = mehler_factors(p);
    const std::size_t nu = f.S.size();
    double log_mag = detail::u_tilde_log_base(p) + 0.5 * static_cast<double>(nu) * std::numbers::ln2;
    double phase = 0.0;
    for (std::size_t j = 0; j < nu; ++j) {
        const double S = f.S[j];
        const double S2 = S * S;
        const double ab2 = f.alpha[j] * f.alpha[j] + f.beta[j] * f.beta[j];
        log_mag += 0.5 * (1 - f.eps[j]) * std::log(S) - 0.5 * std::log1p(S2) - 0.5 * ((1.0 - S2) / (1.0 + S2)) * ab2;
        phase += -2.0 * S * f.alpha[j] * f.beta[j] / (1.0 + S2);
    }
    return std::polar(std::exp(log_mag), phase);
}

/// The Hermite series for u-tilde truncated at l = N in every direction.
inline complex u_tilde_series(const UTildeParams& p, int N) {
    if (N < 0) throw InputError("u_tilde_series: N must be nonnegative");
    const MehlerFactors f = mehler_factors(p);
    const std::size_t nu = f.S.size();
    complex value = std::exp(detail::u_tilde_log_base(p) + 0.5 * static_cast<double>(nu) *
                                                               std::log(2.0 * std::numbers::pi));
    for (std::size_t j = 0; j < nu; ++j) {
        const RVector pa = psi_all(N, f.alpha[j]);
        const RVector pb = psi_all(N, f.beta[j]);
        complex sum = 0.0;
        complex power = 1.0;
        const complex w(0.0, -f.S[j]);
        for (int l = 0; l <= N; ++l) {
            sum += power * pa[static_cast<std::size_t>(l)] * pb[static_cast<std::size_t>(l)];
            power *= w;
        }
        value *= std::pow(f.S[j], 0.5 * (1 - f.eps[j])) * sum;
    }
    return value;
}

/// max(50, ceil(-ln(tol) / (2 s min_j |mu_j|))): the geometric tail S^N falls below tol.
inline int default_series_terms(double s, const SpectralData& S, double tol = 1e-12) {
    if (!(s > 0.0)) throw DomainError("default_series_terms: s must be positive");
    double mu_min = 0.0;
    for (std::size_t j = 0; j < S.nu; ++j) {
        const double a = std::abs(S.mu[j]);
        mu_min = (j == 0) ? a : std::min(mu_min, a);
    }
    if (S.nu == 0) return 50;
    const double terms = std::ceil(-std::log(tol) / (2.0 * s * mu_min));
    return static_cast<int>(std::clamp(terms, 50.0, static_cast<double>(kMaxHermiteDegree)));
}

}  // namespace qheat
