#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "form_index.hpp"
#include "hermite.hpp"
#include "linalg.hpp"
#include "quadrature.hpp"
#include "quadric.hpp"
#include "spectral.hpp"

namespace qheat {

/// Below this value of s|mu| the sinh/coth factors switch to their Taylor forms.
inline constexpr double kSmallArgument = 1e-8;

namespace detail {

inline double log_mu_sinh_exact(double s, double mu_abs, int eps) {
    const double x = s * mu_abs;
    return std::log(4.0 * mu_abs) + (eps - 1) * x - std::log(-std::expm1(-2.0 * x));
}

inline double log_mu_sinh_series(double s, double mu_abs, int eps) {
    const double x = s * mu_abs;
    const double x2 = x * x;
    return std::log(2.0 / s) + eps * x - x2 / 6.0 + x2 * x2 / 180.0;
}

inline void check_time(double s, const char* where) {
    if (!(s > 0.0) || !std::isfinite(s)) throw DomainError(std::string(where) + ": s must be positive and finite");
}

}  // namespace detail

/// log( 2 e^{s eps |mu|} |mu| / sinh(s |mu|) ), overflow-free; even in mu.
inline double log_mu_sinh_factor(double s, double mu, int eps) {
    detail::check_time(s, "log_mu_sinh_factor");
    if (mu == 0.0) throw DomainError("log_mu_sinh_factor: mu must be nonzero");
    const double mu_abs = std::abs(mu);
    return s * mu_abs < kSmallArgument ? detail::log_mu_sinh_series(s, mu_abs, eps)
                                       : detail::log_mu_sinh_exact(s, mu_abs, eps);
}

/// |mu| coth(|mu| s); tends to 1/s as mu -> 0.
inline double mu_coth(double s, double mu) {
    const double mu_abs = std::abs(mu);
    const double x = s * mu_abs;
    if (x < kSmallArgument) return 1.0 / s + s * mu_abs * mu_abs / 3.0;
    return mu_abs / std::tanh(x);
}

/// Kernel magnitude split into a normalization (in log form, may be huge or tiny)
/// and a nonpositive Gaussian exponent.
struct LogKernel {
    double log_norm = 0.0;
    double exponent = 0.0;

    double value() const { return std::exp(log_norm) * std::exp(exponent); }
    double log_value() const { return log_norm + exponent; }
};

/// rho-hat from its scalar ingredients: mu and eps over the rank block, the
/// squared moduli |c_j|^2 of the rank-block coordinates, and |z''|^2.
inline LogKernel log_rho_hat_factors(double s, std::span<const double> mu, std::span<const int> eps,
                                     std::span<const double> radius2, double euclid_radius2, std::size_t n,
                                     std::size_t m) {
    detail::check_time(s, "rho_hat");
    const std::size_t nu = mu.size();
    const auto flat = static_cast<double>(n - nu);
    LogKernel out;
    out.log_norm = flat * (std::numbers::ln2 - std::log(s)) -
                   (0.5 * static_cast<double>(m) + static_cast<double>(n)) * std::log(2.0 * std::numbers::pi);
    out.exponent = -euclid_radius2 / s;
    for (std::size_t j = 0; j < nu; ++j) {
        out.log_norm += log_mu_sinh_factor(s, mu[j], eps[j]);
        out.exponent -= mu_coth(s, mu[j]) * radius2[j];
    }
    return out;
}

/// rho-hat at coefficients c (all n of them) in the eigenbasis of S.
inline LogKernel log_rho_hat_adapted(double s, std::span<const complex> c, const SpectralData& S,
                                     std::span<const int> eps) {
    require_size(c.size(), S.n(), "rho_hat adapted point");
    require_size(eps.size(), S.nu, "rho_hat eps");
    if (S.m() == 0) throw InputError("rho_hat: spectral data carries no lambda (m unknown)");
    std::array<double, 64> r2buf{};
    if (S.nu > r2buf.size()) throw InputError("rho_hat: rank too large");
    double euclid = 0.0;
    for (std::size_t j = 0; j < S.n(); ++j) {
        const double r2 = std::norm(c[j]);
        if (j < S.nu)
            r2buf[j] = r2;
        else
            euclid += r2;
    }
    return log_rho_hat_factors(s, std::span<const double>(S.mu.data(), S.nu), eps,
                               std::span<const double>(r2buf.data(), S.nu), euclid, S.n(), S.m());
}

/// Evaluation request for the closed-form kernels.
struct KernelQuery {
    double s = 0.0;
    CVector z;
    const SpectralData* spectral = nullptr;
    const FormIndex* L = nullptr;
    std::optional<CVector> eta;
    std::optional<CVector> zt;
};

/// rho_s(x, y, lambda-hat) at z given in original coordinates.
inline double rho_hat(double s, std::span<const complex> z, const SpectralData& S, const FormIndex& L) {
    detail::check_time(s, "rho_hat");
    const CVector c = adapted_coefficients(S, z);
    const EpsilonVector eps = epsilon(L, S);
    return log_rho_hat_adapted(s, c, S, eps).value();
}

inline double rho_hat(const KernelQuery& q) {
    if (q.spectral == nullptr || q.L == nullptr) throw InputError("rho_hat: spectral data and L are required");
    if (q.eta || q.zt) throw InputError("rho_hat: eta and z-tilde are not accepted; use rho_hat_eta / weighted kernel");
    return rho_hat(q.s, q.z, *q.spectral, *q.L);
}

/// rho_s(x', y', eta-hat, lambda-hat): the kernel after a further transform in z''.
inline double rho_hat_eta(double s, std::span<const double> xp, std::span<const double> yp,
                          std::span<const complex> eta, const SpectralData& S, const FormIndex& L) {
    detail::check_time(s, "rho_hat_eta");
    require_size(xp.size(), S.nu, "rho_hat_eta x'");
    require_size(yp.size(), S.nu, "rho_hat_eta y'");
    if (!eta.empty()) require_size(eta.size(), S.n() - S.nu, "rho_hat_eta eta");
    if (S.m() == 0) throw InputError("rho_hat_eta: spectral data carries no lambda (m unknown)");
    const EpsilonVector eps = epsilon(L, S);
    double log_norm = -(0.5 * static_cast<double>(S.m()) + static_cast<double>(S.n())) *
                      std::log(2.0 * std::numbers::pi);
    double exponent = -0.25 * s * norm2(eta);
    for (std::size_t j = 0; j < S.nu; ++j) {
        log_norm += log_mu_sinh_factor(s, S.mu[j], eps[j]);
        exponent -= mu_coth(s, S.mu[j]) * (xp[j] * xp[j] + yp[j] * yp[j]);
    }
    return std::exp(log_norm) * std::exp(exponent);
}

/// How the twisted phase e^{-2i lambda . Im phi(z, z~)} enters the weighted kernel.
/// Only `exact` is the kernel; the others exist for negative controls.
enum class PhaseMode { exact, conjugate, dropped };

/// H^lambda(s, z, z~) = (2 pi)^{m/2} rho-hat(z - z~) e^{-2i lambda . Im phi(z, z~)}.
inline complex weighted_heat_kernel(double s, std::span<const complex> z, std::span<const complex> zt,
                                    const QuadricForm& Q, const SpectralData& S, std::span<const int> eps,
                                    PhaseMode mode = PhaseMode::exact) {
    require_size(z.size(), Q.n(), "weighted_heat_kernel z");
    require_size(zt.size(), Q.n(), "weighted_heat_kernel z~");
    require_size(S.lambda.size(), Q.m(), "weighted_heat_kernel lambda");
    CVector diff(Q.n());
    for (std::size_t j = 0; j < Q.n(); ++j) diff[j] = z[j] - zt[j];
    const CVector c = adapted_coefficients(S, diff);
    const LogKernel k = log_rho_hat_adapted(s, c, S, eps);
    const double mag = std::exp(k.log_norm + 0.5 * static_cast<double>(Q.m()) * std::log(2.0 * std::numbers::pi)) *
                       std::exp(k.exponent);
    if (mode == PhaseMode::dropped) return mag;
    double angle = -2.0 * lambda_im_phi(Q, S.lambda, z, zt);
    if (mode == PhaseMode::conjugate) angle = -angle;
    return std::polar(mag, angle);
}

inline complex weighted_heat_kernel(double s, std::span<const complex> z, std::span<const complex> zt,
                                    const QuadricForm& Q, const SpectralData& S, const FormIndex& L,
                                    PhaseMode mode = PhaseMode::exact) {
    detail::check_time(s, "weighted_heat_kernel");
    const EpsilonVector eps = epsilon(L, S);
    return weighted_heat_kernel(s, z, zt, Q, S, eps, mode);
}

/// Gaussian decay rate of u-tilde in a (and b): min_j (1 - S_j^2) / (8 |mu_j| (1 + S_j^2)).
inline double inversion_decay_rate(double s, const SpectralData& S) {
    if (S.nu == 0) throw InputError("inversion: rank nu must be at least 1");
    double rate = 0.0;
    for (std::size_t j = 0; j < S.nu; ++j) {
        const double mu_abs = std::abs(S.mu[j]);
        const double Sj = std::exp(-2.0 * mu_abs * s);
        const double r = 0.5 * ((1.0 - Sj * Sj) / (1.0 + Sj * Sj)) / (4.0 * mu_abs);
        rate = (j == 0) ? r : std::min(rate, r);
    }
    return rate;
}

/// Quadrature box for the inversion oracle: the Gaussian factor of u-tilde is
/// below 1e-3 * tol at the boundary.
inline QuadratureSpec inversion_quadrature(double s, const SpectralData& S, int points, double tol) {
    detail::check_time(s, "inversion_quadrature");
    const double rate = inversion_decay_rate(s, S);
    const double R = std::sqrt(-std::log(1e-3 * tol) / rate);
    return QuadratureSpec::uniform(2 * S.nu, R, points, rate);
}

struct InversionResult {
    complex value;
    double tail_estimate = 0.0;
    std::size_t nodes = 0;
};

/// Numerical Fourier inversion of u-tilde back to rho_s(x', y', eta-hat, lambda-hat):
///   e^{-2i sum mu_j x_j y_j} F^{-1}_{a,b}( e^{-(i/4) sum a_j b_j / mu_j} u-tilde(s, a, b) )(x', y')
/// with F^{-1} g(x) = (2 pi)^{-nu} int e^{i(a.x + b.y)} g(a, b) da db.
/// Throws NumericError when the quadrature tail estimate exceeds tol.
inline InversionResult rho_via_inversion_report(double s, std::span<const double> xp, std::span<const double> yp,
                                                std::span<const complex> eta, const SpectralData& S,
                                                const FormIndex& L, const QuadratureSpec& quad, double tol) {
    detail::check_time(s, "rho_via_inversion");
    if (S.nu == 0) throw InputError("rho_via_inversion: rank nu must be at least 1");
    require_size(xp.size(), S.nu, "rho_via_inversion x'");
    require_size(yp.size(), S.nu, "rho_via_inversion y'");
    const std::size_t nu = S.nu;
    const std::size_t d = 2 * nu;
    const double norm = std::pow(2.0 * std::numbers::pi, -static_cast<double>(nu));
    const CVector eta_vec(eta.begin(), eta.end());

    auto integrand = [&](std::span<const double> ab) -> complex {
        UTildeParams p;
        p.s = s;
        p.a.assign(ab.begin(), ab.begin() + static_cast<std::ptrdiff_t>(nu));
        p.b.assign(ab.begin() + static_cast<std::ptrdiff_t>(nu), ab.end());
        p.eta = eta_vec;
        p.spectral = &S;
        p.L = &L;
        double angle = 0.0;
        for (std::size_t j = 0; j < nu; ++j) angle += p.a[j] * xp[j] + p.b[j] * yp[j] - 0.25 * p.a[j] * p.b[j] / S.mu[j];
        return norm * std::polar(1.0, angle) * u_tilde_closed(p);
    };
    const QuadratureResult q = integrate(integrand, quad, d);
    if (!(q.tail_estimate <= tol))
        throw NumericError("rho_via_inversion: tail estimate " + std::to_string(q.tail_estimate) +
                           " exceeds tolerance " + std::to_string(tol) + " (boundary max " +
                           std::to_string(q.boundary_max) + ", half-width " + std::to_string(quad.half_width[0]) + ")");
    double outer = 0.0;
    for (std::size_t j = 0; j < nu; ++j) outer -= 2.0 * S.mu[j] * xp[j] * yp[j];
    return {std::polar(1.0, outer) * q.value, q.tail_estimate, q.nodes};
}

inline complex rho_via_inversion(double s, std::span<const double> xp, std::span<const double> yp,
                                 std::span<const complex> eta, const SpectralData& S, const FormIndex& L,
                                 const QuadratureSpec& quad, double tol = 1e-6) {
    return rho_via_inversion_report(s, xp, yp, eta, S, L, quad, tol).value;
}

}  // namespace qheat
