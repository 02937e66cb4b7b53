#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <exception>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "boxop.hpp"
#include "form_index.hpp"
#include "hermite.hpp"
#include "kernel.hpp"
#include "quadric.hpp"
#include "spectral.hpp"

namespace qheat {

/// Outcome of one verification check.
struct CheckResult {
    std::string name;
    bool passed = false;
    double error = 0.0;
    double tolerance = 0.0;
    double runtime_s = 0.0;
    std::string detail;
};

struct VerificationReport {
    std::vector<CheckResult> checks;
    bool all_passed() const {
        return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
    }
};

/// Problem and knobs shared by the checks. Defaults reproduce the acceptance
/// tolerances; the pde grid default is finer than 201 points so that the 1e-5
/// residual bound is actually reachable with second-order stencils.
struct VerifyContext {
    const QuadricForm* Q = nullptr;
    RVector lambda;
    FormIndex L;
    double tol_rel = kDefaultRankTolerance;
    PhaseMode phase = PhaseMode::exact;
    std::map<std::string, double> tolerances;
    int pde_points = 2001;
    double pde_half_width = 2.0;
    double pde_s = 0.7;
    int semigroup_points = 400;
    double semigroup_half_width = 6.0;
    int inversion_points = 512;
    std::uint64_t seed = 20240601;

    double tolerance(const std::string& name, double fallback) const {
        auto it = tolerances.find(name);
        return it == tolerances.end() ? fallback : it->second;
    }
};

inline const std::vector<std::string>& all_check_names() {
    static const std::vector<std::string> names{"mehler",           "inversion", "pde_residual", "semigroup",
                                                "initial_condition", "euclidean", "evenness"};
    return names;
}

namespace detail {

inline std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}


inline CheckResult check_mehler(const VerifyContext& ctx) {
    CheckResult r{"mehler", false, 0.0, ctx.tolerance("mehler", 1e-9), 0.0, {}};
    const SpectralData S = spectral_data(*ctx.Q, ctx.lambda, ctx.tol_rel);
    if (S.nu == 0) {
        r.detail = "nu = 0: no Hermite directions";
        r.passed = true;
        return r;
    }
    double worst = 0.0;
    for (double s : {0.1, 0.3, 1.0}) {
        for (int ia = 0; ia < 9; ++ia)
            for (int ib = 0; ib < 9; ++ib) {
                UTildeParams p;
                p.s = s;
                p.a.assign(S.nu, 0.0);
                p.b.assign(S.nu, 0.0);
                p.a[0] = -4.0 + ia;
                p.b[0] = -4.0 + ib;
                p.spectral = &S;
                p.L = &ctx.L;
                worst = std::max(worst, std::abs(u_tilde_closed(p) - u_tilde_series(p, 300)));
            }
    }
    r.error = worst;
    r.passed = worst <= r.tolerance;
    r.detail = "max |closed - series(300)| over s in {0.1,0.3,1}, 9x9 (a1,b1) grid on [-4,4]^2";
    return r;
}

inline CheckResult check_inversion(const VerifyContext& ctx) {
    CheckResult r{"inversion", false, 0.0, ctx.tolerance("inversion", 1e-6), 0.0, {}};
    const SpectralData S = spectral_data(*ctx.Q, ctx.lambda, ctx.tol_rel);
    if (S.nu == 0 || S.nu > 2) {
        r.detail = "requires 1 <= nu <= 2 (got nu = " + std::to_string(S.nu) + ")";
        return r;
    }
    std::mt19937_64 rng(ctx.seed);
    std::uniform_real_distribution<double> coord(-0.8, 0.8);
    double worst = 0.0;
    double worst_imag = 0.0;
    const int points = S.nu == 1 ? ctx.inversion_points : 64;
    for (double s : {0.3, 0.7}) {
        const QuadratureSpec quad = inversion_quadrature(s, S, points, r.tolerance);
        for (int k = 0; k < 4; ++k) {
            RVector xp(S.nu), yp(S.nu);
            for (std::size_t j = 0; j < S.nu; ++j) {
                xp[j] = coord(rng);
                yp[j] = coord(rng);
            }
            const complex num = rho_via_inversion(s, xp, yp, {}, S, ctx.L, quad, r.tolerance);
            const double exact = rho_hat_eta(s, xp, yp, {}, S, ctx.L);
            worst = std::max(worst, std::abs(num.real() - exact));
            worst_imag = std::max(worst_imag, std::abs(num.imag()));
        }
    }
    r.error = worst;
    r.passed = worst <= r.tolerance && worst_imag <= 1e-8;
    r.detail = "max |Re inversion - rho_hat_eta|; max |Im| = " + sci(worst_imag);
    return r;
}

inline CheckResult check_pde_residual(const VerifyContext& ctx) {
    CheckResult r{"pde_residual", false, 0.0, ctx.tolerance("pde_residual", 1e-5), 0.0, {}};
    const SpectralData S = spectral_data(*ctx.Q, ctx.lambda, ctx.tol_rel);
    const std::size_t n = S.n();
    if (n > 2) {
        r.detail = "PDE checks run for n <= 2 only";
        return r;
    }
    const GridSpec grid = GridSpec::uniform(n, ctx.pde_half_width, ctx.pde_points);
    const int stride = n == 1 ? 1 : std::max(1, (ctx.pde_points - 1) / 20);
    const PdeResidual res = pde_residual_report(ctx.pde_s, S, ctx.L, grid, 1e-4, stride);
    r.error = res.normalized;
    r.passed = res.normalized <= r.tolerance;
    r.detail = std::to_string(ctx.pde_points) + " points/axis, half-width " + sci(ctx.pde_half_width) +
               ", stride " + std::to_string(stride) + ", " + std::to_string(res.points) + " nodes checked";
    return r;
}

inline CheckResult check_semigroup(const VerifyContext& ctx) {
    CheckResult r{"semigroup", false, 0.0, ctx.tolerance("semigroup", 1e-5), 0.0, {}};
    const SpectralData S = spectral_data(*ctx.Q, ctx.lambda, ctx.tol_rel);
    const std::size_t n = S.n();
    if (n > 2) {
        r.detail = "semigroup check runs for n <= 2 only";
        return r;
    }
    CVector z(n), zt(n);
    z[0] = {0.3, 0.1};
    zt[0] = {-0.2, 0.5};
    if (n == 2) {
        z[1] = {-0.1, 0.2};
        zt[1] = {0.25, -0.15};
    }
    const double s1 = 0.4, s2 = 0.4;
    const int points = n == 1 ? ctx.semigroup_points : 48;
    const QuadratureSpec quad = QuadratureSpec::uniform(2 * n, ctx.semigroup_half_width, points,
                                                        0.5 * kernel_decay_rate(std::max(s1, s2), S));
    SemigroupOptions opts;
    opts.phase = ctx.phase;
    r.error = semigroup_check(s1, s2, z, zt, *ctx.Q, S, ctx.L, quad, opts);
    r.passed = r.error <= r.tolerance;
    r.detail = std::string("s1 = s2 = 0.4, phase ") +
               (ctx.phase == PhaseMode::exact ? "exact" : ctx.phase == PhaseMode::dropped ? "dropped" : "conjugate");
    return r;
}

inline CheckResult check_initial_condition(const VerifyContext& ctx) {
    CheckResult r{"initial_condition", false, 0.0, ctx.tolerance("initial_condition", 5e-3), 0.0, {}};
    const SpectralData S = spectral_data(*ctx.Q, ctx.lambda, ctx.tol_rel);
    const std::size_t n = S.n();
    if (n > 2) {
        r.detail = "initial-condition check runs for n <= 2 only";
        return r;
    }
    const TestFunction f = [](std::span<const complex> z) -> complex { return std::exp(-norm2(z)); };
    const RVector s_list{1e-1, 1e-2, 1e-3};
    InitialConditionOptions opts;
    if (n == 2) opts.points = 41;
    opts.heat.phase = ctx.phase;
    const RVector err = initial_condition_check(f, s_list, *ctx.Q, S, ctx.L, opts);
    constexpr double kFloor = 1e-12;
    bool monotone = true;
    for (std::size_t i = 1; i < err.size(); ++i) monotone = monotone && err[i] <= std::max(err[i - 1], kFloor);
    r.error = err.back();
    r.passed = monotone && err.back() <= r.tolerance;
    r.detail = "errors at s = 1e-1, 1e-2, 1e-3: " + sci(err[0]) + ", " + sci(err[1]) + ", " +
               sci(err[2]) + (monotone ? "" : " (not decreasing)");
    return r;
}

inline CheckResult check_euclidean(const VerifyContext& ctx) {
    CheckResult r{"euclidean", false, 0.0, ctx.tolerance("euclidean", 1e-14), 0.0, {}};
    const std::size_t n = ctx.Q->n();
    const std::size_t m = ctx.Q->m();
    const RVector zero(m, 0.0);
    const SpectralData S = spectral_data(*ctx.Q, zero, ctx.tol_rel);
    std::mt19937_64 rng(ctx.seed);
    std::uniform_real_distribution<double> coord(-1.0, 1.0), time(0.2, 3.0);
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const double s = time(rng);
        CVector z(n);
        for (auto& v : z) v = {coord(rng), coord(rng)};
        const double got = rho_hat(s, z, S, ctx.L);
        const double want = std::pow(2.0, static_cast<double>(n)) *
                            std::pow(2.0 * std::numbers::pi, -(0.5 * static_cast<double>(m) + static_cast<double>(n))) *
                            std::pow(s, -static_cast<double>(n)) * std::exp(-norm2(z) / s);
        worst = std::max(worst, std::abs(got - want) / want);
    }
    r.error = worst;
    r.passed = worst <= r.tolerance;
    r.detail = "lambda = 0, 1000 random (s, z)";
    return r;
}

inline CheckResult check_evenness(const VerifyContext& ctx) {
    CheckResult r{"evenness", false, 0.0, ctx.tolerance("evenness", 1e-12), 0.0, {}};
    const SpectralData S = spectral_data(*ctx.Q, ctx.lambda, ctx.tol_rel);
    const EpsilonVector eps = epsilon(ctx.L, S);
    const std::size_t n = S.n();
    std::mt19937_64 rng(ctx.seed);
    std::uniform_real_distribution<double> coord(-1.5, 1.5), time(0.1, 2.0);
    double worst = 0.0;
    for (int k = 0; k < 200; ++k) {
        const double s = time(rng);
        CVector c(n), zt(n);
        for (auto& v : c) v = {coord(rng), coord(rng)};
        for (auto& v : zt) v = {coord(rng), coord(rng)};
        const double base = log_rho_hat_adapted(s, c, S, eps).value();
        for (std::size_t a = 0; a < 2 * n; ++a) {
            CVector flipped = c;
            auto& v = flipped[a / 2];
            v = a % 2 == 0 ? complex(-v.real(), v.imag()) : complex(v.real(), -v.imag());
            worst = std::max(worst, std::abs(log_rho_hat_adapted(s, flipped, S, eps).value() - base) / base);
        }
        const CVector z = from_coefficients(S, c);
        const complex h1 = weighted_heat_kernel(s, z, zt, *ctx.Q, S, eps);
        const complex h2 = weighted_heat_kernel(s, zt, z, *ctx.Q, S, eps);
        worst = std::max(worst, std::abs(h2 - std::conj(h1)) / std::abs(h1));
    }
    r.error = worst;
    r.passed = worst <= r.tolerance;
    r.detail = "per-coordinate sign flips in adapted coordinates and H(s, z~, z) = conj H(s, z, z~)";
    return r;
}

}  // namespace detail

/// Runs the named checks in order. A check that throws is recorded as failed.
inline VerificationReport run_verification(const VerifyContext& ctx, const std::vector<std::string>& names) {
    using Fn = CheckResult (*)(const VerifyContext&);
    static const std::map<std::string, Fn> table{
        {"mehler", detail::check_mehler},
        {"inversion", detail::check_inversion},
        {"pde_residual", detail::check_pde_residual},
        {"semigroup", detail::check_semigroup},
        {"initial_condition", detail::check_initial_condition},
        {"euclidean", detail::check_euclidean},
        {"evenness", detail::check_evenness},
    };
    VerificationReport report;
    for (const auto& name : names) {
        auto it = table.find(name);
        if (it == table.end()) throw InputError("field 'verify.checks': unknown check '" + name + "'");
        const auto start = std::chrono::steady_clock::now();
        CheckResult res;
        try {
            res = it->second(ctx);
        } catch (const std::exception& e) {
            res.name = name;
            res.passed = false;
            res.error = std::numeric_limits<double>::quiet_NaN();
            res.detail = std::string("numeric failure: ") + e.what();
        }
        res.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        report.checks.push_back(std::move(res));
    }
    return report;
}

}  // namespace qheat
