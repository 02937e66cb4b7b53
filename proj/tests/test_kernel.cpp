#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "test_support.hpp"

using namespace qheat;
using oracle::cd;

namespace {

FormIndex Lset(std::vector<long long> v, std::size_t n) { return FormIndex::from_one_based(v, n); }

SpectralData diag_spectral(const RVector& d, const RVector& lambda = {1.0}) {
    const QuadricForm Q(d.size(), 1, {CMatrix::diagonal(d)});
    return spectral_data(Q, lambda);
}

}  // namespace

TEST(FormIndexTest, Validation) {
    EXPECT_THROW(Lset({1, 1}, 2), InputError);
    EXPECT_THROW(Lset({2, 1}, 2), InputError);
    EXPECT_THROW(Lset({0}, 2), InputError);
    EXPECT_THROW(Lset({3}, 2), InputError);
    try {
        Lset({1, 1}, 2);
    } catch (const InputError& e) {
        EXPECT_NE(std::string(e.what()).find("repeated"), std::string::npos);
    }
    EXPECT_EQ(Lset({1, 3}, 3).q(), 2u);
    EXPECT_EQ(FormIndex::full(3).one_based(), (std::vector<long long>{1, 2, 3}));
}

TEST(Epsilon, Examples) {
    const auto S11 = diag_spectral({1.0, 1.0});
    EXPECT_EQ(epsilon(Lset({1, 2}, 2), S11), (EpsilonVector{1, 1}));
    EXPECT_EQ(epsilon(Lset({}, 2), S11), (EpsilonVector{-1, -1}));
    // mu = (2, -3) in input order; the library orders by |mu| so index 2 becomes the first column.
    const auto S = diag_spectral({2.0, -3.0});
    ASSERT_EQ(S.mu, (RVector{-3.0, 2.0}));
    // L = {2} refers to the second adapted direction (mu = 2): eps = (-sgn(-3), sgn(2)) = (1, 1).
    EXPECT_EQ(epsilon(Lset({2}, 2), S), (EpsilonVector{1, 1}));
    // L = {1}: eps = (sgn(-3), -sgn(2)) = (-1, -1).
    EXPECT_EQ(epsilon(Lset({1}, 2), S), (EpsilonVector{-1, -1}));
}

TEST(Epsilon, ZeroModesCarryNoSign) {
    const auto S = diag_spectral({1.0, 0.0});
    EXPECT_EQ(epsilon(Lset({1, 2}, 2), S).size(), 1u);
}

TEST(LogMuSinh, ReferenceValues) {
    EXPECT_NEAR(log_mu_sinh_factor(1.0, 1.0, 1), std::log(2 * std::exp(1.0) / std::sinh(1.0)), 1e-15);
    EXPECT_NEAR(std::exp(log_mu_sinh_factor(1.0, 1.0, 1)), 4.626070570998663, 1e-14);
    for (double s : {1e-3, 0.4, 3.0})
        for (double mu : {0.2, 1.7})
            for (int eps : {-1, 1}) EXPECT_EQ(log_mu_sinh_factor(s, -mu, eps), log_mu_sinh_factor(s, mu, eps));
    const double big = log_mu_sinh_factor(800.0, 1.0, -1);
    EXPECT_TRUE(std::isfinite(big));
    EXPECT_NEAR(big, std::log(4.0) - 1600.0, 1e-12 * 1600.0);
    EXPECT_THROW(log_mu_sinh_factor(1.0, 0.0, 1), DomainError);
    EXPECT_THROW(log_mu_sinh_factor(0.0, 1.0, 1), DomainError);
}

TEST(LogMuSinh, SmallArgumentBranchContinuity) {
    for (double s : {1e-4, 0.5, 10.0})
        for (double f : {0.5, 0.999, 1.001, 1.5})
            for (int eps : {-1, 1}) {
                const double x = 1e-8 * f;
                const double mu = x / s;
                // Reference from long double sinh.
                const long double ref = std::log(2.0L * std::exp(static_cast<long double>(s) * eps * mu) * mu /
                                                 std::sinh(static_cast<long double>(s) * mu));
                const double v = log_mu_sinh_factor(s, mu, eps);
                EXPECT_LE(std::abs(v - static_cast<double>(ref)), 1e-12 * std::abs(static_cast<double>(ref)));
            }
}

TEST(RhoHat, EuclideanReduction) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> us(0.2, 3.0);
    for (std::size_t n = 1; n <= 4; ++n)
        for (std::size_t m = 1; m <= 3; ++m) {
            const auto Q = testing_support::random_quadric(n, m, rng);
            const RVector zero(m, 0.0);
            const auto S = spectral_data(Q, zero);
            const auto z = oracle::random_cvector(n, rng);
            const double s = us(rng);
            const double ref = oracle::euclidean_rho(s, norm2(std::span<const complex>(z)), n, m);
            EXPECT_LE(std::abs(rho_hat(s, z, S, Lset({}, n)) - ref), 1e-14 * ref);
        }
}

TEST(RhoHat, HeisenbergPointValue) {
    const auto S = spectral_data(QuadricForm::heisenberg(1), RVector{1.0});
    const double v = rho_hat(1.0, CVector{cd(0, 0)}, S, FormIndex::full(1));
    EXPECT_NEAR(v, std::pow(2 * std::numbers::pi, -1.5) * 2 * std::exp(1.0) / std::sinh(1.0), 1e-15);
}

TEST(RhoHat, MatchesDirectHeisenbergFormula) {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(-1.5, 1.5), us(0.05, 4.0), um(0.2, 3.0);
    for (int t = 0; t < 200; ++t) {
        const double lambda = (t % 2 ? 1 : -1) * um(rng);
        const auto S = spectral_data(QuadricForm::heisenberg(1), RVector{lambda});
        const CVector z{cd(u(rng), u(rng))};
        const double s = us(rng);
        for (const auto& L : {Lset({}, 1), Lset({1}, 1)}) {
            const int eps = epsilon(L, S)[0];
            const double ref = oracle::heisenberg_rho(s, lambda, eps, std::norm(z[0]));
            EXPECT_LE(std::abs(rho_hat(s, z, S, L) - ref), 1e-13 * ref);
        }
    }
}

TEST(RhoHat, HeisenbergFactorsAreIdentical) {
    const auto S = spectral_data(QuadricForm::heisenberg(3), RVector{-1.7});
    EXPECT_EQ(S.mu, (RVector{-1.7, -1.7, -1.7}));
    EXPECT_EQ(S.nu, 3u);
    const auto L = Lset({2}, 3);
    const CVector z{cd(0.1, 0.2), cd(0, 0), cd(0, 0)};
    const double s = 0.6;
    const auto eps = epsilon(L, S);
    double expect = std::pow(2 * std::numbers::pi, -0.5 - 3.0);
    for (std::size_t j = 0; j < 3; ++j) {
        const double a = 1.7;
        expect *= 2 * a * std::exp(s * eps[j] * a) / std::sinh(s * a);
    }
    expect *= std::exp(-1.7 / std::tanh(s * 1.7) * std::norm(z[0]));
    EXPECT_NEAR(rho_hat(s, z, S, L), expect, 1e-13 * expect);
}

TEST(RhoHat, PositivityEvennessAndDecay) {
    std::mt19937_64 rng(17);
    const auto Q = testing_support::random_quadric(3, 2, rng);
    const auto S = spectral_data(Q, RVector{0.6, -0.9});
    const auto L = Lset({1, 3}, 3);
    const auto eps = epsilon(L, S);
    const double s = 0.8;
    double c = 1.0 / s;
    for (std::size_t j = 0; j < S.nu; ++j) c = std::min(c, std::abs(S.mu[j]) / std::tanh(std::abs(S.mu[j]) * s));
    const double at0 = rho_hat(s, CVector(3), S, L);
    for (int t = 0; t < 200; ++t) {
        const auto z = oracle::random_cvector(3, rng, 3.0);
        const double v = rho_hat(s, z, S, L);
        EXPECT_GT(v, 0.0);
        CVector mz(3);
        for (std::size_t k = 0; k < 3; ++k) mz[k] = -z[k];
        EXPECT_EQ(v, rho_hat(s, mz, S, L));
        EXPECT_LE(v, at0 * std::exp(-c * norm2(std::span<const complex>(z))) * (1 + 1e-12));
        CVector coeff = adapted_coefficients(S, z);
        for (std::size_t j = 0; j < 3; ++j) {
            CVector flipped = coeff;
            flipped[j] = std::conj(flipped[j]);
            EXPECT_LE(std::abs(log_rho_hat_adapted(s, flipped, S, eps).value() - v), 1e-15 * v);
            flipped[j] = -std::conj(flipped[j]);
            EXPECT_LE(std::abs(log_rho_hat_adapted(s, flipped, S, eps).value() - v), 1e-15 * v);
        }
    }
}

TEST(RhoHat, AbsoluteMuInvariance) {
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> u(-2, 2);
    const RVector mu{2.0, -1.5, -0.3};
    const RVector mu_abs{2.0, 1.5, 0.3};
    const std::vector<int> eps{1, -1, 1};
    for (int t = 0; t < 100; ++t) {
        const RVector r2{u(rng) * u(rng), u(rng) * u(rng), u(rng) * u(rng)};
        RVector r2p(3);
        for (std::size_t j = 0; j < 3; ++j) r2p[j] = std::abs(r2[j]);
        const auto a = log_rho_hat_factors(0.7, mu, eps, r2p, 0.4, 4, 2).value();
        const auto b = log_rho_hat_factors(0.7, mu_abs, eps, r2p, 0.4, 4, 2).value();
        EXPECT_EQ(a, b);
    }
}

TEST(RhoHat, DomainAndQueryChecks) {
    const auto S = spectral_data(QuadricForm::heisenberg(1), RVector{1.0});
    const auto L = Lset({1}, 1);
    EXPECT_THROW(rho_hat(0.0, CVector(1), S, L), DomainError);
    EXPECT_THROW(rho_hat(-1.0, CVector(1), S, L), DomainError);
    KernelQuery q{0.5, CVector(1), &S, &L, std::nullopt, std::nullopt};
    EXPECT_GT(rho_hat(q), 0.0);
    q.eta = CVector{};
    EXPECT_THROW(rho_hat(q), InputError);
}

TEST(RhoHatEta, ZeroEtaAndZeroRank) {
    const auto S = diag_spectral({1.3, 0.0});
    const auto L = Lset({1}, 2);
    const double s = 0.9;
    const RVector xp{0.4}, yp{-0.2};
    const double with_eta0 = rho_hat_eta(s, xp, yp, CVector{cd(0, 0)}, S, L);
    const double a = 1.3;
    const double expect = std::pow(2 * std::numbers::pi, -2.5) * 2 * a * std::exp(s * a) / std::sinh(s * a) *
                          std::exp(-a / std::tanh(s * a) * 0.2);
    EXPECT_NEAR(with_eta0, expect, 1e-14 * expect);

    const auto Z = diag_spectral({1.0, 1.0}, {0.0});
    const CVector eta{cd(0.3, 0.4), cd(-1.0, 0.2)};
    const double v = rho_hat_eta(s, RVector{}, RVector{}, eta, Z, Lset({}, 2));
    EXPECT_NEAR(v, std::exp(-s * (0.25 + 1.04) / 4) * std::pow(2 * std::numbers::pi, -2.5), 1e-16);
}

TEST(RhoHatEta, FourierTransformOfEuclideanBlock) {
    const auto S = diag_spectral({-0.8, 0.0});
    const auto L = Lset({}, 2);
    const double s = 0.5;
    const CVector eta{cd(0.9, -0.6)};
    const cd zp(0.3, 0.25);
    const cd numeric = oracle::simpson2(
                           [&](double x, double y) {
                               const CVector c{zp, cd(x, y)};
                               const auto eps = epsilon(L, S);
                               return log_rho_hat_adapted(s, c, S, eps).value() *
                                      std::polar(1.0, -(x * eta[0].real() + y * eta[0].imag()));
                           },
                           6.0, 600) /
                       (2 * std::numbers::pi);
    const double ref = rho_hat_eta(s, RVector{zp.real()}, RVector{zp.imag()}, eta, S, L);
    EXPECT_LE(std::abs(numeric - ref), 1e-6 * std::max(1.0, ref));
    EXPECT_LE(std::abs(numeric - ref), 1e-8 * ref);
}

TEST(WeightedKernel, DiagonalConjugateSymmetryAndEuclidean) {
    std::mt19937_64 rng(23);
    const auto Q = testing_support::random_quadric(2, 2, rng);
    const RVector lambda{0.5, 1.2};
    const auto S = spectral_data(Q, lambda);
    const auto L = Lset({2}, 2);
    const double s = 0.45;
    const double root = 2 * std::numbers::pi;
    for (int t = 0; t < 100; ++t) {
        const auto z = oracle::random_cvector(2, rng), zt = oracle::random_cvector(2, rng);
        const cd d = weighted_heat_kernel(s, z, z, Q, S, L);
        EXPECT_NEAR(d.imag(), 0.0, 1e-15 * d.real());
        EXPECT_NEAR(d.real(), root * rho_hat(s, CVector(2), S, L), 1e-14 * d.real());
        const cd a = weighted_heat_kernel(s, z, zt, Q, S, L);
        const cd b = weighted_heat_kernel(s, zt, z, Q, S, L);
        EXPECT_LE(std::abs(a - std::conj(b)), 1e-12 * std::abs(a));
        CVector diff(2);
        for (std::size_t k = 0; k < 2; ++k) diff[k] = z[k] - zt[k];
        EXPECT_NEAR(std::abs(a), root * rho_hat(s, diff, S, L), 1e-13 * std::abs(a));
    }
    const auto E = spectral_data(Q, RVector{0.0, 0.0});
    const auto z = oracle::random_cvector(2, rng), zt = oracle::random_cvector(2, rng);
    const cd e = weighted_heat_kernel(s, z, zt, Q, E, L);
    CVector diff(2);
    for (std::size_t k = 0; k < 2; ++k) diff[k] = z[k] - zt[k];
    EXPECT_EQ(e.imag(), 0.0);
    EXPECT_NEAR(e.real(), root * oracle::euclidean_rho(s, norm2(std::span<const complex>(diff)), 2, 2),
                1e-14 * e.real());
}

TEST(WeightedKernel, PhaseMatchesFormDirectly) {
    const auto Q = QuadricForm::heisenberg(1);
    const auto S = spectral_data(Q, RVector{1.5});
    const auto L = Lset({1}, 1);
    const CVector z{cd(0.3, 0.1)}, zt{cd(-0.2, 0.4)};
    const cd h = weighted_heat_kernel(0.5, z, zt, Q, S, L);
    // Im phi(z, zt) = Im(conj(zt) z)
    const double im = (std::conj(zt[0]) * z[0]).imag();
    EXPECT_NEAR(std::arg(h), std::remainder(-2 * 1.5 * im, 2 * std::numbers::pi), 1e-14);
    const cd c = weighted_heat_kernel(0.5, z, zt, Q, S, L, PhaseMode::conjugate);
    const cd d = weighted_heat_kernel(0.5, z, zt, Q, S, L, PhaseMode::dropped);
    EXPECT_LE(std::abs(c - std::conj(h)), 1e-16);
    EXPECT_NEAR(d.real(), std::abs(h), 1e-16);
    EXPECT_EQ(d.imag(), 0.0);
}

TEST(Inversion, SpecPointWithFixedBox) {
    const auto S = spectral_data(QuadricForm::heisenberg(1), RVector{1.0});
    const auto L = Lset({1}, 1);
    const double s = 0.7;
    const auto quad = QuadratureSpec::uniform(2, 12.0, 512, inversion_decay_rate(s, S));
    const RVector xp{0.3}, yp{-0.2};
    const cd v = rho_via_inversion(s, xp, yp, {}, S, L, quad);
    const double ref = rho_hat_eta(s, xp, yp, {}, S, L);
    EXPECT_LE(std::abs(v.real() - ref), 1e-6);
    EXPECT_LE(std::abs(v.imag()), 1e-8);
}

TEST(Inversion, AutomaticBoxBothSignsAndOrigin) {
    for (double lambda : {0.5, -2.0})
        for (const auto& L : {Lset({}, 1), Lset({1}, 1)}) {
            const auto S = spectral_data(QuadricForm::heisenberg(1), RVector{lambda});
            const double s = 0.3;
            const auto quad = inversion_quadrature(s, S, 256, 1e-6);
            for (auto [x, y] : {std::pair{0.0, 0.0}, std::pair{0.5, -0.7}, std::pair{-1.1, 0.2}}) {
                const cd v = rho_via_inversion(s, RVector{x}, RVector{y}, {}, S, L, quad);
                EXPECT_LE(std::abs(v.real() - rho_hat_eta(s, RVector{x}, RVector{y}, {}, S, L)), 1e-6);
                EXPECT_LE(std::abs(v.imag()), 1e-8);
            }
        }
}

TEST(Inversion, TailAboveToleranceIsNumericError) {
    const auto S = spectral_data(QuadricForm::heisenberg(1), RVector{1.0});
    const auto quad = QuadratureSpec::uniform(2, 1.0, 64, inversion_decay_rate(0.7, S));
    EXPECT_THROW(rho_via_inversion(0.7, RVector{0.1}, RVector{0.1}, {}, S, FormIndex::full(1), quad), NumericError);
    const auto Z = spectral_data(QuadricForm::heisenberg(1), RVector{0.0});
    EXPECT_THROW(rho_via_inversion(0.7, RVector{}, RVector{}, {}, Z, FormIndex::full(1), quad), InputError);
}
