#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "test_support.hpp"

using namespace qheat;
using oracle::cd;

namespace {

FormIndex Lset(std::vector<long long> v, std::size_t n) { return FormIndex::from_one_based(v, n); }

SpectralData heis(double lambda, std::size_t n = 1) {
    return spectral_data(QuadricForm::heisenberg(n), RVector{lambda});
}

double max_interior_error(const GridFunction& g, const std::function<cd(double, double)>& ref) {
    double worst = 0.0;
    for (std::size_t i = 0; i < g.values.size(); ++i) {
        if (!g.is_valid(i)) continue;
        const RVector x = g.spec.coordinates(i);
        worst = std::max(worst, std::abs(g.values[i] - ref(x[0], x[1])));
    }
    return worst;
}

// FD residual of d_s H + box H for z -> H(s, z, zt), sampled on a grid.
double two_point_residual(PhaseMode mode, int points) {
    const auto Q = QuadricForm::heisenberg(1);
    const auto S = heis(1.0);
    const auto L = Lset({1}, 1);
    const CVector zt{cd(0.4, -0.3)};
    const double s = 0.6, hs = 1e-4;
    const GridSpec grid = GridSpec::uniform(1, 2.0, points);
    auto sample = [&](double t) {
        return sample_grid(grid, [&](std::span<const double> x) {
            const CVector z{cd(x[0], x[1])};
            return weighted_heat_kernel(t, z, zt, Q, S, L, mode);
        });
    };
    const GridFunction box = apply_box_ll_lambda(sample(s), S, L);
    const GridFunction up = sample(s + hs), down = sample(s - hs);
    double worst = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < box.values.size(); ++i) {
        if (!box.is_valid(i)) continue;
        const cd dt = (up.values[i] - down.values[i]) / (2 * hs);
        worst = std::max(worst, std::abs(dt + box.values[i]));
        scale = std::max(scale, std::abs(dt));
    }
    return worst / scale;
}

}  // namespace

TEST(GridSpecTest, ValidationAndLayout) {
    EXPECT_THROW(GridSpec::uniform(1, 1.0, 7).validate(), InputError);
    EXPECT_THROW(GridSpec::uniform(1, 0.0, 9).validate(), InputError);
    const auto g = GridSpec::uniform(1, 1.0, 11);
    EXPECT_EQ(g.node_count(), 121u);
    EXPECT_DOUBLE_EQ(g.spacing(0), 0.2);
    EXPECT_EQ(g.coordinates(12), (RVector{-0.8, -0.8}));
    const auto S = heis(1.0);
    GridFunction tiny{GridSpec::uniform(1, 1.0, 5), std::vector<complex>(25), {}};
    EXPECT_THROW(apply_box_ll_lambda(tiny, S, Lset({1}, 1)), InputError);
    GridFunction wrong_dim{GridSpec::uniform(2, 1.0, 9), std::vector<complex>(9 * 9 * 9 * 9), {}};
    EXPECT_THROW(apply_box_ll_lambda(wrong_dim, S, Lset({1}, 1)), InputError);
}

TEST(BoxOperator, ConstantFunctionGivesPotentialMinusShift) {
    const auto S = heis(1.0);
    const auto f = sample_grid(GridSpec::uniform(1, 2.0, 41), [](std::span<const double>) { return cd(1.0); });
    const auto b = apply_box_ll_lambda(f, S, Lset({1}, 1));
    EXPECT_LE(max_interior_error(b, [](double x, double y) { return cd(x * x + y * y - 1.0); }), 1e-12);
    // Boundary ring invalid.
    EXPECT_FALSE(b.is_valid(0));
    EXPECT_TRUE(b.is_valid(41 + 1));
    const auto e = apply_box_ll_lambda(f, S, Lset({}, 1));
    EXPECT_LE(max_interior_error(e, [](double x, double y) { return cd(x * x + y * y + 1.0); }), 1e-12);
}

TEST(BoxOperator, EuclideanLaplacianSecondOrder) {
    const auto S = heis(0.0);
    auto f = [](std::span<const double> x) { return cd(std::exp(-(x[0] * x[0] + x[1] * x[1]))); };
    auto exact = [](double x, double y) {
        const double r2 = x * x + y * y;
        return cd((1.0 - r2) * std::exp(-r2));
    };
    const double e1 = max_interior_error(apply_box_ll_lambda(sample_grid(GridSpec::uniform(1, 3.0, 61), f), S, Lset({}, 1)), exact);
    const double e2 = max_interior_error(apply_box_ll_lambda(sample_grid(GridSpec::uniform(1, 3.0, 121), f), S, Lset({}, 1)), exact);
    EXPECT_LT(e1, 1e-2);
    EXPECT_GT(e1 / e2, 3.5);
    EXPECT_LT(e1 / e2, 4.5);
}

TEST(BoxOperator, RotationTermVanishesOnRadialAndIsAntisymmetric) {
    const double mu = 1.7;
    const auto S = heis(mu);
    const auto L = Lset({}, 1);
    const double shift = -mu;
    const GridSpec grid = GridSpec::uniform(1, 3.0, 201);
    // Radial: only Laplacian, potential and shift survive.
    auto radial = [](std::span<const double> x) { return cd(std::exp(-(x[0] * x[0] + x[1] * x[1]))); };
    const double er = max_interior_error(apply_box_ll_lambda(sample_grid(grid, radial), S, L), [&](double x, double y) {
        const double r2 = x * x + y * y;
        return cd(((1.0 - r2) + mu * mu * r2 - shift) * std::exp(-r2));
    });
    EXPECT_LT(er, 1e-3);
    // f = x e^{-r^2}: i mu (y d_x - x d_y) f = i mu y e^{-r^2}.
    auto odd = [](std::span<const double> x) { return cd(x[0] * std::exp(-(x[0] * x[0] + x[1] * x[1]))); };
    const auto box = apply_box_ll_lambda(sample_grid(grid, odd), S, L);
    const double eo = max_interior_error(box, [&](double x, double y) {
        const double r2 = x * x + y * y;
        const double lap = (4 * r2 - 8) * x * std::exp(-r2);
        return cd(-0.25 * lap + (mu * mu * r2 - shift) * x * std::exp(-r2), mu * y * std::exp(-r2));
    });
    EXPECT_LT(eo, 1e-3);
}

TEST(PdeResidual, HeisenbergAndConvergenceOrder) {
    const auto S = heis(1.0);
    const auto L = Lset({1}, 1);
    const double r1 = pde_residual(0.7, S, L, GridSpec::uniform(1, 2.0, 101), 1e-4);
    const double r2 = pde_residual(0.7, S, L, GridSpec::uniform(1, 2.0, 201), 1e-4);
    EXPECT_LT(r2, 1e-3);
    EXPECT_GT(r1 / r2, 3.5);
    EXPECT_LT(r1 / r2, 4.5);
    EXPECT_THROW(pde_residual(1e-5, S, L, GridSpec::uniform(1, 2.0, 101), 1e-4), DomainError);
}

TEST(PdeResidual, EuclideanAndNegativeLambda) {
    for (double lambda : {0.0, -1.3})
        for (const auto& L : {Lset({}, 1), Lset({1}, 1)}) {
            const auto S = heis(lambda);
            const double r1 = pde_residual(0.5, S, L, GridSpec::uniform(1, 2.0, 101), 1e-4);
            const double r2 = pde_residual(0.5, S, L, GridSpec::uniform(1, 2.0, 201), 1e-4);
            EXPECT_GT(r1 / r2, 3.5) << lambda;
            EXPECT_LT(r1 / r2, 4.5) << lambda;
        }
}

TEST(PdeResidual, RankDeficientStrided) {
    const RVector d{1.0, 0.0};
    const QuadricForm Q(2, 1, {CMatrix::diagonal(d)});
    const auto S = spectral_data(Q, RVector{1.0});
    ASSERT_EQ(S.nu, 1u);
    const auto L = Lset({1}, 2);
    const auto a = pde_residual_report(0.7, S, L, GridSpec::uniform(2, 2.0, 41), 1e-4, 4);
    const auto b = pde_residual_report(0.7, S, L, GridSpec::uniform(2, 2.0, 81), 1e-4, 8);
    EXPECT_EQ(a.points, b.points);
    EXPECT_GT(a.normalized / b.normalized, 3.5);
    EXPECT_LT(a.normalized / b.normalized, 4.5);
}

TEST(PdeResidual, TwoPointKernelFixesRotationSign) {
    const double exact101 = two_point_residual(PhaseMode::exact, 101);
    const double exact201 = two_point_residual(PhaseMode::exact, 201);
    EXPECT_LT(exact201, 1e-3);
    EXPECT_GT(exact101 / exact201, 3.5);
    EXPECT_GT(two_point_residual(PhaseMode::conjugate, 201), 0.5);
    EXPECT_GT(two_point_residual(PhaseMode::dropped, 201), 0.1);
}

TEST(HeatApply, NarrowGaussianReproducesKernel) {
    const auto Q = QuadricForm::heisenberg(1);
    const auto S = heis(1.0);
    const auto L = Lset({1}, 1);
    const double sigma = 0.03;
    const cd z0(0.2, -0.1);
    const GridSpec grid = GridSpec::uniform(1, 1.0, 401);
    const auto f = sample_grid(grid, [&](std::span<const double> x) {
        return cd(std::exp(-std::norm(cd(x[0], x[1]) - z0) / (sigma * sigma)) / (std::numbers::pi * sigma * sigma));
    });
    const std::vector<CVector> pts{{cd(0.5, 0.3)}, {cd(-0.3, 0.2)}};
    const CVector out = heat_apply(f, 0.5, Q, S, L, pts);
    for (std::size_t p = 0; p < pts.size(); ++p) {
        const cd ref = weighted_heat_kernel(0.5, pts[p], CVector{z0}, Q, S, L);
        EXPECT_LE(std::abs(out[p] - ref), 1e-2 * std::abs(ref));
    }
}

TEST(HeatApply, LinearityAndZero) {
    const auto Q = QuadricForm::heisenberg(1);
    const auto S = heis(-0.8);
    const auto L = Lset({}, 1);
    const GridSpec grid = GridSpec::uniform(1, 6.0, 121);
    const auto f = sample_grid(grid, [](std::span<const double> x) { return cd(std::exp(-(x[0] * x[0] + x[1] * x[1]))); });
    const auto g = sample_grid(grid, [](std::span<const double> x) {
        return cd(x[0], x[1] * x[1]) * std::exp(-0.5 * (x[0] * x[0] + x[1] * x[1]));
    });
    const cd alpha(0.7, -0.2), beta(-1.3, 0.0);
    GridFunction h = f;
    for (std::size_t i = 0; i < h.values.size(); ++i) h.values[i] = alpha * f.values[i] + beta * g.values[i];
    const std::vector<CVector> pts{{cd(0, 0)}, {cd(0.4, -0.6)}, {cd(1.1, 0.3)}};
    const auto a = heat_apply(f, 0.3, Q, S, L, pts);
    const auto b = heat_apply(g, 0.3, Q, S, L, pts);
    const auto c = heat_apply(h, 0.3, Q, S, L, pts);
    for (std::size_t p = 0; p < pts.size(); ++p) EXPECT_LE(std::abs(c[p] - (alpha * a[p] + beta * b[p])), 1e-13);
    const auto zero = sample_grid(grid, [](std::span<const double>) { return cd(0.0); });
    for (const cd v : heat_apply(zero, 0.3, Q, S, L, pts)) EXPECT_EQ(v, cd(0.0));
}

TEST(HeatApply, TailAboveToleranceIsNumericError) {
    const auto Q = QuadricForm::heisenberg(1);
    const auto S = heis(1.0);
    const auto f = sample_grid(GridSpec::uniform(1, 1.0, 41), [](std::span<const double>) { return cd(1.0); });
    const std::vector<CVector> pts{{cd(0, 0)}};
    EXPECT_THROW(heat_apply(f, 2.0, Q, S, Lset({1}, 1), pts), NumericError);
}

TEST(HeatApply, OperationalSemigroupOnGrid) {
    const auto Q = QuadricForm::heisenberg(1);
    const auto S = heis(1.0);
    const auto L = Lset({}, 1);
    const GridSpec grid = GridSpec::uniform(1, 5.0, 61);
    const auto f = sample_grid(grid, [](std::span<const double> x) {
        return cd(std::exp(-(x[0] - 0.3) * (x[0] - 0.3) - x[1] * x[1]));
    });
    std::vector<CVector> nodes;
    for (std::size_t i = 0; i < grid.node_count(); ++i) {
        const RVector x = grid.coordinates(i);
        nodes.push_back(CVector{cd(x[0], x[1])});
    }
    HeatApplyOptions opts;
    opts.tail_tol = 1e-6;
    GridFunction g1{grid, heat_apply(f, 0.25, Q, S, L, nodes, opts), {}};
    const std::vector<CVector> pts{{cd(0, 0)}, {cd(0.5, -0.4)}};
    const auto two_step = heat_apply(g1, 0.35, Q, S, L, pts, opts);
    const auto one_step = heat_apply(f, 0.6, Q, S, L, pts, opts);
    for (std::size_t p = 0; p < pts.size(); ++p)
        EXPECT_LE(std::abs(two_step[p] - one_step[p]), 1e-6 * std::abs(one_step[p]));
}

TEST(Semigroup, HeisenbergExampleAndControls) {
    const auto Q = QuadricForm::heisenberg(1);
    const auto S = heis(1.0);
    const auto L = Lset({1}, 1);
    const CVector z{cd(0.3, 0.1)}, zt{cd(-0.2, 0.5)};
    const auto quad = QuadratureSpec::uniform(2, 6.0, 400, kernel_decay_rate(0.4, S));
    EXPECT_LE(semigroup_check(0.4, 0.4, z, zt, Q, S, L, quad), 1e-5);
    SemigroupOptions dropped;
    dropped.phase = PhaseMode::dropped;
    EXPECT_GE(semigroup_check(0.4, 0.4, z, zt, Q, S, L, quad, dropped), 1e-2);
    // A globally conjugated phase is the kernel of the conjugate operator and is itself a semigroup.
    SemigroupOptions conj;
    conj.phase = PhaseMode::conjugate;
    EXPECT_LE(semigroup_check(0.4, 0.4, z, zt, Q, S, L, quad, conj), 1e-5);

    const auto E = heis(0.0);
    const auto qe = QuadratureSpec::uniform(2, 6.0, 200, kernel_decay_rate(0.4, E));
    EXPECT_LE(semigroup_check(0.3, 0.5, z, zt, Q, E, Lset({}, 1), qe), 1e-10);
}

TEST(InitialCondition, EuclideanClosedFormAndZero) {
    const auto Q = QuadricForm::heisenberg(1);
    const auto E = heis(0.0);
    const RVector s_list{1e-1, 1e-2, 1e-3};
    const TestFunction gauss = [](std::span<const complex> z) { return cd(std::exp(-std::norm(z[0]))); };
    const RVector err = initial_condition_check(gauss, s_list, Q, E, Lset({}, 1));
    for (std::size_t i = 0; i < s_list.size(); ++i)
        EXPECT_NEAR(err[i], 1.0 - 1.0 / (1.0 + s_list[i]), 1e-10) << s_list[i];
    const TestFunction zero = [](std::span<const complex>) { return cd(0.0); };
    for (double e : initial_condition_check(zero, s_list, Q, heis(1.0), Lset({1}, 1))) EXPECT_EQ(e, 0.0);
}

TEST(InitialCondition, HeisenbergDecreasing) {
    const auto Q = QuadricForm::heisenberg(1);
    const auto S = heis(1.0);
    const RVector s_list{1e-1, 1e-2, 1e-3};
    const TestFunction f = [](std::span<const complex> z) { return cd(std::exp(-0.5 * std::norm(z[0]))); };
    const RVector err = initial_condition_check(f, s_list, Q, S, Lset({}, 1));
    EXPECT_GT(err[0], err[1]);
    EXPECT_GT(err[1], err[2]);
    EXPECT_LE(err[2], 5e-3);
}

TEST(GridCsv, RoundTrip) {
    const auto g = sample_grid(GridSpec::uniform(1, 1.5, 9), [](std::span<const double> x) {
        return cd(std::sin(x[0]) / 3.0, std::exp(x[1]) * 1e-7);
    });
    std::stringstream ss;
    write_grid_csv(ss, g);
    const auto back = read_grid_csv(ss);
    ASSERT_EQ(back.values.size(), g.values.size());
    EXPECT_EQ(back.spec.points, 9);
    for (std::size_t i = 0; i < g.values.size(); ++i) EXPECT_EQ(back.values[i], g.values[i]);
    std::stringstream bad("x1,y1,re,im\n0,0,1\n");
    EXPECT_THROW(read_grid_csv(bad), InputError);
}
