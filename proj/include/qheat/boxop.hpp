#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "form_index.hpp"
#include "kernel.hpp"
#include "linalg.hpp"
#include "parallel.hpp"
#include "quadrature.hpp"
#include "quadric.hpp"
#include "spectral.hpp"
#include "summation.hpp"

namespace qheat {

/// Tensor grid over adapted coordinates ordered (x_1, y_1, ..., x_n, y_n);
/// axis i spans [-half_widths[i], half_widths[i]] with `points` nodes.
struct GridSpec {
    RVector half_widths;
    int points = 0;

    static GridSpec uniform(std::size_t n, double half_width, int points) {
        return {RVector(2 * n, half_width), points};
    }

    std::size_t dims() const { return half_widths.size(); }
    double spacing(std::size_t axis) const { return 2.0 * half_widths[axis] / (points - 1); }
    double coordinate(std::size_t axis, long long index) const {
        return -half_widths[axis] + static_cast<double>(index) * spacing(axis);
    }

    std::size_t node_count() const {
        std::size_t total = 1;
        for (std::size_t i = 0; i < dims(); ++i) total *= static_cast<std::size_t>(points);
        return total;
    }

    void validate() const {
        if (half_widths.empty() || half_widths.size() % 2 != 0)
            throw InputError("grid: half_widths must have 2n entries");
        if (points < 8) throw InputError("grid: at least 8 points per axis required");
        for (double r : half_widths)
            if (!(r > 0.0)) throw InputError("grid: half-widths must be positive");
    }

    /// Multi-index of a flat (lexicographic, axis 0 slowest) node number.
    std::vector<long long> unflatten(std::size_t flat) const {
        std::vector<long long> idx(dims());
        for (std::size_t a = dims(); a-- > 0;) {
            idx[a] = static_cast<long long>(flat % static_cast<std::size_t>(points));
            flat /= static_cast<std::size_t>(points);
        }
        return idx;
    }

    RVector coordinates(std::size_t flat) const {
        const auto idx = unflatten(flat);
        RVector x(dims());
        for (std::size_t a = 0; a < dims(); ++a) x[a] = coordinate(a, idx[a]);
        return x;
    }
};

/// Complex samples on a GridSpec. An empty `valid` mask means every node is valid.
struct GridFunction {
    GridSpec spec;
    std::vector<complex> values;
    std::vector<unsigned char> valid;

    bool is_valid(std::size_t flat) const { return valid.empty() || valid[flat] != 0; }
};

/// Samples f(x) on every node, with x the adapted real coordinates.
template <class F>
GridFunction sample_grid(const GridSpec& spec, F&& f) {
    spec.validate();
    GridFunction g{spec, std::vector<complex>(spec.node_count()), {}};
    parallel_for(g.values.size(), [&](std::size_t i) {
        const RVector x = spec.coordinates(i);
        g.values[i] = f(std::span<const double>(x));
    });
    return g;
}

/// Adapted real coordinates (x_1, y_1, ...) to complex eigenbasis coefficients.
inline CVector coefficients_from_real(std::span<const double> x) {
    CVector c(x.size() / 2);
    for (std::size_t k = 0; k < c.size(); ++k) c[k] = complex(x[2 * k], x[2 * k + 1]);
    return c;
}

/// Constant shift sum_{k in L} mu_k - sum_{k not in L} mu_k of the transformed operator.
inline double box_shift(const SpectralData& S, const FormIndex& L) {
    double shift = 0.0;
    for (std::size_t k = 0; k < S.n(); ++k) shift += L.contains(k) ? S.mu[k] : -S.mu[k];
    return shift;
}

namespace detail {

// Second-order stencil of
//   -1/4 Lap f + sum_k i mu_k (y_k d_{x_k} - x_k d_{y_k}) f + sum_k mu_k^2 (x_k^2 + y_k^2) f - shift f
// at one node; neighbor(axis, +1/-1) returns f one step along that axis.
template <class Neighbor>
complex box_stencil(complex center, std::span<const double> x, std::span<const double> h,
                    std::span<const double> mu, double shift, Neighbor&& neighbor) {
    complex lap = 0.0;
    complex drift = 0.0;
    double potential = 0.0;
    for (std::size_t k = 0; k < mu.size(); ++k) {
        const std::size_t ax = 2 * k;
        const std::size_t ay = 2 * k + 1;
        const complex fxp = neighbor(ax, +1), fxm = neighbor(ax, -1);
        const complex fyp = neighbor(ay, +1), fym = neighbor(ay, -1);
        lap += (fxp - 2.0 * center + fxm) / (h[ax] * h[ax]) + (fyp - 2.0 * center + fym) / (h[ay] * h[ay]);
        const complex dx = (fxp - fxm) / (2.0 * h[ax]);
        const complex dy = (fyp - fym) / (2.0 * h[ay]);
        drift += complex(0.0, mu[k]) * (x[ay] * dx - x[ax] * dy);
        potential += mu[k] * mu[k] * (x[ax] * x[ax] + x[ay] * x[ay]);
    }
    return -0.25 * lap + drift + (potential - shift) * center;
}

inline void check_grid_matches(const GridSpec& spec, const SpectralData& S) {
    spec.validate();
    require_size(spec.dims(), 2 * S.n(), "grid dimensions (2n)");
}

}  // namespace detail

/// Finite-difference box^lambda_LL on a grid in the adapted coordinates of S.
/// The one-node boundary ring is marked invalid (value 0).
inline GridFunction apply_box_ll_lambda(const GridFunction& f, const SpectralData& S, const FormIndex& L) {
    detail::check_grid_matches(f.spec, S);
    L.check_dimension(S.n());
    require_size(f.values.size(), f.spec.node_count(), "grid function values");
    const GridSpec& spec = f.spec;
    const std::size_t d = spec.dims();
    RVector h(d);
    for (std::size_t a = 0; a < d; ++a) h[a] = spec.spacing(a);
    std::vector<std::size_t> stride(d, 1);
    for (std::size_t a = d - 1; a-- > 0;) stride[a] = stride[a + 1] * static_cast<std::size_t>(spec.points);
    const double shift = box_shift(S, L);

    GridFunction out{spec, std::vector<complex>(f.values.size()), std::vector<unsigned char>(f.values.size(), 0)};
    parallel_for(f.values.size(), [&](std::size_t flat) {
        const auto idx = spec.unflatten(flat);
        for (auto i : idx)
            if (i == 0 || i == spec.points - 1) return;
        RVector x(d);
        for (std::size_t a = 0; a < d; ++a) x[a] = spec.coordinate(a, idx[a]);
        auto neighbor = [&](std::size_t axis, int dir) {
            return f.values[dir > 0 ? flat + stride[axis] : flat - stride[axis]];
        };
        out.values[flat] = detail::box_stencil(f.values[flat], x, h, S.mu, shift, neighbor);
        out.valid[flat] = 1;
    });
    return out;
}

struct PdeResidual {
    double normalized = 0.0;   ///< max |d_s rho + box rho| / max |d_s rho|
    double max_residual = 0.0;
    double max_time_derivative = 0.0;
    std::size_t points = 0;
};

/// Residual of d_s rho + box^lambda_LL rho = 0 for the closed-form rho-hat on the
/// interior nodes of `grid` (central differences in s with step hs).
///
/// With stride > 1 only interior nodes whose index differs from the grid centre by
/// a multiple of stride (on every axis) are checked; the stencil still uses the
/// full grid spacing. This keeps 4-dimensional fine grids tractable.
inline PdeResidual pde_residual_report(double s, const SpectralData& S, const FormIndex& L, const GridSpec& grid,
                                       double hs, int stride = 1) {
    detail::check_grid_matches(grid, S);
    if (!(hs > 0.0) || !(s - hs > 0.0)) throw DomainError("pde_residual: need 0 < hs < s");
    if (stride < 1) throw InputError("pde_residual: stride must be >= 1");
    const EpsilonVector eps = epsilon(L, S);
    const double shift = box_shift(S, L);
    const std::size_t d = grid.dims();
    RVector h(d);
    for (std::size_t a = 0; a < d; ++a) h[a] = grid.spacing(a);

    const long long centre = (grid.points - 1) / 2;
    std::vector<long long> axis_nodes;
    for (long long i = 1; i <= grid.points - 2; ++i)
        if ((i - centre) % stride == 0) axis_nodes.push_back(i);
    const std::size_t per_axis = axis_nodes.size();
    std::size_t total = 1;
    for (std::size_t a = 0; a < d; ++a) total *= per_axis;

    auto rho_at = [&](double t, std::span<const double> x) {
        const CVector c = coefficients_from_real(x);
        return log_rho_hat_adapted(t, c, S, eps).value();
    };

    std::vector<double> res(total), dts(total);
    parallel_for(total, [&](std::size_t flat) {
        RVector x(d);
        std::size_t rem = flat;
        for (std::size_t a = d; a-- > 0;) {
            x[a] = grid.coordinate(a, axis_nodes[rem % per_axis]);
            rem /= per_axis;
        }
        const double centre_value = rho_at(s, x);
        RVector xn = x;
        auto neighbor = [&](std::size_t axis, int dir) {
            xn[axis] = x[axis] + dir * h[axis];
            const complex v = rho_at(s, xn);
            xn[axis] = x[axis];
            return v;
        };
        const complex box = detail::box_stencil(centre_value, x, h, S.mu, shift, neighbor);
        const double dt = (rho_at(s + hs, x) - rho_at(s - hs, x)) / (2.0 * hs);
        res[flat] = std::abs(dt + box);
        dts[flat] = std::abs(dt);
    });

    PdeResidual out;
    out.points = total;
    out.max_residual = *std::max_element(res.begin(), res.end());
    out.max_time_derivative = *std::max_element(dts.begin(), dts.end());
    out.normalized = out.max_residual / out.max_time_derivative;
    return out;
}

inline double pde_residual(double s, const SpectralData& S, const FormIndex& L, const GridSpec& grid, double hs,
                           int stride = 1) {
    return pde_residual_report(s, S, L, grid, hs, stride).normalized;
}

/// Slowest Gaussian rate of the kernel in z: min(1/s, min_j |mu_j| coth(|mu_j| s)).
inline double kernel_decay_rate(double s, const SpectralData& S) {
    double rate = S.nu < S.n() ? 1.0 / s : std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < S.nu; ++j) rate = std::min(rate, mu_coth(s, S.mu[j]));
    return rate;
}

struct HeatApplyOptions {
    double tail_tol = 1e-8;  ///< absolute bound on the estimated out-of-grid contribution
    PhaseMode phase = PhaseMode::exact;
};

/// H^lambda{f}(s, z) = int H^lambda(s, z, z~) f(z~) dz~ by the tensor trapezoid rule on
/// the grid of f (adapted coordinates), evaluated at points z in original coordinates.
inline CVector heat_apply(const GridFunction& f, double s, const QuadricForm& Q, const SpectralData& S,
                          const FormIndex& L, std::span<const CVector> out_points, const HeatApplyOptions& opts = {}) {
    detail::check_time(s, "heat_apply");
    detail::check_grid_matches(f.spec, S);
    require_size(f.values.size(), f.spec.node_count(), "grid function values");
    const EpsilonVector eps = epsilon(L, S);
    const GridSpec& spec = f.spec;
    const std::size_t nodes = spec.node_count();
    const std::size_t d = spec.dims();

    std::vector<CVector> source(nodes);
    RVector weight(nodes);
    std::vector<unsigned char> edge(nodes, 0);
    parallel_for(nodes, [&](std::size_t i) {
        const auto idx = spec.unflatten(i);
        RVector x(d);
        double w = 1.0;
        for (std::size_t a = 0; a < d; ++a) {
            x[a] = spec.coordinate(a, idx[a]);
            const bool end = idx[a] == 0 || idx[a] == spec.points - 1;
            w *= end ? 0.5 * spec.spacing(a) : spec.spacing(a);
            if (end) edge[i] = 1;
        }
        weight[i] = w;
        source[i] = from_coefficients(S, coefficients_from_real(x));
    });

    QuadratureSpec box{spec.half_widths, std::vector<int>(d, spec.points), QuadratureRule::trapezoid,
                       kernel_decay_rate(s, S)};
    CVector out(out_points.size());
    for (std::size_t p = 0; p < out_points.size(); ++p) {
        require_size(out_points[p].size(), Q.n(), "heat_apply output point");
        std::vector<complex> terms(nodes);
        std::vector<double> edge_mag(nodes, 0.0);
        parallel_for(nodes, [&](std::size_t i) {
            if (!f.is_valid(i) || f.values[i] == complex(0.0)) return;
            const complex k = weighted_heat_kernel(s, out_points[p], source[i], Q, S, eps, opts.phase);
            const complex v = k * f.values[i];
            terms[i] = weight[i] * v;
            if (edge[i]) edge_mag[i] = std::abs(v);
        });
        const double boundary = *std::max_element(edge_mag.begin(), edge_mag.end());
        const double tail = tail_from_boundary(box, boundary);
        if (tail > opts.tail_tol)
            throw NumericError("heat_apply: estimated out-of-grid contribution " + std::to_string(tail) +
                               " exceeds tolerance " + std::to_string(opts.tail_tol));
        out[p] = pairwise_sum(std::span<const complex>(terms));
    }
    return out;
}

struct SemigroupOptions {
    double tail_tol = 1e-8;  ///< relative to |H(s1 + s2, z, z~)|
    PhaseMode phase = PhaseMode::exact;
};

/// |int H(s1, z, w) H(s2, w, z~) dw - H(s1 + s2, z, z~)| / |H(s1 + s2, z, z~)|,
/// with w ranging over C^n in original coordinates (x_1, y_1, ..., x_n, y_n).
inline double semigroup_check(double s1, double s2, std::span<const complex> z, std::span<const complex> zt,
                              const QuadricForm& Q, const SpectralData& S, const FormIndex& L,
                              const QuadratureSpec& quad, const SemigroupOptions& opts = {}) {
    detail::check_time(s1, "semigroup_check");
    detail::check_time(s2, "semigroup_check");
    const EpsilonVector eps = epsilon(L, S);
    const std::size_t n = Q.n();
    auto integrand = [&](std::span<const double> x) -> complex {
        const CVector w = coefficients_from_real(x);
        return weighted_heat_kernel(s1, z, w, Q, S, eps, opts.phase) *
               weighted_heat_kernel(s2, w, zt, Q, S, eps, opts.phase);
    };
    const QuadratureResult q = integrate(integrand, quad, 2 * n);
    const complex ref = weighted_heat_kernel(s1 + s2, z, zt, Q, S, eps, opts.phase);
    if (q.tail_estimate > opts.tail_tol * std::abs(ref))
        throw NumericError("semigroup_check: tail estimate " + std::to_string(q.tail_estimate) +
                           " too large relative to |H| = " + std::to_string(std::abs(ref)));
    return std::abs(q.value - ref) / std::abs(ref);
}

/// Test function of z in original coordinates.
using TestFunction = std::function<complex(std::span<const complex>)>;

struct InitialConditionOptions {
    int points = 201;
    double decay_budget = 40.0;  ///< grid half-width R satisfies rate * R^2 = decay_budget
    double max_half_width = 12.0;
    HeatApplyOptions heat{};
};

/// |H^lambda{f}(s, 0) - f(0)| for each s, using a grid sized to the kernel width at s.
inline RVector initial_condition_check(const TestFunction& f, std::span<const double> s_list, const QuadricForm& Q,
                                       const SpectralData& S, const FormIndex& L,
                                       const InitialConditionOptions& opts = {}) {
    const std::size_t n = Q.n();
    const CVector origin(n);
    const complex f0 = f(origin);
    RVector errors;
    for (double s : s_list) {
        const double rate = kernel_decay_rate(s, S);
        const double R = std::min(opts.max_half_width, std::sqrt(opts.decay_budget / rate));
        const GridSpec grid = GridSpec::uniform(n, R, opts.points);
        const GridFunction g = sample_grid(grid, [&](std::span<const double> x) {
            return f(from_coefficients(S, coefficients_from_real(x)));
        });
        const std::vector<CVector> targets{origin};
        const CVector v = heat_apply(g, s, Q, S, L, targets, opts.heat);
        errors.push_back(std::abs(v[0] - f0));
    }
    return errors;
}

/// Writes a grid function as CSV: header x1,y1,...,re,im then one row per node
/// in lexicographic order, values with 17 significant digits.
inline void write_grid_csv(std::ostream& os, const GridFunction& g) {
    const std::size_t d = g.spec.dims();
    for (std::size_t a = 0; a < d; ++a) os << (a % 2 == 0 ? "x" : "y") << (a / 2 + 1) << ',';
    os << "re,im\n";
    char buf[32];
    auto put = [&](double v) {
        auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
        os.write(buf, end - buf);
    };
    for (std::size_t i = 0; i < g.values.size(); ++i) {
        if (!g.is_valid(i)) continue;
        const RVector x = g.spec.coordinates(i);
        for (double c : x) {
            put(c);
            os << ',';
        }
        put(g.values[i].real());
        os << ',';
        put(g.values[i].imag());
        os << '\n';
    }
}

/// Reads CSV written by write_grid_csv. The grid is recovered from the distinct
/// coordinates per axis; every node of the tensor grid must be present.
inline GridFunction read_grid_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw InputError("grid csv: empty input");
    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) header.push_back(cell);
    }
    if (header.size() < 4 || header[header.size() - 2] != "re" || header.back() != "im")
        throw InputError("grid csv: header must be x1,y1,...,re,im");
    const std::size_t d = header.size() - 2;
    if (d % 2 != 0) throw InputError("grid csv: odd number of coordinate columns");

    std::vector<RVector> rows;
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        RVector row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (ec != std::errc()) throw InputError("grid csv: bad number on line " + std::to_string(line_no));
            row.push_back(v);
        }
        if (row.size() != d + 2) throw InputError("grid csv: wrong column count on line " + std::to_string(line_no));
        rows.push_back(std::move(row));
    }
    std::vector<std::set<double>> distinct(d);
    for (const auto& r : rows)
        for (std::size_t a = 0; a < d; ++a) distinct[a].insert(r[a]);
    GridSpec spec;
    spec.points = static_cast<int>(distinct[0].size());
    for (std::size_t a = 0; a < d; ++a) {
        if (static_cast<int>(distinct[a].size()) != spec.points)
            throw InputError("grid csv: axes must share the point count");
        spec.half_widths.push_back(*distinct[a].rbegin());
    }
    spec.validate();
    GridFunction g{spec, std::vector<complex>(spec.node_count()), std::vector<unsigned char>(spec.node_count(), 0)};
    for (const auto& r : rows) {
        std::size_t flat = 0;
        for (std::size_t a = 0; a < d; ++a) {
            const double idx = (r[a] + spec.half_widths[a]) / spec.spacing(a);
            flat = flat * static_cast<std::size_t>(spec.points) + static_cast<std::size_t>(std::llround(idx));
        }
        g.values[flat] = complex(r[d], r[d + 1]);
        g.valid[flat] = 1;
    }
    if (std::all_of(g.valid.begin(), g.valid.end(), [](unsigned char v) { return v != 0; })) g.valid.clear();
    return g;
}

}  // namespace qheat
