#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "linalg.hpp"
#include "parallel.hpp"
#include "summation.hpp"

namespace qheat {

enum class QuadratureRule { trapezoid, gauss_legendre };

/// Tensor rule on the box prod_i [-half_width_i, half_width_i].
/// tail_rate is the known Gaussian decay exponent of the integrand, |f| ~ e^{-rate |x|^2}.
struct QuadratureSpec {
    RVector half_width;
    std::vector<int> points;
    QuadratureRule rule = QuadratureRule::trapezoid;
    double tail_rate = 1.0;

    static QuadratureSpec uniform(std::size_t d, double R, int points, double tail_rate,
                                  QuadratureRule rule = QuadratureRule::trapezoid) {
        return {RVector(d, R), std::vector<int>(d, points), rule, tail_rate};
    }

    void validate(std::size_t d) const {
        require_size(half_width.size(), d, "quadrature half_width");
        require_size(points.size(), d, "quadrature points");
        for (std::size_t i = 0; i < d; ++i) {
            if (!(half_width[i] > 0.0)) throw InputError("quadrature: half_width must be positive");
            if (points[i] < 8) throw InputError("quadrature: at least 8 points per axis required");
        }
        if (!(tail_rate > 0.0)) throw InputError("quadrature: tail_rate must be positive");
    }
};

struct QuadratureResult {
    complex value;
    double tail_estimate = 0.0;  ///< bound on the out-of-box contribution
    double boundary_max = 0.0;   ///< max |f| over the outermost nodes
    std::size_t nodes = 0;
};

inline constexpr std::size_t kMaxDenseDimension = 4;
inline constexpr double kMaxQuadratureNodes = 1e8;

/// Conservative out-of-box bound for |f(x)| <= amplitude * e^{-rate |x|^2}:
/// amplitude * d * (pi/rate)^{(d-1)/2} * e^{-rate R^2} / (rate R), R the smallest half-width.
inline double tail_bound(const QuadratureSpec& spec, double amplitude) {
    const auto d = static_cast<double>(spec.half_width.size());
    const double R = *std::min_element(spec.half_width.begin(), spec.half_width.end());
    const double rate = spec.tail_rate;
    return amplitude * d * std::pow(std::numbers::pi / rate, 0.5 * (d - 1.0)) * std::exp(-rate * R * R) / (rate * R);
}

/// tail_bound with the envelope amplitude inferred from the largest magnitude
/// measured on the box boundary: amplitude = boundary_max * e^{rate R^2}.
inline double tail_from_boundary(const QuadratureSpec& spec, double boundary_max) {
    const auto d = static_cast<double>(spec.half_width.size());
    const double R = *std::min_element(spec.half_width.begin(), spec.half_width.end());
    const double rate = spec.tail_rate;
    return boundary_max * d * std::pow(std::numbers::pi / rate, 0.5 * (d - 1.0)) / (rate * R);
}

namespace detail {

struct AxisRule {
    RVector nodes;
    RVector weights;
};

inline const std::array<std::pair<double, double>, 8>& gauss_legendre_8() {
    static const auto table = [] {
        std::array<std::pair<double, double>, 8> t{};
        constexpr int order = 8;
        for (int i = 0; i < order; ++i) {
            double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = x;
                for (int k = 2; k <= order; ++k) {
                    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = order * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-16) break;
            }
            t[static_cast<std::size_t>(i)] = {x, 2.0 / ((1.0 - x * x) * dp * dp)};
        }
        std::sort(t.begin(), t.end());
        return t;
    }();
    return table;
}

inline AxisRule axis_rule(double R, int points, QuadratureRule rule) {
    AxisRule out;
    if (rule == QuadratureRule::trapezoid) {
        const double h = 2.0 * R / (points - 1);
        for (int i = 0; i < points; ++i) {
            out.nodes.push_back(-R + i * h);
            out.weights.push_back((i == 0 || i == points - 1) ? 0.5 * h : h);
        }
        return out;
    }
    const int panels = std::max(1, points / 8);
    const double width = 2.0 * R / panels;
    for (int p = 0; p < panels; ++p) {
        const double mid = -R + (p + 0.5) * width;
        for (const auto& [x, w] : gauss_legendre_8()) {
            out.nodes.push_back(mid + 0.5 * width * x);
            out.weights.push_back(0.5 * width * w);
        }
    }
    return out;
}

}  // namespace detail

/// Tensor-product quadrature of f over the box of `spec` in d dimensions.
///
/// f is called as f(std::span<const double>) and must be thread-safe; the
/// reduction is pairwise per axis, so results do not depend on the thread count.
template <class F>
QuadratureResult integrate(F&& f, const QuadratureSpec& spec, std::size_t d) {
    if (d == 0 || d > kMaxDenseDimension)
        throw InputError("integrate: dense integration supports 1 <= d <= " + std::to_string(kMaxDenseDimension));
    spec.validate(d);
    std::vector<detail::AxisRule> axes;
    double total_nodes = 1.0;
    for (std::size_t i = 0; i < d; ++i) {
        axes.push_back(detail::axis_rule(spec.half_width[i], spec.points[i], spec.rule));
        total_nodes *= static_cast<double>(axes.back().nodes.size());
    }
    if (total_nodes > kMaxQuadratureNodes)
        throw InputError("integrate: node budget exceeded (" + std::to_string(total_nodes) + " > 1e8)");

    const std::size_t outer = axes[0].nodes.size();
    std::vector<complex> partial(outer);
    std::vector<double> edge_max(outer, 0.0);

    parallel_for(outer, [&](std::size_t i0) {
        std::array<double, kMaxDenseDimension> x{};
        x[0] = axes[0].nodes[i0];
        double local_edge = 0.0;
        auto recurse = [&](auto&& self, std::size_t level, bool on_edge) -> complex {
            if (level == d) {
                const complex v = f(std::span<const double>(x.data(), d));
                if (on_edge) local_edge = std::max(local_edge, std::abs(v));
                return v;
            }
            const auto& ax = axes[level];
            const std::size_t count = ax.nodes.size();
            std::vector<complex> terms(count);
            for (std::size_t k = 0; k < count; ++k) {
                x[level] = ax.nodes[k];
                const bool edge = on_edge || k == 0 || k + 1 == count;
                terms[k] = ax.weights[k] * self(self, level + 1, edge);
            }
            return pairwise_sum(std::span<const complex>(terms));
        };
        const bool edge0 = (i0 == 0 || i0 + 1 == outer);
        partial[i0] = axes[0].weights[i0] * recurse(recurse, 1, edge0);
        edge_max[i0] = local_edge;
    });

    QuadratureResult out;
    out.value = pairwise_sum(std::span<const complex>(partial));
    out.boundary_max = *std::max_element(edge_max.begin(), edge_max.end());
    out.nodes = static_cast<std::size_t>(total_nodes);
    out.tail_estimate = tail_from_boundary(spec, out.boundary_max);
    return out;
}

}  // namespace qheat
