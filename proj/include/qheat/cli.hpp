#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "boxop.hpp"
#include "errors.hpp"
#include "expr.hpp"
#include "form_index.hpp"
#include "json_io.hpp"
#include "kernel.hpp"
#include "quadric.hpp"
#include "spectral.hpp"
#include "verify.hpp"

namespace qheat::cli {

/// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitNumeric = 1;
inline constexpr int kExitInput = 2;

struct GlobalOptions {
    std::string config_path;
    std::string out_path;
    unsigned threads = 0;
    double tol_rel = kDefaultRankTolerance;
    bool ablate_phase = false;
};

/// Validated job configuration. Command-specific blocks stay in `raw`.
struct JobConfig {
    QuadricForm quadric = QuadricForm::heisenberg(1);
    RVector lambda;
    FormIndex L;
    RVector s;
    json raw;
};

inline std::string format_double(double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, end);
}

/// FNV-1a 64 of the canonical (sorted-key) dump.
inline std::string config_hash(const json& j) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : j.dump()) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

inline JobConfig parse_config(const json& j, const std::filesystem::path& base_dir = {}) {
    if (!j.is_object()) throw InputError("config: expected a JSON object");
    JobConfig cfg;
    cfg.raw = j;
    if (!j.contains("quadric")) throw InputError("field 'quadric': missing");
    if (j["quadric"].is_string()) {
        std::filesystem::path p = j["quadric"].get<std::string>();
        if (p.is_relative()) p = base_dir / p;
        std::ifstream in(p);
        if (!in) throw InputError("field 'quadric': cannot open " + p.string());
        json q;
        try {
            in >> q;
        } catch (const json::exception& e) {
            throw InputError("field 'quadric': " + std::string(e.what()));
        }
        cfg.quadric = quadric_from_json(q);
    } else {
        cfg.quadric = quadric_from_json(j["quadric"]);
    }
    if (!j.contains("lambda")) throw InputError("field 'lambda': missing");
    cfg.lambda = rvector_from_json(j["lambda"], cfg.quadric.m(), "lambda");

    std::vector<long long> L;
    if (j.contains("L")) {
        if (!j["L"].is_array()) throw InputError("field 'L': expected a list of integers");
        for (const auto& v : j["L"]) {
            if (!v.is_number_integer()) throw InputError("field 'L': expected integers");
            L.push_back(v.get<long long>());
        }
    }
    cfg.L = FormIndex::from_one_based(L, cfg.quadric.n());

    if (j.contains("s")) {
        const json& s = j["s"];
        if (s.is_number()) {
            cfg.s.push_back(s.get<double>());
        } else if (s.is_array()) {
            for (const auto& v : s) {
                if (!v.is_number()) throw InputError("field 's': expected numbers");
                cfg.s.push_back(v.get<double>());
            }
        } else {
            throw InputError("field 's': expected a number or a list of numbers");
        }
        for (double v : cfg.s)
            if (!(v > 0.0) || !std::isfinite(v)) throw InputError("field 's': times must be positive and finite");
    }
    return cfg;
}

inline JobConfig load_config(const std::string& path) {
    if (path.empty()) throw InputError("--config: a config file is required");
    std::ifstream in(path);
    if (!in) throw InputError("--config: cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw InputError("config: " + std::string(e.what()));
    }
    return parse_config(j, std::filesystem::path(path).parent_path());
}

namespace detail {

inline void require_times(const JobConfig& cfg) {
    if (cfg.s.empty()) throw InputError("field 's': missing");
}

inline GridSpec grid_from_json(const json& j, std::size_t n, const std::string& field) {
    if (!j.is_object()) throw InputError("field '" + field + "': expected an object {half_width, points}");
    if (!j.contains("points") || !j["points"].is_number_integer())
        throw InputError("field '" + field + ".points': expected an integer");
    GridSpec g;
    g.points = j["points"].get<int>();
    if (!j.contains("half_width")) throw InputError("field '" + field + ".half_width': missing");
    const json& hw = j["half_width"];
    if (hw.is_number())
        g.half_widths.assign(2 * n, hw.get<double>());
    else
        g.half_widths = rvector_from_json(hw, 2 * n, field + ".half_width");
    try {
        g.validate();
    } catch (const InputError& e) {
        throw InputError("field '" + field + "': " + e.what());
    }
    return g;
}

struct EvalPoint {
    CVector z;
    std::optional<CVector> zt;
};

inline std::vector<EvalPoint> points_from_json(const json& j, std::size_t n, const std::string& field) {
    if (!j.is_array()) throw InputError("field '" + field + "': expected a list of points");
    std::vector<EvalPoint> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string f = field + "[" + std::to_string(i) + "]";
        if (j[i].is_object()) {
            if (!j[i].contains("z")) throw InputError("field '" + f + ".z': missing");
            EvalPoint p{cvector_from_json(j[i]["z"], n, f + ".z"), std::nullopt};
            if (j[i].contains("zt")) p.zt = cvector_from_json(j[i]["zt"], n, f + ".zt");
            out.push_back(std::move(p));
        } else {
            out.push_back({cvector_from_json(j[i], n, f), std::nullopt});
        }
    }
    return out;
}

inline json ints_json(const std::vector<int>& v) { return json(v); }

// Writes text to path through a temporary sibling and a rename.
inline void write_atomically(const std::string& path, const std::string& text) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InputError("--out: cannot write " + tmp);
        out << text;
        if (!out) throw InputError("--out: write failed for " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace detail

/// One JSON record per (s, point) on its own line.
inline void cmd_eval(const JobConfig& cfg, const GlobalOptions& opts, std::ostream& out) {
    detail::require_times(cfg);
    if (!cfg.raw.contains("points")) throw InputError("field 'points': missing");
    const auto points = detail::points_from_json(cfg.raw["points"], cfg.quadric.n(), "points");
    const SpectralData S = spectral_data(cfg.quadric, cfg.lambda, opts.tol_rel);
    const EpsilonVector eps = epsilon(cfg.L, S);
    const double log_2pi = std::log(2.0 * std::numbers::pi);
    for (double s : cfg.s) {
        for (const auto& p : points) {
            json rec;
            rec["s"] = s;
            rec["z"] = to_json(std::span<const complex>(p.z));
            rec["lambda"] = cfg.lambda;
            rec["L"] = cfg.L.one_based();
            rec["mu"] = S.mu;
            rec["nu"] = S.nu;
            rec["eps"] = eps;
            if (p.zt) {
                const PhaseMode mode = opts.ablate_phase ? PhaseMode::dropped : PhaseMode::exact;
                const complex h = weighted_heat_kernel(s, p.z, *p.zt, cfg.quadric, S, eps, mode);
                CVector diff(p.z.size());
                for (std::size_t k = 0; k < diff.size(); ++k) diff[k] = p.z[k] - (*p.zt)[k];
                const LogKernel lk = log_rho_hat_adapted(s, adapted_coefficients(S, diff), S, eps);
                rec["zt"] = to_json(std::span<const complex>(*p.zt));
                rec["kernel"] = "weighted";
                rec["re"] = h.real();
                rec["im"] = h.imag();
                rec["log_abs"] = lk.log_value() + 0.5 * static_cast<double>(cfg.quadric.m()) * log_2pi;
            } else {
                const LogKernel lk = log_rho_hat_adapted(s, adapted_coefficients(S, p.z), S, eps);
                rec["kernel"] = "rho_hat";
                rec["re"] = lk.value();
                rec["im"] = 0.0;
                rec["log_abs"] = lk.log_value();
            }
            out << rec.dump() << '\n';
        }
    }
}

/// CSV scan of rho-hat over a grid in adapted coordinates.
inline void cmd_scan(const JobConfig& cfg, const GlobalOptions& opts, std::ostream& out) {
    detail::require_times(cfg);
    if (!cfg.raw.contains("grid")) throw InputError("field 'grid': missing");
    const std::size_t n = cfg.quadric.n();
    const GridSpec grid = detail::grid_from_json(cfg.raw["grid"], n, "grid");
    if (static_cast<double>(grid.node_count()) * static_cast<double>(cfg.s.size()) > 1e7)
        throw InputError("field 'grid': more than 1e7 rows requested");
    const SpectralData S = spectral_data(cfg.quadric, cfg.lambda, opts.tol_rel);
    const EpsilonVector eps = epsilon(cfg.L, S);

    out << "# config_hash: " << config_hash(cfg.raw) << '\n';
    out << "# mu:";
    for (double m : S.mu) out << ' ' << format_double(m);
    out << "\n# nu: " << S.nu << "\n# eps:";
    for (int e : eps) out << ' ' << e;
    out << '\n';
    out << 's';
    for (std::size_t a = 0; a < grid.dims(); ++a) out << ',' << (a % 2 == 0 ? 'x' : 'y') << (a / 2 + 1);
    out << ",re,im,log10_abs\n";

    std::vector<std::string> rows(grid.node_count());
    for (double s : cfg.s) {
        parallel_for(rows.size(), [&](std::size_t i) {
            const RVector x = grid.coordinates(i);
            const LogKernel k = log_rho_hat_adapted(s, coefficients_from_real(x), S, eps);
            std::string row = format_double(s);
            for (double c : x) row += ',' + format_double(c);
            row += ',' + format_double(k.value()) + ",0," + format_double(k.log_value() / std::numbers::ln10);
            rows[i] = std::move(row);
        });
        for (const auto& r : rows) out << r << '\n';
    }
}

inline json report_to_json(const VerificationReport& report) {
    json checks = json::array();
    for (const auto& c : report.checks) {
        checks.push_back({{"name", c.name},
                          {"passed", c.passed},
                          {"error", std::isfinite(c.error) ? json(c.error) : json(nullptr)},
                          {"tolerance", c.tolerance},
                          {"runtime_s", c.runtime_s},
                          {"detail", c.detail}});
    }
    return {{"checks", checks}, {"count", report.checks.size()}, {"all_passed", report.all_passed()}};
}

/// Runs the verification suite; returns true iff every check passed.
inline bool cmd_verify(const JobConfig& cfg, const GlobalOptions& opts, std::ostream& out) {
    VerifyContext ctx;
    ctx.Q = &cfg.quadric;
    ctx.lambda = cfg.lambda;
    ctx.L = cfg.L;
    ctx.tol_rel = opts.tol_rel;
    ctx.phase = opts.ablate_phase ? PhaseMode::dropped : PhaseMode::exact;
    std::vector<std::string> names = all_check_names();
    if (cfg.raw.contains("verify")) {
        const json& v = cfg.raw["verify"];
        if (!v.is_object()) throw InputError("field 'verify': expected an object");
        if (v.contains("checks")) {
            if (!v["checks"].is_array()) throw InputError("field 'verify.checks': expected a list of names");
            names.clear();
            for (const auto& c : v["checks"]) {
                if (!c.is_string()) throw InputError("field 'verify.checks': expected strings");
                names.push_back(c.get<std::string>());
            }
        }
        if (v.contains("tolerances")) {
            if (!v["tolerances"].is_object()) throw InputError("field 'verify.tolerances': expected an object");
            for (const auto& [k, val] : v["tolerances"].items()) {
                if (!val.is_number()) throw InputError("field 'verify.tolerances." + k + "': expected a number");
                ctx.tolerances[k] = val.get<double>();
            }
        }
        auto read_int = [&](const char* key, int& dst) {
            if (!v.contains(key)) return;
            if (!v[key].is_number_integer()) throw InputError(std::string("field 'verify.") + key + "': expected an integer");
            dst = v[key].get<int>();
        };
        read_int("pde_points", ctx.pde_points);
        read_int("semigroup_points", ctx.semigroup_points);
        read_int("inversion_points", ctx.inversion_points);
        if (v.contains("pde_s")) ctx.pde_s = v["pde_s"].get<double>();
    }
    for (const auto& name : names)
        if (std::find(all_check_names().begin(), all_check_names().end(), name) == all_check_names().end())
            throw InputError("field 'verify.checks': unknown check '" + name + "'");
    const VerificationReport report = run_verification(ctx, names);
    out << report_to_json(report).dump(2) << '\n';
    return report.all_passed();
}

/// Evolves initial data f through H^lambda and writes one CSV row per (s, output point).
inline void cmd_evolve(const JobConfig& cfg, const GlobalOptions& opts, std::ostream& out) {
    detail::require_times(cfg);
    if (!cfg.raw.contains("evolve")) throw InputError("field 'evolve': missing");
    const json& ev = cfg.raw["evolve"];
    if (!ev.is_object()) throw InputError("field 'evolve': expected an object");
    const std::size_t n = cfg.quadric.n();
    const SpectralData S = spectral_data(cfg.quadric, cfg.lambda, opts.tol_rel);

    GridFunction initial;
    if (ev.contains("f")) {
        if (!ev["f"].is_string()) throw InputError("field 'evolve.f': expected an expression string");
        if (!ev.contains("grid")) throw InputError("field 'evolve.grid': missing");
        const Expression f = Expression::parse(ev["f"].get<std::string>(), n);
        const GridSpec grid = detail::grid_from_json(ev["grid"], n, "evolve.grid");
        initial = sample_grid(grid, [&](std::span<const double> x) -> complex {
            return f(from_coefficients(S, coefficients_from_real(x)));
        });
    } else if (ev.contains("initial_csv")) {
        std::ifstream in(ev["initial_csv"].get<std::string>());
        if (!in) throw InputError("field 'evolve.initial_csv': cannot open file");
        initial = read_grid_csv(in);
    } else {
        throw InputError("field 'evolve.f': missing (or give evolve.initial_csv)");
    }
    if (!ev.contains("points")) throw InputError("field 'evolve.points': missing");
    const auto pts = detail::points_from_json(ev["points"], n, "evolve.points");
    std::vector<CVector> targets;
    for (const auto& p : pts) targets.push_back(p.z);

    HeatApplyOptions hopts;
    hopts.phase = opts.ablate_phase ? PhaseMode::dropped : PhaseMode::exact;
    if (ev.contains("tail_tol")) hopts.tail_tol = ev["tail_tol"].get<double>();

    out << "# config_hash: " << config_hash(cfg.raw) << '\n';
    out << "s,point";
    for (std::size_t k = 0; k < n; ++k) out << ",x" << k + 1 << ",y" << k + 1;
    out << ",re,im\n";
    for (double s : cfg.s) {
        const CVector values = heat_apply(initial, s, cfg.quadric, S, cfg.L, targets, hopts);
        for (std::size_t p = 0; p < targets.size(); ++p) {
            out << format_double(s) << ',' << p;
            for (const auto& c : targets[p]) out << ',' << format_double(c.real()) << ',' << format_double(c.imag());
            out << ',' << format_double(values[p].real()) << ',' << format_double(values[p].imag()) << '\n';
        }
    }
}

/// Dispatches a command, mapping failures onto the exit-code contract. Output goes
/// to opts.out_path (written only on success) or to `out`; diagnostics to `err`.
inline int run_command(const std::string& command, const GlobalOptions& opts, std::ostream& out, std::ostream& err) {
    if (opts.threads > 0) set_max_threads(opts.threads);
    std::ostringstream buffer;
    int status = kExitOk;
    try {
        const JobConfig cfg = load_config(opts.config_path);
        if (command == "eval")
            cmd_eval(cfg, opts, buffer);
        else if (command == "scan")
            cmd_scan(cfg, opts, buffer);
        else if (command == "evolve")
            cmd_evolve(cfg, opts, buffer);
        else if (command == "verify")
            status = cmd_verify(cfg, opts, buffer) ? kExitOk : kExitNumeric;
        else
            throw InputError("unknown command '" + command + "'");
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const json::exception& e) {
        err << "error: config: " << e.what() << '\n';
        return kExitInput;
    } catch (const std::exception& e) {
        err << "numeric failure: " << e.what() << '\n';
        return kExitNumeric;
    }
    try {
        if (opts.out_path.empty())
            out << buffer.str();
        else
            detail::write_atomically(opts.out_path, buffer.str());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitInput;
    }
    return status;
}

}  // namespace qheat::cli
