#pragma once

// Experiment configuration: flat `key = value` text, `#` starts a comment.

#include "stefan_relax/errors.hpp"
#include "stefan_relax/graphs.hpp"
#include "stefan_relax/mesh.hpp"
#include "stefan_relax/problem.hpp"
#include "stefan_relax/scenarios.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace stefan_relax {

enum class Mode { run_relaxed, run_stefan, sweep, check_estimates, compare, contdep };

inline const std::vector<std::string>& mode_names() {
    static const std::vector<std::string> names{"run-relaxed", "run-stefan", "sweep",
                                                "check-estimates", "compare", "contdep"};
    return names;
}

inline std::string_view to_string(Mode m) { return mode_names()[static_cast<std::size_t>(m)]; }

inline std::optional<Mode> parse_mode(std::string_view s) {
    const auto& names = mode_names();
    const auto it = std::find(names.begin(), names.end(), s);
    if (it == names.end()) return std::nullopt;
    return static_cast<Mode>(it - names.begin());
}

/// Which initial field the contdep mode perturbs.
enum class Perturb { theta0, chi0 };

inline const std::vector<double>& default_eps_list() {
    static const std::vector<double> v{0.2, 0.1, 0.05, 0.025, 0.0125};
    return v;
}

struct ExperimentConfig {
    std::string scenario;
    std::optional<Mode> mode;
    ScenarioParams params;
    double eps = 0.1;
    std::vector<double> eps_list = default_eps_list();
    double inner_tol = 1e-10;
    int inner_max = 100;
    DtPolicy dt_policy = DtPolicy::fixed;
    Verification verification = Verification::warn;
    StefanMethod stefan_method = StefanMethod::newton;
    int max_sweeps = 500;
    int max_newton = 50;
    std::string out = "out";
    std::vector<double> delta{1e-2, 5e-3, 2.5e-3};
    Perturb perturb = Perturb::theta0;
    /// Estimate uniformity factor used by check-estimates.
    double uniformity = 1.5;
    /// Writes measured wall times; off by default so outputs are reproducible.
    bool record_timing = false;
    bool concurrent = true;

    RelaxedConfig relaxed() const {
        return RelaxedConfig{eps, inner_tol, inner_max, dt_policy, verification};
    }
    StefanConfig stefan() const {
        return StefanConfig{inner_tol, max_sweeps, max_newton, stefan_method, verification};
    }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto ws = " \t\r\f\v";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

inline double parse_double(std::string_view v, const std::string& key, int line) {
    double x = 0.0;
    const auto* end = v.data() + v.size();
    const auto r = std::from_chars(v.data(), end, x);
    if (r.ec != std::errc{} || r.ptr != end || !std::isfinite(x))
        throw ParseError(key, line, "expected a number, got '" + std::string(v) + "'");
    return x;
}

inline int parse_int(std::string_view v, const std::string& key, int line) {
    int x = 0;
    const auto* end = v.data() + v.size();
    const auto r = std::from_chars(v.data(), end, x);
    if (r.ec != std::errc{} || r.ptr != end)
        throw ParseError(key, line, "expected an integer, got '" + std::string(v) + "'");
    return x;
}

inline bool parse_bool(std::string_view v, const std::string& key, int line) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ParseError(key, line, "expected true or false, got '" + std::string(v) + "'");
}

inline std::vector<double> parse_list(std::string_view v, const std::string& key, int line) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= v.size()) {
        const auto comma = v.find(',', pos);
        const auto item = trim(v.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
        if (item.empty()) throw ParseError(key, line, "empty list item");
        out.push_back(parse_double(item, key, line));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return out;
}

inline Boundary parse_bc(std::string_view v, const std::string& key, int line) {
    if (v == "dirichlet") return Boundary::dirichlet;
    if (v == "neumann") return Boundary::neumann;
    throw ParseError(key, line, "boundary must be dirichlet or neumann, got '" + std::string(v) + "'");
}

inline bool valid_eps(double e) { return e > 0.0 && e <= 1.0; }

}  // namespace detail

/// Parses and validates configuration text. Errors name the key and line.
inline ExperimentConfig parse_config(std::string_view text) {
    ExperimentConfig c;
    std::map<std::string, int> seen;
    std::istringstream in{std::string(text)};
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string_view s = raw;
        if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
        s = detail::trim(s);
        if (s.empty()) continue;
        const auto eq = s.find('=');
        if (eq == std::string_view::npos) throw ParseError("", line, "expected 'key = value'");
        const std::string key(detail::trim(s.substr(0, eq)));
        const std::string_view v = detail::trim(s.substr(eq + 1));
        if (key.empty()) throw ParseError("", line, "missing key");
        if (v.empty()) throw ParseError(key, line, "missing value");
        if (const auto [it, fresh] = seen.emplace(key, line); !fresh)
            throw ParseError(key, line, "duplicate key (first set on line " + std::to_string(it->second) + ")");

        auto num = [&] { return detail::parse_double(v, key, line); };
        auto integer = [&] { return detail::parse_int(v, key, line); };
        if (key == "scenario") {
            if (std::find(scenario_names().begin(), scenario_names().end(), v) == scenario_names().end())
                throw ParseError(key, line, "unknown scenario '" + std::string(v) + "'");
            c.scenario = v;
        } else if (key == "mode") {
            c.mode = parse_mode(v);
            if (!c.mode) throw ParseError(key, line, "unknown mode '" + std::string(v) + "'");
        } else if (key == "a") {
            c.params.a = num();
        } else if (key == "b") {
            c.params.b = num();
        } else if (key == "nodes") {
            c.params.nodes = integer();
            if (*c.params.nodes < 1) throw ParseError(key, line, "nodes must be >= 1");
        } else if (key == "left_bc") {
            c.params.left_bc = detail::parse_bc(v, key, line);
        } else if (key == "right_bc") {
            c.params.right_bc = detail::parse_bc(v, key, line);
        } else if (key == "T") {
            c.params.T = num();
            if (!(*c.params.T > 0.0)) throw ParseError(key, line, "T must be > 0");
        } else if (key == "n_steps") {
            c.params.n_steps = integer();
            if (*c.params.n_steps < 1) throw ParseError(key, line, "n_steps must be >= 1");
        } else if (key == "psi") {
            if (!is_preset(v)) throw ParseError(key, line, "unknown psi preset '" + std::string(v) + "'");
            c.params.psi = v;
        } else if (key == "eps") {
            c.eps = num();
            if (!detail::valid_eps(c.eps)) throw ParseError(key, line, "eps must be in (0, 1]");
        } else if (key == "eps_list") {
            c.eps_list = detail::parse_list(v, key, line);
            for (std::size_t k = 0; k < c.eps_list.size(); ++k) {
                if (!detail::valid_eps(c.eps_list[k])) throw ParseError(key, line, "every eps must be in (0, 1]");
                if (k > 0 && !(c.eps_list[k] < c.eps_list[k - 1]))
                    throw ParseError(key, line, "eps list must be strictly decreasing");
            }
        } else if (key == "inner_tol") {
            c.inner_tol = num();
            if (!(c.inner_tol > 0.0)) throw ParseError(key, line, "inner_tol must be > 0");
        } else if (key == "inner_max") {
            c.inner_max = integer();
            if (c.inner_max < 1) throw ParseError(key, line, "inner_max must be >= 1");
        } else if (key == "max_sweeps") {
            c.max_sweeps = integer();
            if (c.max_sweeps < 1) throw ParseError(key, line, "max_sweeps must be >= 1");
        } else if (key == "max_newton") {
            c.max_newton = integer();
            if (c.max_newton < 0) throw ParseError(key, line, "max_newton must be >= 0");
        } else if (key == "dt_policy") {
            if (v == "fixed") c.dt_policy = DtPolicy::fixed;
            else if (v == "halve_on_stall") c.dt_policy = DtPolicy::halve_on_stall;
            else throw ParseError(key, line, "dt_policy must be fixed or halve_on_stall");
        } else if (key == "verification") {
            if (v == "warn") c.verification = Verification::warn;
            else if (v == "strict") c.verification = Verification::strict;
            else throw ParseError(key, line, "verification must be warn or strict");
        } else if (key == "stefan_method") {
            if (v == "newton") c.stefan_method = StefanMethod::newton;
            else if (v == "gauss_seidel") c.stefan_method = StefanMethod::gauss_seidel;
            else throw ParseError(key, line, "stefan_method must be newton or gauss_seidel");
        } else if (key == "out") {
            c.out = v;
        } else if (key == "delta") {
            c.delta = detail::parse_list(v, key, line);
            for (double d : c.delta)
                if (!(d >= 0.0)) throw ParseError(key, line, "delta must be >= 0");
        } else if (key == "perturb") {
            if (v == "theta0") c.perturb = Perturb::theta0;
            else if (v == "chi0") c.perturb = Perturb::chi0;
            else throw ParseError(key, line, "perturb must be theta0 or chi0");
        } else if (key == "uniformity") {
            c.uniformity = num();
            if (!(c.uniformity >= 1.0)) throw ParseError(key, line, "uniformity must be >= 1");
        } else if (key == "record_timing") {
            c.record_timing = detail::parse_bool(v, key, line);
        } else if (key == "concurrent") {
            c.concurrent = detail::parse_bool(v, key, line);
        } else {
            throw ParseError(key, line, "unknown key");
        }
    }
    if (c.scenario.empty()) throw ParseError("scenario", 0, "missing required key");
    if (c.params.a && c.params.b && !(*c.params.a < *c.params.b))
        throw ParseError("b", seen["b"], "need a < b");
    // Mesh-level consistency (single-node scenarios, Dirichlet sizes) is
    // checked by building the scenario.
    try {
        (void)build_scenario(c.scenario, c.params);
    } catch (const ParameterError& e) {
        throw ParseError("scenario", seen["scenario"], e.what());
    }
    return c;
}

/// Command-line overrides. dt is converted to n_steps = T / dt, which must be
/// an integer.
inline void apply_overrides(ExperimentConfig& c, std::optional<double> eps, std::optional<double> dt,
                            std::optional<int> nodes) {
    if (eps) {
        if (!detail::valid_eps(*eps)) throw ParseError("eps", 0, "eps must be in (0, 1]");
        c.eps = *eps;
    }
    if (nodes) {
        if (*nodes < 1) throw ParseError("nodes", 0, "nodes must be >= 1");
        c.params.nodes = *nodes;
    }
    if (dt) {
        if (!(*dt > 0.0)) throw ParseError("dt", 0, "dt must be > 0");
        const double T = c.params.T.value_or(build_scenario(c.scenario, c.params).data.T);
        const double steps = T / *dt;
        const double rounded = std::round(steps);
        if (rounded < 1.0 || std::abs(steps - rounded) > 1e-9 * std::max(1.0, steps))
            throw ParseError("dt", 0, "T / dt must be a whole number of steps");
        c.params.n_steps = static_cast<int>(rounded);
    }
    try {
        (void)build_scenario(c.scenario, c.params);
    } catch (const ParameterError& e) {
        throw ParseError("", 0, e.what());
    }
}

}  // namespace stefan_relax
