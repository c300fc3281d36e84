#pragma once

// Bounded maximal monotone graphs on the real line, their resolvents, and the
// relaxation functions psi(tau, chi) whose zero set is such a graph.

#include "stefan_relax/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace stefan_relax {

/// Closed interval [lo, hi].
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double s, double tol = 0.0) const { return s >= lo - tol && s <= hi + tol; }
    /// Distance from s to the interval (0 inside).
    double distance(double s) const { return s < lo ? lo - s : (s > hi ? s - hi : 0.0); }
    double project(double s) const { return std::clamp(s, lo, hi); }
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kMembershipTol = 1e-12;

/// A vertex of a piecewise-linear monotone graph. At r the image is the
/// (possibly degenerate) vertical segment [s_low, s_high].
struct Breakpoint {
    double r;
    double s_low;
    double s_high;
};

/// Result of solving w + lambda * alpha(w) ∋ e.
struct ResolventValue {
    double w;
    /// dw/de on the branch that produced w (0 on a vertical segment).
    double slope;
};

/// Piecewise-linear maximal monotone graph with vertical segments.
///
/// Between consecutive breakpoints the graph is the affine branch joining
/// (r_k, s_high_k) to (r_{k+1}, s_low_{k+1}); left of the first breakpoint it
/// is the constant s_low_0 and right of the last the constant s_high_last.
/// An optional domain window restricts where the graph is defined; a window
/// other than all of R makes the graph non-maximal, which the resolvent
/// reports as a structural error.
class MonotoneGraph {
public:
    explicit MonotoneGraph(std::vector<Breakpoint> breakpoints, std::string name = {},
                           Interval domain = {-kInf, kInf})
        : breakpoints_(std::move(breakpoints)), name_(std::move(name)), domain_(domain) {
        if (breakpoints_.empty()) throw ParameterError("monotone graph needs at least one breakpoint");
        if (!(domain_.lo < domain_.hi)) throw ParameterError("monotone graph domain must have lo < hi");
        for (std::size_t k = 0; k < breakpoints_.size(); ++k) {
            const auto& bp = breakpoints_[k];
            if (!std::isfinite(bp.r) || !std::isfinite(bp.s_low) || !std::isfinite(bp.s_high))
                throw ParameterError("monotone graph breakpoints must be finite");
            if (bp.s_low > bp.s_high) throw ParameterError("breakpoint with s_low > s_high");
            if (k > 0) {
                const auto& prev = breakpoints_[k - 1];
                if (!(prev.r < bp.r)) throw ParameterError("breakpoints must be strictly increasing in r");
                if (prev.s_high > bp.s_low)
                    throw ParameterError("graph is not monotone between breakpoints " + std::to_string(k - 1) +
                                         " and " + std::to_string(k));
            }
            bound_ = std::max({bound_, std::abs(bp.s_low), std::abs(bp.s_high)});
        }
    }

    const std::string& name() const noexcept { return name_; }
    std::span<const Breakpoint> breakpoints() const noexcept { return breakpoints_; }
    Interval domain() const noexcept { return domain_; }
    /// Uniform bound M on |s| over the whole graph.
    double bound() const noexcept { return bound_; }

    Interval eval(double r) const {
        if (!(r >= domain_.lo && r <= domain_.hi))
            throw DomainError("graph '" + name_ + "' evaluated outside its domain at r = " + std::to_string(r));
        const auto it = std::lower_bound(breakpoints_.begin(), breakpoints_.end(), r,
                                         [](const Breakpoint& bp, double x) { return bp.r < x; });
        if (it == breakpoints_.end()) return {breakpoints_.back().s_high, breakpoints_.back().s_high};
        if (it->r == r) return {it->s_low, it->s_high};
        if (it == breakpoints_.begin()) return {it->s_low, it->s_low};
        const auto& left = *(it - 1);
        const double s = left.s_high + slope_between(left, *it) * (r - left.r);
        return {s, s};
    }

    /// Unique w with w + lambda * s = e for some s in alpha(w), found by case
    /// analysis over the breakpoint intervals.
    ResolventValue resolve(double lambda, double e) const {
        if (!(lambda > 0.0)) throw ParameterError("resolvent needs lambda > 0");
        if (!std::isfinite(e)) throw ParameterError("resolvent argument must be finite");
        const std::size_t n = breakpoints_.size();
        ResolventValue out{};
        bool found = false;
        const auto& first = breakpoints_.front();
        const auto& last = breakpoints_.back();
        if (e < first.r + lambda * first.s_low) {
            out = {e - lambda * first.s_low, 1.0};
            found = true;
        } else if (e > last.r + lambda * last.s_high) {
            out = {e - lambda * last.s_high, 1.0};
            found = true;
        } else {
            // Thresholds r_k + lambda*s_low_k <= r_k + lambda*s_high_k < r_{k+1} + lambda*s_low_{k+1}.
            std::size_t lo = 0, hi = n - 1;
            while (lo < hi) {
                const std::size_t mid = (lo + hi + 1) / 2;
                const auto& bp = breakpoints_[mid];
                if (e >= bp.r + lambda * bp.s_low) lo = mid;
                else hi = mid - 1;
            }
            const auto& bp = breakpoints_[lo];
            if (e <= bp.r + lambda * bp.s_high) {
                out = {bp.r, 0.0};
                found = true;
            } else if (lo + 1 < n) {
                const double m = slope_between(bp, breakpoints_[lo + 1]);
                const double w = bp.r + (e - bp.r - lambda * bp.s_high) / (1.0 + lambda * m);
                out = {std::min(w, breakpoints_[lo + 1].r), 1.0 / (1.0 + lambda * m)};
                found = true;
            }
        }
        if (!found || out.w < domain_.lo || out.w > domain_.hi)
            throw StructuralError("graph '" + name_ + "' has no resolvent solution for e = " + std::to_string(e) +
                                  ", lambda = " + std::to_string(lambda) + " (gap outside domain [" +
                                  std::to_string(domain_.lo) + ", " + std::to_string(domain_.hi) + "])");
        const double s = (e - out.w) / lambda;
        const double tol = kMembershipTol * std::max(1.0, std::abs(e)) / std::min(1.0, lambda);
        if (!eval(out.w).contains(s, tol))
            throw StructuralError("resolvent membership check failed for graph '" + name_ + "'");
        return out;
    }

private:
    static double slope_between(const Breakpoint& a, const Breakpoint& b) {
        return (b.s_low - a.s_high) / (b.r - a.r);
    }

    std::vector<Breakpoint> breakpoints_;
    std::string name_;
    Interval domain_;
    double bound_ = 0.0;
};

inline Interval graph_eval(const MonotoneGraph& g, double r) { return g.eval(r); }

inline double resolvent(const MonotoneGraph& g, double lambda, double e) { return g.resolve(lambda, e).w; }

/// sign(r): -1 for r < 0, [-1, 1] at 0, 1 for r > 0.
inline MonotoneGraph make_sign_graph() { return MonotoneGraph({{0.0, -1.0, 1.0}}, "sign"); }

/// alpha ≡ {0}.
inline MonotoneGraph make_zero_graph() { return MonotoneGraph({{0.0, 0.0, 0.0}}, "zero"); }

/// Single-valued clamp r ↦ min(max(r, -1), 1).
inline MonotoneGraph make_clamp_graph() {
    return MonotoneGraph({{-1.0, -1.0, -1.0}, {1.0, 1.0, 1.0}}, "clamp");
}

/// Lipschitz relaxation function psi(tau, chi) paired with the graph that is its zero set.
class RelaxationFunction {
public:
    using Rule = std::function<double(double, double)>;

    RelaxationFunction(Rule rule, double lipschitz, MonotoneGraph graph, std::string name)
        : rule_(std::move(rule)), lipschitz_(lipschitz), graph_(std::move(graph)), name_(std::move(name)) {
        if (!rule_) throw ParameterError("relaxation function needs a rule");
        if (!(lipschitz_ > 0.0)) throw ParameterError("relaxation function needs a Lipschitz constant > 0");
    }

    double operator()(double tau, double chi) const { return rule_(tau, chi); }
    double lipschitz() const noexcept { return lipschitz_; }
    const MonotoneGraph& graph() const noexcept { return graph_; }
    const std::string& name() const noexcept { return name_; }

private:
    Rule rule_;
    double lipschitz_;
    MonotoneGraph graph_;
    std::string name_;
};

/// psi(tau, chi) = tau - J(tau + chi), J the unit resolvent of the graph.
/// Vanishes exactly on the graph, increasing in tau, decreasing in chi, L = 1.
inline RelaxationFunction make_resolvent_psi(MonotoneGraph graph) {
    auto g = graph;
    std::string name = graph.name();
    return RelaxationFunction([g](double tau, double chi) { return tau - g.resolve(1.0, tau + chi).w; }, 1.0,
                              std::move(graph), std::move(name));
}

/// Melting/crystallization kinetics built on the sign graph:
///   psi = p(tau+)(1 - c)/2 - p(tau-)(1 + c)/2 + (c - chi),  c = clamp(chi, -1, 1).
/// On |chi| <= 1 this is the antisymmetric melting law; the trailing term
/// pushes |chi| > 1 back towards [-1, 1] so the zero set is exactly sign.
inline RelaxationFunction make_melting_psi(std::function<double(double)> p, double p_lipschitz,
                                           std::string p_name = "custom") {
    if (!p) throw ParameterError("melting psi needs a rate function p");
    if (!(p_lipschitz > 0.0)) throw ParameterError("melting psi needs Lipschitz constant of p > 0");
    if (p(0.0) != 0.0) throw ParameterError("melting psi: p(0) must be 0");
    for (int i = -400; i <= 400; ++i) {
        if (i == 0) continue;
        const double r = 0.025 * i;
        const double v = p(r);
        if (!(v * r > 0.0))
            throw ParameterError("melting psi: p(r)*r > 0 violated at r = " + std::to_string(r));
        if (std::abs(v) > 1.0) throw ParameterError("melting psi: |p(r)| > 1 at r = " + std::to_string(r));
    }
    auto rule = [p = std::move(p)](double tau, double chi) {
        const double c = std::clamp(chi, -1.0, 1.0);
        const double tp = std::max(tau, 0.0);
        const double tm = std::max(-tau, 0.0);
        return p(tp) * (1.0 - c) / 2.0 - p(tm) * (1.0 + c) / 2.0 + (c - chi);
    };
    return RelaxationFunction(std::move(rule), std::max(p_lipschitz, 1.0), make_sign_graph(),
                              "melting(p=" + p_name + ")");
}

/// Named presets: sign, zero, clamp, melting(p=clamp), melting(p=tanh).
inline RelaxationFunction make_preset(std::string_view name) {
    if (name == "sign") return make_resolvent_psi(make_sign_graph());
    if (name == "zero") return make_resolvent_psi(make_zero_graph());
    if (name == "clamp") return make_resolvent_psi(make_clamp_graph());
    if (name == "melting(p=clamp)" || name == "melting")
        return make_melting_psi([](double r) { return std::clamp(r, -1.0, 1.0); }, 1.0, "clamp");
    if (name == "melting(p=tanh)") return make_melting_psi([](double r) { return std::tanh(r); }, 1.0, "tanh");
    throw ParameterError("unknown graph/psi preset '" + std::string(name) + "'");
}

inline const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names{"sign", "zero", "clamp", "melting(p=clamp)", "melting(p=tanh)"};
    return names;
}

inline bool is_preset(std::string_view name) {
    return name == "melting" || std::find(preset_names().begin(), preset_names().end(), name) != preset_names().end();
}

// ---------------------------------------------------------------------------
// Compatibility verification

/// Rectangular sample grid of (tau, chi) pairs.
struct SampleGrid {
    double tau_lo = -3.0, tau_hi = 3.0;
    double chi_lo = -3.0, chi_hi = 3.0;
    int n_tau = 101, n_chi = 101;

    double tau(int i) const { return n_tau == 1 ? tau_lo : tau_lo + (tau_hi - tau_lo) * i / (n_tau - 1); }
    double chi(int j) const { return n_chi == 1 ? chi_lo : chi_lo + (chi_hi - chi_lo) * j / (n_chi - 1); }
};

struct PropertyCheck {
    std::string name;
    bool passed = true;
    std::size_t checked = 0;
    std::string counterexample;  // first failure, empty if passed
};

struct CompatibilityReport {
    std::string psi_name;
    std::vector<PropertyCheck> checks;
    /// Largest |(e - w)/lambda - proj_{alpha(w)}((e - w)/lambda)| seen in the resolvent samples.
    double max_resolvent_defect = 0.0;

    bool all_passed() const {
        return std::all_of(checks.begin(), checks.end(), [](const PropertyCheck& c) { return c.passed; });
    }
    const PropertyCheck* find(std::string_view name) const {
        for (const auto& c : checks)
            if (c.name == name) return &c;
        return nullptr;
    }
};

namespace detail {

inline std::string point(double tau, double chi) {
    return "(tau=" + std::to_string(tau) + ", chi=" + std::to_string(chi) + ")";
}

inline void record(PropertyCheck& check, bool ok, const std::string& where) {
    ++check.checked;
    if (!ok && check.passed) {
        check.passed = false;
        check.counterexample = where;
    }
}

}  // namespace detail

/// Checks the sign equivalences between psi and its graph, the Lipschitz
/// bound, monotonicity of psi in each argument, monotonicity and boundedness
/// of the graph, and resolvent consistency/nonexpansiveness on the grid.
/// Failures become report entries; nothing throws.
inline CompatibilityReport verify_compatibility(const RelaxationFunction& psi, const SampleGrid& grid = {},
                                                double tol = kMembershipTol) {
    CompatibilityReport report;
    report.psi_name = psi.name();
    const auto& g = psi.graph();
    const double M = g.bound();

    PropertyCheck positive{"psi_positive_iff_below"};
    PropertyCheck negative{"psi_negative_iff_above"};
    PropertyCheck zero{"psi_zero_iff_member"};
    PropertyCheck lipschitz{"psi_lipschitz"};
    PropertyCheck increasing{"psi_increasing_in_tau"};
    PropertyCheck decreasing{"psi_decreasing_in_chi"};
    PropertyCheck graph_monotone{"graph_monotone"};
    PropertyCheck graph_bounded{"graph_bounded"};
    PropertyCheck resolvent_total{"resolvent_total"};
    PropertyCheck resolvent_consistent{"resolvent_consistent"};
    PropertyCheck resolvent_nonexpansive{"resolvent_nonexpansive"};

    if (grid.n_tau < 1 || grid.n_chi < 1) {
        PropertyCheck empty{"samples_nonempty", false, 0, "empty sample grid"};
        report.checks.push_back(empty);
        return report;
    }

    const int nt = grid.n_tau, nc = grid.n_chi;
    std::vector<double> values(static_cast<std::size_t>(nt) * nc);
    auto at = [&](int i, int j) -> double& { return values[static_cast<std::size_t>(i) * nc + j]; };

    std::vector<Interval> images(nt);
    for (int i = 0; i < nt; ++i) {
        try {
            images[i] = g.eval(grid.tau(i));
        } catch (const DomainError& e) {
            detail::record(graph_bounded, false, e.what());
            images[i] = {kInf, -kInf};
        }
    }

    for (int i = 0; i < nt; ++i) {
        const double tau = grid.tau(i);
        const Interval img = images[i];
        detail::record(graph_bounded, std::abs(img.lo) <= M && std::abs(img.hi) <= M && img.lo <= img.hi,
                       "tau=" + std::to_string(tau));
        if (i + 1 < nt)
            detail::record(graph_monotone, img.hi <= images[i + 1].lo, "tau=" + std::to_string(tau));
        for (int j = 0; j < nc; ++j) {
            const double chi = grid.chi(j);
            const double v = psi(tau, chi);
            at(i, j) = v;
            const bool below = chi < img.lo - tol;
            const bool above = chi > img.hi + tol;
            const bool inside = !below && !above;
            const bool pos = v > tol;
            const bool neg = v < -tol;
            const std::string where = detail::point(tau, chi) + " psi=" + std::to_string(v) + " alpha=[" +
                                      std::to_string(img.lo) + "," + std::to_string(img.hi) + "]";
            detail::record(positive, pos == below, where);
            detail::record(negative, neg == above, where);
            detail::record(zero, (!pos && !neg) == inside, where);
        }
    }
    for (const auto& bp : g.breakpoints()) {
        detail::record(graph_bounded, std::abs(bp.s_low) <= M && std::abs(bp.s_high) <= M,
                       "breakpoint r=" + std::to_string(bp.r));
    }
    const auto bps = g.breakpoints();
    for (std::size_t k = 0; k + 1 < bps.size(); ++k)
        detail::record(graph_monotone, bps[k].s_high <= bps[k + 1].s_low, "breakpoint r=" + std::to_string(bps[k].r));

    const double L = psi.lipschitz();
    auto lip_ok = [&](int i1, int j1, int i2, int j2) {
        const double lhs = std::abs(at(i1, j1) - at(i2, j2));
        const double rhs = L * (std::abs(grid.tau(i1) - grid.tau(i2)) + std::abs(grid.chi(j1) - grid.chi(j2)));
        detail::record(lipschitz, lhs <= rhs + tol,
                       detail::point(grid.tau(i1), grid.chi(j1)) + " vs " + detail::point(grid.tau(i2), grid.chi(j2)));
    };
    const std::size_t total = values.size();
    for (int i = 0; i < nt; ++i) {
        for (int j = 0; j < nc; ++j) {
            if (i + 1 < nt) {
                lip_ok(i, j, i + 1, j);
                detail::record(increasing, at(i + 1, j) - at(i, j) >= -tol,
                               detail::point(grid.tau(i), grid.chi(j)));
            }
            if (j + 1 < nc) {
                lip_ok(i, j, i, j + 1);
                detail::record(decreasing, at(i, j + 1) - at(i, j) <= tol, detail::point(grid.tau(i), grid.chi(j)));
            }
            if (i + 1 < nt && j + 1 < nc) lip_ok(i, j, i + 1, j + 1);
            // Far pairs on a fixed stride.
            const std::size_t k = static_cast<std::size_t>(i) * nc + j;
            const std::size_t other = (k * 7919 + 104729) % total;
            lip_ok(i, j, static_cast<int>(other / nc), static_cast<int>(other % nc));
        }
    }

    for (double lambda : {0.25, 1.0, 4.0}) {
        double prev_e = 0.0, prev_w = 0.0;
        bool have_prev = false;
        for (int i = 0; i < nt; ++i) {
            // Sweep e over a range wide enough to cover every branch.
            const double e = grid.tau(i) + lambda * grid.chi(i * (nc - 1) / std::max(1, nt - 1));
            try {
                const double w = g.resolve(lambda, e).w;
                detail::record(resolvent_total, true, "");
                const double s = (e - w) / lambda;
                const double defect = g.eval(w).distance(s);
                report.max_resolvent_defect = std::max(report.max_resolvent_defect, defect);
                detail::record(resolvent_consistent, defect <= tol,
                               "e=" + std::to_string(e) + " lambda=" + std::to_string(lambda));
                if (have_prev)
                    detail::record(resolvent_nonexpansive, std::abs(w - prev_w) <= std::abs(e - prev_e) + tol,
                                   "e=" + std::to_string(e) + " lambda=" + std::to_string(lambda));
                prev_e = e;
                prev_w = w;
                have_prev = true;
            } catch (const std::exception& ex) {
                detail::record(resolvent_total, false, ex.what());
            }
        }
    }

    report.checks = {positive,       negative,      zero,          lipschitz,       increasing,
                     decreasing,     graph_monotone, graph_bounded, resolvent_total, resolvent_consistent,
                     resolvent_nonexpansive};
    return report;
}

}  // namespace stefan_relax
