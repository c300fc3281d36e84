#pragma once

// Shipped scenarios. All are posed in the transformed variables: theta
// vanishes on the Dirichlet part of the boundary and the boundary data enter
// through the lifting u.

#include "stefan_relax/errors.hpp"
#include "stefan_relax/graphs.hpp"
#include "stefan_relax/mesh.hpp"
#include "stefan_relax/problem.hpp"

#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace stefan_relax {

/// Overrides applied on top of a scenario's defaults.
struct ScenarioParams {
    std::optional<double> a, b;
    std::optional<int> nodes;
    std::optional<Boundary> left_bc, right_bc;
    std::optional<double> T;
    std::optional<int> n_steps;
    std::optional<std::string> psi;
};

struct Scenario {
    std::string name;
    DomainMesh mesh;
    ProblemData data;
    /// chi0 ∈ alpha(theta0 + u(0)) holds nodewise.
    bool limit_compatible = false;
};

inline const std::vector<std::string>& scenario_names() {
    static const std::vector<std::string> names{"ode_decay", "mushy_plateau", "melting_bar", "neumann_freeze"};
    return names;
}

inline bool is_single_node_scenario(std::string_view name) { return name == "ode_decay" || name == "mushy_plateau"; }

namespace detail {

inline std::vector<Field> replicate(const Field& v, int n_steps) { return std::vector<Field>(n_steps + 1, v); }

inline DomainMesh scenario_mesh(std::string_view name, const ScenarioParams& p, Boundary left, Boundary right) {
    const double a = p.a.value_or(0.0), b = p.b.value_or(1.0);
    if (is_single_node_scenario(name)) {
        if ((p.nodes && *p.nodes != 1) || p.left_bc || p.right_bc)
            throw ParameterError("scenario " + std::string(name) + " is a single-node scenario; mesh overrides are not allowed");
        return DomainMesh::single_node(a, b);
    }
    return DomainMesh::uniform(a, b, p.nodes.value_or(201), p.left_bc.value_or(left), p.right_bc.value_or(right));
}

}  // namespace detail

/// Source amplitude and width of melting_bar.
inline constexpr double kMeltingSource = 40.0;
inline constexpr double kMeltingSourceWidth = 0.1;
/// Sink amplitude and width of neumann_freeze.
inline constexpr double kFreezingSink = 10.0;
inline constexpr double kFreezingSinkWidth = 0.15;

inline Scenario build_scenario(std::string_view name, const ScenarioParams& p = {}) {
    Scenario s{std::string(name), DomainMesh::single_node(), ProblemData{}};
    ProblemData& d = s.data;

    if (name == "ode_decay") {
        // eps chi' = -chi, no diffusion: chi = exp(-t/eps), theta = 1 - chi.
        s.mesh = detail::scenario_mesh(name, p, Boundary::neumann, Boundary::neumann);
        d.psi = make_preset(p.psi.value_or("zero"));
        d.T = p.T.value_or(1.0);
        d.n_steps = p.n_steps.value_or(1000);
        d.theta0 = {0.0};
        d.chi0 = {1.0};
        d.f = detail::replicate({0.0}, d.n_steps);
        d.u = detail::replicate({0.0}, d.n_steps);
    } else if (name == "mushy_plateau") {
        // Mushy node at equilibrium: e0 = 0.5 splits into theta = 0, chi = 0.5.
        s.mesh = detail::scenario_mesh(name, p, Boundary::neumann, Boundary::neumann);
        d.psi = make_preset(p.psi.value_or("melting(p=clamp)"));
        d.T = p.T.value_or(1.0);
        d.n_steps = p.n_steps.value_or(100);
        d.theta0 = {0.0};
        d.chi0 = {0.5};
        d.f = detail::replicate({0.0}, d.n_steps);
        d.u = detail::replicate({0.0}, d.n_steps);
    } else if (name == "melting_bar") {
        // Solid bar held below the melting point at both ends (theta_D = -0.2
        // at a, -0.6 at b, lifted by the harmonic affine u) melted from the
        // middle by a Gaussian heat source.
        s.mesh = detail::scenario_mesh(name, p, Boundary::dirichlet, Boundary::dirichlet);
        d.psi = make_preset(p.psi.value_or("melting(p=clamp)"));
        d.T = p.T.value_or(0.2);
        d.n_steps = p.n_steps.value_or(200);
        const int n = s.mesh.size();
        const double a = s.mesh.a(), len = s.mesh.b() - s.mesh.a();
        Field u(n), f(n);
        for (int i = 0; i < n; ++i) {
            const double x = (s.mesh.node(i) - a) / len;
            u[i] = -0.2 - 0.4 * x;
            const double z = (x - 0.5) / kMeltingSourceWidth;
            f[i] = kMeltingSource * std::exp(-z * z);
        }
        d.theta0.assign(n, 0.0);
        d.chi0.assign(n, -1.0);
        d.f = detail::replicate(f, d.n_steps);
        d.u = detail::replicate(u, d.n_steps);
    } else if (name == "neumann_freeze") {
        // Insulated bar of liquid slightly above the melting point, cooled by a
        // sink concentrated at the left end.
        s.mesh = detail::scenario_mesh(name, p, Boundary::neumann, Boundary::neumann);
        d.psi = make_preset(p.psi.value_or("melting(p=tanh)"));
        d.T = p.T.value_or(0.2);
        d.n_steps = p.n_steps.value_or(200);
        const int n = s.mesh.size();
        const double a = s.mesh.a(), len = s.mesh.b() - s.mesh.a();
        Field f(n);
        for (int i = 0; i < n; ++i) {
            const double z = ((s.mesh.node(i) - a) / len) / kFreezingSinkWidth;
            f[i] = -kFreezingSink * std::exp(-z * z);
        }
        d.theta0.assign(n, 0.1);
        d.chi0.assign(n, 1.0);
        d.f = detail::replicate(f, d.n_steps);
        d.u = detail::replicate(Field(n, 0.0), d.n_steps);
    } else {
        throw ParameterError("unknown scenario '" + std::string(name) + "'");
    }
    d.validate(s.mesh);
    s.limit_compatible = d.initial_constraint_violations().empty();
    return s;
}

}  // namespace stefan_relax
