#pragma once

// Enthalpy method for the limit Stefan problem
//
//   (theta + chi)' + A theta = f,   chi ∈ alpha(theta + u),
//
// in terms of the enthalpy e = theta + chi. For fixed u the map e ↦ theta(e)
// is the unit resolvent shifted by u, so each backward-Euler step is a
// monotone, piecewise-linear tridiagonal system in e.

#include "stefan_relax/errors.hpp"
#include "stefan_relax/graphs.hpp"
#include "stefan_relax/mesh.hpp"
#include "stefan_relax/problem.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

namespace stefan_relax {

struct EnthalpySplit {
    double theta;
    double chi;
    /// d theta / d e on the active branch, in [0, 1].
    double slope;
};

/// Splits e into theta + chi with chi ∈ alpha(theta + u).
inline EnthalpySplit enthalpy_decompose(double e, double u, const MonotoneGraph& graph) {
    const auto r = graph.resolve(1.0, e + u);
    const double theta = r.w - u;
    return {theta, e - theta, r.slope};
}

struct EnthalpyState {
    Field e;
    Field theta;
    Field chi;
};

class StefanStepper {
public:
    StefanStepper(const DomainMesh& mesh, const ProblemData& data, StefanConfig config)
        : data_(data), config_(config), ops_(assemble(mesh)) {
        config_.validate();
        data_.validate(mesh);
    }

    const DiscreteOperators& operators() const noexcept { return ops_; }

    /// Initial state from e0 = theta0 + chi0. Dirichlet nodes keep theta = 0
    /// and the phase is projected onto alpha(u).
    EnthalpyState initial_state() const {
        const int n = ops_.size();
        EnthalpyState s{Field(n), Field(n), Field(n)};
        for (int i = 0; i < n; ++i) {
            const double e = data_.theta0[i] + data_.chi0[i];
            set_node(s, i, e, data_.u.front()[i]);
        }
        return s;
    }

    /// Advances to level n + 1. `iterations` receives the work count.
    EnthalpyState step(const EnthalpyState& state, int n, int* iterations = nullptr,
                       std::vector<std::string>* warnings = nullptr) const {
        if (n < 0 || n >= data_.n_steps) throw ParameterError("stefan step index out of range");
        const int size = ops_.size();
        const auto& u = data_.u[n + 1];
        EnthalpyState next = state;
        for (int i = 0; i < size; ++i)
            if (!ops_.is_free[i]) set_node(next, i, state.e[i], u[i]);

        int work = 0;
        bool done = false;
        if (config_.method == StefanMethod::newton) done = newton(state, next, n, work);
        if (!done) gauss_seidel(state, next, n, work);
        if (iterations) *iterations = work;

        std::vector<std::string> local;
        check_postconditions(state, next, n, warnings ? *warnings : local);
        return next;
    }

    /// Mass-weighted H norm of the step residual over free nodes.
    double residual(const EnthalpyState& prev, const EnthalpyState& next, int n) const {
        const double dt = data_.dt();
        const auto& f = data_.f[n + 1];
        const Field k_theta = ops_.stiffness.apply(next.theta);
        double s = 0.0;
        for (int i : ops_.free_nodes) {
            const double r = ops_.mass[i] * ((next.e[i] - prev.e[i]) / dt - f[i]) + k_theta[i];
            s += r * r / ops_.mass[i];
        }
        return std::sqrt(s);
    }

private:
    void set_node(EnthalpyState& s, int i, double e, double u) const {
        if (ops_.is_free[i]) {
            const auto split = enthalpy_decompose(e, u, data_.graph());
            s.e[i] = e;
            s.theta[i] = split.theta;
            s.chi[i] = split.chi;
        } else {
            s.theta[i] = 0.0;
            s.chi[i] = data_.graph().eval(u).project(e);
            s.e[i] = s.chi[i];
        }
    }

    // Semismooth Newton on G(e) = M (e - e^n)/dt + K theta(e) - M f.
    // Returns false if it did not converge within max_newton iterations.
    bool newton(const EnthalpyState& prev, EnthalpyState& next, int n, int& work) const {
        const int size = ops_.size();
        const double dt = data_.dt();
        const auto& f = data_.f[n + 1];
        const auto& u = data_.u[n + 1];
        Field slope(size, 0.0), g(size);
        Tridiagonal jac(size);
        for (int it = 0; it < config_.max_newton; ++it) {
            ++work;
            for (int i : ops_.free_nodes) {
                const auto split = enthalpy_decompose(next.e[i], u[i], data_.graph());
                next.theta[i] = split.theta;
                next.chi[i] = split.chi;
                slope[i] = split.slope;
            }
            const Field k_theta = ops_.stiffness.apply(next.theta);
            for (int i = 0; i < size; ++i) {
                if (!ops_.is_free[i]) {
                    g[i] = 0.0;
                    jac.diag[i] = 1.0;
                    jac.lower[i] = jac.upper[i] = 0.0;
                    continue;
                }
                g[i] = -(ops_.mass[i] * ((next.e[i] - prev.e[i]) / dt - f[i]) + k_theta[i]);
                jac.diag[i] = ops_.mass[i] / dt + ops_.stiffness.diag[i] * slope[i];
                jac.lower[i] = i > 0 ? ops_.stiffness.lower[i] * slope[i - 1] : 0.0;
                jac.upper[i] = i + 1 < size ? ops_.stiffness.upper[i] * slope[i + 1] : 0.0;
            }
            TridiagonalLU(jac).solve_in_place(g);
            double change = 0.0;
            for (int i : ops_.free_nodes) {
                next.e[i] += g[i];
                change = std::max(change, std::abs(g[i]));
            }
            if (change < config_.inner_tol) {
                for (int i : ops_.free_nodes) {
                    const auto split = enthalpy_decompose(next.e[i], u[i], data_.graph());
                    next.theta[i] = split.theta;
                    next.chi[i] = split.chi;
                }
                return true;
            }
        }
        return false;
    }

    // Nonlinear Gauss-Seidel. The nodal equation
    //   m/dt e_i + K_ii theta(e_i) = R_i
    // is solved exactly through the resolvent with lambda = (m/dt)/(m/dt + K_ii).
    void gauss_seidel(const EnthalpyState& prev, EnthalpyState& next, int n, int& work) const {
        const int size = ops_.size();
        const double dt = data_.dt();
        const auto& f = data_.f[n + 1];
        const auto& u = data_.u[n + 1];
        const auto& K = ops_.stiffness;
        for (int i : ops_.free_nodes) set_node(next, i, next.e[i], u[i]);
        double change = kInf;
        for (int sweep = 0; sweep < config_.max_sweeps; ++sweep) {
            ++work;
            change = 0.0;
            for (int i : ops_.free_nodes) {
                const double md = ops_.mass[i] / dt;
                double R = md * prev.e[i] + ops_.mass[i] * f[i];
                if (i > 0) R -= K.lower[i] * next.theta[i - 1];
                if (i + 1 < size) R -= K.upper[i] * next.theta[i + 1];
                const double denom = md + K.diag[i];
                const double lambda = md / denom;
                const double target = R / denom + u[i];
                const double w = data_.graph().resolve(lambda, target).w;
                const double theta = w - u[i];
                const double e = (R - K.diag[i] * theta) / md;
                change = std::max(change, std::abs(e - next.e[i]));
                next.e[i] = e;
                next.theta[i] = theta;
                next.chi[i] = e - theta;
            }
            if (change < config_.inner_tol) return;
        }
        throw ConvergenceError("stefan step " + std::to_string(n) + ": Gauss-Seidel did not converge in " +
                                   std::to_string(config_.max_sweeps) + " sweeps (last update " +
                                   std::to_string(change) + ")",
                               change);
    }

    void check_postconditions(const EnthalpyState& prev, const EnthalpyState& next, int n,
                              std::vector<std::string>& sink) const {
        const double tol = config_.inner_tol;
        const std::string at = "stefan step " + std::to_string(n) + ": ";
        const double r = residual(prev, next, n);
        if (!(r < 10.0 * tol)) detail::report(config_.verification, sink, at + "residual " + std::to_string(r));
        const auto& u = data_.u[n + 1];
        for (int i = 0; i < ops_.size(); ++i) {
            if (std::abs(next.e[i] - next.theta[i] - next.chi[i]) > 1e-12 * std::max(1.0, std::abs(next.e[i]))) {
                detail::report(config_.verification, sink, at + "e != theta + chi at node " + std::to_string(i));
                break;
            }
            if (!data_.graph().eval(next.theta[i] + u[i]).contains(next.chi[i], 1e-10)) {
                detail::report(config_.verification, sink,
                               at + "chi outside alpha(theta + u) at node " + std::to_string(i));
                break;
            }
        }
    }

    const ProblemData& data_;
    StefanConfig config_;
    DiscreteOperators ops_;
};

inline EnthalpyState stefan_step(const DomainMesh& mesh, const ProblemData& data, const StefanConfig& config,
                                 const EnthalpyState& state, int n) {
    return StefanStepper(mesh, data, config).step(state, n);
}

inline Trajectory solve_stefan(const DomainMesh& mesh, const ProblemData& data, const StefanConfig& config = {}) {
    StefanStepper stepper(mesh, data, config);
    Trajectory traj;
    if (const auto bad = data.initial_constraint_violations(); !bad.empty())
        traj.notes.push_back("initial phase outside alpha(theta0 + u) at " + std::to_string(bad.size()) +
                             " node(s); starting from the split of e0 = theta0 + chi0");
    EnthalpyState state = stepper.initial_state();
    traj.times.push_back(0.0);
    traj.theta.push_back(state.theta);
    traj.chi.push_back(state.chi);
    for (int n = 0; n < data.n_steps; ++n) {
        int work = 0;
        state = stepper.step(state, n, &work, &traj.warnings);
        traj.times.push_back(data.time(n + 1));
        traj.theta.push_back(state.theta);
        traj.chi.push_back(state.chi);
        traj.iterations.push_back(work);
    }
    return traj;
}

/// Residual of the time-integrated (Baiocchi-Duvaut-Fremond) form
///   theta(t) + chi(t) + A theta_hat(t) = f_hat(t) + theta0 + chi0,
/// with hats taken by the right-endpoint rule that backward Euler telescopes
/// to, plus the distance of chi from alpha(theta + u). Both are measured in
/// the mass-weighted H norm (an upper bound for the V' norm up to the
/// embedding constant); the equation part is restricted to free nodes.
struct BdfResidual {
    std::vector<double> equation;
    std::vector<double> constraint;
    double max_equation = 0.0;
    double max_constraint = 0.0;

    double max() const noexcept { return std::max(max_equation, max_constraint); }
};

inline BdfResidual bdf_residual(const DomainMesh& mesh, const Trajectory& traj, const ProblemData& data) {
    const auto ops = assemble(mesh);
    const int size = ops.size();
    if (traj.theta.size() != traj.times.size() || traj.chi.size() != traj.times.size() || traj.times.empty())
        throw ParameterError("bdf_residual: incomplete trajectory");
    if (traj.steps() != static_cast<std::size_t>(data.n_steps))
        throw ParameterError("bdf_residual: trajectory does not match the data time grid");
    const double dt = data.dt();
    BdfResidual out;
    Field k_hat(size, 0.0), f_hat(size, 0.0);
    for (std::size_t n = 0; n < traj.times.size(); ++n) {
        const auto& theta = traj.theta[n];
        const auto& chi = traj.chi[n];
        if (n > 0) {
            const Field k_theta = ops.stiffness.apply(theta);
            for (int i = 0; i < size; ++i) {
                k_hat[i] += dt * k_theta[i];
                f_hat[i] += dt * data.f[n][i];
            }
        }
        double eq = 0.0, con = 0.0;
        for (int i = 0; i < size; ++i) {
            if (ops.is_free[i]) {
                const double r = theta[i] + chi[i] + k_hat[i] / ops.mass[i] - f_hat[i] - data.theta0[i] - data.chi0[i];
                eq += ops.mass[i] * r * r;
            }
            const double d = data.graph().eval(theta[i] + data.u[n][i]).distance(chi[i]);
            con += ops.mass[i] * d * d;
        }
        out.equation.push_back(std::sqrt(eq));
        out.constraint.push_back(std::sqrt(con));
        out.max_equation = std::max(out.max_equation, out.equation.back());
        out.max_constraint = std::max(out.max_constraint, out.constraint.back());
    }
    return out;
}

}  // namespace stefan_relax
