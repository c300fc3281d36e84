#pragma once

// Backward-Euler solver for the phase-relaxation system
//
//   (theta + chi)' + A theta = f,   eps chi' = psi(theta + u, chi),
//
// with theta = 0 on the Dirichlet part of the boundary. Each step solves the
// coupled implicit system by fixed-point iteration on the phase field X: the
// energy balance gives theta_X by one tridiagonal solve, then the phase law is
// solved nodewise for chi with theta_X frozen.

#include "stefan_relax/errors.hpp"
#include "stefan_relax/graphs.hpp"
#include "stefan_relax/mesh.hpp"
#include "stefan_relax/problem.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace stefan_relax {

/// Solves chi = chi_old + c * psi(tau, chi) for chi. The left side minus the
/// right is strictly increasing with slope >= 1, so the root lies within
/// c*|psi(tau, chi_old)| of chi_old.
inline double solve_phase(const RelaxationFunction& psi, double tau, double chi_old, double c) {
    const double p0 = psi(tau, chi_old);
    if (p0 == 0.0) return chi_old;
    double lo = chi_old, hi = chi_old + c * p0;
    if (lo > hi) std::swap(lo, hi);
    auto g = [&](double x) { return x - chi_old - c * psi(tau, x); };
    const double glo = g(lo), ghi = g(hi);
    if (glo == 0.0) return lo;
    if (ghi == 0.0) return hi;
    // g has slope >= 1, so an endpoint whose residual is at rounding level is
    // within that distance of the root.
    const double round_off = 1e-13 * std::max({1.0, std::abs(lo), std::abs(hi)});
    if (glo > 0.0 && glo <= round_off) return lo;
    if (ghi < 0.0 && -ghi <= round_off) return hi;
    if (glo > 0.0 || ghi < 0.0) throw StructuralError("phase equation root not bracketed; psi not decreasing in chi?");
    std::uintmax_t max_iter = 200;
    auto tol = [](double a, double b) { return std::abs(b - a) <= 1e-15 * std::max(1.0, std::abs(a)); };
    const auto r = boost::math::tools::toms748_solve(g, lo, hi, glo, ghi, tol, max_iter);
    return 0.5 * (r.first + r.second);
}

struct RelaxedStepResult {
    Field theta;
    Field chi;
    int iterations = 0;
    int halvings = 0;
    std::vector<std::string> warnings;
};

/// Owns the per-run state (assembled operators and factorizations for each
/// substep size). One instance per solver run.
class RelaxedStepper {
public:
    static constexpr int kMaxHalvings = 6;

    RelaxedStepper(const DomainMesh& mesh, const ProblemData& data, RelaxedConfig config)
        : mesh_(mesh), data_(data), config_(config), ops_(assemble(mesh)) {
        config_.validate();
        data_.validate(mesh_);
    }

    const DiscreteOperators& operators() const noexcept { return ops_; }
    const RelaxedConfig& config() const noexcept { return config_; }

    /// Advances (theta^n, chi^n) to level n + 1.
    RelaxedStepResult step(std::span<const double> theta, std::span<const double> chi, int n) {
        if (n < 0 || n >= data_.n_steps) throw ParameterError("relaxed step index out of range");
        RelaxedStepResult out{Field(theta.begin(), theta.end()), Field(chi.begin(), chi.end())};
        for (double x : out.theta)
            if (!std::isfinite(x)) throw ParameterError("relaxed step: theta not finite");
        for (double x : out.chi)
            if (!std::isfinite(x)) throw ParameterError("relaxed step: chi not finite");
        advance(out, n, 0);
        return out;
    }

private:
    void advance(RelaxedStepResult& state, int n, int level) {
        try {
            substep(state, n, level);
        } catch (const ConvergenceError&) {
            if (config_.dt_policy != DtPolicy::halve_on_stall || level >= kMaxHalvings) throw;
            state.halvings = std::max(state.halvings, level + 1);
            advance(state, n, level + 1);
            advance(state, n, level + 1);
        }
    }

    const TridiagonalLU& factor(int level) {
        auto& slot = lu_[level];
        if (!slot) {
            const double dt = data_.dt() / static_cast<double>(1 << level);
            Tridiagonal a = ops_.stiffness;
            for (int i = 0; i < ops_.size(); ++i)
                if (ops_.is_free[i]) a.diag[i] += ops_.mass[i] / dt;
            slot.emplace(a);
        }
        return *slot;
    }

    void solve_theta(std::span<const double> theta_old, std::span<const double> chi_old,
                     std::span<const double> X, std::span<const double> f, double dt, const TridiagonalLU& lu,
                     std::span<double> theta_out) const {
        for (int i = 0; i < ops_.size(); ++i)
            theta_out[i] = ops_.is_free[i]
                               ? ops_.mass[i] * ((theta_old[i] - (X[i] - chi_old[i])) / dt + f[i])
                               : 0.0;
        lu.solve_in_place(theta_out);
    }

    // One backward-Euler step of size dt / 2^level, in place. Inputs on levels
    // finer than 0 reuse the data at n + 1.
    void substep(RelaxedStepResult& state, int n, int level) {
        const double dt = data_.dt() / static_cast<double>(1 << level);
        const double c = dt / config_.eps;
        const auto& f = data_.f[n + 1];
        const auto& u = data_.u[n + 1];
        const auto& psi = data_.psi;
        const auto& lu = factor(level);
        const int size = ops_.size();
        const double tol = config_.inner_tol;

        const Field theta_old = state.theta;
        const Field chi_old = state.chi;
        Field X = chi_old;
        Field theta_prev = theta_old;
        Field theta_x(size), chi_x(size);

        int iters = 0;
        double change = kInf;
        while (change >= tol) {
            if (iters >= config_.inner_max)
                throw ConvergenceError("relaxed step " + std::to_string(n) + ": inner iteration did not reach tol " +
                                           std::to_string(tol) + " in " + std::to_string(config_.inner_max) +
                                           " iterations (last change " + std::to_string(change) + ")",
                                       change);
            ++iters;
            solve_theta(theta_old, chi_old, X, f, dt, lu, theta_x);
            change = 0.0;
            for (int i = 0; i < size; ++i) {
                chi_x[i] = solve_phase(psi, theta_x[i] + u[i], chi_old[i], c);
                change = std::max({change, std::abs(chi_x[i] - X[i]), std::abs(theta_x[i] - theta_prev[i])});
            }
            X.swap(chi_x);
            theta_prev.swap(theta_x);
        }
        // Energy balance holds exactly for the accepted phase field.
        Field theta_new(size);
        solve_theta(theta_old, chi_old, X, f, dt, lu, theta_new);

        check_postconditions(theta_old, chi_old, theta_new, X, f, u, dt, n, state.warnings);
        state.theta = std::move(theta_new);
        state.chi = std::move(X);
        state.iterations += iters;
    }

    void check_postconditions(const Field& theta_old, const Field& chi_old, const Field& theta, const Field& chi,
                              const Field& f, const Field& u, double dt, int n, std::vector<std::string>& sink) const {
        const double tol = config_.inner_tol;
        const Field k_theta = ops_.stiffness.apply(theta);
        double energy = 0.0;
        double phase = 0.0;
        for (int i = 0; i < ops_.size(); ++i) {
            if (ops_.is_free[i]) {
                const double r = ops_.mass[i] * ((theta[i] - theta_old[i] + chi[i] - chi_old[i]) / dt - f[i]) +
                                 k_theta[i];
                energy += r * r / ops_.mass[i];
            }
            phase = std::max(phase,
                             std::abs(config_.eps * (chi[i] - chi_old[i]) / dt - data_.psi(theta[i] + u[i], chi[i])));
        }
        energy = std::sqrt(energy);
        const std::string at = "relaxed step " + std::to_string(n) + ": ";
        if (!(energy < 10.0 * tol))
            detail::report(config_.verification, sink, at + "energy residual " + std::to_string(energy));
        if (!(phase < 10.0 * tol))
            detail::report(config_.verification, sink, at + "phase residual " + std::to_string(phase));
        const double bound = data_.graph().bound() + data_.initial_excess() + tol;
        const double chi_max = linf(chi);
        if (!(chi_max <= bound))
            detail::report(config_.verification, sink,
                           at + "max principle violated, |chi| = " + std::to_string(chi_max) +
                               " > M + eta = " + std::to_string(bound));
    }

    const DomainMesh& mesh_;
    const ProblemData& data_;
    RelaxedConfig config_;
    DiscreteOperators ops_;
    std::array<std::optional<TridiagonalLU>, kMaxHalvings + 1> lu_;
};

/// Single step from level n to n + 1.
inline RelaxedStepResult relaxed_step(const DomainMesh& mesh, const ProblemData& data, const RelaxedConfig& config,
                                      std::span<const double> theta, std::span<const double> chi, int n) {
    RelaxedStepper stepper(mesh, data, config);
    return stepper.step(theta, chi, n);
}

inline Trajectory solve_relaxed(const DomainMesh& mesh, const ProblemData& data, const RelaxedConfig& config) {
    RelaxedStepper stepper(mesh, data, config);
    Trajectory traj;
    traj.times.reserve(data.n_steps + 1);
    traj.theta.reserve(data.n_steps + 1);
    traj.chi.reserve(data.n_steps + 1);
    traj.times.push_back(0.0);
    traj.theta.push_back(data.theta0);
    traj.chi.push_back(data.chi0);
    if (const auto bad = data.initial_constraint_violations(); !bad.empty())
        traj.notes.push_back("initial phase outside alpha(theta0 + u) at " + std::to_string(bad.size()) + " node(s)");
    for (int n = 0; n < data.n_steps; ++n) {
        auto r = stepper.step(traj.theta.back(), traj.chi.back(), n);
        traj.times.push_back(data.time(n + 1));
        traj.theta.push_back(std::move(r.theta));
        traj.chi.push_back(std::move(r.chi));
        traj.iterations.push_back(r.iterations);
        for (auto& w : r.warnings) traj.warnings.push_back(std::move(w));
    }
    return traj;
}

}  // namespace stefan_relax
