#pragma once

#include "stefan_relax/errors.hpp"
#include "stefan_relax/graphs.hpp"
#include "stefan_relax/mesh.hpp"

#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace stefan_relax {

/// Data of the transformed (homogeneous boundary) problem on a fixed mesh and
/// uniform time grid. Time-indexed fields carry n_steps + 1 nodal snapshots.
struct ProblemData {
    std::vector<Field> f;  ///< source per time level
    std::vector<Field> u;  ///< lifting of the boundary data per time level
    Field theta0;
    Field chi0;
    double T = 1.0;
    int n_steps = 1;
    RelaxationFunction psi = make_preset("zero");

    double dt() const noexcept { return T / n_steps; }
    double time(int n) const noexcept { return T * n / n_steps; }
    const MonotoneGraph& graph() const noexcept { return psi.graph(); }

    void validate(const DomainMesh& mesh) const {
        if (!(T > 0.0) || !std::isfinite(T)) throw ParameterError("problem data: T must be > 0");
        if (n_steps < 1) throw ParameterError("problem data: n_steps must be >= 1");
        const auto n = static_cast<std::size_t>(mesh.size());
        const auto levels = static_cast<std::size_t>(n_steps) + 1;
        if (f.size() != levels || u.size() != levels)
            throw ParameterError("problem data: f and u need n_steps + 1 time levels");
        auto check = [&](const Field& v, const char* what) {
            if (v.size() != n)
                throw ParameterError(std::string("problem data: ") + what + " does not match the mesh size");
            for (double x : v)
                if (!std::isfinite(x)) throw ParameterError(std::string("problem data: ") + what + " is not finite");
        };
        for (const auto& v : f) check(v, "f");
        for (const auto& v : u) check(v, "u");
        check(theta0, "theta0");
        check(chi0, "chi0");
    }

    /// Nodes where chi0 is not in alpha(theta0 + u(0)) within tol.
    std::vector<int> initial_constraint_violations(double tol = 1e-10) const {
        std::vector<int> bad;
        for (std::size_t i = 0; i < chi0.size(); ++i)
            if (!graph().eval(theta0[i] + u.front()[i]).contains(chi0[i], tol)) bad.push_back(static_cast<int>(i));
        return bad;
    }

    /// max(0, max|chi0| - M)
    double initial_excess() const {
        return std::max(0.0, linf(chi0) - graph().bound());
    }
};

/// Builds a ProblemData with time-independent fields replicated over all levels.
inline ProblemData make_stationary_data(const DomainMesh& mesh, RelaxationFunction psi, double T, int n_steps,
                                        Field theta0, Field chi0, Field f, Field u) {
    ProblemData d{.f = std::vector<Field>(n_steps + 1, std::move(f)),
                  .u = std::vector<Field>(n_steps + 1, std::move(u)),
                  .theta0 = std::move(theta0),
                  .chi0 = std::move(chi0),
                  .T = T,
                  .n_steps = n_steps,
                  .psi = std::move(psi)};
    d.validate(mesh);
    return d;
}

enum class DtPolicy { fixed, halve_on_stall };
enum class Verification { warn, strict };

struct RelaxedConfig {
    double eps = 0.1;
    double inner_tol = 1e-10;
    int inner_max = 100;
    DtPolicy dt_policy = DtPolicy::fixed;
    Verification verification = Verification::warn;

    void validate() const {
        if (!(eps > 0.0 && eps <= 1.0)) throw ParameterError("relaxed config: eps must be in (0, 1]");
        if (!(inner_tol > 0.0)) throw ParameterError("relaxed config: inner_tol must be > 0");
        if (inner_max < 1) throw ParameterError("relaxed config: inner_max must be >= 1");
    }
};

enum class StefanMethod { newton, gauss_seidel };

struct StefanConfig {
    double inner_tol = 1e-10;
    /// Gauss-Seidel sweep cap.
    int max_sweeps = 500;
    /// Semismooth Newton iteration cap before falling back to sweeps.
    int max_newton = 50;
    StefanMethod method = StefanMethod::newton;
    Verification verification = Verification::warn;

    void validate() const {
        if (!(inner_tol > 0.0)) throw ParameterError("stefan config: inner_tol must be > 0");
        if (max_sweeps < 1 || max_newton < 0) throw ParameterError("stefan config: iteration caps must be positive");
    }
};

/// Nodal time history of (theta, chi).
struct Trajectory {
    std::vector<double> times;
    std::vector<Field> theta;
    std::vector<Field> chi;
    /// Inner iterations spent on each step (size n_steps).
    std::vector<int> iterations;
    /// Failed post-condition checks logged in warn mode.
    std::vector<std::string> warnings;
    /// Informational remarks about the input (e.g. incompatible initial data).
    std::vector<std::string> notes;

    std::size_t steps() const noexcept { return times.empty() ? 0 : times.size() - 1; }
    double dt() const { return times.size() < 2 ? 0.0 : times[1] - times[0]; }
    int max_iterations() const {
        int m = 0;
        for (int it : iterations) m = std::max(m, it);
        return m;
    }
};

namespace detail {
inline void report(Verification mode, std::vector<std::string>& sink, const std::string& message) {
    if (mode == Verification::strict) throw InvariantViolation(message);
    sink.push_back(message);
}
}  // namespace detail

}  // namespace stefan_relax
