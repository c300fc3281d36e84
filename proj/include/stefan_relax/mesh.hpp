#pragma once

// Uniform 1-D grids with Dirichlet/Neumann endpoint labels, P1 stiffness with
// lumped mass, tridiagonal solves, and the discrete norms used by the solvers
// and the estimate reports.

#include "stefan_relax/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace stefan_relax {

using Field = std::vector<double>;

enum class Boundary { dirichlet, neumann };

inline std::string_view to_string(Boundary b) { return b == Boundary::dirichlet ? "dirichlet" : "neumann"; }

class DomainMesh {
public:
    /// Uniform mesh of (a, b) with n_nodes >= 2.
    static DomainMesh uniform(double a, double b, int n_nodes, Boundary left, Boundary right) {
        if (!(a < b)) throw ParameterError("mesh needs a < b");
        if (n_nodes < 2) throw ParameterError("mesh needs at least 2 nodes");
        if ((left == Boundary::dirichlet || right == Boundary::dirichlet) && n_nodes < 3)
            throw ParameterError("mesh with a Dirichlet endpoint needs an interior node");
        return DomainMesh(a, b, n_nodes, left, right, false);
    }

    /// Single lumped node representing all of (a, b): mass b - a, no diffusion.
    /// Used for spatially homogeneous scenarios where the PDE reduces to an ODE.
    static DomainMesh single_node(double a = 0.0, double b = 1.0) {
        if (!(a < b)) throw ParameterError("mesh needs a < b");
        return DomainMesh(a, b, 1, Boundary::neumann, Boundary::neumann, true);
    }

    double a() const noexcept { return a_; }
    double b() const noexcept { return b_; }
    int size() const noexcept { return n_; }
    double h() const noexcept { return point_ ? b_ - a_ : (b_ - a_) / (n_ - 1); }
    Boundary left() const noexcept { return left_; }
    Boundary right() const noexcept { return right_; }
    bool is_single_node() const noexcept { return point_; }

    double node(int i) const { return point_ ? 0.5 * (a_ + b_) : a_ + (b_ - a_) * i / (n_ - 1); }
    std::vector<double> nodes() const {
        std::vector<double> x(n_);
        for (int i = 0; i < n_; ++i) x[i] = node(i);
        return x;
    }
    bool is_dirichlet(int i) const {
        if (point_) return false;
        return (i == 0 && left_ == Boundary::dirichlet) || (i == n_ - 1 && right_ == Boundary::dirichlet);
    }

private:
    DomainMesh(double a, double b, int n, Boundary l, Boundary r, bool point)
        : a_(a), b_(b), n_(n), left_(l), right_(r), point_(point) {}

    double a_, b_;
    int n_;
    Boundary left_, right_;
    bool point_;
};

inline DomainMesh build_mesh(double a, double b, int n_nodes, Boundary left, Boundary right) {
    return DomainMesh::uniform(a, b, n_nodes, left, right);
}

/// Tridiagonal matrix; lower[0] and upper[n-1] are unused.
struct Tridiagonal {
    std::vector<double> lower, diag, upper;

    Tridiagonal() = default;
    explicit Tridiagonal(std::size_t n) : lower(n, 0.0), diag(n, 0.0), upper(n, 0.0) {}

    std::size_t size() const noexcept { return diag.size(); }

    double at(std::size_t i, std::size_t j) const {
        if (i == j) return diag[i];
        if (j + 1 == i) return lower[i];
        if (i + 1 == j) return upper[i];
        return 0.0;
    }

    void apply(std::span<const double> x, std::span<double> y) const {
        const std::size_t n = size();
        if (x.size() != n || y.size() != n) throw ParameterError("tridiagonal apply: dimension mismatch");
        for (std::size_t i = 0; i < n; ++i) {
            double s = diag[i] * x[i];
            if (i > 0) s += lower[i] * x[i - 1];
            if (i + 1 < n) s += upper[i] * x[i + 1];
            y[i] = s;
        }
    }

    Field apply(std::span<const double> x) const {
        Field y(size());
        apply(x, y);
        return y;
    }

    /// v^T A w
    double form(std::span<const double> v, std::span<const double> w) const {
        const Field aw = apply(w);
        double s = 0.0;
        for (std::size_t i = 0; i < aw.size(); ++i) s += v[i] * aw[i];
        return s;
    }
};

/// Thomas factorization of a tridiagonal matrix without pivoting. Intended for
/// diagonally dominant (row or column) systems, which is all the solvers build.
class TridiagonalLU {
public:
    TridiagonalLU() = default;
    explicit TridiagonalLU(const Tridiagonal& m) : lower_(m.lower) {
        const std::size_t n = m.size();
        denom_.resize(n);
        cprime_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double d = m.diag[i] - (i > 0 ? m.lower[i] * cprime_[i - 1] : 0.0);
            if (d == 0.0 || !std::isfinite(d))
                throw StructuralError("singular tridiagonal system at row " + std::to_string(i));
            denom_[i] = d;
            cprime_[i] = i + 1 < n ? m.upper[i] / d : 0.0;
        }
    }

    std::size_t size() const noexcept { return denom_.size(); }

    /// Overwrites rhs with the solution.
    void solve_in_place(std::span<double> rhs) const {
        const std::size_t n = size();
        if (rhs.size() != n) throw ParameterError("tridiagonal solve: dimension mismatch");
        for (std::size_t i = 0; i < n; ++i) {
            const double prev = i > 0 ? lower_[i] * rhs[i - 1] : 0.0;
            rhs[i] = (rhs[i] - prev) / denom_[i];
        }
        for (std::size_t i = n; i-- > 1;) rhs[i - 1] -= cprime_[i - 1] * rhs[i];
    }

private:
    std::vector<double> lower_, denom_, cprime_;
};

inline Field solve_tridiagonal(const Tridiagonal& m, Field rhs) {
    TridiagonalLU(m).solve_in_place(rhs);
    return rhs;
}

struct DiscreteOperators {
    /// Lumped mass weights, h/2 at the ends and h inside; sum to b - a.
    Field mass;
    /// P1 Laplacian with Dirichlet rows/columns replaced by the identity.
    Tridiagonal stiffness;
    /// Unconstrained P1 Laplacian, i.e. the Neumann stiffness; defines the V seminorm.
    Tridiagonal laplacian;
    std::vector<int> free_nodes;
    std::vector<char> is_free;

    int size() const noexcept { return static_cast<int>(mass.size()); }
};

inline DiscreteOperators assemble(const DomainMesh& mesh) {
    const int n = mesh.size();
    DiscreteOperators ops;
    ops.mass.assign(n, 0.0);
    ops.laplacian = Tridiagonal(n);
    if (mesh.is_single_node()) {
        ops.mass[0] = mesh.b() - mesh.a();
    } else {
        const double h = mesh.h();
        for (int e = 0; e + 1 < n; ++e) {
            ops.mass[e] += 0.5 * h;
            ops.mass[e + 1] += 0.5 * h;
            ops.laplacian.diag[e] += 1.0 / h;
            ops.laplacian.diag[e + 1] += 1.0 / h;
            ops.laplacian.upper[e] -= 1.0 / h;
            ops.laplacian.lower[e + 1] -= 1.0 / h;
        }
    }
    ops.stiffness = ops.laplacian;
    ops.is_free.assign(n, 1);
    for (int i = 0; i < n; ++i) {
        if (!mesh.is_dirichlet(i)) {
            ops.free_nodes.push_back(i);
            continue;
        }
        ops.is_free[i] = 0;
        ops.stiffness.diag[i] = 1.0;
        ops.stiffness.lower[i] = 0.0;
        ops.stiffness.upper[i] = 0.0;
        if (i > 0) ops.stiffness.upper[i - 1] = 0.0;
        if (i + 1 < n) ops.stiffness.lower[i + 1] = 0.0;
    }
    return ops;
}

// ---------------------------------------------------------------------------
// Norms

namespace detail {
inline void check_size(const DiscreteOperators& ops, std::span<const double> v) {
    if (static_cast<int>(v.size()) != ops.size())
        throw ParameterError("field has " + std::to_string(v.size()) + " values, mesh has " +
                             std::to_string(ops.size()) + " nodes");
}
}  // namespace detail

/// L2(Omega) norm with the lumped mass.
inline double l2_omega(const DiscreteOperators& ops, std::span<const double> v) {
    detail::check_size(ops, v);
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += ops.mass[i] * v[i] * v[i];
    return std::sqrt(s);
}

/// (int |grad v|^2)^(1/2) of the piecewise-linear interpolant.
inline double v_seminorm(const DiscreteOperators& ops, std::span<const double> v) {
    detail::check_size(ops, v);
    return std::sqrt(std::max(0.0, ops.laplacian.form(v, v)));
}

/// Full H1 norm.
inline double v_norm(const DiscreteOperators& ops, std::span<const double> v) {
    const double l2 = l2_omega(ops, v);
    const double sv = v_seminorm(ops, v);
    return std::sqrt(l2 * l2 + sv * sv);
}

inline double linf(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

/// L2(0,T;H) by the left-endpoint rectangle rule over fields[0..N-1].
inline double l2_q(const DiscreteOperators& ops, double dt, std::span<const Field> fields) {
    double s = 0.0;
    for (std::size_t n = 0; n + 1 < fields.size(); ++n) {
        const double v = l2_omega(ops, fields[n]);
        s += dt * v * v;
    }
    return std::sqrt(s);
}

/// L2(0,T;V), left-endpoint rule.
inline double l2_t_v(const DiscreteOperators& ops, double dt, std::span<const Field> fields) {
    double s = 0.0;
    for (std::size_t n = 0; n + 1 < fields.size(); ++n) {
        const double v = v_norm(ops, fields[n]);
        s += dt * v * v;
    }
    return std::sqrt(s);
}

/// Linf(0,T;V) as the maximum over all stored steps.
inline double linf_t_v(const DiscreteOperators& ops, std::span<const Field> fields) {
    double m = 0.0;
    for (const auto& f : fields) m = std::max(m, v_norm(ops, f));
    return m;
}

inline double linf_q(std::span<const Field> fields) {
    double m = 0.0;
    for (const auto& f : fields) m = std::max(m, linf(f));
    return m;
}

struct FieldNorms {
    double l2_omega = 0.0;
    double v_seminorm = 0.0;
    double linf = 0.0;
};

struct TrajectoryNorms {
    double l2_q = 0.0;
    double linf_t_v = 0.0;
    double l2_t_v = 0.0;
    double linf_q = 0.0;
};

inline FieldNorms norms(const DiscreteOperators& ops, std::span<const double> v) {
    return {l2_omega(ops, v), v_seminorm(ops, v), linf(v)};
}

inline TrajectoryNorms norms(const DiscreteOperators& ops, double dt, std::span<const Field> fields) {
    return {l2_q(ops, dt, fields), linf_t_v(ops, fields), l2_t_v(ops, dt, fields), linf_q(fields)};
}

}  // namespace stefan_relax
