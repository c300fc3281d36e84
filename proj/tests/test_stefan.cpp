#include "stefan_relax/scenarios.hpp"
#include "stefan_relax/stefan_solver.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numeric>

using namespace stefan_relax;
using Catch::Approx;

TEST_CASE("enthalpy_decompose", "[stefan]") {
    const auto s = make_sign_graph();
    auto a = enthalpy_decompose(0.5, 0.0, s);
    CHECK(a.theta == Approx(0.0).margin(1e-15));
    CHECK(a.chi == Approx(0.5));
    auto b = enthalpy_decompose(2.0, 0.0, s);
    CHECK(b.theta == Approx(1.0));
    CHECK(b.chi == Approx(1.0));
    for (double u : {-3.0, 0.0, 1.5}) {
        auto c = enthalpy_decompose(0.7, u, make_zero_graph());
        CHECK(c.theta == Approx(0.7));
        CHECK(c.chi == Approx(0.0).margin(1e-15));
    }
    // shifted by the lifting: e + u = 0.5 is mushy, theta + u = 0
    auto d = enthalpy_decompose(0.7, -0.2, s);
    CHECK(d.theta == Approx(0.2));
    CHECK(d.chi == Approx(0.5));
}

TEST_CASE("stationary mushy node", "[stefan]") {
    const auto sc = build_scenario("mushy_plateau");
    const auto traj = solve_stefan(sc.mesh, sc.data);
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        CHECK(traj.theta[k][0] == Approx(0.0).margin(1e-15));
        CHECK(traj.chi[k][0] == Approx(0.5));
    }
    const auto one = stefan_step(sc.mesh, sc.data, StefanConfig{}, StefanStepper(sc.mesh, sc.data, {}).initial_state(), 0);
    CHECK(one.e[0] == Approx(0.5));
}

TEST_CASE("latent-heat plateau under a constant source", "[stefan]") {
    const auto mesh = DomainMesh::single_node();
    const double c = 2.0;
    const int steps = 100;
    const auto data =
        make_stationary_data(mesh, make_preset("sign"), 1.5, steps, {0.0}, {0.0}, {c}, {0.0});
    const auto traj = solve_stefan(mesh, data);
    const double dt = data.dt();
    for (int k = 0; k <= steps; ++k) {
        const double e = c * k * dt;
        CHECK(traj.theta[k][0] + traj.chi[k][0] == Approx(e).margin(1e-12));
        CHECK(traj.theta[k][0] == Approx(std::max(0.0, e - 1.0)).margin(1e-12));
    }
}

TEST_CASE("zero graph reduces to the linear heat equation", "[stefan]") {
    const auto mesh = build_mesh(0.0, 1.0, 21, Boundary::dirichlet, Boundary::neumann);
    const int n = mesh.size();
    Field theta0(n), f(n);
    for (int i = 0; i < n; ++i) {
        const double x = mesh.node(i);
        theta0[i] = i == 0 ? 0.0 : std::sin(3.0 * x);
        f[i] = 1.0 + x;
    }
    const int steps = 20;
    const auto data = make_stationary_data(mesh, make_preset("zero"), 0.2, steps, theta0, Field(n, 0.0), f, Field(n, 0.0));
    const auto traj = solve_stefan(mesh, data);

    const auto ops = assemble(mesh);
    const double dt = data.dt();
    Tridiagonal a = ops.stiffness;
    for (int i : ops.free_nodes) a.diag[i] += ops.mass[i] / dt;
    TridiagonalLU lu(a);
    Field theta = theta0;
    for (int k = 1; k <= steps; ++k) {
        Field rhs(n, 0.0);
        for (int i : ops.free_nodes) rhs[i] = ops.mass[i] * (theta[i] / dt + f[i]);
        lu.solve_in_place(rhs);
        theta = rhs;
        for (int i = 0; i < n; ++i) CHECK(traj.theta[k][i] == Approx(theta[i]).margin(1e-10));
    }
}

TEST_CASE("enthalpy conservation with insulated ends", "[stefan]") {
    ScenarioParams p;
    p.nodes = 51;
    p.n_steps = 50;
    const auto s = build_scenario("neumann_freeze", p);
    const auto traj = solve_stefan(s.mesh, s.data);
    const auto ops = assemble(s.mesh);
    auto total = [&](const Field& a, const Field& b) {
        double t = 0.0;
        for (int i = 0; i < ops.size(); ++i) t += ops.mass[i] * (a[i] + b[i]);
        return t;
    };
    double source = 0.0;
    for (int i = 0; i < ops.size(); ++i) source += ops.mass[i] * s.data.f[1][i];
    const double e0 = total(traj.theta[0], traj.chi[0]);
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        const double expect = e0 + source * s.data.dt() * static_cast<double>(k);
        CHECK(std::abs(total(traj.theta[k], traj.chi[k]) - expect) <= 1e-9 * std::abs(expect));
    }
}

TEST_CASE("Stefan solution stays on the graph", "[stefan]") {
    ScenarioParams p;
    p.nodes = 51;
    p.n_steps = 50;
    const auto s = build_scenario("melting_bar", p);
    const auto traj = solve_stefan(s.mesh, s.data);
    CHECK(traj.warnings.empty());
    for (std::size_t k = 0; k < traj.times.size(); ++k)
        for (int i = 0; i < s.mesh.size(); ++i)
            CHECK(s.data.graph().eval(traj.theta[k][i] + s.data.u[k][i]).contains(traj.chi[k][i], 1e-10));
    const auto r = bdf_residual(s.mesh, traj, s.data);
    CHECK(r.max() <= 10.0 * 1e-10 * (1.0 + s.data.T));
}

TEST_CASE("Gauss-Seidel and Newton agree", "[stefan]") {
    ScenarioParams p;
    p.nodes = 21;
    p.n_steps = 20;
    const auto s = build_scenario("melting_bar", p);
    StefanConfig gs;
    gs.method = StefanMethod::gauss_seidel;
    gs.max_sweeps = 5000;
    const auto a = solve_stefan(s.mesh, s.data, gs);
    const auto b = solve_stefan(s.mesh, s.data);
    for (std::size_t k = 0; k < a.times.size(); ++k)
        for (int i = 0; i < s.mesh.size(); ++i) CHECK(a.theta[k][i] == Approx(b.theta[k][i]).margin(1e-8));
}

TEST_CASE("sweep cap raises a convergence error", "[stefan]") {
    ScenarioParams p;
    p.nodes = 101;
    p.n_steps = 5;
    const auto s = build_scenario("melting_bar", p);
    StefanConfig gs;
    gs.method = StefanMethod::gauss_seidel;
    gs.max_sweeps = 3;
    CHECK_THROWS_AS(solve_stefan(s.mesh, s.data, gs), ConvergenceError);
}

TEST_CASE("bdf residual of trivial and relaxed trajectories", "[stefan]") {
    const auto mesh = build_mesh(0.0, 1.0, 5, Boundary::neumann, Boundary::neumann);
    const auto data = make_stationary_data(mesh, make_preset("sign"), 1.0, 3, Field(5, 0.0), Field(5, 0.0),
                                           Field(5, 0.0), Field(5, 0.0));
    Trajectory zero;
    for (int k = 0; k <= 3; ++k) {
        zero.times.push_back(data.time(k));
        zero.theta.emplace_back(5, 0.0);
        zero.chi.emplace_back(5, 0.0);
    }
    CHECK(bdf_residual(mesh, zero, data).max() == 0.0);
}
