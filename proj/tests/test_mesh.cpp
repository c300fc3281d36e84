#include "stefan_relax/mesh.hpp"

#include <catch_amalgamated.hpp>

#include <numeric>

using namespace stefan_relax;
using Catch::Approx;

TEST_CASE("build_mesh", "[mesh]") {
    const auto m = build_mesh(0.0, 1.0, 3, Boundary::dirichlet, Boundary::dirichlet);
    CHECK(m.size() == 3);
    CHECK(m.h() == 0.5);
    CHECK(m.nodes() == std::vector<double>{0.0, 0.5, 1.0});

    const auto n = build_mesh(0.0, 1.0, 2, Boundary::neumann, Boundary::neumann);
    CHECK(n.size() == 2);

    CHECK_THROWS_AS(build_mesh(1.0, 0.0, 3, Boundary::neumann, Boundary::neumann), ParameterError);
    CHECK_THROWS_AS(build_mesh(0.0, 1.0, 1, Boundary::neumann, Boundary::neumann), ParameterError);
    CHECK_THROWS_AS(build_mesh(0.0, 1.0, 2, Boundary::dirichlet, Boundary::neumann), ParameterError);
}

TEST_CASE("assemble on three nodes", "[mesh]") {
    const auto ops = assemble(build_mesh(0.0, 1.0, 3, Boundary::neumann, Boundary::neumann));
    const double K[3][3] = {{2, -2, 0}, {-2, 4, -2}, {0, -2, 2}};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(ops.stiffness.at(i, j) == Approx(K[i][j]));
    CHECK(ops.mass == std::vector<double>{0.25, 0.5, 0.25});
    const Field one{1.0, 1.0, 1.0};
    for (double x : ops.stiffness.apply(one)) CHECK(x == Approx(0.0).margin(1e-14));
    CHECK(ops.free_nodes == std::vector<int>{0, 1, 2});
}

TEST_CASE("Dirichlet endpoints", "[mesh]") {
    const auto ops = assemble(build_mesh(0.0, 1.0, 3, Boundary::dirichlet, Boundary::neumann));
    CHECK(ops.free_nodes == std::vector<int>{1, 2});
    CHECK(ops.stiffness.at(0, 0) == 1.0);
    CHECK(ops.stiffness.at(0, 1) == 0.0);
    CHECK(ops.stiffness.at(1, 0) == 0.0);
    CHECK(ops.laplacian.at(1, 0) == Approx(-2.0));
}

TEST_CASE("operator invariants on a fine mesh", "[mesh]") {
    const auto ops = assemble(build_mesh(-1.0, 2.0, 31, Boundary::neumann, Boundary::dirichlet));
    CHECK(std::accumulate(ops.mass.begin(), ops.mass.end(), 0.0) == Approx(3.0));
    for (double w : ops.mass) CHECK(w > 0.0);
    for (int i = 0; i + 1 < ops.size(); ++i) CHECK(ops.stiffness.at(i, i + 1) == ops.stiffness.at(i + 1, i));
    Field v(ops.size());
    for (int i = 0; i < ops.size(); ++i) v[i] = std::sin(0.7 * i) + 0.1 * i;
    CHECK(ops.stiffness.form(v, v) >= 0.0);
}

TEST_CASE("single-node mesh", "[mesh]") {
    const auto m = DomainMesh::single_node(0.0, 2.0);
    const auto ops = assemble(m);
    CHECK(ops.size() == 1);
    CHECK(ops.mass[0] == 2.0);
    CHECK(ops.stiffness.at(0, 0) == 0.0);
}

TEST_CASE("norms", "[mesh]") {
    const auto ops = assemble(build_mesh(0.0, 1.0, 3, Boundary::neumann, Boundary::neumann));
    CHECK(l2_omega(ops, Field{1.0, 1.0, 1.0}) == Approx(1.0));
    const Field lin{0.0, 0.5, 1.0};
    CHECK(v_seminorm(ops, lin) * v_seminorm(ops, lin) == Approx(1.0));

    const Field zero(3, 0.0);
    const auto fz = norms(ops, zero);
    CHECK(fz.l2_omega == 0.0);
    CHECK(fz.v_seminorm == 0.0);
    CHECK(fz.linf == 0.0);
    const std::vector<Field> traj(4, zero);
    const auto tz = norms(ops, 0.1, traj);
    CHECK(tz.l2_q == 0.0);
    CHECK(tz.linf_t_v == 0.0);
    CHECK(tz.l2_t_v == 0.0);
    CHECK(tz.linf_q == 0.0);

    CHECK_THROWS_AS(l2_omega(ops, Field{1.0, 2.0}), ParameterError);
}

TEST_CASE("tridiagonal solve", "[mesh]") {
    Tridiagonal a(4);
    for (int i = 0; i < 4; ++i) a.diag[i] = 4.0;
    for (int i = 1; i < 4; ++i) {
        a.lower[i] = -1.0;
        a.upper[i - 1] = -1.0;
    }
    const Field x{1.0, -2.0, 3.0, 0.5};
    const Field y = solve_tridiagonal(a, a.apply(x));
    for (int i = 0; i < 4; ++i) CHECK(y[i] == Approx(x[i]).epsilon(1e-14));

    Tridiagonal singular(2);
    CHECK_THROWS_AS(TridiagonalLU(singular), StructuralError);
}
