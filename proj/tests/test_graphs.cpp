#include "stefan_relax/graphs.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace stefan_relax;
using Catch::Approx;

TEST_CASE("sign graph values", "[graphs]") {
    const auto g = make_sign_graph();
    CHECK(g.eval(0.0).lo == -1.0);
    CHECK(g.eval(0.0).hi == 1.0);
    CHECK(g.eval(3.0).lo == 1.0);
    CHECK(g.eval(3.0).hi == 1.0);
    CHECK(g.eval(-0.5).lo == -1.0);
    CHECK(g.eval(-0.5).hi == -1.0);
    CHECK(g.bound() == 1.0);
}

TEST_CASE("graph_eval on the zero and clamp graphs", "[graphs]") {
    const auto z = make_zero_graph();
    for (double r : {-7.0, 0.0, 2.5}) {
        CHECK(graph_eval(z, r).lo == 0.0);
        CHECK(graph_eval(z, r).hi == 0.0);
    }
    const auto c = make_clamp_graph();
    CHECK(graph_eval(c, 0.3).lo == Approx(0.3));
    CHECK(graph_eval(c, 0.3).hi == Approx(0.3));
    CHECK(graph_eval(c, 5.0).lo == 1.0);
    CHECK(graph_eval(c, -5.0).hi == -1.0);
}

TEST_CASE("graph_eval outside a bounded domain", "[graphs]") {
    const MonotoneGraph g({{0.0, -1.0, 1.0}}, "sign on [-1,1]", Interval{-1.0, 1.0});
    CHECK(g.eval(0.5).lo == 1.0);
    CHECK_THROWS_AS(g.eval(2.0), DomainError);
}

TEST_CASE("invalid graphs are rejected", "[graphs]") {
    CHECK_THROWS_AS(MonotoneGraph({}, "empty"), ParameterError);
    CHECK_THROWS_AS(MonotoneGraph({{0.0, 1.0, -1.0}}, "reversed"), ParameterError);
    CHECK_THROWS_AS(MonotoneGraph({{0.0, 0.0, 1.0}, {1.0, 0.5, 2.0}}, "decreasing"), ParameterError);
}

TEST_CASE("resolvent", "[graphs]") {
    const auto s = make_sign_graph();
    CHECK(resolvent(s, 1.0, 2.0) == Approx(1.0));
    CHECK(resolvent(s, 1.0, 0.5) == Approx(0.0).margin(1e-15));
    CHECK(resolvent(s, 1.0, -3.0) == Approx(-2.0));
    CHECK(resolvent(make_zero_graph(), 1.0, 0.7) == Approx(0.7));
    // w + 2 clamp(w) = 1 on the linear branch: w = 1/3
    CHECK(resolvent(make_clamp_graph(), 2.0, 1.0) == Approx(1.0 / 3.0));
}

TEST_CASE("resolvent slope", "[graphs]") {
    const auto s = make_sign_graph();
    CHECK(s.resolve(1.0, 0.5).slope == 0.0);
    CHECK(s.resolve(1.0, 3.0).slope == 1.0);
    CHECK(make_clamp_graph().resolve(1.0, 0.2).slope == Approx(0.5));
}

TEST_CASE("melting psi", "[graphs][psi]") {
    const auto psi = make_preset("melting(p=clamp)");
    CHECK(psi(0.0, 0.3) == 0.0);
    CHECK(psi(1.0, 1.0) == 0.0);
    CHECK(psi(0.5, 0.0) == Approx(0.25));
    CHECK(psi(1.0, 0.0) > 0.0);
    CHECK(psi(-1.0, 0.0) < 0.0);
}

TEST_CASE("melting psi rejects bad rate functions", "[graphs][psi]") {
    CHECK_THROWS_AS(make_melting_psi([](double r) { return -r; }, 1.0, "neg"), ParameterError);
    CHECK_THROWS_AS(make_melting_psi([](double r) { return r + 0.1; }, 1.0, "shift"), ParameterError);
    CHECK_THROWS_AS(make_melting_psi([](double r) { return 2.0 * r; }, 2.0, "unbounded"), ParameterError);
    CHECK_NOTHROW(make_melting_psi([](double r) { return std::atan(r) / 2.0; }, 0.5, "atan"));
}

TEST_CASE("linear psi for the zero graph", "[graphs][psi]") {
    const auto psi = make_preset("zero");
    CHECK(psi(5.0, -2.0) == Approx(2.0));
    CHECK(psi(0.3, 0.7) == Approx(-0.7));
    CHECK(psi(5.0, -2.0) > 0.0);
    CHECK(-2.0 < make_zero_graph().eval(5.0).lo);
}

TEST_CASE("unknown preset", "[graphs][psi]") {
    CHECK_THROWS_AS(make_preset("cubic"), ParameterError);
    CHECK(is_preset("melting"));
    CHECK_FALSE(is_preset("cubic"));
}

TEST_CASE("every preset passes the compatibility suite", "[graphs][psi]") {
    for (const auto& name : preset_names()) {
        INFO(name);
        const auto report = verify_compatibility(make_preset(name));
        for (const auto& c : report.checks) {
            INFO(c.name << " " << c.counterexample);
            CHECK(c.passed);
            CHECK(c.checked > 0);
        }
        CHECK(report.max_resolvent_defect <= 1e-12);
    }
}

TEST_CASE("compatibility suite flags a wrong psi", "[graphs][psi]") {
    // vanishes off the graph: zero set is {chi = 0.5}, not sign(tau)
    const RelaxationFunction bad([](double, double chi) { return 0.5 - chi; }, 1.0, make_sign_graph(), "bad");
    const auto report = verify_compatibility(bad);
    CHECK_FALSE(report.all_passed());
    REQUIRE(report.find("psi_zero_iff_member") != nullptr);
    CHECK_FALSE(report.find("psi_zero_iff_member")->passed);
}

TEST_CASE("resolvent reports a gap", "[graphs]") {
    const MonotoneGraph g({{0.0, -1.0, 1.0}}, "sign on [-1,1]", Interval{-1.0, 1.0});
    CHECK(g.resolve(1.0, 0.5).w == 0.0);
    CHECK_THROWS_AS(g.resolve(1.0, 5.0), StructuralError);
}
