#include "stefan_relax/app.hpp"

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <filesystem>
#include <string>

using namespace stefan_relax;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "stefan_relax_tests" / name;
    fs::remove_all(dir);
    return dir;
}

ExperimentConfig config(const std::string& text, const fs::path& out) {
    auto c = parse_config(text);
    c.out = out.string();
    return c;
}

}  // namespace

TEST_CASE("run-stefan on the mushy plateau writes a constant trajectory", "[app]") {
    const auto dir = scratch("mushy");
    const auto r = run(config("scenario = mushy_plateau\n", dir), Mode::run_stefan);
    REQUIRE(r.exit_code == kExitOk);
    const auto theta = read_table(dir / "theta.csv");
    const auto chi = read_table(dir / "chi.csv");
    CHECK(theta.header == std::vector<std::string>{"t", "node_0"});
    CHECK(theta.rows.size() == 101);
    for (const auto& row : chi.rows) CHECK(row[1] == chi.rows.front()[1]);
    for (const auto& row : theta.rows) CHECK(row[1] == theta.rows.front()[1]);
    CHECK(fs::exists(dir / "residual.csv"));
    CHECK(fs::exists(dir / "diagnostics.txt"));
}

TEST_CASE("contdep with a zero perturbation", "[app]") {
    const auto dir = scratch("contdep");
    const auto r = run(config("scenario = ode_decay\nmode = contdep\neps = 0.1\ndelta = 0.01, 0\n", dir));
    REQUIRE(r.exit_code == kExitOk);
    const auto t = read_table(dir / "contdep.csv");
    REQUIRE(t.rows.size() == 2);
    CHECK(t.values("ratio")[0] > 0.0);
    CHECK(t.values("ratio")[1] == 0.0);
}

TEST_CASE("sweep on a coarse melting bar", "[app]") {
    const auto dir = scratch("sweep");
    const auto r = run(config("scenario = melting_bar\nmode = sweep\nnodes = 51\nn_steps = 50\n"
                              "eps_list = 0.2, 0.1, 0.05, 0.025\n",
                              dir));
    REQUIRE(r.exit_code == kExitOk);
    const auto t = read_table(dir / "sweep.csv");
    CHECK(t.header == sweep_columns());
    REQUIRE(t.rows.size() == 4);
    const auto err = t.values("err_theta_L2Q");
    for (std::size_t k = 1; k < err.size(); ++k) CHECK(err[k] < err[k - 1]);
}

TEST_CASE("run-relaxed and compare outputs", "[app]") {
    const auto dir = scratch("relaxed");
    const auto r = run(config("scenario = ode_decay\neps = 0.5\nn_steps = 50\n", dir), Mode::run_relaxed);
    REQUIRE(r.exit_code == kExitOk);
    const auto est = read_table(dir / "estimates.csv");
    CHECK(est.header == estimate_columns());
    CHECK(est.values("eta")[0] == 1.0);

    const auto cdir = scratch("compare");
    const auto c = run(config("scenario = melting_bar\neps = 0.1\nnodes = 21\nn_steps = 20\n", cdir), Mode::compare);
    REQUIRE(c.exit_code == kExitOk);
    const auto cmp = read_table(cdir / "compare.csv");
    CHECK(cmp.values("err_theta_L2Q")[0] > 0.0);
    CHECK(read_table(cdir / "stefan_theta.csv").header.size() == 22);
}

TEST_CASE("check-estimates passes and fails on the uniformity factor", "[app]") {
    const std::string bar = "scenario = neumann_freeze\nnodes = 41\nn_steps = 40\neps_list = 0.2, 0.1, 0.05\n";
    CHECK(run(config(bar, scratch("est_ok")), Mode::check_estimates).exit_code == kExitOk);
    // theta = 1 - chi grows as eps shrinks, so no factor of 1 can hold
    const std::string ode = "scenario = ode_decay\neps_list = 0.2, 0.1, 0.05\n";
    const auto dir = scratch("est_tight");
    CHECK(run(config(ode + "uniformity = 2\n", scratch("est_loose")), Mode::check_estimates).exit_code == kExitOk);
    CHECK(run(config(ode + "uniformity = 1\n", dir), Mode::check_estimates).exit_code == kExitInvariant);
    CHECK(read_text(dir / "diagnostics.txt").find("norm_theta_L2Q") != std::string::npos);
}

TEST_CASE("exit codes", "[app]") {
    const auto dir = scratch("fail");
    const auto solver = run(config("scenario = melting_bar\nnodes = 41\nn_steps = 10\neps = 0.01\ninner_max = 2\n", dir),
                            Mode::run_relaxed);
    CHECK(solver.exit_code == kExitSolver);
    const auto diag = read_text(dir / "diagnostics.txt");
    CHECK(diag.find("error:") != std::string::npos);

    const auto nomode = run(config("scenario = ode_decay\n", scratch("nomode")));
    CHECK(nomode.exit_code == kExitValidation);
}

TEST_CASE("identical configs give identical files", "[app]") {
    const std::string text = "scenario = melting_bar\nmode = sweep\nnodes = 31\nn_steps = 30\neps_list = 0.2, 0.1\n";
    const auto a = scratch("det_a"), b = scratch("det_b");
    REQUIRE(run(config(text, a)).exit_code == kExitOk);
    REQUIRE(run(config(text, b)).exit_code == kExitOk);
    for (const char* f : {"sweep.csv", "diagnostics.txt"}) CHECK(read_text(a / f) == read_text(b / f));
}
