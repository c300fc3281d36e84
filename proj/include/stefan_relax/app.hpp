#pragma once

// Experiment driver behind the stefan-relax command.

#include "stefan_relax/analysis.hpp"
#include "stefan_relax/config.hpp"
#include "stefan_relax/errors.hpp"
#include "stefan_relax/io.hpp"
#include "stefan_relax/relaxed_solver.hpp"
#include "stefan_relax/scenarios.hpp"
#include "stefan_relax/stefan_solver.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace stefan_relax {

enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitSolver = 2, kExitInvariant = 3 };

struct RunOutcome {
    int exit_code = kExitOk;
    std::vector<std::filesystem::path> files;
    /// Lines of the diagnostics file.
    std::vector<std::string> log;
};

namespace detail {

class Runner {
public:
    Runner(const ExperimentConfig& c, Mode mode) : c_(c), mode_(mode), dir_(c.out) {}

    RunOutcome& outcome() { return out_; }

    void execute() {
        const Scenario s = build_scenario(c_.scenario, c_.params);
        log("scenario " + s.name + ", " + std::to_string(s.mesh.size()) + " node(s), T = " +
            format_number(s.data.T) + ", n_steps = " + std::to_string(s.data.n_steps) + ", psi = " +
            s.data.psi.name());
        switch (mode_) {
            case Mode::run_relaxed: run_relaxed(s); break;
            case Mode::run_stefan: run_stefan(s); break;
            case Mode::sweep: sweep(s, false); break;
            case Mode::check_estimates: sweep(s, true); break;
            case Mode::compare: compare(s); break;
            case Mode::contdep: contdep(s); break;
        }
    }

    void log(std::string line) { out_.log.push_back(std::move(line)); }

    void fail(int code, const std::string& why) {
        log("error: " + why);
        out_.exit_code = std::max(out_.exit_code, code);
    }

private:
    void write(const std::string& name, const Table& t) {
        const auto path = dir_ / name;
        write_table(path, t);
        out_.files.push_back(path);
    }

    void absorb(const Trajectory& t, const std::string& what) {
        for (const auto& n : t.notes) log("note (" + what + "): " + n);
        for (const auto& w : t.warnings) fail(kExitInvariant, what + ": " + w);
    }

    void write_fields(const std::string& prefix, const Trajectory& t) {
        write(prefix + "theta.csv", field_table(t.times, t.theta));
        write(prefix + "chi.csv", field_table(t.times, t.chi));
    }

    void run_relaxed(const Scenario& s) {
        const auto traj = solve_relaxed(s.mesh, s.data, c_.relaxed());
        absorb(traj, "relaxed eps=" + format_number(c_.eps));
        write_fields("", traj);
        Table est{estimate_columns(), {estimate_row(estimate_report(s.mesh, traj, s.data, c_.eps, s.name))}};
        write("estimates.csv", est);
    }

    void run_stefan(const Scenario& s) {
        const auto traj = solve_stefan(s.mesh, s.data, c_.stefan());
        absorb(traj, "stefan");
        write_fields("", traj);
        const auto r = bdf_residual(s.mesh, traj, s.data);
        Table t{{"t", "equation", "constraint"}, {}};
        for (std::size_t n = 0; n < traj.times.size(); ++n)
            t.rows.push_back({traj.times[n], r.equation[n], r.constraint[n]});
        write("residual.csv", t);
        const double limit = 100.0 * c_.inner_tol;
        log("bdf residual " + format_number(r.max()));
        if (!(r.max() <= limit))
            fail(kExitInvariant, "bdf residual " + format_number(r.max()) + " above " + format_number(limit));
    }

    SweepResult run_sweep(const Scenario& s) {
        SweepOptions opt;
        opt.relaxed = c_.relaxed();
        opt.stefan = c_.stefan();
        opt.concurrent = c_.concurrent;
        opt.scenario = s.name;
        auto result = eps_sweep(s.mesh, s.data, c_.eps_list, opt);
        absorb(result.reference, "stefan reference");
        for (const auto& row : result.rows) {
            const std::string at = "eps=" + format_number(row.eps);
            if (row.error) fail(kExitSolver, at + ": " + *row.error);
            for (const auto& w : row.warnings) fail(kExitInvariant, at + ": " + w);
        }
        return result;
    }

    void sweep(const Scenario& s, bool check) {
        const auto result = run_sweep(s);
        if (!check) {
            write("sweep.csv", sweep_table(result, c_.record_timing));
            return;
        }
        Table t{estimate_columns(), {}};
        for (const auto& row : result.rows) t.rows.push_back(estimate_row(row.estimates));
        write("estimates.csv", t);
        if (!result.ok() || t.rows.empty()) return;
        // Columns 1..5 are the bounded quantities; eta is reported only.
        for (std::size_t j = 1; j <= 5; ++j) {
            const double base = t.rows.front()[j];
            for (const auto& r : t.rows)
                if (!(r[j] <= c_.uniformity * base))
                    fail(kExitInvariant, t.header[j] + " at eps=" + format_number(r[0]) + " is " +
                                             format_number(r[j]) + " > " + format_number(c_.uniformity) +
                                             " x " + format_number(base));
        }
    }

    void compare(const Scenario& s) {
        const auto relaxed = solve_relaxed(s.mesh, s.data, c_.relaxed());
        const auto stefan = solve_stefan(s.mesh, s.data, c_.stefan());
        absorb(relaxed, "relaxed eps=" + format_number(c_.eps));
        absorb(stefan, "stefan");
        write_fields("relaxed_", relaxed);
        write_fields("stefan_", stefan);
        const auto d = trajectory_distance(assemble(s.mesh), relaxed, stefan);
        write("compare.csv", Table{{"eps", "err_theta_L2Q", "err_chihat_L2Q"}, {{c_.eps, d.theta_L2Q, d.chihat_L2Q}}});
    }

    void contdep(const Scenario& s) {
        Table t{{"delta", "lhs", "rhs", "ratio"}, {}};
        for (double delta : c_.delta) {
            ProblemData d2 = s.data;
            Field& target = c_.perturb == Perturb::theta0 ? d2.theta0 : d2.chi0;
            for (double& x : target) x += delta;
            const auto r = continuous_dependence_check(s.mesh, s.data, d2, c_.relaxed());
            t.rows.push_back({delta, r.lhs, r.rhs, r.ratio});
        }
        write("contdep.csv", t);
    }

    const ExperimentConfig& c_;
    Mode mode_;
    std::filesystem::path dir_;
    RunOutcome out_;
};

}  // namespace detail

/// Runs one mode and writes its result files plus diagnostics.txt into
/// config.out. Never throws for solver or validation failures; those are
/// mapped to the exit code.
inline RunOutcome run(const ExperimentConfig& config, std::optional<Mode> mode_override = std::nullopt) {
    const auto mode = mode_override ? mode_override : config.mode;
    detail::Runner r(config, mode.value_or(Mode::run_relaxed));
    if (!mode) {
        r.fail(kExitValidation, "no mode given");
    } else {
        r.log("mode " + std::string(to_string(*mode)));
        try {
            r.execute();
        } catch (const ParseError& e) {
            r.fail(kExitValidation, e.what());
        } catch (const ParameterError& e) {
            r.fail(kExitValidation, e.what());
        } catch (const InvariantViolation& e) {
            r.fail(kExitInvariant, e.what());
        } catch (const std::exception& e) {
            r.fail(kExitSolver, e.what());
        }
    }
    auto& out = r.outcome();
    out.log.push_back("exit " + std::to_string(out.exit_code));
    std::string text;
    for (const auto& l : out.log) text += l + '\n';
    try {
        const auto path = std::filesystem::path(config.out) / "diagnostics.txt";
        write_text(path, text);
        out.files.push_back(path);
    } catch (const std::exception&) {
        out.exit_code = std::max<int>(out.exit_code, kExitSolver);
    }
    return out;
}

}  // namespace stefan_relax
