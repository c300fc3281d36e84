#include "stefan_relax.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

using namespace stefan_relax;

int main(int argc, char** argv) {
    CLI::App app{"Phase-relaxation and enthalpy-method solvers for the 1-D Stefan problem"};
    std::string mode_name, config_path;
    std::optional<std::string> out;
    std::optional<double> eps, dt;
    std::optional<int> nodes;
    app.add_option("mode", mode_name, "run-relaxed | run-stefan | sweep | check-estimates | compare | contdep")
        ->required();
    app.add_option("--config", config_path, "configuration file")->required();
    app.add_option("--out", out, "output directory");
    app.add_option("--eps", eps, "relaxation parameter");
    app.add_option("--dt", dt, "time step (T / dt must be whole)");
    app.add_option("--nodes", nodes, "number of mesh nodes");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    const auto mode = parse_mode(mode_name);
    if (!mode) {
        std::cerr << "stefan-relax: unknown mode '" << mode_name << "'\n";
        return kExitValidation;
    }
    ExperimentConfig config;
    try {
        config = parse_config(read_text(config_path));
        apply_overrides(config, eps, dt, nodes);
        if (out) config.out = *out;
    } catch (const std::exception& e) {
        std::cerr << "stefan-relax: " << e.what() << '\n';
        return kExitValidation;
    }

    const auto result = run(config, *mode);
    for (const auto& f : result.files) std::cout << f.string() << '\n';
    if (result.exit_code != kExitOk)
        for (const auto& l : result.log)
            if (l.rfind("error: ", 0) == 0) std::cerr << "stefan-relax: " << l.substr(7) << '\n';
    return result.exit_code;
}
