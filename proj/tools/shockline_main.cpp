#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "shockline/experiments.hpp"

int main(int argc, char** argv) {
    CLI::App app{"shockline: viscous 2-shock laboratory for the half-line "
                 "outflow problem"};
    app.set_version_flag("--version", shockline::version_string());

    std::string mode_arg;
    std::string config_path;
    std::string out_dir = "out";
    std::vector<std::string> overrides;

    app.add_option("mode", mode_arg,
                   "run | sweep-delta | sweep-beta | validate-profile | "
                   "validate-poincare | validate-jacobian | convergence-study")
        ->required();
    app.add_option("--config", config_path, "config file (key = value lines)");
    app.add_option("--set", overrides, "override, key=value (repeatable)");
    app.add_option("--out", out_dir, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        const shockline::RunMode mode = shockline::parse_mode(mode_arg);
        const shockline::ExperimentSpec spec =
            shockline::parse_config(config_path, overrides, mode, out_dir);
        const shockline::ExperimentResult res = shockline::run_experiment(spec);
        if (res.report.contains("error"))
            std::cerr << "error: " << res.report["error"].get<std::string>()
                      << "\n";
        else
            std::cout << res.report.dump(2) << "\n";
        return res.exit_code;
    } catch (const shockline::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
