// Scenario-driven front end: simulate switched-system scenarios, run the
// certificate checks they request, and reproduce the bundled closed-loop
// experiment.
//
//   swni simulate <scenario>   integrate and emit trajectory table + plot
//   swni certify <scenario>    also run the scenario's certificate checks
//   swni reproduce-fig4        run the bundled closed-loop scenario
//
// Exit codes: 0 all checks passed / not falsified, 1 runtime or usage error,
// 2 at least one check failed.

#include <CLI11.hpp>

#include "swni/scenario.hpp"

#include <iostream>
#include <optional>
#include <string>

namespace {

swni::RunOptions make_options(const std::string& out_dir, bool no_plot,
                              const std::optional<double>& step,
                              const std::optional<double>& tol, bool run_checks) {
    swni::RunOptions opts;
    opts.out_dir = out_dir;
    opts.plot = !no_plot;
    opts.run_checks = run_checks;
    opts.step_override = step;
    opts.tol_override = tol;
    opts.log = &std::cout;
    return opts;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulation and numerical certification of switched "
                 "negative-imaginary systems"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::string out_dir = ".";
    bool no_plot = false;
    std::optional<double> step_override;
    std::optional<double> tol_override;

    auto add_common = [&](CLI::App* cmd, bool needs_path) {
        if (needs_path) {
            cmd->add_option("scenario", scenario_path, "Scenario file")->required();
        }
        cmd->add_option("--out", out_dir, "Output directory");
        cmd->add_flag("--no-plot", no_plot, "Skip plot generation");
        cmd->add_option("--step", step_override, "Override the integration step");
        cmd->add_option("--tol", tol_override, "Override every check tolerance");
    };

    auto* sim_cmd = app.add_subcommand("simulate", "Integrate a scenario and emit outputs");
    add_common(sim_cmd, true);
    auto* cert_cmd =
        app.add_subcommand("certify", "Integrate a scenario and run its checks");
    add_common(cert_cmd, true);
    auto* fig4_cmd =
        app.add_subcommand("reproduce-fig4", "Run the bundled closed-loop scenario");
    add_common(fig4_cmd, false);

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(sim_cmd)) {
            return swni::run_scenario_file(
                scenario_path,
                make_options(out_dir, no_plot, step_override, tol_override, false));
        }
        if (app.got_subcommand(cert_cmd)) {
            return swni::run_scenario_file(
                scenario_path,
                make_options(out_dir, no_plot, step_override, tol_override, true));
        }
        const swni::Scenario sc =
            swni::parse_scenario(swni::fig4_scenario_text(), "fig4");
        return swni::run_scenario(sc, make_options(out_dir, no_plot, step_override,
                                                   tol_override, true))
            .exit_code;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    }
}
