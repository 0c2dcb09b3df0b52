#pragma once

#include "swni/certify.hpp"
#include "swni/core.hpp"
#include "swni/interconnect.hpp"
#include "swni/sim.hpp"
#include "swni/systems.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace swni {

/// Parse or validation failure, with the offending line and field when known.
struct ScenarioError : Error {
    using Error::Error;
};

enum class SystemKind { Plant, Higs, Feedback, Cascade };

struct InputSpec {
    std::string kind = "constant";  // constant | piecewise | sine
    double constant = 0.0;
    std::vector<double> times;   // piecewise
    std::vector<double> values;  // piecewise
    double amplitude = 0.0, omega = 0.0, phase = 0.0;  // sine

    InputSignal build() const;
    bool is_zero() const;
};

struct CheckSpec {
    std::string kind;
    std::string name;    // report name; defaults to kind
    std::string target;  // h1 | h2 | closed_loop | self
    double tol = 1e-6;
    std::optional<double> eps;
    std::optional<RegionSpec> region;
    bool strict = true;
    double decay_fraction = 0.01;
    std::vector<double> u_bars;
    double settle_window = 0.5;
    double settle_tol = 1e-6;
    double horizon = 40.0;
    int line = 0;  // where the [check] section started
};

/// One reproducible experiment: system selection and parameters, initial
/// state, external inputs, integration settings, and the certificate checks
/// to run.
struct Scenario {
    std::string name = "scenario";
    SystemKind kind = SystemKind::Feedback;
    HigsParams higs{.omega_h = 1.0, .k_h = 1.0};
    PlantParams plant;
    double guard_tol = kHigsGuardTol;
    Vector initial_state;
    InputSpec input_u;
    InputSpec input_u_tilde;
    SimConfig sim;
    std::vector<CheckSpec> checks;
    std::string out_trajectory;  // file names; empty = derived from name
    std::string out_report;
    std::string out_plot;

    std::string source_text;  // exact bytes the scenario was parsed from
    std::string hash() const;
};

Scenario parse_scenario(const std::string& text, const std::string& origin = "<string>");
Scenario load_scenario(const std::filesystem::path& path);

/// The two bundled scenarios.
const std::string& fig4_scenario_text();
const std::string& kh15_negative_scenario_text();

struct RunOptions {
    std::filesystem::path out_dir = ".";
    bool plot = true;
    bool run_checks = true;  // false: simulate + emit only
    std::optional<double> step_override;
    std::optional<double> tol_override;
    std::ostream* log = nullptr;
};

struct RunResult {
    int exit_code = 0;  // 0 certified/ok, 1 runtime error, 2 some check not certified
    std::vector<CertificateReport> reports;
    Trajectory trajectory;
    std::filesystem::path trajectory_path;
    std::filesystem::path report_path;
    std::filesystem::path plot_path;
};

/// Simulates and certifies one scenario, writing the trajectory table, the
/// certificate report and (optionally) the plot into out_dir. Exit code 0
/// iff every requested check passed or was not falsified; 2 when any check
/// failed (or was inconclusive); runtime errors propagate as exceptions from
/// this overload.
RunResult run_scenario(const Scenario& scenario, const RunOptions& options);

/// File-based entry point used by the CLI: catches errors, logs them, and
/// maps them to exit code 1.
int run_scenario_file(const std::filesystem::path& path, const RunOptions& options);

void write_reports(const std::vector<CertificateReport>& reports,
                   const std::filesystem::path& path, const std::string& scenario_name,
                   const std::string& scenario_hash);

}  // namespace swni
