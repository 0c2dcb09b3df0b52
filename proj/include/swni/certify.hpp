#pragma once

#include "swni/core.hpp"
#include "swni/interconnect.hpp"
#include "swni/sim.hpp"
#include "swni/systems.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace swni {

/// Region scans can only falsify a "for all x" hypothesis on a box, never
/// prove it, so they report not-falsified instead of pass.
enum class Verdict {
    Pass,
    Fail,
    NotFalsified,
    Inconclusive,
};

const char* to_string(Verdict v);

struct CertificateReport {
    std::string check_name;
    long samples_evaluated = 0;
    /// Most-violating value of the check's residual. The verdict is Fail
    /// exactly when worst_residual < threshold; pointwise residual checks use
    /// threshold = -tol, the strict positivity scan uses threshold = +tol.
    double worst_residual = std::numeric_limits<double>::infinity();
    double threshold = 0.0;
    double tolerance = 0.0;
    double worst_time = std::numeric_limits<double>::quiet_NaN();
    Vector worst_state;
    Verdict verdict = Verdict::Pass;
    std::string detail;
};

/// Axis-aligned sampling box with per-coordinate grid counts and an optional
/// ball around the origin to exclude (for strict positivity scans).
struct RegionSpec {
    Vector lower;
    Vector upper;
    std::vector<int> counts;
    double origin_exclusion_radius = 0.0;

    void validate() const;
    int dim() const { return static_cast<int>(lower.size()); }
    long total_points() const;
};

void for_each_grid_point(const RegionSpec& region,
                         const std::function<void(const Vector&)>& visit);

// ---------------------------------------------------------------------------
// Dissipation certificates
// ---------------------------------------------------------------------------

/// Per-sample residual of the dissipation inequality
///   u^T ydot - eps ||ydot||^2 - grad V_mode(x) . xdot  >=  0
/// along a trajectory, using the recorded analytic field and output
/// derivative. eps = 0 checks the plain inequality; eps > 0 the output-strict
/// one. Passes iff the minimum residual is >= -tol.
CertificateReport check_ni_dissipation(const Trajectory& traj, const StorageFamily& storage,
                                       double eps, double tol,
                                       std::string name = "ni_dissipation");

/// Generic per-sample residual check: passes iff residual(sample) >= -tol at
/// every sample.
CertificateReport check_pointwise(const Trajectory& traj,
                                  const std::function<double(const TrajectorySample&)>& residual,
                                  double tol, std::string name);

/// Storage monotonicity across the observed switching sequence: at each
/// event, V_to(x) - V_from(x) <= tol at the switch state. When a region is
/// given, additionally grid-checks V_to(x) <= V_from(x) over the whole box
/// for every observed transition pair (the condition is for all x), in which
/// case the verdict is not-falsified rather than pass.
CertificateReport check_switch_monotonicity(const Trajectory& traj,
                                            const StorageFamily& storage, double tol,
                                            const std::optional<RegionSpec>& region = {},
                                            std::string name = "switch_monotonicity");

// ---------------------------------------------------------------------------
// Region scans
// ---------------------------------------------------------------------------

/// Strict scan (strict = true): not-falsified iff W > tol at every grid point
/// outside the origin-exclusion ball and |W(0)| <= tol. Relaxed scan
/// (strict = false): not-falsified iff W >= -tol at every grid point.
CertificateReport check_positive_definite(const std::function<double(const Vector&)>& W,
                                          const RegionSpec& region, double tol,
                                          bool strict = true,
                                          std::string name = "positive_definite");

/// Scans every joint mode's W of an interconnection storage.
CertificateReport check_positive_definite(const InterconnectionStorage& storage,
                                          int joint_mode_count, const RegionSpec& region,
                                          double tol, bool strict = true,
                                          std::string name = "positive_definite");

// ---------------------------------------------------------------------------
// Steady-state (cascade) certificate
// ---------------------------------------------------------------------------

struct SteadyStateOptions {
    SimConfig sim{.t_end = 40.0, .step = 1e-3};
    double window = 0.5;       // trailing window for settling detection
    double settle_tol = 1e-6;  // max ||xdot||_inf over the window
    Vector x0;                 // defaults to the origin
};

struct SteadyStateOutcome {
    double u_bar = 0.0;
    bool settled = false;
    double y_tilde_bar = std::numeric_limits<double>::quiet_NaN();
    Vector x_final;
    double mismatch = std::numeric_limits<double>::quiet_NaN();  // |u_bar - y_tilde_bar|
};

struct AssumptionIiiResult {
    CertificateReport report;
    std::vector<SteadyStateOutcome> per_input;
    /// Nonzero coincidence roots from the closed-form steady-state match
    /// equation, when the cascade is the plant/HIGS pair (empty = none).
    std::optional<std::vector<double>> analytic_nonzero_roots;
};

/// For each nonzero constant input, simulates the cascade to steady state
/// and requires the settled downstream output to differ from the input by
/// more than tol. Inputs that do not settle within the horizon make the
/// verdict inconclusive (never fail). When plant parameters and k_h are
/// supplied, also runs the closed-form root check of the steady-state match
/// equation; any nonzero root is a failure witness.
AssumptionIiiResult check_assumption_iii(
    const CascadeInterconnection& cascade, const std::vector<double>& u_bars,
    const SteadyStateOptions& options, double tol,
    std::optional<std::pair<PlantParams, double>> plant_and_gain = {});

// ---------------------------------------------------------------------------
// Lyapunov decrease along a closed-loop run
// ---------------------------------------------------------------------------

struct LyapunovDecreaseOptions {
    double tol = 1e-6;
    double decay_fraction = 0.01;
};

/// W_sigma(t) sampled along a zero-input closed-loop trajectory must
/// (a) increase between consecutive samples by at most tol * (1 + |W|),
/// (b) jump by at most tol across switch instants, and
/// (c) end below decay_fraction * W(0).
/// worst_residual is the smallest of the three margins (>= 0 passes).
CertificateReport check_lyapunov_decrease(const Trajectory& joint_traj,
                                          const InterconnectionStorage& storage,
                                          const LyapunovDecreaseOptions& options = {},
                                          std::string name = "lyapunov_decrease");

// ---------------------------------------------------------------------------
// Observability-style assumptions (falsification only)
// ---------------------------------------------------------------------------

struct WindowCheckOptions {
    int window_samples = 100;
    double tol = 1e-6;
};

/// Sliding-window falsification over a trajectory ensemble:
///  - a window with a frozen output but a moving state falsifies the
///    output-observability assumption (so does y = 0 with x != 0);
///  - a window with a frozen state but a varying input falsifies the
///    input-effectiveness assumption (so does x = 0 with u != 0).
/// Verdict is not-falsified when no window witnesses a violation.
CertificateReport check_assumptions_i_ii(const std::vector<Trajectory>& ensemble,
                                         const WindowCheckOptions& options = {},
                                         std::string name = "assumptions_i_ii");

// ---------------------------------------------------------------------------
// Equilibrium scan
// ---------------------------------------------------------------------------

/// Damped Newton iteration with finite-difference Jacobians from each seed;
/// returns the deduplicated set of converged roots of fn.
std::vector<Vector> newton_roots(const std::function<Vector(const Vector&)>& fn,
                                 const std::vector<Vector>& seeds, double tol = 1e-12,
                                 int max_iter = 80);

}  // namespace swni
