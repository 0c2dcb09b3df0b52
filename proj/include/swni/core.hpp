#pragma once

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace swni {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Mode indices are 1-based and dense: a model with N modes uses {1..N}.
using ModeIndex = int;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ContractViolation : Error {
    using Error::Error;
};
struct InvalidModeError : Error {
    using Error::Error;
};
struct WellPosednessError : Error {
    using Error::Error;
};
struct ChatteringError : Error {
    using Error::Error;
};
struct DivergenceError : Error {
    using Error::Error;
};
struct ConstraintDriftError : Error {
    using Error::Error;
};
struct NoEventError : Error {
    using Error::Error;
};
struct IncompleteStorageError : Error {
    using Error::Error;
};

// ---------------------------------------------------------------------------
// Switching laws
// ---------------------------------------------------------------------------

/// Mode selection from (t, x, u, u_dot). Must be evaluable at any point in
/// the trajectory's domain; the selected mode at an event instant is the
/// post-switch mode (right-continuous switching signal).
using GuardSelect =
    std::function<ModeIndex(double t, const Vector& x, const Vector& u, const Vector& u_dot)>;

struct SingleMode {
    ModeIndex mode = 1;
};

/// Pre-planned switching times. Times must be strictly increasing; the mode
/// at t in [t_k, t_{k+1}) is i_k.
struct TimeSchedule {
    ModeIndex initial = 1;
    std::vector<std::pair<double, ModeIndex>> switches;

    ModeIndex mode_at(double t) const;
    void validate() const;
};

struct StateGuard {
    GuardSelect select;
};

using SwitchingLaw = std::variant<SingleMode, TimeSchedule, StateGuard>;

// ---------------------------------------------------------------------------
// Switched system model
// ---------------------------------------------------------------------------

/// Per-mode vector field f_i(x, u, u_dot) -> dx/dt. For systems that do not
/// declare needs_input_derivative, u_dot is passed as a zero vector and must
/// be ignored.
using VectorField =
    std::function<Vector(const Vector& x, const Vector& u, const Vector& u_dot)>;

using OutputMap = std::function<Vector(const Vector& x)>;
using OutputJacobian = std::function<Matrix(const Vector& x)>;

/// Optional per-mode algebraic re-projection applied after each integration
/// step while the mode is active (and on entry into it). Used for modes that
/// carry an index-1 constraint instead of a genuine differential equation.
using StateProjection = std::function<Vector(const Vector& x, const Vector& u)>;

/// A family of mode vector fields sharing one state, one input and one
/// output map, plus the law selecting the active mode. Square by contract:
/// the output dimension equals input_dim.
///
/// Instances are immutable values after construction and safe to share
/// read-only across threads.
struct SwitchedSystemModel {
    int state_dim = 0;
    int input_dim = 0;
    std::vector<VectorField> modes;
    OutputMap output_map;
    OutputJacobian output_jacobian;
    bool needs_input_derivative = false;
    SwitchingLaw switching_law = SingleMode{};
    std::vector<StateProjection> mode_projections;  // empty, or one slot per mode (may be null)
    std::vector<std::string> state_names;           // cosmetic; may be empty

    int mode_count() const { return static_cast<int>(modes.size()); }
};

/// Throws InvalidModeError unless i is in {1..N}.
void require_valid_mode(const SwitchedSystemModel& model, ModeIndex i);

/// Probes the model's evaluators at the origin and checks the declared
/// dimensions (square output, mode fields producing state_dim vectors).
/// Throws ContractViolation on mismatch.
void validate_model(const SwitchedSystemModel& model);

/// Active mode under the model's switching law.
ModeIndex select_mode(const SwitchedSystemModel& model, double t, const Vector& x,
                      const Vector& u, const Vector& u_dot);

/// dx/dt under mode i, with dimension checks.
Vector eval_mode_field(const SwitchedSystemModel& model, ModeIndex i, const Vector& x,
                       const Vector& u, const Vector& u_dot);

Vector eval_output(const SwitchedSystemModel& model, const Vector& x);

/// dy/dt = dh/dx(x) . f_i(x, u), the directional derivative of the output
/// along the active mode's flow. Computed from the analytic output Jacobian,
/// never from differentiating recorded outputs.
Vector eval_output_derivative(const SwitchedSystemModel& model, const Vector& x,
                              const Vector& u, ModeIndex i, const Vector& u_dot = Vector());

// ---------------------------------------------------------------------------
// Storage functions
// ---------------------------------------------------------------------------

using ScalarField = std::function<double(const Vector&)>;
using GradientField = std::function<Vector(const Vector&)>;

/// Per-mode storage functions V_i >= 0 with analytic gradients.
/// output_strictness is the epsilon of the dissipation inequality the family
/// certifies; 0 means the plain (non-strict) inequality.
struct StorageFamily {
    std::vector<ScalarField> values;
    std::vector<GradientField> gradients;
    double output_strictness = 0.0;

    int mode_count() const { return static_cast<int>(values.size()); }
    double value(ModeIndex i, const Vector& x) const;
    Vector gradient(ModeIndex i, const Vector& x) const;
};

/// Family whose modes all share one storage function.
StorageFamily common_storage(int n_modes, ScalarField value, GradientField gradient,
                             double output_strictness = 0.0);

// ---------------------------------------------------------------------------
// Trajectories
// ---------------------------------------------------------------------------

struct TrajectorySample {
    double t = 0.0;
    Vector x;
    Vector x_dot;  // analytic field value at the sample
    Vector u;
    Vector y;
    Vector y_dot;  // analytic output derivative at the sample
    ModeIndex mode = 1;
    bool at_event = false;
};

struct SwitchEvent {
    double t = 0.0;
    ModeIndex from_mode = 1;
    ModeIndex to_mode = 1;
    Vector state;  // the (continuous) state at the switch instant
};

/// Time-stamped record of a simulation run. Sample times are strictly
/// increasing and uniform except at inserted event/breakpoint samples; the
/// state is continuous across switch events (a single sample is stored at
/// each event instant, carrying the post-switch mode).
struct Trajectory {
    std::vector<TrajectorySample> samples;
    std::vector<SwitchEvent> switch_events;
    double step = 0.0;

    bool empty() const { return samples.empty(); }
};

// ---------------------------------------------------------------------------
// Input signals
// ---------------------------------------------------------------------------

/// Inputs are supplied as (value, derivative) pairs of callables so that
/// guards and interconnections can read analytic input derivatives.
/// Breakpoints force a sample (and a step boundary) at the listed times.
struct InputSignal {
    std::function<Vector(double)> value;
    std::function<Vector(double)> derivative;
    std::vector<double> breakpoints;
};

InputSignal zero_input(int dim);
InputSignal constant_input(Vector v);

/// Piecewise-constant signal: value v_k on [t_k, t_{k+1}), derivative zero
/// away from the breakpoints.
InputSignal piecewise_constant_input(std::vector<double> times, std::vector<Vector> values);

/// Piecewise-linear interpolant of a sampled signal; derivative is the
/// segment slope.
InputSignal sampled_linear_input(std::vector<double> times, std::vector<Vector> values);

InputSignal sine_input(double amplitude, double angular_frequency, double phase = 0.0);

/// Concatenates two signals into one of dimension dim_a + dim_b.
InputSignal stack_inputs(const InputSignal& a, int dim_a, const InputSignal& b, int dim_b);

}  // namespace swni
