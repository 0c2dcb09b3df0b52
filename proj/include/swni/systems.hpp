#pragma once

#include "swni/core.hpp"

#include <utility>
#include <vector>

namespace swni {

// ---------------------------------------------------------------------------
// Hybrid integrator-gain system (HIGS)
// ---------------------------------------------------------------------------

struct HigsParams {
    double omega_h = 1.0;  // integrator frequency, 1/s, >= 0
    double k_h = 1.0;      // gain value, dimensionless, > 0

    void validate() const;
};

enum class HigsMode : ModeIndex {
    Integrator = 1,
    Gain = 2,
};

/// Relative tolerance on the gain-branch equality u = k_h e. The continuous
/// definition uses exact equality, which a simulated trajectory meets only to
/// localization accuracy.
inline constexpr double kHigsGuardTol = 1e-9;

/// Active HIGS mode for the input/output/input-rate triple (e, u, edot),
/// where u is the controller output (= x_h). Returns Gain iff the triple is
/// in the gain branch: u = k_h e (within guard_tol, relative) and
/// omega_h e^2 > k_h e edot. Every other point, including ambiguous boundary
/// points, selects Integrator, which is the primary mode of operation.
HigsMode higs_mode_select(double e, double u, double edot, const HigsParams& params,
                          double guard_tol = kHigsGuardTol);

/// Sector membership residual e*u - u^2/k_h; nonnegative exactly on the
/// sector [0, k_h] the HIGS is confined to.
double higs_sector_residual(double e, double u, double k_h);

/// One evaluation of the HIGS dynamics: returns (x_h_dot, output).
/// Integrator mode integrates the input; the gain branch is an algebraic
/// constraint x_h = k_h e treated as an index-1 equation, so its rate is
/// k_h edot and callers must keep x_h consistent (see higs gain projection).
/// Throws ConstraintDriftError if the gain-branch state has drifted from
/// k_h e beyond drift_tol (relative).
std::pair<double, double> higs_dynamics(double x_h, double e, double edot, HigsMode mode,
                                        const HigsParams& params, double drift_tol = 1e-6);

/// Common storage function x_h^2 / (2 k_h), shared by both modes.
double higs_storage(double x_h, const HigsParams& params);

// ---------------------------------------------------------------------------
// Nonlinear mass-spring-damper plant
// ---------------------------------------------------------------------------

/// x1_dot = x2
/// x2_dot = -cubic_stiffness x1^3 - linear_stiffness x1 - damping x2 + u
/// y      = x1
///
/// With the canonical coefficients (all 1) this is the nonlinear plant whose
/// storage certifies output strictness epsilon = damping.
struct PlantParams {
    double cubic_stiffness = 1.0;
    double linear_stiffness = 1.0;
    double damping = 1.0;
};

/// Canonical plant dynamics (all coefficients 1): returns (x1_dot, x2_dot, y).
std::tuple<double, double, double> plant_dynamics(double x1, double x2, double u);

/// Canonical plant storage 1/4 x1^4 + 1/2 x1^2 + 1/2 x2^2.
double plant_storage(double x1, double x2);

// ---------------------------------------------------------------------------
// Model factories
// ---------------------------------------------------------------------------

struct SystemWithStorage {
    SwitchedSystemModel model;
    StorageFamily storage;
};

/// Two-mode switched model of the HIGS with its state-dependent switching
/// law, gain-branch re-projection, and common storage family (epsilon = 0).
SystemWithStorage make_higs(const HigsParams& params, double guard_tol = kHigsGuardTol);

/// Single-mode plant model with storage family; output strictness equals the
/// damping coefficient.
SystemWithStorage make_plant(const PlantParams& params = {});

/// Nonzero solutions of x1^3 stays put under the loop's steady-state match
/// equation: cubic_stiffness x1^3 + linear_stiffness x1 = k_h x1. Returns the
/// nonzero real roots (empty when the only root is x1 = 0, i.e. when
/// k_h <= linear_stiffness). These are exactly the constant-in/constant-out
/// coincidence points the cascade steady-state condition must exclude.
std::vector<double> steady_state_match_roots(const PlantParams& plant, double k_h);

}  // namespace swni
