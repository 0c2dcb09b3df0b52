#pragma once

#include "swni/core.hpp"
#include "swni/systems.hpp"

#include <utility>

namespace swni {

/// Storage for a two-system interconnection: per joint mode (i, j),
///   W_{ij}(x, xt) = V_i(x) + Vt_j(xt) - h(x)^T ht(xt),
/// with epsilon_min = min of the two output-strictness levels.
struct InterconnectionStorage {
    StorageFamily family1;
    StorageFamily family2;
    OutputMap h1;
    OutputMap h2;
    OutputJacobian h1_jacobian;
    OutputJacobian h2_jacobian;
    int n1 = 0;
    int n2 = 0;
    int modes1 = 1;
    double epsilon_min = 0.0;

    double eval(const Vector& x, const Vector& x_tilde, ModeIndex joint_mode) const;
    double eval_joint(const Vector& joint_state, ModeIndex joint_mode) const;
    Vector gradient_joint(const Vector& joint_state, ModeIndex joint_mode) const;

    /// The same storage exposed as a per-joint-mode family over the stacked
    /// state, usable with the generic certificate checkers.
    StorageFamily as_family(int joint_mode_count) const;
};

double eval_W(const InterconnectionStorage& storage, const Vector& x, const Vector& x_tilde,
              ModeIndex joint_mode);

/// Positive feedback loop of two switched systems: e = u + yt, et = ut + y.
/// The joint model's input is the stacked external input (u, ut) and its
/// output is (y, yt). Joint mode m encodes the pair (i, j) as
/// m - 1 = (i - 1) + modes1 * (j - 1); switching instants of the two sides
/// are synchronized by construction (either side's change is a joint event).
struct FeedbackLoop {
    SwitchedSystemModel joint;
    InterconnectionStorage storage;
    StorageFamily joint_storage;  // storage.as_family over the joint modes

    SwitchedSystemModel h1;
    SwitchedSystemModel h2;
    StorageFamily storage1;
    StorageFamily storage2;
    InputSignal external_u;
    InputSignal external_u_tilde;

    int n1 = 0, n2 = 0, p = 0;
    int modes1 = 1, modes2 = 1;

    ModeIndex encode_mode(ModeIndex i, ModeIndex j) const;
    std::pair<ModeIndex, ModeIndex> decode_mode(ModeIndex joint_mode) const;

    double eval_W(const Vector& x, const Vector& x_tilde, ModeIndex joint_mode) const;

    /// The stacked external input signal (u, ut) for simulating the loop.
    InputSignal joint_input() const;

    /// Projects a joint trajectory onto one side (1 or 2). The subsystem
    /// trajectory carries that side's state slice, its own loop input
    /// (external plus the other side's output), its output and analytic
    /// output derivative, and its decoded mode; switch events are the joint
    /// events where this side's mode component changed.
    Trajectory subsystem_trajectory(const Trajectory& joint_traj, int side) const;
};

FeedbackLoop build_positive_feedback(const SystemWithStorage& h1, const SystemWithStorage& h2,
                                     InputSignal external_u, InputSignal external_u_tilde);

/// Zero external inputs.
FeedbackLoop build_positive_feedback(const SystemWithStorage& h1, const SystemWithStorage& h2);

/// Cascade interconnection: the first system's output drives the second
/// (ut = y). Joint input is the first system's external input; joint output
/// is the second system's output.
struct CascadeInterconnection {
    SwitchedSystemModel joint;
    SwitchedSystemModel h1;
    SwitchedSystemModel h2;
    int n1 = 0, n2 = 0, p = 0;
    int modes1 = 1, modes2 = 1;

    ModeIndex encode_mode(ModeIndex i, ModeIndex j) const;
    std::pair<ModeIndex, ModeIndex> decode_mode(ModeIndex joint_mode) const;
};

CascadeInterconnection build_cascade(const SystemWithStorage& h1, const SystemWithStorage& h2);

}  // namespace swni
