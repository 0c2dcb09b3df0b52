#pragma once

#include "swni/core.hpp"

#include <functional>

namespace swni {

struct SimConfig {
    double t_end = 10.0;
    double step = 1e-3;
    double event_tolerance = 1e-9;  // bisection window, seconds
    int max_events_per_step = 8;    // Zeno guard
    int record_stride = 1;

    void validate() const;
};

/// Fixed-step simulation of a switched model with guard-event localization.
///
/// Within a mode the state advances by classic 4th-order one-step
/// integration. After each step the switching law is re-evaluated; a mode
/// change is localized on the step by bisection to within event_tolerance,
/// an event sample is inserted (post-switch mode, re-projected state), and
/// integration continues in the new mode. Output derivatives are recorded
/// analytically at every sample.
///
/// Throws ChatteringError when a single nominal step produces more than
/// max_events_per_step mode changes, DivergenceError on non-finite state.
Trajectory simulate(const SwitchedSystemModel& model, const Vector& x0,
                    const InputSignal& input, const SimConfig& config);

/// Earliest zero crossing of a scalar guard on [t_a, t_b], localized by
/// bisection to within tolerance. The interval is first scanned in
/// scan_intervals pieces so an even number of crossings inside it is still
/// found. Throws NoEventError when the guard has no sign change anywhere on
/// the interval.
double locate_event(const std::function<double(double)>& guard, double t_a, double t_b,
                    double tolerance, int scan_intervals = 64);

}  // namespace swni
