#include "swni/sim.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace swni {

void SimConfig::validate() const {
    if (!(step > 0.0)) {
        throw ContractViolation("step must be > 0");
    }
    if (!(event_tolerance > 0.0) || !(event_tolerance < step)) {
        throw ContractViolation("event_tolerance must be in (0, step)");
    }
    if (max_events_per_step < 1) {
        throw ContractViolation("max_events_per_step must be >= 1");
    }
    if (record_stride < 1) {
        throw ContractViolation("record_stride must be >= 1");
    }
    if (!(t_end > 0.0)) {
        throw ContractViolation("t_end must be > 0");
    }
}

namespace {

/// One classic Runge-Kutta step of length h in a fixed mode.
Vector rk4_step(const SwitchedSystemModel& model, ModeIndex mode, double t, const Vector& x,
                const InputSignal& input, double h) {
    const double tm = t + 0.5 * h;
    const double t1 = t + h;
    const Vector k1 = eval_mode_field(model, mode, x, input.value(t), input.derivative(t));
    const Vector um = input.value(tm);
    const Vector udm = input.derivative(tm);
    const Vector k2 = eval_mode_field(model, mode, x + 0.5 * h * k1, um, udm);
    const Vector k3 = eval_mode_field(model, mode, x + 0.5 * h * k2, um, udm);
    const Vector k4 =
        eval_mode_field(model, mode, x + h * k3, input.value(t1), input.derivative(t1));
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Vector apply_projection(const SwitchedSystemModel& model, ModeIndex mode, const Vector& x,
                        const Vector& u) {
    if (model.mode_projections.empty()) {
        return x;
    }
    const auto& proj = model.mode_projections[static_cast<std::size_t>(mode - 1)];
    return proj ? proj(x, u) : x;
}

void require_finite(const Vector& x, double t) {
    if (!x.allFinite()) {
        std::ostringstream os;
        os << "state diverged (non-finite) at t=" << t;
        throw DivergenceError(os.str());
    }
}

struct Engine {
    const SwitchedSystemModel& model;
    const InputSignal& input;
    const SimConfig& config;
    Trajectory traj;

    double t = 0.0;
    Vector x;
    ModeIndex mode = 1;
    int events_this_step = 0;

    void record(bool at_event) {
        if (!traj.samples.empty() && !(traj.samples.back().t < t)) {
            return;  // an event/breakpoint sample already sits at this time
        }
        TrajectorySample s;
        s.t = t;
        s.x = x;
        s.u = input.value(t);
        s.x_dot = eval_mode_field(model, mode, x, s.u, input.derivative(t));
        s.y = eval_output(model, x);
        s.y_dot = model.output_jacobian(x) * s.x_dot;
        s.mode = mode;
        s.at_event = at_event;
        traj.samples.push_back(std::move(s));
    }

    ModeIndex mode_at(double tau) const {
        const Vector xt = rk4_step(model, mode, t, x, input, tau - t);
        return select_mode(model, tau, xt, input.value(tau), input.derivative(tau));
    }

    /// Advances (t, x, mode) to `target`, inserting localized event samples
    /// for every mode change on the way.
    void advance_to(double target) {
        while (t < target) {
            const double h = target - t;
            Vector x_trial = rk4_step(model, mode, t, x, input, h);
            require_finite(x_trial, target);
            const ModeIndex mode_trial = select_mode(model, target, x_trial,
                                                     input.value(target),
                                                     input.derivative(target));
            if (mode_trial == mode || h <= config.event_tolerance) {
                x = apply_projection(model, mode_trial, x_trial, input.value(target));
                t = target;
                if (mode_trial != mode) {
                    traj.switch_events.push_back({t, mode, mode_trial, x});
                    mode = mode_trial;
                    record(true);
                }
                return;
            }

            if (++events_this_step > config.max_events_per_step) {
                std::ostringstream os;
                os << "more than " << config.max_events_per_step
                   << " mode changes within one step near t=" << t << " (chattering)";
                throw ChatteringError(os.str());
            }

            // Scan for the earliest subinterval where the selected mode
            // differs, then bisect. Ties at the bisection limit resolve to
            // the later-time mode (right-continuous switching signal).
            constexpr int kScan = 16;
            double lo = t;
            double hi = target;
            for (int s = 1; s < kScan; ++s) {
                const double tau = t + h * s / kScan;
                if (mode_at(tau) != mode) {
                    hi = tau;
                    break;
                }
                lo = tau;
            }
            while (hi - lo > config.event_tolerance) {
                const double mid = 0.5 * (lo + hi);
                if (mode_at(mid) == mode) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }

            const double t_event = hi;
            Vector x_event = rk4_step(model, mode, t, x, input, t_event - t);
            require_finite(x_event, t_event);
            const ModeIndex new_mode =
                select_mode(model, t_event, x_event, input.value(t_event),
                            input.derivative(t_event));
            x_event = apply_projection(model, new_mode, x_event, input.value(t_event));

            t = t_event;
            x = x_event;
            if (new_mode != mode) {
                traj.switch_events.push_back({t, mode, new_mode, x});
                mode = new_mode;
                record(true);
            }
        }
    }
};

}  // namespace

double locate_event(const std::function<double(double)>& guard, double t_a, double t_b,
                    double tolerance, int scan_intervals) {
    if (!(t_b > t_a) || !(tolerance > 0.0) || scan_intervals < 1) {
        throw ContractViolation("locate_event needs t_b > t_a, tolerance > 0, scans >= 1");
    }
    // Find the earliest subinterval with a sign change.
    double lo = t_a;
    double g_lo = guard(t_a);
    double hi = t_b;
    bool bracketed = false;
    for (int k = 1; k <= scan_intervals && !bracketed; ++k) {
        const double tk = k == scan_intervals ? t_b : t_a + (t_b - t_a) * k / scan_intervals;
        const double g = guard(tk);
        if (g_lo == 0.0 || g_lo * g <= 0.0) {
            hi = tk;
            bracketed = true;
        } else {
            lo = tk;
            g_lo = g;
        }
    }
    if (!bracketed) {
        throw NoEventError("guard has no sign change on the interval");
    }
    if (g_lo == 0.0) {
        return lo;
    }
    while (hi - lo > tolerance) {
        const double mid = 0.5 * (lo + hi);
        const double g_mid = guard(mid);
        if (g_lo * g_mid <= 0.0) {
            hi = mid;
        } else {
            lo = mid;
            g_lo = g_mid;
        }
    }
    return hi;
}

Trajectory simulate(const SwitchedSystemModel& model, const Vector& x0,
                    const InputSignal& input, const SimConfig& config) {
    config.validate();
    validate_model(model);
    if (static_cast<int>(x0.size()) != model.state_dim) {
        throw ContractViolation("initial state dimension mismatch");
    }

    Engine eng{model, input, config};
    eng.traj.step = config.step;
    eng.x = x0;
    eng.mode = select_mode(model, 0.0, x0, input.value(0.0), input.derivative(0.0));
    eng.x = apply_projection(model, eng.mode, eng.x, input.value(0.0));
    eng.record(false);

    std::vector<double> forced(input.breakpoints);
    std::sort(forced.begin(), forced.end());
    forced.erase(std::unique(forced.begin(), forced.end()), forced.end());
    std::size_t next_forced = 0;
    while (next_forced < forced.size() && forced[next_forced] <= 0.0) {
        ++next_forced;
    }

    const long n_steps = static_cast<long>(std::ceil(config.t_end / config.step - 1e-9));
    for (long k = 0; k < n_steps; ++k) {
        const double grid_end = std::min((k + 1) * config.step, config.t_end);
        eng.events_this_step = 0;

        bool forced_here = false;
        while (next_forced < forced.size() &&
               forced[next_forced] < grid_end - 0.5 * config.event_tolerance) {
            eng.advance_to(forced[next_forced]);
            eng.record(false);  // a sample is forced at each input breakpoint
            ++next_forced;
        }
        eng.advance_to(grid_end);
        if (next_forced < forced.size() &&
            std::abs(forced[next_forced] - grid_end) <= 0.5 * config.event_tolerance) {
            forced_here = true;
            ++next_forced;
        }

        if (((k + 1) % config.record_stride == 0) || (k + 1 == n_steps) || forced_here) {
            eng.record(false);
        }
    }

    return eng.traj;
}

}  // namespace swni
