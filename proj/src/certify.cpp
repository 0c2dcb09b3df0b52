#include "swni/certify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

namespace swni {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string format_point(const Vector& x) {
    std::ostringstream os;
    os << "(";
    for (int i = 0; i < x.size(); ++i) {
        os << (i ? ", " : "") << x[i];
    }
    os << ")";
    return os.str();
}

}  // namespace

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Pass:
            return "pass";
        case Verdict::Fail:
            return "fail";
        case Verdict::NotFalsified:
            return "not-falsified";
        case Verdict::Inconclusive:
            return "inconclusive";
    }
    return "unknown";
}

void RegionSpec::validate() const {
    const auto n = lower.size();
    if (n == 0 || upper.size() != n || counts.size() != static_cast<std::size_t>(n)) {
        throw ContractViolation("region bounds and counts must agree in dimension");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]) || !(upper[i] > lower[i])) {
            throw ContractViolation("region bounds must be finite with upper > lower");
        }
        if (counts[static_cast<std::size_t>(i)] < 2) {
            throw ContractViolation("region grid counts must be >= 2");
        }
    }
    if (origin_exclusion_radius < 0.0) {
        throw ContractViolation("origin_exclusion_radius must be >= 0");
    }
}

long RegionSpec::total_points() const {
    long total = 1;
    for (int c : counts) {
        total *= c;
    }
    return total;
}

void for_each_grid_point(const RegionSpec& region,
                         const std::function<void(const Vector&)>& visit) {
    region.validate();
    const int n = region.dim();
    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    Vector x(n);
    for (;;) {
        for (int i = 0; i < n; ++i) {
            const int c = region.counts[static_cast<std::size_t>(i)];
            x[i] = region.lower[i] + (region.upper[i] - region.lower[i]) * idx[static_cast<std::size_t>(i)] / (c - 1);
        }
        visit(x);
        int i = 0;
        for (; i < n; ++i) {
            if (++idx[static_cast<std::size_t>(i)] < region.counts[static_cast<std::size_t>(i)]) {
                break;
            }
            idx[static_cast<std::size_t>(i)] = 0;
        }
        if (i == n) {
            return;
        }
    }
}

CertificateReport check_pointwise(const Trajectory& traj,
                                  const std::function<double(const TrajectorySample&)>& residual,
                                  double tol, std::string name) {
    CertificateReport rep;
    rep.check_name = std::move(name);
    rep.tolerance = tol;
    rep.threshold = -tol;
    for (const auto& s : traj.samples) {
        const double r = residual(s);
        ++rep.samples_evaluated;
        if (r < rep.worst_residual) {
            rep.worst_residual = r;
            rep.worst_time = s.t;
            rep.worst_state = s.x;
        }
    }
    rep.verdict = rep.worst_residual >= rep.threshold ? Verdict::Pass : Verdict::Fail;
    return rep;
}

CertificateReport check_ni_dissipation(const Trajectory& traj, const StorageFamily& storage,
                                       double eps, double tol, std::string name) {
    auto residual = [&storage, eps](const TrajectorySample& s) {
        const double supply = s.u.dot(s.y_dot) - eps * s.y_dot.squaredNorm();
        return supply - storage.gradient(s.mode, s.x).dot(s.x_dot);
    };
    CertificateReport rep = check_pointwise(traj, residual, tol, std::move(name));
    std::ostringstream os;
    os << "dissipation residual with eps=" << eps << " over " << rep.samples_evaluated
       << " samples";
    rep.detail = os.str();
    return rep;
}

CertificateReport check_switch_monotonicity(const Trajectory& traj,
                                            const StorageFamily& storage, double tol,
                                            const std::optional<RegionSpec>& region,
                                            std::string name) {
    CertificateReport rep;
    rep.check_name = std::move(name);
    rep.tolerance = tol;
    rep.threshold = -tol;

    std::set<std::pair<ModeIndex, ModeIndex>> transitions;
    for (const auto& ev : traj.switch_events) {
        // Residual -(V_to - V_from): negative when the storage jumps up.
        const double dv = storage.value(ev.to_mode, ev.state) -
                          storage.value(ev.from_mode, ev.state);
        ++rep.samples_evaluated;
        if (-dv < rep.worst_residual) {
            rep.worst_residual = -dv;
            rep.worst_time = ev.t;
            rep.worst_state = ev.state;
        }
        transitions.emplace(ev.from_mode, ev.to_mode);
    }

    bool scanned = false;
    if (region && !transitions.empty()) {
        scanned = true;
        for (const auto& [from, to] : transitions) {
            for_each_grid_point(*region, [&](const Vector& x) {
                const double r = storage.value(from, x) - storage.value(to, x);
                ++rep.samples_evaluated;
                if (r < rep.worst_residual) {
                    rep.worst_residual = r;
                    rep.worst_time = std::numeric_limits<double>::quiet_NaN();
                    rep.worst_state = x;
                }
            });
        }
    }

    if (traj.switch_events.empty()) {
        rep.detail = "no switch events; vacuously monotone";
        rep.verdict = Verdict::Pass;
        return rep;
    }
    std::ostringstream os;
    os << traj.switch_events.size() << " switch events, " << transitions.size()
       << " distinct transitions" << (scanned ? ", region-scanned" : "");
    rep.detail = os.str();
    if (rep.worst_residual < rep.threshold) {
        rep.verdict = Verdict::Fail;
    } else {
        rep.verdict = scanned ? Verdict::NotFalsified : Verdict::Pass;
    }
    return rep;
}

CertificateReport check_positive_definite(const std::function<double(const Vector&)>& W,
                                          const RegionSpec& region, double tol, bool strict,
                                          std::string name) {
    region.validate();
    CertificateReport rep;
    rep.check_name = std::move(name);
    rep.tolerance = tol;
    rep.threshold = strict ? tol : -tol;

    const double excl2 = region.origin_exclusion_radius * region.origin_exclusion_radius;
    for_each_grid_point(region, [&](const Vector& x) {
        if (strict && x.squaredNorm() <= excl2) {
            return;
        }
        const double w = W(x);
        ++rep.samples_evaluated;
        if (w < rep.worst_residual) {
            rep.worst_residual = w;
            rep.worst_state = x;
        }
    });

    bool origin_ok = true;
    double w0 = 0.0;
    if (strict) {
        w0 = W(Vector::Zero(region.dim()));
        origin_ok = std::abs(w0) <= tol;
    }

    std::ostringstream os;
    os << (strict ? "strict positivity" : "nonnegativity") << " scan over "
       << rep.samples_evaluated << " grid points";
    if (strict) {
        os << "; W(origin) = " << w0;
    }
    if (rep.worst_residual < rep.threshold || !origin_ok) {
        rep.verdict = Verdict::Fail;
        os << "; violated at " << format_point(origin_ok ? rep.worst_state
                                                         : Vector::Zero(region.dim()));
        if (!origin_ok) {
            rep.worst_state = Vector::Zero(region.dim());
            rep.worst_residual = w0;
        }
    } else {
        rep.verdict = Verdict::NotFalsified;
    }
    rep.detail = os.str();
    return rep;
}

CertificateReport check_positive_definite(const InterconnectionStorage& storage,
                                          int joint_mode_count, const RegionSpec& region,
                                          double tol, bool strict, std::string name) {
    CertificateReport rep;
    bool have = false;
    for (ModeIndex m = 1; m <= joint_mode_count; ++m) {
        CertificateReport r = check_positive_definite(
            [&storage, m](const Vector& x) { return storage.eval_joint(x, m); }, region, tol,
            strict, name);
        const bool take = !have || (r.verdict == Verdict::Fail && rep.verdict != Verdict::Fail) ||
                          (r.verdict == rep.verdict && r.worst_residual < rep.worst_residual);
        const long seen = have ? rep.samples_evaluated : 0;
        if (take) {
            r.samples_evaluated += seen;
            rep = std::move(r);
        } else {
            rep.samples_evaluated += r.samples_evaluated;
        }
        have = true;
    }
    return rep;
}

AssumptionIiiResult check_assumption_iii(
    const CascadeInterconnection& cascade, const std::vector<double>& u_bars,
    const SteadyStateOptions& options, double tol,
    std::optional<std::pair<PlantParams, double>> plant_and_gain) {
    if (cascade.p != 1) {
        throw ContractViolation("steady-state check expects a scalar channel");
    }
    AssumptionIiiResult result;
    CertificateReport& rep = result.report;
    rep.check_name = "assumption_iii";
    rep.tolerance = tol;
    rep.threshold = tol;  // mismatch |u - y~| must stay above tol

    bool any_unsettled = false;
    for (double u_bar : u_bars) {
        if (u_bar == 0.0) {
            throw ContractViolation("steady-state inputs must be nonzero");
        }
        SteadyStateOutcome out;
        out.u_bar = u_bar;

        Vector u(1);
        u[0] = u_bar;
        const Vector x0 = options.x0.size()
                              ? options.x0
                              : Vector::Zero(cascade.joint.state_dim);
        const Trajectory traj =
            simulate(cascade.joint, x0, constant_input(u), options.sim);

        double max_rate = 0.0;
        const double window_start = options.sim.t_end - options.window;
        for (auto it = traj.samples.rbegin();
             it != traj.samples.rend() && it->t >= window_start; ++it) {
            max_rate = std::max(max_rate, it->x_dot.lpNorm<Eigen::Infinity>());
        }
        out.settled = max_rate < options.settle_tol;
        out.x_final = traj.samples.back().x;
        if (out.settled) {
            out.y_tilde_bar = traj.samples.back().y[0];
            out.mismatch = std::abs(u_bar - out.y_tilde_bar);
            ++rep.samples_evaluated;
            if (out.mismatch < rep.worst_residual) {
                rep.worst_residual = out.mismatch;
                rep.worst_time = traj.samples.back().t;
                rep.worst_state = out.x_final;
            }
        } else {
            any_unsettled = true;
        }
        result.per_input.push_back(std::move(out));
    }

    std::ostringstream os;
    os << result.per_input.size() << " constant inputs; smallest steady mismatch "
       << rep.worst_residual;
    bool analytic_fail = false;
    if (plant_and_gain) {
        const auto roots = steady_state_match_roots(plant_and_gain->first,
                                                    plant_and_gain->second);
        result.analytic_nonzero_roots = roots;
        if (roots.empty()) {
            os << "; match equation has no nonzero root";
        } else {
            analytic_fail = true;
            os << "; match equation has nonzero roots";
            for (double r : roots) {
                os << " " << r;
            }
        }
    }
    if (any_unsettled) {
        os << "; some inputs did not settle within the horizon";
    }
    rep.detail = os.str();

    if (analytic_fail || rep.worst_residual < rep.threshold) {
        rep.verdict = Verdict::Fail;
    } else if (any_unsettled) {
        rep.verdict = Verdict::Inconclusive;
    } else {
        rep.verdict = Verdict::Pass;
    }
    return result;
}

CertificateReport check_lyapunov_decrease(const Trajectory& joint_traj,
                                          const InterconnectionStorage& storage,
                                          const LyapunovDecreaseOptions& options,
                                          std::string name) {
    if (joint_traj.empty()) {
        throw ContractViolation("lyapunov decrease needs a nonempty trajectory");
    }
    CertificateReport rep;
    rep.check_name = std::move(name);
    rep.tolerance = options.tol;
    rep.threshold = 0.0;

    std::vector<double> w(joint_traj.samples.size());
    for (std::size_t k = 0; k < joint_traj.samples.size(); ++k) {
        w[k] = storage.eval_joint(joint_traj.samples[k].x, joint_traj.samples[k].mode);
    }

    double margin_between = kInf;
    std::size_t worst_between = 0;
    for (std::size_t k = 0; k + 1 < w.size(); ++k) {
        const double m = options.tol * (1.0 + std::abs(w[k])) - (w[k + 1] - w[k]);
        if (m < margin_between) {
            margin_between = m;
            worst_between = k + 1;
        }
        ++rep.samples_evaluated;
    }

    double margin_jump = kInf;
    const SwitchEvent* worst_event = nullptr;
    for (const auto& ev : joint_traj.switch_events) {
        const double jump = storage.eval_joint(ev.state, ev.to_mode) -
                            storage.eval_joint(ev.state, ev.from_mode);
        const double m = options.tol - jump;
        if (m < margin_jump) {
            margin_jump = m;
            worst_event = &ev;
        }
    }

    const double w0 = w.front();
    const double w_end = w.back();
    const double margin_terminal = options.decay_fraction * w0 - w_end;

    rep.worst_residual = std::min({margin_between, margin_jump, margin_terminal});
    std::ostringstream os;
    os << "W(0)=" << w0 << ", W(end)=" << w_end << ", decay_fraction="
       << options.decay_fraction;
    if (rep.worst_residual == margin_terminal) {
        os << "; binding: terminal decay";
        rep.worst_time = joint_traj.samples.back().t;
        rep.worst_state = joint_traj.samples.back().x;
    } else if (rep.worst_residual == margin_between) {
        os << "; binding: inter-sample increase";
        rep.worst_time = joint_traj.samples[worst_between].t;
        rep.worst_state = joint_traj.samples[worst_between].x;
    } else if (worst_event != nullptr) {
        os << "; binding: switch jump";
        rep.worst_time = worst_event->t;
        rep.worst_state = worst_event->state;
    }
    rep.detail = os.str();
    rep.verdict = rep.worst_residual >= 0.0 ? Verdict::Pass : Verdict::Fail;
    return rep;
}

CertificateReport check_assumptions_i_ii(const std::vector<Trajectory>& ensemble,
                                         const WindowCheckOptions& options,
                                         std::string name) {
    CertificateReport rep;
    rep.check_name = std::move(name);
    rep.tolerance = options.tol;
    rep.threshold = 0.0;
    rep.worst_residual = kInf;

    const double tol = options.tol;
    const double loose = std::sqrt(tol);
    const int w = std::max(2, options.window_samples);

    auto falsify = [&rep](double magnitude, double t, const Vector& x,
                          const std::string& which) {
        if (-magnitude < rep.worst_residual) {
            rep.worst_residual = -magnitude;
            rep.worst_time = t;
            rep.worst_state = x;
            rep.detail = which;
        }
    };

    for (const auto& traj : ensemble) {
        const auto& s = traj.samples;
        const long n = static_cast<long>(s.size());
        for (long start = 0; start + w <= n; start += w / 2) {
            double ydot_max = 0, xdot_max = 0, y_max = 0, x_max = 0, uvar = 0, u_max = 0;
            const Vector& u0 = s[static_cast<std::size_t>(start)].u;
            for (long k = start; k < start + w; ++k) {
                const auto& smp = s[static_cast<std::size_t>(k)];
                ydot_max = std::max(ydot_max, smp.y_dot.lpNorm<Eigen::Infinity>());
                xdot_max = std::max(xdot_max, smp.x_dot.lpNorm<Eigen::Infinity>());
                y_max = std::max(y_max, smp.y.lpNorm<Eigen::Infinity>());
                x_max = std::max(x_max, smp.x.lpNorm<Eigen::Infinity>());
                uvar = std::max(uvar, (smp.u - u0).lpNorm<Eigen::Infinity>());
                u_max = std::max(u_max, smp.u.lpNorm<Eigen::Infinity>());
            }
            ++rep.samples_evaluated;
            const auto& first = s[static_cast<std::size_t>(start)];
            // Frozen output must mean frozen state; zero output, zero state.
            if (ydot_max <= tol && xdot_max > loose) {
                falsify(xdot_max, first.t, first.x, "state moves while output is frozen");
            }
            if (y_max <= tol && x_max > loose) {
                falsify(x_max, first.t, first.x, "state nonzero while output is zero");
            }
            // Frozen state must mean frozen input; zero state, zero input.
            if (xdot_max <= tol && uvar > loose) {
                falsify(uvar, first.t, first.x, "input varies while state is frozen");
            }
            if (x_max <= tol && u_max > loose) {
                falsify(u_max, first.t, first.x, "input nonzero while state is zero");
            }
        }
    }

    if (rep.worst_residual < rep.threshold) {
        rep.verdict = Verdict::Fail;
    } else {
        rep.verdict = Verdict::NotFalsified;
        rep.detail = "no window falsified the assumptions";
    }
    return rep;
}

std::vector<Vector> newton_roots(const std::function<Vector(const Vector&)>& fn,
                                 const std::vector<Vector>& seeds, double tol, int max_iter) {
    std::vector<Vector> roots;
    for (const Vector& seed : seeds) {
        Vector x = seed;
        const int n = static_cast<int>(x.size());
        bool converged = false;
        for (int it = 0; it < max_iter; ++it) {
            const Vector r = fn(x);
            if (r.norm() <= tol) {
                converged = true;
                break;
            }
            Matrix J(n, n);
            for (int c = 0; c < n; ++c) {
                const double h = 1e-7 * std::max(1.0, std::abs(x[c]));
                Vector xp = x;
                xp[c] += h;
                Vector xm = x;
                xm[c] -= h;
                J.col(c) = (fn(xp) - fn(xm)) / (2.0 * h);
            }
            const Vector step = J.fullPivLu().solve(-r);
            if (!step.allFinite()) {
                break;
            }
            // Damping: halve until the residual shrinks.
            double alpha = 1.0;
            const double r0 = r.norm();
            Vector x_next = x + step;
            for (int d = 0; d < 30 && fn(x_next).norm() >= r0; ++d) {
                alpha *= 0.5;
                x_next = x + alpha * step;
            }
            x = x_next;
        }
        if (!converged || !x.allFinite()) {
            continue;
        }
        const bool duplicate = std::any_of(roots.begin(), roots.end(), [&](const Vector& r) {
            return (r - x).norm() <= 1e-6 * std::max(1.0, x.norm());
        });
        if (!duplicate) {
            roots.push_back(x);
        }
    }
    return roots;
}

}  // namespace swni
