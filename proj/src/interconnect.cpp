#include "swni/interconnect.hpp"

#include <algorithm>
#include <cmath>

namespace swni {

namespace {

ModeIndex encode_pair(ModeIndex i, ModeIndex j, int modes1) {
    return (i - 1) + modes1 * (j - 1) + 1;
}

std::pair<ModeIndex, ModeIndex> decode_pair(ModeIndex m, int modes1) {
    return {((m - 1) % modes1) + 1, ((m - 1) / modes1) + 1};
}

void check_composable(const SystemWithStorage& a, const SystemWithStorage& b) {
    validate_model(a.model);
    validate_model(b.model);
    if (a.model.input_dim != b.model.input_dim) {
        throw ContractViolation("interconnected systems must share the channel dimension");
    }
    if (a.storage.mode_count() != a.model.mode_count() ||
        b.storage.mode_count() != b.model.mode_count()) {
        throw IncompleteStorageError("each mode needs a storage function before composing");
    }
}

std::vector<std::string> joined_state_names(const SwitchedSystemModel& a,
                                            const SwitchedSystemModel& b) {
    std::vector<std::string> names;
    if (a.state_names.size() == static_cast<std::size_t>(a.state_dim) &&
        b.state_names.size() == static_cast<std::size_t>(b.state_dim)) {
        names = a.state_names;
        names.insert(names.end(), b.state_names.begin(), b.state_names.end());
    }
    return names;
}

/// Everything the loop needs at one evaluation point. The side whose fields
/// and guard ignore input derivatives is resolved first; its analytic output
/// derivative then supplies the other side's input-derivative channel.
struct LoopPoint {
    Vector e1, e2;        // loop inputs of the two sides
    Vector e1_dot, e2_dot;
    ModeIndex i1 = 1, i2 = 1;
    Vector f1, f2;
};

struct LoopWiring {
    SwitchedSystemModel m1;
    SwitchedSystemModel m2;
    int n1, n2, p;
    bool resolve_second_first;  // true when side 1 needs input derivatives

    Vector x_part(const Vector& xs, int side) const {
        return side == 1 ? xs.head(n1) : xs.tail(n2);
    }

    /// Computes loop inputs, modes and fields at (t, joint x, joint u).
    /// When frozen_mode is nonzero the side modes are taken from it instead
    /// of the switching laws (a step integrates a frozen mode).
    LoopPoint resolve(double t, const Vector& xs, const Vector& us, const Vector& us_dot,
                      ModeIndex frozen_mode) const {
        LoopPoint pt;
        const Vector x1 = xs.head(n1);
        const Vector x2 = xs.tail(n2);
        const Vector y1 = m1.output_map(x1);
        const Vector y2 = m2.output_map(x2);
        pt.e1 = us.head(p) + y2;
        pt.e2 = us.tail(p) + y1;

        if (frozen_mode != 0) {
            const auto [i1, i2] = decode_pair(frozen_mode, m1.mode_count());
            pt.i1 = i1;
            pt.i2 = i2;
        }

        const Vector zero = Vector::Zero(p);
        auto resolve_side = [&](int side, const Vector& known_edot) -> Vector {
            const SwitchedSystemModel& m = side == 1 ? m1 : m2;
            const Vector& x = side == 1 ? x1 : x2;
            const Vector& e = side == 1 ? pt.e1 : pt.e2;
            ModeIndex& i = side == 1 ? pt.i1 : pt.i2;
            Vector& edot = side == 1 ? pt.e1_dot : pt.e2_dot;
            Vector& f = side == 1 ? pt.f1 : pt.f2;
            edot = known_edot;
            if (frozen_mode == 0) {
                i = select_mode(m, t, x, e, edot);
            }
            f = eval_mode_field(m, i, x, e, edot);
            return (side == 1 ? m1.output_jacobian(x1) : m2.output_jacobian(x2)) * f;
        };

        if (resolve_second_first) {
            const Vector y2_dot = resolve_side(2, zero);
            resolve_side(1, us_dot.head(p) + y2_dot);
        } else {
            const Vector y1_dot = resolve_side(1, zero);
            resolve_side(2, us_dot.tail(p) + y1_dot);
        }
        return pt;
    }
};

}  // namespace

double InterconnectionStorage::eval(const Vector& x, const Vector& x_tilde,
                                    ModeIndex joint_mode) const {
    const auto [i, j] = decode_pair(joint_mode, modes1);
    return family1.value(i, x) + family2.value(j, x_tilde) - h1(x).dot(h2(x_tilde));
}

double InterconnectionStorage::eval_joint(const Vector& joint_state,
                                          ModeIndex joint_mode) const {
    return eval(joint_state.head(n1), joint_state.tail(n2), joint_mode);
}

Vector InterconnectionStorage::gradient_joint(const Vector& joint_state,
                                              ModeIndex joint_mode) const {
    const auto [i, j] = decode_pair(joint_mode, modes1);
    const Vector x = joint_state.head(n1);
    const Vector xt = joint_state.tail(n2);
    Vector g(n1 + n2);
    g.head(n1) = family1.gradient(i, x) - h1_jacobian(x).transpose() * h2(xt);
    g.tail(n2) = family2.gradient(j, xt) - h2_jacobian(xt).transpose() * h1(x);
    return g;
}

StorageFamily InterconnectionStorage::as_family(int joint_mode_count) const {
    StorageFamily family;
    family.output_strictness = epsilon_min;
    for (ModeIndex m = 1; m <= joint_mode_count; ++m) {
        family.values.push_back(
            [self = *this, m](const Vector& xs) { return self.eval_joint(xs, m); });
        family.gradients.push_back(
            [self = *this, m](const Vector& xs) { return self.gradient_joint(xs, m); });
    }
    return family;
}

double eval_W(const InterconnectionStorage& storage, const Vector& x, const Vector& x_tilde,
              ModeIndex joint_mode) {
    return storage.eval(x, x_tilde, joint_mode);
}

ModeIndex FeedbackLoop::encode_mode(ModeIndex i, ModeIndex j) const {
    return encode_pair(i, j, modes1);
}

std::pair<ModeIndex, ModeIndex> FeedbackLoop::decode_mode(ModeIndex joint_mode) const {
    return decode_pair(joint_mode, modes1);
}

double FeedbackLoop::eval_W(const Vector& x, const Vector& x_tilde,
                            ModeIndex joint_mode) const {
    return storage.eval(x, x_tilde, joint_mode);
}

InputSignal FeedbackLoop::joint_input() const {
    return stack_inputs(external_u, p, external_u_tilde, p);
}

Trajectory FeedbackLoop::subsystem_trajectory(const Trajectory& joint_traj, int side) const {
    if (side != 1 && side != 2) {
        throw ContractViolation("side must be 1 or 2");
    }
    const int n_self = side == 1 ? n1 : n2;
    const int off_self = side == 1 ? 0 : n1;
    const int off_other = side == 1 ? n1 : 0;
    const int n_other = side == 1 ? n2 : n1;
    const SwitchedSystemModel& other = side == 1 ? h2 : h1;
    const int u_off = side == 1 ? 0 : p;

    Trajectory sub;
    sub.step = joint_traj.step;
    sub.samples.reserve(joint_traj.samples.size());
    for (const auto& s : joint_traj.samples) {
        TrajectorySample t;
        t.t = s.t;
        t.x = s.x.segment(off_self, n_self);
        t.x_dot = s.x_dot.segment(off_self, n_self);
        // The side's own loop input: external channel plus the other output.
        t.u = s.u.segment(u_off, p) + other.output_map(s.x.segment(off_other, n_other));
        t.y = s.y.segment(u_off, p);
        t.y_dot = s.y_dot.segment(u_off, p);
        const auto [i1, i2] = decode_mode(s.mode);
        t.mode = side == 1 ? i1 : i2;
        t.at_event = s.at_event;
        sub.samples.push_back(std::move(t));
    }
    for (const auto& ev : joint_traj.switch_events) {
        const auto [from1, from2] = decode_mode(ev.from_mode);
        const auto [to1, to2] = decode_mode(ev.to_mode);
        const ModeIndex from = side == 1 ? from1 : from2;
        const ModeIndex to = side == 1 ? to1 : to2;
        if (from != to) {
            sub.switch_events.push_back({ev.t, from, to, ev.state.segment(off_self, n_self)});
        }
    }
    return sub;
}

FeedbackLoop build_positive_feedback(const SystemWithStorage& h1, const SystemWithStorage& h2,
                                     InputSignal external_u, InputSignal external_u_tilde) {
    check_composable(h1, h2);
    if (h1.model.needs_input_derivative && h2.model.needs_input_derivative) {
        throw WellPosednessError(
            "both sides read input derivatives; the loop's derivative channel "
            "cannot be resolved");
    }

    FeedbackLoop loop;
    loop.h1 = h1.model;
    loop.h2 = h2.model;
    loop.storage1 = h1.storage;
    loop.storage2 = h2.storage;
    loop.n1 = h1.model.state_dim;
    loop.n2 = h2.model.state_dim;
    loop.p = h1.model.input_dim;
    loop.modes1 = h1.model.mode_count();
    loop.modes2 = h2.model.mode_count();
    loop.external_u = std::move(external_u);
    loop.external_u_tilde = std::move(external_u_tilde);

    LoopWiring wiring{h1.model, h2.model, loop.n1, loop.n2, loop.p,
                      h1.model.needs_input_derivative};

    SwitchedSystemModel joint;
    joint.state_dim = loop.n1 + loop.n2;
    joint.input_dim = 2 * loop.p;
    joint.needs_input_derivative =
        h1.model.needs_input_derivative || h2.model.needs_input_derivative;
    joint.state_names = joined_state_names(h1.model, h2.model);

    const int joint_modes = loop.modes1 * loop.modes2;
    for (ModeIndex m = 1; m <= joint_modes; ++m) {
        joint.modes.push_back(
            [wiring, m](const Vector& xs, const Vector& us, const Vector& us_dot) {
                const LoopPoint pt = wiring.resolve(0.0, xs, us, us_dot, m);
                Vector dx(wiring.n1 + wiring.n2);
                dx.head(wiring.n1) = pt.f1;
                dx.tail(wiring.n2) = pt.f2;
                return dx;
            });
    }

    joint.output_map = [wiring](const Vector& xs) {
        Vector y(2 * wiring.p);
        y.head(wiring.p) = wiring.m1.output_map(xs.head(wiring.n1));
        y.tail(wiring.p) = wiring.m2.output_map(xs.tail(wiring.n2));
        return y;
    };
    joint.output_jacobian = [wiring](const Vector& xs) {
        Matrix J = Matrix::Zero(2 * wiring.p, wiring.n1 + wiring.n2);
        J.topLeftCorner(wiring.p, wiring.n1) = wiring.m1.output_jacobian(xs.head(wiring.n1));
        J.bottomRightCorner(wiring.p, wiring.n2) =
            wiring.m2.output_jacobian(xs.tail(wiring.n2));
        return J;
    };

    joint.switching_law = StateGuard{
        [wiring](double t, const Vector& xs, const Vector& us, const Vector& us_dot) {
            const LoopPoint pt = wiring.resolve(t, xs, us, us_dot, 0);
            return encode_pair(pt.i1, pt.i2, wiring.m1.mode_count());
        }};

    const bool any_projection = !h1.model.mode_projections.empty() ||
                                !h2.model.mode_projections.empty();
    if (any_projection) {
        joint.mode_projections.resize(static_cast<std::size_t>(joint_modes));
        for (ModeIndex m = 1; m <= joint_modes; ++m) {
            joint.mode_projections[static_cast<std::size_t>(m - 1)] =
                [wiring, m](const Vector& xs, const Vector& us) {
                    const auto [i, j] = decode_pair(m, wiring.m1.mode_count());
                    Vector out = xs;
                    if (!wiring.m1.mode_projections.empty()) {
                        if (const auto& proj =
                                wiring.m1.mode_projections[static_cast<std::size_t>(i - 1)]) {
                            const Vector e1 = us.head(wiring.p) +
                                              wiring.m2.output_map(xs.tail(wiring.n2));
                            out.head(wiring.n1) = proj(xs.head(wiring.n1), e1);
                        }
                    }
                    if (!wiring.m2.mode_projections.empty()) {
                        if (const auto& proj =
                                wiring.m2.mode_projections[static_cast<std::size_t>(j - 1)]) {
                            // Side 1 may have just moved; recompute its output.
                            const Vector e2 = us.tail(wiring.p) +
                                              wiring.m1.output_map(out.head(wiring.n1));
                            out.tail(wiring.n2) = proj(xs.tail(wiring.n2), e2);
                        }
                    }
                    return out;
                };
        }
    }

    loop.joint = std::move(joint);

    loop.storage.family1 = h1.storage;
    loop.storage.family2 = h2.storage;
    loop.storage.h1 = h1.model.output_map;
    loop.storage.h2 = h2.model.output_map;
    loop.storage.h1_jacobian = h1.model.output_jacobian;
    loop.storage.h2_jacobian = h2.model.output_jacobian;
    loop.storage.n1 = loop.n1;
    loop.storage.n2 = loop.n2;
    loop.storage.modes1 = loop.modes1;
    loop.storage.epsilon_min =
        std::min(h1.storage.output_strictness, h2.storage.output_strictness);
    loop.joint_storage = loop.storage.as_family(joint_modes);

    return loop;
}

FeedbackLoop build_positive_feedback(const SystemWithStorage& h1,
                                     const SystemWithStorage& h2) {
    return build_positive_feedback(h1, h2, zero_input(h1.model.input_dim),
                                   zero_input(h2.model.input_dim));
}

ModeIndex CascadeInterconnection::encode_mode(ModeIndex i, ModeIndex j) const {
    return encode_pair(i, j, modes1);
}

std::pair<ModeIndex, ModeIndex> CascadeInterconnection::decode_mode(
    ModeIndex joint_mode) const {
    return decode_pair(joint_mode, modes1);
}

CascadeInterconnection build_cascade(const SystemWithStorage& h1,
                                     const SystemWithStorage& h2) {
    check_composable(h1, h2);

    CascadeInterconnection cas;
    cas.h1 = h1.model;
    cas.h2 = h2.model;
    cas.n1 = h1.model.state_dim;
    cas.n2 = h2.model.state_dim;
    cas.p = h1.model.input_dim;
    cas.modes1 = h1.model.mode_count();
    cas.modes2 = h2.model.mode_count();

    const SwitchedSystemModel m1 = h1.model;
    const SwitchedSystemModel m2 = h2.model;
    const int n1 = cas.n1, n2 = cas.n2, p = cas.p, modes1 = cas.modes1;

    // Downstream quantities at one evaluation point: u2 = y1, u2_dot = y1_dot.
    struct Stage {
        Vector f1, u2, u2_dot;
        ModeIndex i1;
    };
    auto stage_first = [m1, n1, p](double t, const Vector& xs, const Vector& us,
                                   const Vector& us_dot, ModeIndex i1_frozen) {
        Stage st;
        const Vector x1 = xs.head(n1);
        st.i1 = i1_frozen != 0 ? i1_frozen : select_mode(m1, t, x1, us, us_dot);
        st.f1 = eval_mode_field(m1, st.i1, x1, us, us_dot);
        st.u2 = m1.output_map(x1);
        st.u2_dot = m1.output_jacobian(x1) * st.f1;
        return st;
    };

    SwitchedSystemModel joint;
    joint.state_dim = n1 + n2;
    joint.input_dim = p;
    joint.needs_input_derivative = m1.needs_input_derivative;
    joint.state_names = joined_state_names(m1, m2);

    const int joint_modes = cas.modes1 * cas.modes2;
    for (ModeIndex m = 1; m <= joint_modes; ++m) {
        joint.modes.push_back(
            [stage_first, m2, m, n1, n2, modes1](const Vector& xs, const Vector& us,
                                                 const Vector& us_dot) {
                const auto [i1, i2] = decode_pair(m, modes1);
                const Stage st = stage_first(0.0, xs, us, us_dot, i1);
                Vector dx(n1 + n2);
                dx.head(n1) = st.f1;
                dx.tail(n2) = eval_mode_field(m2, i2, xs.tail(n2), st.u2, st.u2_dot);
                return dx;
            });
    }

    joint.output_map = [m2, n2](const Vector& xs) { return m2.output_map(xs.tail(n2)); };
    joint.output_jacobian = [m2, n1, n2, p](const Vector& xs) {
        Matrix J = Matrix::Zero(p, n1 + n2);
        J.rightCols(n2) = m2.output_jacobian(xs.tail(n2));
        return J;
    };

    joint.switching_law = StateGuard{
        [stage_first, m2, n2, modes1](double t, const Vector& xs, const Vector& us,
                                      const Vector& us_dot) {
            const Stage st = stage_first(t, xs, us, us_dot, 0);
            const ModeIndex i2 = select_mode(m2, t, xs.tail(n2), st.u2, st.u2_dot);
            return encode_pair(st.i1, i2, modes1);
        }};

    const bool any_projection =
        !m1.mode_projections.empty() || !m2.mode_projections.empty();
    if (any_projection) {
        joint.mode_projections.resize(static_cast<std::size_t>(joint_modes));
        for (ModeIndex m = 1; m <= joint_modes; ++m) {
            joint.mode_projections[static_cast<std::size_t>(m - 1)] =
                [m1, m2, m, n1, n2, modes1](const Vector& xs, const Vector& us) {
                    const auto [i, j] = decode_pair(m, modes1);
                    Vector out = xs;
                    if (!m1.mode_projections.empty()) {
                        if (const auto& proj =
                                m1.mode_projections[static_cast<std::size_t>(i - 1)]) {
                            out.head(n1) = proj(xs.head(n1), us);
                        }
                    }
                    if (!m2.mode_projections.empty()) {
                        if (const auto& proj =
                                m2.mode_projections[static_cast<std::size_t>(j - 1)]) {
                            const Vector u2 = m1.output_map(out.head(n1));
                            out.tail(n2) = proj(xs.tail(n2), u2);
                        }
                    }
                    return out;
                };
        }
    }

    cas.joint = std::move(joint);
    return cas;
}

}  // namespace swni
