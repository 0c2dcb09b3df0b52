#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "swni/core.hpp"
#include "swni/interconnect.hpp"
#include "swni/sim.hpp"
#include "swni/systems.hpp"

#include <cmath>

using namespace swni;

namespace {

// Single-mode test model with a genuinely nonlinear output map, for the
// finite-difference consistency checks: f = (x2 + u, -x1), h = x1^3 + x1.
SwitchedSystemModel curved_output_model() {
    SwitchedSystemModel m;
    m.state_dim = 2;
    m.input_dim = 1;
    m.modes.push_back([](const Vector& x, const Vector& u, const Vector&) {
        Vector dx(2);
        dx[0] = x[1] + u[0];
        dx[1] = -x[0];
        return dx;
    });
    m.output_map = [](const Vector& x) {
        Vector y(1);
        y[0] = x[0] * x[0] * x[0] + x[0];
        return y;
    };
    m.output_jacobian = [](const Vector& x) {
        Matrix J(1, 2);
        J << 3.0 * x[0] * x[0] + 1.0, 0.0;
        return J;
    };
    return m;
}

Vector vec2(double a, double b) {
    Vector v(2);
    v << a, b;
    return v;
}

Vector vec1(double a) {
    Vector v(1);
    v << a;
    return v;
}

}  // namespace

TEST_CASE("output derivative: plant at rest in x2 gives ydot = 0") {
    const auto plant = make_plant();
    const Vector ydot = eval_output_derivative(plant.model, vec2(1.0, 0.0), vec1(0.0), 1);
    CHECK(ydot.size() == 1);
    CHECK(ydot[0] == doctest::Approx(0.0));
}

TEST_CASE("output derivative: zero vector field gives zero ydot") {
    SwitchedSystemModel m = curved_output_model();
    m.modes[0] = [](const Vector&, const Vector&, const Vector&) { return Vector::Zero(2); };
    const Vector ydot = eval_output_derivative(m, vec2(3.7, -1.2), vec1(0.4), 1);
    CHECK(ydot[0] == 0.0);
}

TEST_CASE("output derivative: HIGS integrator branch") {
    const auto higs = make_higs({.omega_h = 20.0, .k_h = 0.8});
    const Vector ydot =
        eval_output_derivative(higs.model, vec1(0.0), vec1(0.5), 1, vec1(0.0));
    CHECK(ydot[0] == doctest::Approx(10.0));
}

TEST_CASE("output derivative matches a flow finite difference at rate O(delta)") {
    const SwitchedSystemModel m = curved_output_model();
    const Vector x = vec2(0.8, -0.3);
    const Vector u = vec1(0.25);
    const Vector exact = eval_output_derivative(m, x, u, 1);
    const Vector f = eval_mode_field(m, 1, x, u, Vector::Zero(1));

    auto fd_error = [&](double delta) {
        const Vector fd = (m.output_map(x + delta * f) - m.output_map(x)) / delta;
        return (fd - exact).norm();
    };
    const double e3 = fd_error(1e-3);
    const double e4 = fd_error(1e-4);
    CHECK(e3 < 1e-2);
    CHECK(e3 / e4 > 5.0);   // first-order decay
    CHECK(e3 / e4 < 20.0);
}

TEST_CASE("storage gradients match central finite differences") {
    const auto plant = make_plant();
    const auto higs = make_higs({.omega_h = 20.0, .k_h = 0.8});
    const double delta = 1e-6;

    const Vector points[] = {vec2(0.7, -1.3), vec2(-2.0, 0.4), vec2(5.0, 0.0)};
    for (const Vector& x : points) {
        const Vector g = plant.storage.gradient(1, x);
        for (int i = 0; i < 2; ++i) {
            Vector xp = x, xm = x;
            xp[i] += delta;
            xm[i] -= delta;
            const double fd =
                (plant.storage.value(1, xp) - plant.storage.value(1, xm)) / (2 * delta);
            CHECK(g[i] == doctest::Approx(fd).epsilon(1e-6));
        }
    }
    for (double xh : {-2.0, 0.3, 1.7}) {
        const Vector x = vec1(xh);
        Vector xp = x, xm = x;
        xp[0] += delta;
        xm[0] -= delta;
        const double fd =
            (higs.storage.value(2, xp) - higs.storage.value(2, xm)) / (2 * delta);
        CHECK(higs.storage.gradient(2, x)[0] == doctest::Approx(fd).epsilon(1e-8));
    }
}

TEST_CASE("mode and dimension contracts are enforced") {
    const auto plant = make_plant();
    CHECK_THROWS_AS(eval_mode_field(plant.model, 2, vec2(0, 0), vec1(0), vec1(0)),
                    InvalidModeError);
    CHECK_THROWS_AS(eval_mode_field(plant.model, 1, vec1(0), vec1(0), vec1(0)),
                    ContractViolation);
    CHECK_THROWS_AS(eval_output_derivative(plant.model, vec2(0, 0), vec2(0, 0), 1),
                    ContractViolation);
    CHECK_THROWS_AS(plant.storage.value(3, vec2(0, 0)), IncompleteStorageError);
}

TEST_CASE("time schedules are right-continuous and must increase") {
    TimeSchedule sched;
    sched.initial = 1;
    sched.switches = {{1.0, 2}, {2.5, 1}};
    sched.validate();
    CHECK(sched.mode_at(0.0) == 1);
    CHECK(sched.mode_at(1.0) == 2);  // post-switch mode at the instant itself
    CHECK(sched.mode_at(2.4999) == 2);
    CHECK(sched.mode_at(2.5) == 1);
    CHECK(sched.mode_at(100.0) == 1);

    TimeSchedule bad;
    bad.switches = {{1.0, 2}, {1.0, 1}};
    CHECK_THROWS_AS(bad.validate(), ContractViolation);
}

TEST_CASE("trajectory invariants hold on a switching run") {
    // Closed loop with mode switching: plant + HIGS.
    const auto plant = make_plant();
    const auto higs = make_higs({.omega_h = 20.0, .k_h = 0.8});
    const auto loop = build_positive_feedback(plant, higs);

    SimConfig cfg;
    cfg.t_end = 3.0;
    cfg.step = 1e-3;
    Vector x0(3);
    x0 << 5.0, 0.0, 0.0;
    const Trajectory traj = simulate(loop.joint, x0, loop.joint_input(), cfg);

    REQUIRE(!traj.samples.empty());
    REQUIRE(!traj.switch_events.empty());

    for (std::size_t k = 1; k < traj.samples.size(); ++k) {
        CHECK(traj.samples[k].t > traj.samples[k - 1].t);
    }

    // Each event stores the continuous state; the event sample carries the
    // post-switch mode and the identical state vector.
    std::size_t si = 0;
    for (const auto& ev : traj.switch_events) {
        while (si < traj.samples.size() && traj.samples[si].t < ev.t) {
            ++si;
        }
        REQUIRE(si < traj.samples.size());
        const auto& at_event = traj.samples[si];
        CHECK(at_event.t == ev.t);
        CHECK(at_event.at_event);
        CHECK(at_event.mode == ev.to_mode);
        CHECK((at_event.x - ev.state).norm() == 0.0);
        if (si > 0) {
            CHECK(traj.samples[si - 1].mode == ev.from_mode);
        }
    }
}
