#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "swni/core.hpp"
#include "swni/interconnect.hpp"
#include "swni/sim.hpp"
#include "swni/systems.hpp"

#include <cmath>
#include <cstring>

using namespace swni;

namespace {

Vector vec1(double a) {
    Vector v(1);
    v << a;
    return v;
}

Vector vec2(double a, double b) {
    Vector v(2);
    v << a, b;
    return v;
}

Vector vec3(double a, double b, double c) {
    Vector v(3);
    v << a, b, c;
    return v;
}

SwitchedSystemModel scalar_model(VectorField f) {
    SwitchedSystemModel m;
    m.state_dim = 1;
    m.input_dim = 1;
    m.modes.push_back(std::move(f));
    m.output_map = [](const Vector& x) { return x; };
    m.output_jacobian = [](const Vector&) { return Matrix::Identity(1, 1); };
    return m;
}

}  // namespace

TEST_CASE("locate_event finds a linear root") {
    const double t = locate_event([](double t) { return t - 0.5; }, 0.0, 1.0, 1e-9);
    CHECK(std::abs(t - 0.5) <= 1e-9);
}

TEST_CASE("locate_event returns the earliest of two crossings") {
    const double t =
        locate_event([](double t) { return (t - 0.3) * (t - 0.7); }, 0.0, 1.0, 1e-9);
    CHECK(std::abs(t - 0.3) <= 1e-6);
}

TEST_CASE("locate_event rejects a guard without sign change") {
    CHECK_THROWS_AS(locate_event([](double) { return 1.0; }, 0.0, 1.0, 1e-9), NoEventError);
}

TEST_CASE("plant decays to the origin and matches a refined reference") {
    const auto plant = make_plant();
    SimConfig cfg;
    cfg.t_end = 20.0;
    cfg.step = 1e-3;
    const Trajectory traj = simulate(plant.model, vec2(1.0, 0.0), zero_input(1), cfg);
    CHECK(traj.samples.back().x.norm() < 1e-3);

    SimConfig fine = cfg;
    fine.step = 1e-4;
    fine.record_stride = 10;
    const Trajectory ref = simulate(plant.model, vec2(1.0, 0.0), zero_input(1), fine);
    CHECK((traj.samples.back().x - ref.samples.back().x).norm() < 1e-9);
}

TEST_CASE("equilibrium start stays put") {
    const auto plant = make_plant();
    SimConfig cfg;
    cfg.t_end = 1.0;
    cfg.step = 1e-3;
    const Trajectory traj = simulate(plant.model, vec2(0.0, 0.0), zero_input(1), cfg);
    for (const auto& s : traj.samples) {
        CHECK(s.x.norm() == 0.0);
    }
    CHECK(traj.switch_events.empty());
}

TEST_CASE("fourth-order convergence between events") {
    const auto plant = make_plant();
    auto end_error = [&](double step) {
        SimConfig cfg;
        cfg.t_end = 5.0;
        cfg.step = step;
        cfg.record_stride = 1000000;  // only endpoints matter
        SimConfig ref_cfg = cfg;
        ref_cfg.step = step / 10.0;
        const Vector x0 = vec2(5.0, 0.0);
        const Trajectory run = simulate(plant.model, x0, zero_input(1), cfg);
        const Trajectory ref = simulate(plant.model, x0, zero_input(1), ref_cfg);
        return (run.samples.back().x - ref.samples.back().x).norm();
    };
    const double e_coarse = end_error(2e-3);
    const double e_fine = end_error(1e-3);
    CHECK(e_coarse / e_fine >= 12.0);
}

TEST_CASE("identical configuration reproduces bit-identical trajectories") {
    const auto plant = make_plant();
    const auto higs = make_higs({.omega_h = 20.0, .k_h = 0.8});
    const auto loop = build_positive_feedback(plant, higs);
    SimConfig cfg;
    cfg.t_end = 2.0;
    cfg.step = 1e-3;
    const Trajectory a = simulate(loop.joint, vec3(5, 0, 0), loop.joint_input(), cfg);
    const Trajectory b = simulate(loop.joint, vec3(5, 0, 0), loop.joint_input(), cfg);
    REQUIRE(a.samples.size() == b.samples.size());
    for (std::size_t k = 0; k < a.samples.size(); ++k) {
        CHECK(std::memcmp(a.samples[k].x.data(), b.samples[k].x.data(),
                          sizeof(double) * a.samples[k].x.size()) == 0);
        CHECK(a.samples[k].t == b.samples[k].t);
    }
    REQUIRE(a.switch_events.size() == b.switch_events.size());
    for (std::size_t k = 0; k < a.switch_events.size(); ++k) {
        CHECK(a.switch_events[k].t == b.switch_events[k].t);
    }
}

TEST_CASE("sliding-surface chattering trips the event guard") {
    // Opposing fields across x = 0 make the selector ping-pong at the
    // localization limit; the per-step event budget must stop it.
    SwitchedSystemModel m = scalar_model(
        [](const Vector&, const Vector&, const Vector&) { return vec1(-1.0); });
    m.modes.push_back(
        [](const Vector&, const Vector&, const Vector&) { return vec1(1.0); });
    m.switching_law = StateGuard{[](double, const Vector& x, const Vector&, const Vector&) {
        return static_cast<ModeIndex>(x[0] > 0.0 ? 1 : 2);
    }};
    SimConfig cfg;
    cfg.t_end = 0.1;
    cfg.step = 1e-3;
    cfg.max_events_per_step = 8;
    CHECK_THROWS_AS(simulate(m, vec1(5e-4), zero_input(1), cfg), ChatteringError);
}

TEST_CASE("divergence guard throws") {
    const SwitchedSystemModel m = scalar_model(
        [](const Vector& x, const Vector&, const Vector&) { return vec1(x[0] * x[0]); });
    SimConfig cfg;
    cfg.t_end = 3.0;
    cfg.step = 1e-3;
    CHECK_THROWS_AS(simulate(m, vec1(1.0), zero_input(1), cfg), DivergenceError);
}

TEST_CASE("piecewise-constant breakpoints force samples") {
    const auto plant = make_plant();
    const double bp = 0.5005;  // deliberately off the step grid
    const InputSignal u = piecewise_constant_input({0.0, bp}, {vec1(0.0), vec1(1.0)});
    SimConfig cfg;
    cfg.t_end = 1.0;
    cfg.step = 1e-3;
    cfg.record_stride = 100;
    const Trajectory traj = simulate(plant.model, vec2(0, 0), u, cfg);
    bool found = false;
    for (const auto& s : traj.samples) {
        if (s.t == bp) {
            found = true;
            CHECK(s.u[0] == 1.0);  // right-continuous input value
        }
    }
    CHECK(found);
    CHECK(traj.samples.back().x.norm() > 0.0);  // the step actually acted
}

TEST_CASE("record stride yields the expected row count") {
    const auto plant = make_plant();
    SimConfig cfg;
    cfg.t_end = 15.0;
    cfg.step = 1e-3;
    cfg.record_stride = 10;
    const Trajectory traj = simulate(plant.model, vec2(1.0, 0.0), zero_input(1), cfg);
    CHECK(traj.samples.size() == 1501);  // floor(t_end/(step*stride)) + 1, no events
}

TEST_CASE("gain-branch entry is localized against an analytic crossing") {
    // With omega_h = k_h = 1 and e = cos t from x_h = 0, the integrator
    // branch gives x_h = sin t, so the branch equality x_h = e first holds at
    // t = pi/4, where the rate condition also activates.
    const auto higs = make_higs({.omega_h = 1.0, .k_h = 1.0});
    SimConfig cfg;
    cfg.t_end = 1.0;
    cfg.step = 1e-3;
    cfg.event_tolerance = 1e-9;
    const InputSignal e = sine_input(1.0, 1.0, M_PI / 2.0);  // cos t
    const Trajectory traj = simulate(higs.model, vec1(0.0), e, cfg);

    REQUIRE(!traj.switch_events.empty());
    const auto& ev = traj.switch_events.front();
    CHECK(ev.from_mode == static_cast<ModeIndex>(HigsMode::Integrator));
    CHECK(ev.to_mode == static_cast<ModeIndex>(HigsMode::Gain));
    CHECK(std::abs(ev.t - M_PI / 4.0) < 1e-6);

    // Against a bisection-refined reference run.
    SimConfig fine = cfg;
    fine.event_tolerance = 1e-12;
    const Trajectory ref = simulate(higs.model, vec1(0.0), e, fine);
    REQUIRE(!ref.switch_events.empty());
    CHECK(std::abs(ev.t - ref.switch_events.front().t) <= 1e-9);

    // Mode labels on both sides of the event.
    std::size_t si = 0;
    while (traj.samples[si].t < ev.t) {
        ++si;
    }
    CHECK(traj.samples[si].mode == ev.to_mode);
    CHECK(traj.samples[si - 1].mode == ev.from_mode);
}

TEST_CASE("config validation") {
    SimConfig cfg;
    cfg.step = -1.0;
    CHECK_THROWS_AS(cfg.validate(), ContractViolation);
    cfg = SimConfig{};
    cfg.event_tolerance = cfg.step * 2;
    CHECK_THROWS_AS(cfg.validate(), ContractViolation);
    cfg = SimConfig{};
    cfg.record_stride = 0;
    CHECK_THROWS_AS(cfg.validate(), ContractViolation);
}
