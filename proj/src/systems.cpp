#include "swni/systems.hpp"
#include <limits>

#include <cmath>
#include <sstream>
#include <tuple>

namespace swni {

void HigsParams::validate() const {
    if (!(omega_h >= 0.0)) {
        throw ContractViolation("omega_h must be >= 0");
    }
    if (!(k_h > 0.0)) {
        throw ContractViolation("k_h must be > 0");
    }
}

HigsMode higs_mode_select(double e, double u, double edot, const HigsParams& params,
                          double guard_tol) {
    params.validate();
    // On the gain edge u = k_h e (relative tolerance), or past it in the
    // leaving direction. The strict definition uses the exact equality; a
    // sampled trajectory only ever touches that surface to localization
    // accuracy, so points beyond the edge also select the gain branch (the
    // simulator re-projects them onto it).
    const bool on_gain_edge =
        std::abs(u - params.k_h * e) <= guard_tol * std::max(1.0, std::abs(u)) ||
        (u - params.k_h * e) * e > 0.0;
    const bool leaving_sector = params.omega_h * e * e > params.k_h * e * edot;  // strict
    return (on_gain_edge && leaving_sector) ? HigsMode::Gain : HigsMode::Integrator;
}

double higs_sector_residual(double e, double u, double k_h) {
    return e * u - u * u / k_h;
}

std::pair<double, double> higs_dynamics(double x_h, double e, double edot, HigsMode mode,
                                        const HigsParams& params, double drift_tol) {
    params.validate();
    if (mode == HigsMode::Gain) {
        const double drift = std::abs(x_h - params.k_h * e);
        if (drift > drift_tol * std::max(1.0, std::abs(x_h))) {
            std::ostringstream os;
            os << "gain-branch constraint drift " << drift << " at x_h=" << x_h
               << ", e=" << e;
            throw ConstraintDriftError(os.str());
        }
        return {params.k_h * edot, x_h};
    }
    return {params.omega_h * e, x_h};
}

double higs_storage(double x_h, const HigsParams& params) {
    params.validate();
    return x_h * x_h / (2.0 * params.k_h);
}

std::tuple<double, double, double> plant_dynamics(double x1, double x2, double u) {
    return {x2, -x1 * x1 * x1 - x1 - x2 + u, x1};
}

double plant_storage(double x1, double x2) {
    return 0.25 * x1 * x1 * x1 * x1 + 0.5 * x1 * x1 + 0.5 * x2 * x2;
}

SystemWithStorage make_higs(const HigsParams& params, double guard_tol) {
    params.validate();
    SwitchedSystemModel m;
    m.state_dim = 1;
    m.input_dim = 1;
    m.needs_input_derivative = true;
    m.state_names = {"xh"};

    // Field evaluations happen at probe states during event localization, so
    // the lambdas skip the drift gate; the gain projection below enforces the
    // constraint at every committed state.
    constexpr double kNoDriftGate = std::numeric_limits<double>::infinity();
    m.modes.push_back([params](const Vector& x, const Vector& u, const Vector& u_dot) {
        Vector dx(1);
        dx[0] = higs_dynamics(x[0], u[0], u_dot[0], HigsMode::Integrator, params).first;
        return dx;
    });
    m.modes.push_back([params](const Vector& x, const Vector& u, const Vector& u_dot) {
        Vector dx(1);
        dx[0] =
            higs_dynamics(x[0], u[0], u_dot[0], HigsMode::Gain, params, kNoDriftGate).first;
        return dx;
    });

    m.output_map = [](const Vector& x) { return x; };
    m.output_jacobian = [](const Vector&) { return Matrix::Identity(1, 1); };

    m.switching_law = StateGuard{[params, guard_tol](double, const Vector& x, const Vector& u,
                                                     const Vector& u_dot) {
        return static_cast<ModeIndex>(
            higs_mode_select(u[0], x[0], u_dot[0], params, guard_tol));
    }};

    // Gain branch carries the constraint x_h = k_h e; re-project to kill
    // integration drift, refusing if the drift exceeds the consistency bound.
    m.mode_projections.resize(2);
    m.mode_projections[1] = [params](const Vector& x, const Vector& u) {
        const double drift = std::abs(x[0] - params.k_h * u[0]);
        if (drift > 1e-6 * std::max(1.0, std::abs(x[0]))) {
            std::ostringstream os;
            os << "gain-branch drift " << drift << " before re-projection";
            throw ConstraintDriftError(os.str());
        }
        Vector projected(1);
        projected[0] = params.k_h * u[0];
        return projected;
    };

    StorageFamily storage = common_storage(
        2,
        [params](const Vector& x) { return higs_storage(x[0], params); },
        [params](const Vector& x) {
            Vector g(1);
            g[0] = x[0] / params.k_h;
            return g;
        },
        /*output_strictness=*/0.0);

    return {std::move(m), std::move(storage)};
}

SystemWithStorage make_plant(const PlantParams& params) {
    SwitchedSystemModel m;
    m.state_dim = 2;
    m.input_dim = 1;
    m.state_names = {"x1", "x2"};

    m.modes.push_back([params](const Vector& x, const Vector& u, const Vector&) {
        Vector dx(2);
        dx[0] = x[1];
        dx[1] = -params.cubic_stiffness * x[0] * x[0] * x[0] -
                params.linear_stiffness * x[0] - params.damping * x[1] + u[0];
        return dx;
    });

    m.output_map = [](const Vector& x) {
        Vector y(1);
        y[0] = x[0];
        return y;
    };
    m.output_jacobian = [](const Vector&) {
        Matrix J(1, 2);
        J << 1.0, 0.0;
        return J;
    };

    // V = 1/4 c3 x1^4 + 1/2 c1 x1^2 + 1/2 x2^2 gives
    // Vdot = u ydot - damping ydot^2 identically.
    StorageFamily storage = common_storage(
        1,
        [params](const Vector& x) {
            return 0.25 * params.cubic_stiffness * x[0] * x[0] * x[0] * x[0] +
                   0.5 * params.linear_stiffness * x[0] * x[0] + 0.5 * x[1] * x[1];
        },
        [params](const Vector& x) {
            Vector g(2);
            g[0] = params.cubic_stiffness * x[0] * x[0] * x[0] +
                   params.linear_stiffness * x[0];
            g[1] = x[1];
            return g;
        },
        /*output_strictness=*/params.damping);

    return {std::move(m), std::move(storage)};
}

std::vector<double> steady_state_match_roots(const PlantParams& plant, double k_h) {
    // c3 x^3 + c1 x = k_h x has nonzero real roots iff (k_h - c1)/c3 > 0.
    std::vector<double> roots;
    const double sq = (k_h - plant.linear_stiffness) / plant.cubic_stiffness;
    if (sq > 0.0) {
        const double r = std::sqrt(sq);
        roots = {-r, r};
    }
    return roots;
}

}  // namespace swni
