#include "swni/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace swni {

ModeIndex TimeSchedule::mode_at(double t) const {
    ModeIndex current = initial;
    for (const auto& [tk, ik] : switches) {
        if (t >= tk) {
            current = ik;  // right-continuous: at t_k the post-switch mode is active
        } else {
            break;
        }
    }
    return current;
}

void TimeSchedule::validate() const {
    for (std::size_t k = 1; k < switches.size(); ++k) {
        if (!(switches[k].first > switches[k - 1].first)) {
            throw ContractViolation("TimeSchedule switch times must be strictly increasing");
        }
    }
}

void require_valid_mode(const SwitchedSystemModel& model, ModeIndex i) {
    if (i < 1 || i > model.mode_count()) {
        std::ostringstream os;
        os << "mode " << i << " outside index set {1.." << model.mode_count() << "}";
        throw InvalidModeError(os.str());
    }
}

namespace {

void require_dim(const Vector& v, int dim, const char* what) {
    if (static_cast<int>(v.size()) != dim) {
        std::ostringstream os;
        os << what << " has dimension " << v.size() << ", expected " << dim;
        throw ContractViolation(os.str());
    }
}

}  // namespace

void validate_model(const SwitchedSystemModel& model) {
    if (model.state_dim <= 0 || model.input_dim <= 0) {
        throw ContractViolation("state_dim and input_dim must be positive");
    }
    if (model.modes.empty()) {
        throw ContractViolation("model has no modes");
    }
    if (!model.output_map || !model.output_jacobian) {
        throw ContractViolation("model is missing output map or output Jacobian");
    }
    if (!model.mode_projections.empty() &&
        model.mode_projections.size() != model.modes.size()) {
        throw ContractViolation("mode_projections must be empty or have one slot per mode");
    }
    if (const auto* sched = std::get_if<TimeSchedule>(&model.switching_law)) {
        sched->validate();
    }

    const Vector x0 = Vector::Zero(model.state_dim);
    const Vector u0 = Vector::Zero(model.input_dim);
    const Vector y = model.output_map(x0);
    require_dim(y, model.input_dim, "output");  // square system: dim y == dim u
    const Matrix J = model.output_jacobian(x0);
    if (J.rows() != model.input_dim || J.cols() != model.state_dim) {
        throw ContractViolation("output Jacobian must be input_dim x state_dim");
    }
    for (int i = 1; i <= model.mode_count(); ++i) {
        const Vector dx = model.modes[static_cast<std::size_t>(i - 1)](x0, u0, u0);
        require_dim(dx, model.state_dim, "mode field value");
    }
}

ModeIndex select_mode(const SwitchedSystemModel& model, double t, const Vector& x,
                      const Vector& u, const Vector& u_dot) {
    ModeIndex i = std::visit(
        [&](const auto& law) -> ModeIndex {
            using T = std::decay_t<decltype(law)>;
            if constexpr (std::is_same_v<T, SingleMode>) {
                return law.mode;
            } else if constexpr (std::is_same_v<T, TimeSchedule>) {
                return law.mode_at(t);
            } else {
                return law.select(t, x, u, u_dot);
            }
        },
        model.switching_law);
    require_valid_mode(model, i);
    return i;
}

Vector eval_mode_field(const SwitchedSystemModel& model, ModeIndex i, const Vector& x,
                       const Vector& u, const Vector& u_dot) {
    require_valid_mode(model, i);
    require_dim(x, model.state_dim, "state");
    require_dim(u, model.input_dim, "input");
    Vector dx = model.modes[static_cast<std::size_t>(i - 1)](x, u, u_dot);
    require_dim(dx, model.state_dim, "mode field value");
    return dx;
}

Vector eval_output(const SwitchedSystemModel& model, const Vector& x) {
    require_dim(x, model.state_dim, "state");
    return model.output_map(x);
}

Vector eval_output_derivative(const SwitchedSystemModel& model, const Vector& x,
                              const Vector& u, ModeIndex i, const Vector& u_dot) {
    const Vector ud = u_dot.size() ? u_dot : Vector::Zero(model.input_dim);
    const Vector f = eval_mode_field(model, i, x, u, ud);
    return model.output_jacobian(x) * f;
}

double StorageFamily::value(ModeIndex i, const Vector& x) const {
    if (i < 1 || i > mode_count()) {
        throw IncompleteStorageError("no storage function for mode " + std::to_string(i));
    }
    return values[static_cast<std::size_t>(i - 1)](x);
}

Vector StorageFamily::gradient(ModeIndex i, const Vector& x) const {
    if (i < 1 || i > mode_count() || !gradients[static_cast<std::size_t>(i - 1)]) {
        throw IncompleteStorageError("no storage gradient for mode " + std::to_string(i));
    }
    return gradients[static_cast<std::size_t>(i - 1)](x);
}

StorageFamily common_storage(int n_modes, ScalarField value, GradientField gradient,
                             double output_strictness) {
    StorageFamily family;
    family.output_strictness = output_strictness;
    for (int i = 0; i < n_modes; ++i) {
        family.values.push_back(value);
        family.gradients.push_back(gradient);
    }
    return family;
}

InputSignal zero_input(int dim) {
    return constant_input(Vector::Zero(dim));
}

InputSignal constant_input(Vector v) {
    InputSignal s;
    const Vector zero = Vector::Zero(v.size());
    s.value = [v = std::move(v)](double) { return v; };
    s.derivative = [zero](double) { return zero; };
    return s;
}

InputSignal piecewise_constant_input(std::vector<double> times, std::vector<Vector> values) {
    if (times.empty() || times.size() != values.size()) {
        throw ContractViolation("piecewise-constant input needs matching, nonempty tables");
    }
    for (std::size_t k = 1; k < times.size(); ++k) {
        if (!(times[k] > times[k - 1])) {
            throw ContractViolation("piecewise-constant input times must be strictly increasing");
        }
    }
    InputSignal s;
    const Vector zero = Vector::Zero(values.front().size());
    s.breakpoints.assign(times.begin() + 1, times.end());
    s.value = [times, values](double t) {
        auto it = std::upper_bound(times.begin(), times.end(), t);
        const auto idx = it == times.begin() ? 0 : static_cast<std::size_t>(it - times.begin() - 1);
        return values[idx];
    };
    s.derivative = [zero](double) { return zero; };
    return s;
}

InputSignal sampled_linear_input(std::vector<double> times, std::vector<Vector> values) {
    if (times.size() < 2 || times.size() != values.size()) {
        throw ContractViolation("sampled input needs at least two matching samples");
    }
    InputSignal s;
    s.breakpoints.assign(times.begin() + 1, times.end() - 1);
    auto segment = [times, values](double t) {
        auto it = std::upper_bound(times.begin(), times.end(), t);
        std::size_t hi = static_cast<std::size_t>(it - times.begin());
        hi = std::clamp<std::size_t>(hi, 1, times.size() - 1);
        return hi;
    };
    s.value = [times, values, segment](double t) -> Vector {
        const std::size_t hi = segment(t);
        const double t0 = times[hi - 1], t1 = times[hi];
        const double w = std::clamp((t - t0) / (t1 - t0), 0.0, 1.0);
        return values[hi - 1] + w * (values[hi] - values[hi - 1]);
    };
    s.derivative = [times, values, segment](double t) -> Vector {
        const std::size_t hi = segment(t);
        return (values[hi] - values[hi - 1]) / (times[hi] - times[hi - 1]);
    };
    return s;
}

InputSignal sine_input(double amplitude, double angular_frequency, double phase) {
    InputSignal s;
    s.value = [=](double t) {
        Vector v(1);
        v[0] = amplitude * std::sin(angular_frequency * t + phase);
        return v;
    };
    s.derivative = [=](double t) {
        Vector v(1);
        v[0] = amplitude * angular_frequency * std::cos(angular_frequency * t + phase);
        return v;
    };
    return s;
}

InputSignal stack_inputs(const InputSignal& a, int dim_a, const InputSignal& b, int dim_b) {
    InputSignal s;
    s.value = [=](double t) {
        Vector v(dim_a + dim_b);
        v.head(dim_a) = a.value(t);
        v.tail(dim_b) = b.value(t);
        return v;
    };
    s.derivative = [=](double t) {
        Vector v(dim_a + dim_b);
        v.head(dim_a) = a.derivative(t);
        v.tail(dim_b) = b.derivative(t);
        return v;
    };
    s.breakpoints = a.breakpoints;
    s.breakpoints.insert(s.breakpoints.end(), b.breakpoints.begin(), b.breakpoints.end());
    std::sort(s.breakpoints.begin(), s.breakpoints.end());
    s.breakpoints.erase(std::unique(s.breakpoints.begin(), s.breakpoints.end()),
                        s.breakpoints.end());
    return s;
}

}  // namespace swni
