#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "swni/certify.hpp"
#include "swni/core.hpp"
#include "swni/interconnect.hpp"
#include "swni/scenario.hpp"
#include "swni/sim.hpp"
#include "swni/systems.hpp"
#include "swni/trajectory_io.hpp"

#include <sstream>

namespace py = pybind11;
using namespace swni;

namespace {

Eigen::MatrixXd sample_matrix(const Trajectory& traj,
                              const std::function<Vector(const TrajectorySample&)>& pick) {
    if (traj.samples.empty()) {
        return {};
    }
    const auto rows = static_cast<Eigen::Index>(traj.samples.size());
    const Eigen::Index cols = pick(traj.samples.front()).size();
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        m.row(r) = pick(traj.samples[static_cast<std::size_t>(r)]).transpose();
    }
    return m;
}

}  // namespace

PYBIND11_MODULE(_swni, m) {
    m.doc() = "Simulation and numerical certification of switched "
              "negative-imaginary systems";

    py::register_exception<Error>(m, "SwniError");

    // ---- systems ----------------------------------------------------------
    py::class_<HigsParams>(m, "HigsParams")
        .def(py::init([](double omega_h, double k_h) {
                 HigsParams p{omega_h, k_h};
                 p.validate();
                 return p;
             }),
             py::arg("omega_h"), py::arg("k_h"))
        .def_readonly("omega_h", &HigsParams::omega_h)
        .def_readonly("k_h", &HigsParams::k_h)
        .def("__repr__", [](const HigsParams& p) {
            std::ostringstream os;
            os << "HigsParams(omega_h=" << p.omega_h << ", k_h=" << p.k_h << ")";
            return os.str();
        });

    py::enum_<HigsMode>(m, "HigsMode")
        .value("Integrator", HigsMode::Integrator)
        .value("Gain", HigsMode::Gain);

    py::class_<PlantParams>(m, "PlantParams")
        .def(py::init<>())
        .def(py::init([](double cubic, double linear, double damping) {
                 return PlantParams{cubic, linear, damping};
             }),
             py::arg("cubic_stiffness") = 1.0, py::arg("linear_stiffness") = 1.0,
             py::arg("damping") = 1.0)
        .def_readonly("cubic_stiffness", &PlantParams::cubic_stiffness)
        .def_readonly("linear_stiffness", &PlantParams::linear_stiffness)
        .def_readonly("damping", &PlantParams::damping);

    m.def("higs_mode_select", &higs_mode_select, py::arg("e"), py::arg("u"),
          py::arg("edot"), py::arg("params"), py::arg("guard_tol") = kHigsGuardTol);
    m.def("higs_dynamics", &higs_dynamics, py::arg("x_h"), py::arg("e"), py::arg("edot"),
          py::arg("mode"), py::arg("params"), py::arg("drift_tol") = 1e-6);
    m.def("higs_storage", &higs_storage, py::arg("x_h"), py::arg("params"));
    m.def("higs_sector_residual", &higs_sector_residual, py::arg("e"), py::arg("u"),
          py::arg("k_h"));
    m.def("plant_dynamics", &plant_dynamics, py::arg("x1"), py::arg("x2"), py::arg("u"));
    m.def("plant_storage", &plant_storage, py::arg("x1"), py::arg("x2"));
    m.def("steady_state_match_roots", &steady_state_match_roots, py::arg("plant"),
          py::arg("k_h"));

    py::class_<SystemWithStorage>(m, "SystemWithStorage")
        .def_property_readonly("state_dim",
                               [](const SystemWithStorage& s) { return s.model.state_dim; })
        .def_property_readonly("input_dim",
                               [](const SystemWithStorage& s) { return s.model.input_dim; })
        .def_property_readonly("mode_count",
                               [](const SystemWithStorage& s) { return s.model.mode_count(); })
        .def_property_readonly(
            "output_strictness",
            [](const SystemWithStorage& s) { return s.storage.output_strictness; })
        .def("storage_value",
             [](const SystemWithStorage& s, ModeIndex mode, const Vector& x) {
                 return s.storage.value(mode, x);
             })
        .def("output_derivative",
             [](const SystemWithStorage& s, const Vector& x, const Vector& u, ModeIndex mode) {
                 return eval_output_derivative(s.model, x, u, mode);
             });

    m.def("make_higs", &make_higs, py::arg("params"), py::arg("guard_tol") = kHigsGuardTol);
    m.def("make_plant", &make_plant, py::arg("params") = PlantParams{});

    // ---- core -------------------------------------------------------------
    py::class_<InputSignal>(m, "InputSignal");
    m.def("zero_input", &zero_input, py::arg("dim"));
    m.def("constant_input", &constant_input, py::arg("value"));
    m.def("sine_input", &sine_input, py::arg("amplitude"), py::arg("angular_frequency"),
          py::arg("phase") = 0.0);
    m.def("piecewise_constant_input", &piecewise_constant_input, py::arg("times"),
          py::arg("values"));

    py::class_<SwitchEvent>(m, "SwitchEvent")
        .def_readonly("t", &SwitchEvent::t)
        .def_readonly("from_mode", &SwitchEvent::from_mode)
        .def_readonly("to_mode", &SwitchEvent::to_mode)
        .def_readonly("state", &SwitchEvent::state);

    py::class_<Trajectory>(m, "Trajectory")
        .def_property_readonly("step", [](const Trajectory& t) { return t.step; })
        .def_property_readonly("switch_events",
                               [](const Trajectory& t) { return t.switch_events; })
        .def("times",
             [](const Trajectory& t) {
                 Vector v(static_cast<Eigen::Index>(t.samples.size()));
                 for (Eigen::Index k = 0; k < v.size(); ++k) {
                     v[k] = t.samples[static_cast<std::size_t>(k)].t;
                 }
                 return v;
             })
        .def("states",
             [](const Trajectory& t) {
                 return sample_matrix(t, [](const TrajectorySample& s) { return s.x; });
             })
        .def("inputs",
             [](const Trajectory& t) {
                 return sample_matrix(t, [](const TrajectorySample& s) { return s.u; });
             })
        .def("outputs",
             [](const Trajectory& t) {
                 return sample_matrix(t, [](const TrajectorySample& s) { return s.y; });
             })
        .def("output_derivatives",
             [](const Trajectory& t) {
                 return sample_matrix(t, [](const TrajectorySample& s) { return s.y_dot; });
             })
        .def("modes",
             [](const Trajectory& t) {
                 std::vector<int> v;
                 v.reserve(t.samples.size());
                 for (const auto& s : t.samples) {
                     v.push_back(s.mode);
                 }
                 return v;
             })
        .def("__len__", [](const Trajectory& t) { return t.samples.size(); });

    // ---- interconnect -----------------------------------------------------
    py::class_<FeedbackLoop>(m, "FeedbackLoop")
        .def_property_readonly("epsilon_min",
                               [](const FeedbackLoop& l) { return l.storage.epsilon_min; })
        .def_property_readonly("joint_mode_count",
                               [](const FeedbackLoop& l) { return l.modes1 * l.modes2; })
        .def("eval_W", &FeedbackLoop::eval_W, py::arg("x"), py::arg("x_tilde"),
             py::arg("joint_mode"))
        .def("decode_mode", &FeedbackLoop::decode_mode, py::arg("joint_mode"))
        .def("subsystem_trajectory", &FeedbackLoop::subsystem_trajectory, py::arg("traj"),
             py::arg("side"));

    py::class_<CascadeInterconnection>(m, "CascadeInterconnection")
        .def("decode_mode", &CascadeInterconnection::decode_mode, py::arg("joint_mode"));

    m.def(
        "build_positive_feedback",
        [](const SystemWithStorage& h1, const SystemWithStorage& h2) {
            return build_positive_feedback(h1, h2);
        },
        py::arg("h1"), py::arg("h2"));
    m.def(
        "build_positive_feedback",
        [](const SystemWithStorage& h1, const SystemWithStorage& h2, const InputSignal& u,
           const InputSignal& ut) { return build_positive_feedback(h1, h2, u, ut); },
        py::arg("h1"), py::arg("h2"), py::arg("external_u"), py::arg("external_u_tilde"));
    m.def("build_cascade", &build_cascade, py::arg("h1"), py::arg("h2"));

    // ---- sim ----------------------------------------------------------------
    py::class_<SimConfig>(m, "SimConfig")
        .def(py::init([](double t_end, double step, double event_tolerance,
                         int max_events_per_step, int record_stride) {
                 SimConfig c{t_end, step, event_tolerance, max_events_per_step,
                             record_stride};
                 c.validate();
                 return c;
             }),
             py::arg("t_end") = 10.0, py::arg("step") = 1e-3,
             py::arg("event_tolerance") = 1e-9, py::arg("max_events_per_step") = 8,
             py::arg("record_stride") = 1)
        .def_readonly("t_end", &SimConfig::t_end)
        .def_readonly("step", &SimConfig::step);

    m.def(
        "simulate",
        [](const SystemWithStorage& sys, const Vector& x0, const InputSignal& input,
           const SimConfig& config) { return simulate(sys.model, x0, input, config); },
        py::arg("system"), py::arg("x0"), py::arg("input"), py::arg("config"));
    m.def(
        "simulate",
        [](const FeedbackLoop& loop, const Vector& x0, const SimConfig& config) {
            return simulate(loop.joint, x0, loop.joint_input(), config);
        },
        py::arg("loop"), py::arg("x0"), py::arg("config"));
    m.def(
        "simulate",
        [](const CascadeInterconnection& cas, const Vector& x0, const InputSignal& input,
           const SimConfig& config) { return simulate(cas.joint, x0, input, config); },
        py::arg("cascade"), py::arg("x0"), py::arg("input"), py::arg("config"));
    m.def("locate_event", &locate_event, py::arg("guard"), py::arg("t_a"), py::arg("t_b"),
          py::arg("tolerance"), py::arg("scan_intervals") = 64);

    // ---- certify ------------------------------------------------------------
    py::enum_<Verdict>(m, "Verdict")
        .value("Pass", Verdict::Pass)
        .value("Fail", Verdict::Fail)
        .value("NotFalsified", Verdict::NotFalsified)
        .value("Inconclusive", Verdict::Inconclusive);

    py::class_<CertificateReport>(m, "CertificateReport")
        .def_readonly("check_name", &CertificateReport::check_name)
        .def_readonly("samples_evaluated", &CertificateReport::samples_evaluated)
        .def_readonly("worst_residual", &CertificateReport::worst_residual)
        .def_readonly("threshold", &CertificateReport::threshold)
        .def_readonly("tolerance", &CertificateReport::tolerance)
        .def_readonly("worst_time", &CertificateReport::worst_time)
        .def_readonly("worst_state", &CertificateReport::worst_state)
        .def_readonly("verdict", &CertificateReport::verdict)
        .def_readonly("detail", &CertificateReport::detail)
        .def("__repr__", [](const CertificateReport& r) {
            std::ostringstream os;
            os << "CertificateReport(" << r.check_name << ", " << to_string(r.verdict)
               << ", worst_residual=" << r.worst_residual << ")";
            return os.str();
        });

    py::class_<RegionSpec>(m, "RegionSpec")
        .def(py::init([](const Vector& lower, const Vector& upper, std::vector<int> counts,
                         double exclusion) {
                 RegionSpec r{lower, upper, std::move(counts), exclusion};
                 r.validate();
                 return r;
             }),
             py::arg("lower"), py::arg("upper"), py::arg("counts"),
             py::arg("origin_exclusion_radius") = 0.0);

    m.def(
        "check_ni_dissipation",
        [](const Trajectory& traj, const SystemWithStorage& sys, double eps, double tol,
           const std::string& name) {
            return check_ni_dissipation(traj, sys.storage, eps, tol, name);
        },
        py::arg("traj"), py::arg("system"), py::arg("eps"), py::arg("tol"),
        py::arg("name") = "ni_dissipation");
    m.def(
        "check_closed_loop_dissipation",
        [](const Trajectory& traj, const FeedbackLoop& loop, double tol,
           const std::string& name) {
            return check_ni_dissipation(traj, loop.joint_storage, loop.storage.epsilon_min,
                                        tol, name);
        },
        py::arg("traj"), py::arg("loop"), py::arg("tol"),
        py::arg("name") = "closed_loop_ni");
    m.def(
        "check_switch_monotonicity",
        [](const Trajectory& traj, const SystemWithStorage& sys, double tol) {
            return check_switch_monotonicity(traj, sys.storage, tol);
        },
        py::arg("traj"), py::arg("system"), py::arg("tol"));
    m.def(
        "check_positive_definite",
        [](const FeedbackLoop& loop, const RegionSpec& region, double tol, bool strict) {
            return check_positive_definite(loop.storage, loop.modes1 * loop.modes2, region,
                                           tol, strict);
        },
        py::arg("loop"), py::arg("region"), py::arg("tol"), py::arg("strict") = true);
    m.def(
        "check_lyapunov_decrease",
        [](const Trajectory& traj, const FeedbackLoop& loop, double tol,
           double decay_fraction) {
            return check_lyapunov_decrease(traj, loop.storage, {tol, decay_fraction});
        },
        py::arg("traj"), py::arg("loop"), py::arg("tol") = 1e-6,
        py::arg("decay_fraction") = 0.01);
    m.def(
        "check_assumption_iii",
        [](const CascadeInterconnection& cascade, const std::vector<double>& u_bars,
           double horizon, double tol, const PlantParams& plant, double k_h) {
            SteadyStateOptions opts;
            opts.sim.t_end = horizon;
            AssumptionIiiResult res = check_assumption_iii(cascade, u_bars, opts, tol,
                                                           std::make_pair(plant, k_h));
            return res.report;
        },
        py::arg("cascade"), py::arg("u_bars"), py::arg("horizon"), py::arg("tol"),
        py::arg("plant"), py::arg("k_h"));

    // ---- scenario / io ------------------------------------------------------
    m.def("run_scenario_file", &run_scenario_file, py::arg("path"), py::arg("options"));
    py::class_<RunOptions>(m, "RunOptions")
        .def(py::init([](const std::string& out_dir, bool plot, bool run_checks) {
                 RunOptions o;
                 o.out_dir = out_dir;
                 o.plot = plot;
                 o.run_checks = run_checks;
                 return o;
             }),
             py::arg("out_dir") = ".", py::arg("plot") = true, py::arg("run_checks") = true);
    m.def("fig4_scenario_text", [] { return fig4_scenario_text(); });
    m.def(
        "emit_trajectory",
        [](const Trajectory& traj, const std::filesystem::path& path) {
            emit_trajectory(traj, path);
        },
        py::arg("traj"), py::arg("path"));

    m.attr("__version__") = "0.1.0";
}
