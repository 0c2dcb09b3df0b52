#include "swni/scenario.hpp"

#include "swni/trajectory_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <ostream>
#include <sstream>

namespace swni {

namespace {

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// -----------------------------------------------------------------------
// Key/value text format: '[section]' headers, 'key = value' entries,
// '#' comments. [check] sections may repeat; everything else is unique.
// -----------------------------------------------------------------------

struct RawEntry {
    std::string key;
    std::string value;
    int line = 0;
    mutable bool used = false;
};

struct RawSection {
    std::string name;
    int line = 0;
    std::vector<RawEntry> entries;

    const RawEntry* find(const std::string& key) const {
        for (const auto& e : entries) {
            if (e.key == key) {
                e.used = true;
                return &e;
            }
        }
        return nullptr;
    }
};

[[noreturn]] void fail(int line, const std::string& message) {
    std::ostringstream os;
    os << "line " << line << ": " << message;
    throw ScenarioError(os.str());
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

std::vector<RawSection> tokenize(const std::string& text) {
    std::vector<RawSection> sections;
    std::istringstream is(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(is, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) {
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3) {
                fail(line_no, "malformed section header '" + line + "'");
            }
            sections.push_back({trim(line.substr(1, line.size() - 2)), line_no, {}});
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            fail(line_no, "expected 'key = value', got '" + line + "'");
        }
        if (sections.empty()) {
            fail(line_no, "entry before any [section]");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) {
            fail(line_no, "empty key or value");
        }
        sections.back().entries.push_back({key, value, line_no});
    }
    return sections;
}

double parse_double(const RawEntry& e) {
    std::size_t pos = 0;
    double v = 0;
    try {
        v = std::stod(e.value, &pos);
    } catch (const std::exception&) {
        fail(e.line, "field '" + e.key + "': not a number: '" + e.value + "'");
    }
    if (pos != e.value.size()) {
        fail(e.line, "field '" + e.key + "': trailing junk in '" + e.value + "'");
    }
    return v;
}

int parse_int(const RawEntry& e) {
    const double v = parse_double(e);
    if (v != std::floor(v)) {
        fail(e.line, "field '" + e.key + "': expected an integer");
    }
    return static_cast<int>(v);
}

std::vector<double> parse_vector(const RawEntry& e) {
    std::vector<double> out;
    std::istringstream is(e.value);
    std::string tok;
    while (is >> tok) {
        std::size_t pos = 0;
        try {
            out.push_back(std::stod(tok, &pos));
        } catch (const std::exception&) {
            pos = std::string::npos;
        }
        if (pos != tok.size()) {
            fail(e.line, "field '" + e.key + "': not a number: '" + tok + "'");
        }
    }
    if (out.empty()) {
        fail(e.line, "field '" + e.key + "': empty list");
    }
    return out;
}

bool parse_bool(const RawEntry& e) {
    if (e.value == "true" || e.value == "1") {
        return true;
    }
    if (e.value == "false" || e.value == "0") {
        return false;
    }
    fail(e.line, "field '" + e.key + "': expected true/false");
}

void reject_unused(const RawSection& sec) {
    for (const auto& e : sec.entries) {
        if (!e.used) {
            fail(e.line, "unknown field '" + e.key + "' in [" + sec.name + "]");
        }
    }
}

InputSpec parse_input_spec(const RawSection& sec, const std::string& channel) {
    InputSpec spec;
    if (const auto* e = sec.find(channel)) {
        spec.kind = "constant";
        spec.constant = parse_double(*e);
    }
    if (const auto* e = sec.find(channel + "_kind")) {
        spec.kind = e->value;
        if (spec.kind != "constant" && spec.kind != "piecewise" && spec.kind != "sine") {
            fail(e->line, "input kind must be constant, piecewise or sine");
        }
    }
    if (spec.kind == "piecewise") {
        const auto* times = sec.find(channel + "_times");
        const auto* values = sec.find(channel + "_values");
        if (!times || !values) {
            fail(sec.line, "piecewise input needs " + channel + "_times and " + channel +
                               "_values");
        }
        spec.times = parse_vector(*times);
        spec.values = parse_vector(*values);
        if (spec.times.size() != spec.values.size()) {
            fail(times->line, "times and values must have equal length");
        }
    } else if (spec.kind == "sine") {
        if (const auto* e = sec.find(channel + "_amplitude")) {
            spec.amplitude = parse_double(*e);
        }
        if (const auto* e = sec.find(channel + "_omega")) {
            spec.omega = parse_double(*e);
        }
        if (const auto* e = sec.find(channel + "_phase")) {
            spec.phase = parse_double(*e);
        }
    }
    return spec;
}

RegionSpec parse_region(const RawSection& sec) {
    const auto* lower = sec.find("lower");
    const auto* upper = sec.find("upper");
    const auto* grid = sec.find("grid");
    if (!lower || !upper || !grid) {
        fail(sec.line, "region checks need lower, upper and grid fields");
    }
    const auto lo = parse_vector(*lower);
    const auto hi = parse_vector(*upper);
    const auto counts = parse_vector(*grid);
    if (lo.size() != hi.size() || lo.size() != counts.size()) {
        fail(lower->line, "lower, upper and grid must have equal length");
    }
    RegionSpec region;
    region.lower = Eigen::Map<const Vector>(lo.data(), static_cast<long>(lo.size()));
    region.upper = Eigen::Map<const Vector>(hi.data(), static_cast<long>(hi.size()));
    for (double c : counts) {
        region.counts.push_back(static_cast<int>(c));
    }
    if (const auto* e = sec.find("exclusion_radius")) {
        region.origin_exclusion_radius = parse_double(*e);
    }
    try {
        region.validate();
    } catch (const Error& err) {
        fail(sec.line, err.what());
    }
    return region;
}

}  // namespace

InputSignal InputSpec::build() const {
    if (kind == "piecewise") {
        std::vector<Vector> vv;
        for (double v : values) {
            Vector u(1);
            u[0] = v;
            vv.push_back(u);
        }
        return piecewise_constant_input(times, vv);
    }
    if (kind == "sine") {
        return sine_input(amplitude, omega, phase);
    }
    Vector u(1);
    u[0] = constant;
    return constant_input(u);
}

bool InputSpec::is_zero() const {
    if (kind == "constant") {
        return constant == 0.0;
    }
    if (kind == "sine") {
        return amplitude == 0.0;
    }
    return std::all_of(values.begin(), values.end(), [](double v) { return v == 0.0; });
}

std::string Scenario::hash() const {
    return content_hash(source_text);
}

Scenario parse_scenario(const std::string& text, const std::string& origin) {
    Scenario sc;
    sc.source_text = text;
    sc.name = origin;

    const auto sections = tokenize(text);
    std::map<std::string, int> seen;
    for (const auto& sec : sections) {
        if (sec.name != "check" && ++seen[sec.name] > 1) {
            fail(sec.line, "duplicate section [" + sec.name + "]");
        }
    }

    bool have_system = false;
    for (const auto& sec : sections) {
        if (sec.name == "scenario") {
            if (const auto* e = sec.find("name")) {
                sc.name = e->value;
            }
        } else if (sec.name == "system") {
            have_system = true;
            const auto* kind = sec.find("kind");
            if (!kind) {
                fail(sec.line, "[system] needs a kind");
            }
            if (kind->value == "plant") {
                sc.kind = SystemKind::Plant;
            } else if (kind->value == "higs") {
                sc.kind = SystemKind::Higs;
            } else if (kind->value == "feedback") {
                sc.kind = SystemKind::Feedback;
            } else if (kind->value == "cascade") {
                sc.kind = SystemKind::Cascade;
            } else {
                fail(kind->line, "unknown system kind '" + kind->value + "'");
            }
            if (const auto* e = sec.find("k_h")) {
                sc.higs.k_h = parse_double(*e);
                if (!(sc.higs.k_h > 0.0)) {
                    fail(e->line, "k_h must be in (0, inf)");
                }
            }
            if (const auto* e = sec.find("omega_h")) {
                sc.higs.omega_h = parse_double(*e);
                if (!(sc.higs.omega_h >= 0.0)) {
                    fail(e->line, "omega_h must be >= 0");
                }
            }
            if (const auto* e = sec.find("guard_tol")) {
                sc.guard_tol = parse_double(*e);
            }
            if (const auto* e = sec.find("plant_cubic")) {
                sc.plant.cubic_stiffness = parse_double(*e);
            }
            if (const auto* e = sec.find("plant_linear")) {
                sc.plant.linear_stiffness = parse_double(*e);
            }
            if (const auto* e = sec.find("plant_damping")) {
                sc.plant.damping = parse_double(*e);
            }
        } else if (sec.name == "initial") {
            const auto* e = sec.find("state");
            if (!e) {
                fail(sec.line, "[initial] needs a state vector");
            }
            const auto v = parse_vector(*e);
            sc.initial_state =
                Eigen::Map<const Vector>(v.data(), static_cast<long>(v.size()));
        } else if (sec.name == "input") {
            sc.input_u = parse_input_spec(sec, "u");
            sc.input_u_tilde = parse_input_spec(sec, "u_tilde");
        } else if (sec.name == "sim") {
            if (const auto* e = sec.find("t_end")) {
                sc.sim.t_end = parse_double(*e);
            }
            if (const auto* e = sec.find("step")) {
                sc.sim.step = parse_double(*e);
            }
            if (const auto* e = sec.find("event_tolerance")) {
                sc.sim.event_tolerance = parse_double(*e);
            }
            if (const auto* e = sec.find("max_events_per_step")) {
                sc.sim.max_events_per_step = parse_int(*e);
            }
            if (const auto* e = sec.find("record_stride")) {
                sc.sim.record_stride = parse_int(*e);
            }
            try {
                sc.sim.validate();
            } catch (const Error& err) {
                fail(sec.line, err.what());
            }
        } else if (sec.name == "output") {
            if (const auto* e = sec.find("trajectory")) {
                sc.out_trajectory = e->value;
            }
            if (const auto* e = sec.find("report")) {
                sc.out_report = e->value;
            }
            if (const auto* e = sec.find("plot")) {
                sc.out_plot = e->value;
            }
        } else if (sec.name == "check") {
            CheckSpec ck;
            ck.line = sec.line;
            const auto* kind = sec.find("kind");
            if (!kind) {
                fail(sec.line, "[check] needs a kind");
            }
            ck.kind = kind->value;
            static const std::vector<std::string> kinds = {
                "ni_dissipation",  "sector",           "switch_monotonicity",
                "positive_definite", "assumption_iii", "lyapunov_decrease",
                "assumptions_i_ii"};
            if (std::find(kinds.begin(), kinds.end(), ck.kind) == kinds.end()) {
                fail(kind->line, "unknown check kind '" + ck.kind + "'");
            }
            ck.name = ck.kind;
            if (const auto* e = sec.find("name")) {
                ck.name = e->value;
            }
            if (const auto* e = sec.find("target")) {
                ck.target = e->value;
                if (ck.target != "h1" && ck.target != "h2" && ck.target != "closed_loop" &&
                    ck.target != "self") {
                    fail(e->line, "target must be h1, h2, closed_loop or self");
                }
            }
            if (const auto* e = sec.find("tol")) {
                ck.tol = parse_double(*e);
                if (!(ck.tol >= 0.0)) {
                    fail(e->line, "tol must be >= 0");
                }
            }
            if (const auto* e = sec.find("eps")) {
                ck.eps = parse_double(*e);
            }
            if (const auto* e = sec.find("strict")) {
                ck.strict = parse_bool(*e);
            }
            if (const auto* e = sec.find("decay_fraction")) {
                ck.decay_fraction = parse_double(*e);
            }
            if (const auto* e = sec.find("u_bars")) {
                ck.u_bars = parse_vector(*e);
            }
            if (const auto* e = sec.find("settle_window")) {
                ck.settle_window = parse_double(*e);
            }
            if (const auto* e = sec.find("settle_tol")) {
                ck.settle_tol = parse_double(*e);
            }
            if (const auto* e = sec.find("horizon")) {
                ck.horizon = parse_double(*e);
            }
            if (sec.find("lower") || sec.find("upper") || sec.find("grid") ||
                sec.find("exclusion_radius")) {
                ck.region = parse_region(sec);
            }
            sc.checks.push_back(std::move(ck));
        } else {
            fail(sec.line, "unknown section [" + sec.name + "]");
        }
        reject_unused(sec);
    }

    if (!have_system) {
        throw ScenarioError("missing [system] section");
    }

    const int expected_dim = sc.kind == SystemKind::Plant  ? 2
                             : sc.kind == SystemKind::Higs ? 1
                                                           : 3;
    if (sc.initial_state.size() == 0) {
        sc.initial_state = Vector::Zero(expected_dim);
    }
    if (static_cast<int>(sc.initial_state.size()) != expected_dim) {
        std::ostringstream os;
        os << "initial state has dimension " << sc.initial_state.size() << ", expected "
           << expected_dim;
        throw ScenarioError(os.str());
    }
    return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ScenarioError("cannot open scenario file " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    Scenario sc = parse_scenario(buf.str(), path.stem().string());
    return sc;
}

// ---------------------------------------------------------------------------
// Runner
// ---------------------------------------------------------------------------

namespace {

struct BuiltScenario {
    SystemWithStorage sys1;                          // plant (or the single system)
    SystemWithStorage sys2;                          // higs, for composite kinds
    std::optional<FeedbackLoop> loop;                // kind == Feedback
    std::optional<CascadeInterconnection> cascade;   // kind == Cascade
    const SwitchedSystemModel* sim_model = nullptr;  // what simulate() runs
    InputSignal sim_input;
};

BuiltScenario build_scenario_systems(const Scenario& sc) {
    BuiltScenario built;
    switch (sc.kind) {
        case SystemKind::Plant:
            built.sys1 = make_plant(sc.plant);
            built.sim_model = &built.sys1.model;
            built.sim_input = sc.input_u.build();
            break;
        case SystemKind::Higs:
            built.sys1 = make_higs(sc.higs, sc.guard_tol);
            built.sim_model = &built.sys1.model;
            built.sim_input = sc.input_u.build();
            break;
        case SystemKind::Feedback:
            built.sys1 = make_plant(sc.plant);
            built.sys2 = make_higs(sc.higs, sc.guard_tol);
            built.loop = build_positive_feedback(built.sys1, built.sys2,
                                                 sc.input_u.build(),
                                                 sc.input_u_tilde.build());
            built.sim_model = &built.loop->joint;
            built.sim_input = built.loop->joint_input();
            break;
        case SystemKind::Cascade:
            built.sys1 = make_plant(sc.plant);
            built.sys2 = make_higs(sc.higs, sc.guard_tol);
            built.cascade = build_cascade(built.sys1, built.sys2);
            built.sim_model = &built.cascade->joint;
            built.sim_input = sc.input_u.build();
            break;
    }
    return built;
}

/// Fixed ensemble for the observability-style falsification checks: an
/// unforced run from a displaced state, a constant input, and a sine.
std::vector<Trajectory> make_ensemble(const SystemWithStorage& sys, const SimConfig& base) {
    SimConfig cfg = base;
    cfg.t_end = std::min(base.t_end, 5.0);
    cfg.record_stride = 1;
    std::vector<Trajectory> runs;
    const int n = sys.model.state_dim;
    Vector x0 = Vector::Constant(n, 0.5);
    runs.push_back(simulate(sys.model, x0, zero_input(sys.model.input_dim), cfg));
    Vector half(1);
    half[0] = 0.5;
    runs.push_back(simulate(sys.model, Vector::Zero(n), constant_input(half), cfg));
    runs.push_back(simulate(sys.model, Vector::Zero(n), sine_input(0.5, 2.0), cfg));
    return runs;
}

[[noreturn]] void check_error(const CheckSpec& ck, const std::string& message) {
    std::ostringstream os;
    os << "check '" << ck.name << "' (line " << ck.line << "): " << message;
    throw ScenarioError(os.str());
}

}  // namespace

void write_reports(const std::vector<CertificateReport>& reports,
                   const std::filesystem::path& path, const std::string& scenario_name,
                   const std::string& scenario_hash) {
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot open " + path.string() + " for writing");
    }
    out << "# swni certificate report\n";
    out << "# scenario = " << scenario_name << "\n";
    out << "# scenario_hash = " << scenario_hash << "\n";
    for (const auto& r : reports) {
        out << "\n[report]\n";
        out << "name = " << r.check_name << "\n";
        out << "verdict = " << to_string(r.verdict) << "\n";
        out << "samples = " << r.samples_evaluated << "\n";
        out << "worst_residual = " << fmt_double(r.worst_residual) << "\n";
        out << "threshold = " << fmt_double(r.threshold) << "\n";
        out << "tolerance = " << fmt_double(r.tolerance) << "\n";
        if (std::isfinite(r.worst_time)) {
            out << "worst_time = " << fmt_double(r.worst_time) << "\n";
        }
        if (r.worst_state.size() > 0) {
            out << "worst_state =";
            for (int i = 0; i < r.worst_state.size(); ++i) {
                out << " " << fmt_double(r.worst_state[i]);
            }
            out << "\n";
        }
        if (!r.detail.empty()) {
            out << "detail = " << r.detail << "\n";
        }
    }
}

RunResult run_scenario(const Scenario& scenario, const RunOptions& options) {
    Scenario sc = scenario;
    if (options.step_override) {
        sc.sim.step = *options.step_override;
        sc.sim.validate();
    }
    if (options.tol_override) {
        for (auto& ck : sc.checks) {
            ck.tol = *options.tol_override;
        }
    }

    sc.higs.validate();
    const BuiltScenario built = build_scenario_systems(sc);

    RunResult result;
    const std::string hash = sc.hash();
    std::filesystem::create_directories(options.out_dir);

    // Trajectory-dependent checks simulate lazily, so a pure region-scan
    // scenario never integrates.
    bool simulated = false;
    Trajectory traj;
    auto the_trajectory = [&]() -> const Trajectory& {
        if (!simulated) {
            traj = simulate(*built.sim_model, sc.initial_state, built.sim_input, sc.sim);
            simulated = true;
        }
        return traj;
    };

    auto side_trajectory = [&](const CheckSpec& ck, const std::string& dflt) -> Trajectory {
        std::string target = ck.target.empty() ? dflt : ck.target;
        if (sc.kind == SystemKind::Plant || sc.kind == SystemKind::Higs) {
            return the_trajectory();
        }
        if (!built.loop) {
            check_error(ck, "per-side checks need the feedback kind");
        }
        if (target == "h1") {
            return built.loop->subsystem_trajectory(the_trajectory(), 1);
        }
        if (target == "h2") {
            return built.loop->subsystem_trajectory(the_trajectory(), 2);
        }
        return the_trajectory();
    };

    if (options.run_checks) {
        for (const auto& ck : sc.checks) {
            CertificateReport rep;
            if (ck.kind == "ni_dissipation") {
                const std::string target = ck.target.empty()
                                               ? (built.loop ? "closed_loop" : "self")
                                               : ck.target;
                if (target == "closed_loop") {
                    if (!built.loop) {
                        check_error(ck, "closed_loop target needs the feedback kind");
                    }
                    rep = check_ni_dissipation(
                        the_trajectory(), built.loop->joint_storage,
                        ck.eps.value_or(built.loop->storage.epsilon_min), ck.tol, ck.name);
                } else {
                    const Trajectory sub = side_trajectory(ck, "self");
                    const StorageFamily& fam =
                        (built.loop && target == "h2") ? built.loop->storage2
                        : (built.loop && target == "h1") ? built.loop->storage1
                                                         : built.sys1.storage;
                    rep = check_ni_dissipation(sub, fam,
                                               ck.eps.value_or(fam.output_strictness),
                                               ck.tol, ck.name);
                }
            } else if (ck.kind == "sector") {
                const Trajectory sub = side_trajectory(ck, built.loop ? "h2" : "self");
                const double k_h = sc.higs.k_h;
                rep = check_pointwise(
                    sub,
                    [k_h](const TrajectorySample& s) {
                        return higs_sector_residual(s.u[0], s.x[0], k_h);
                    },
                    ck.tol, ck.name);
                rep.detail = "sector membership e*u - u^2/k_h";
            } else if (ck.kind == "switch_monotonicity") {
                const Trajectory sub = side_trajectory(ck, built.loop ? "h2" : "self");
                const std::string target = ck.target.empty()
                                               ? (built.loop ? "h2" : "self")
                                               : ck.target;
                const StorageFamily& fam = (built.loop && target == "h1")
                                               ? built.loop->storage1
                                           : (built.loop && target == "h2")
                                               ? built.loop->storage2
                                               : built.sys1.storage;
                rep = check_switch_monotonicity(sub, fam, ck.tol, ck.region, ck.name);
            } else if (ck.kind == "positive_definite") {
                if (!built.loop) {
                    check_error(ck, "positive_definite scans the loop storage; use the "
                                    "feedback kind");
                }
                if (!ck.region) {
                    check_error(ck, "positive_definite needs a region");
                }
                rep = check_positive_definite(built.loop->storage,
                                              built.loop->modes1 * built.loop->modes2,
                                              *ck.region, ck.tol, ck.strict, ck.name);
            } else if (ck.kind == "lyapunov_decrease") {
                if (!built.loop) {
                    check_error(ck, "lyapunov_decrease needs the feedback kind");
                }
                if (!sc.input_u.is_zero() || !sc.input_u_tilde.is_zero()) {
                    check_error(ck, "lyapunov_decrease requires zero external inputs");
                }
                rep = check_lyapunov_decrease(the_trajectory(), built.loop->storage,
                                              {ck.tol, ck.decay_fraction}, ck.name);
            } else if (ck.kind == "assumption_iii") {
                const CascadeInterconnection cascade =
                    built.cascade ? *built.cascade
                                  : build_cascade(make_plant(sc.plant),
                                                  make_higs(sc.higs, sc.guard_tol));
                if (ck.u_bars.empty()) {
                    check_error(ck, "assumption_iii needs u_bars");
                }
                SteadyStateOptions opts;
                opts.sim = sc.sim;
                opts.sim.t_end = ck.horizon;
                opts.sim.record_stride = 1;
                opts.window = ck.settle_window;
                opts.settle_tol = ck.settle_tol;
                AssumptionIiiResult res = check_assumption_iii(
                    cascade, ck.u_bars, opts, ck.tol,
                    std::make_pair(sc.plant, sc.higs.k_h));
                rep = res.report;
                rep.check_name = ck.name;
            } else if (ck.kind == "assumptions_i_ii") {
                const SystemWithStorage& target_sys =
                    (ck.target == "h2" && (built.loop || built.cascade)) ? built.sys2
                                                                         : built.sys1;
                rep = check_assumptions_i_ii(make_ensemble(target_sys, sc.sim),
                                             {100, ck.tol}, ck.name);
            }
            result.reports.push_back(std::move(rep));
        }
    }

    // Emit artifacts. `simulate` always integrates; `certify` only when a
    // check needed the trajectory.
    const std::string base = sc.name;
    if (!options.run_checks) {
        the_trajectory();
    }
    if (simulated) {
        TrajectoryMeta meta;
        meta.scenario_hash = hash;
        meta.extra.push_back({"scenario", sc.name});
        meta.extra.push_back({"t_end", fmt_double(sc.sim.t_end)});
        meta.extra.push_back({"event_tolerance", fmt_double(sc.sim.event_tolerance)});
        result.trajectory_path =
            options.out_dir /
            (sc.out_trajectory.empty() ? base + "_trajectory.csv" : sc.out_trajectory);
        emit_trajectory(traj, result.trajectory_path, meta, built.sim_model->state_names);
        if (options.plot) {
            result.plot_path = options.out_dir /
                               (sc.out_plot.empty() ? base + "_plot.svg" : sc.out_plot);
            emit_plot(traj, result.plot_path, built.sim_model->state_names);
        }
        result.trajectory = std::move(traj);
    }
    if (options.run_checks) {
        result.report_path =
            options.out_dir / (sc.out_report.empty() ? base + "_report.txt" : sc.out_report);
        write_reports(result.reports, result.report_path, sc.name, hash);
    }

    const bool all_ok = std::all_of(
        result.reports.begin(), result.reports.end(), [](const CertificateReport& r) {
            return r.verdict == Verdict::Pass || r.verdict == Verdict::NotFalsified;
        });
    result.exit_code = all_ok ? 0 : 2;

    if (options.log) {
        for (const auto& r : result.reports) {
            (*options.log) << (r.verdict == Verdict::Pass || r.verdict == Verdict::NotFalsified
                                   ? "PASS"
                                   : "FAIL")
                           << " " << r.check_name << " [" << to_string(r.verdict)
                           << "] worst_residual=" << r.worst_residual << "\n";
        }
    }
    return result;
}

int run_scenario_file(const std::filesystem::path& path, const RunOptions& options) {
    try {
        const Scenario sc = load_scenario(path);
        return run_scenario(sc, options).exit_code;
    } catch (const std::exception& err) {
        if (options.log) {
            (*options.log) << "error: " << err.what() << "\n";
        } else {
            std::cerr << "error: " << err.what() << "\n";
        }
        return 1;
    }
}

// ---------------------------------------------------------------------------
// Bundled scenarios
// ---------------------------------------------------------------------------

const std::string& fig4_scenario_text() {
    static const std::string text = R"(# Closed-loop run of the nonlinear plant under the stock HIGS controller,
# with the full certificate stack.

[scenario]
name = fig4

[system]
kind = feedback
k_h = 0.8
omega_h = 20

[initial]
state = 5 0 0

[input]
u = 0
u_tilde = 0

[sim]
t_end = 15
step = 1e-3
event_tolerance = 1e-9
record_stride = 1

[output]
trajectory = fig4_trajectory.csv
report = fig4_report.txt
plot = fig4_plot.svg

[check]
kind = ni_dissipation
name = plant_osni
target = h1
tol = 1e-8

[check]
kind = ni_dissipation
name = higs_ni
target = h2
eps = 0
tol = 1e-6

[check]
kind = sector
name = higs_sector
target = h2
tol = 1e-6

[check]
kind = switch_monotonicity
name = higs_switch_monotonicity
target = h2
tol = 1e-12

[check]
kind = lyapunov_decrease
name = loop_lyapunov_decrease
tol = 1e-6
decay_fraction = 0.01

[check]
kind = positive_definite
name = loop_storage_positive
lower = -2 -2 -2
upper = 2 2 2
grid = 41 41 41
exclusion_radius = 1e-3
tol = 1e-6
)";
    return text;
}

const std::string& kh15_negative_scenario_text() {
    static const std::string text = R"(# With the gain above the stiffness bound the loop storage stops being
# positive definite; the scan must find a witness point.

[scenario]
name = kh15-negative

[system]
kind = feedback
k_h = 1.5
omega_h = 20

[initial]
state = 0.5 0 0

[input]
u = 0
u_tilde = 0

[sim]
t_end = 1
step = 1e-3

[output]
report = kh15_report.txt

[check]
kind = positive_definite
name = loop_storage_positive
lower = -2 -2 -2
upper = 2 2 2
grid = 41 41 41
exclusion_radius = 1e-3
tol = 1e-6
)";
    return text;
}

}  // namespace swni
