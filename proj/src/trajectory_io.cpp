#include "swni/trajectory_io.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace swni {

namespace {

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<std::string> column_names(int n, const std::vector<std::string>& given,
                                      const std::string& prefix) {
    std::vector<std::string> names;
    if (static_cast<int>(given.size()) == n) {
        return given;
    }
    for (int i = 1; i <= n; ++i) {
        names.push_back(prefix + std::to_string(i));
    }
    return names;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream is(line);
    while (std::getline(is, field, sep)) {
        out.push_back(field);
    }
    return out;
}

}  // namespace

std::string content_hash(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
    return buf;
}

void emit_trajectory(const Trajectory& traj, const std::filesystem::path& path,
                     const TrajectoryMeta& meta,
                     const std::vector<std::string>& state_names) {
    if (traj.empty()) {
        throw ContractViolation("refusing to write an empty trajectory");
    }
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot open " + path.string() + " for writing");
    }

    const auto& first = traj.samples.front();
    const int n = static_cast<int>(first.x.size());
    const int p = static_cast<int>(first.u.size());

    out << "# swni trajectory\n";
    if (!meta.scenario_hash.empty()) {
        out << "# scenario_hash = " << meta.scenario_hash << "\n";
    }
    out << "# step = " << fmt_double(traj.step) << "\n";
    out << "# samples = " << traj.samples.size() << "\n";
    out << "# switch_events = " << traj.switch_events.size() << "\n";
    for (const auto& [k, v] : meta.extra) {
        out << "# " << k << " = " << v << "\n";
    }

    const auto xs = column_names(n, state_names, "x");
    out << "t";
    for (const auto& c : xs) {
        out << "," << c;
    }
    for (int i = 1; i <= p; ++i) {
        out << ",u" << i;
    }
    for (int i = 1; i <= p; ++i) {
        out << ",y" << i;
    }
    for (int i = 1; i <= p; ++i) {
        out << ",ydot" << i;
    }
    out << ",mode,event\n";

    for (const auto& s : traj.samples) {
        out << fmt_double(s.t);
        for (int i = 0; i < n; ++i) {
            out << "," << fmt_double(s.x[i]);
        }
        for (int i = 0; i < p; ++i) {
            out << "," << fmt_double(s.u[i]);
        }
        for (int i = 0; i < p; ++i) {
            out << "," << fmt_double(s.y[i]);
        }
        for (int i = 0; i < p; ++i) {
            out << "," << fmt_double(s.y_dot[i]);
        }
        out << "," << s.mode << "," << (s.at_event ? 1 : 0) << "\n";
    }
}

Trajectory load_trajectory(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open " + path.string());
    }
    Trajectory traj;
    std::string line;
    int n = -1, p = -1;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        if (line[0] == '#') {
            const auto eq = line.find('=');
            if (line.find("step") != std::string::npos && eq != std::string::npos) {
                traj.step = std::stod(line.substr(eq + 1));
            }
            continue;
        }
        const auto fields = split(line, ',');
        if (!header_seen) {
            header_seen = true;
            // t, n states, 3p channels, mode, event
            const int rest = static_cast<int>(fields.size()) - 3;
            int np = 0;
            for (const auto& f : fields) {
                np += f.rfind("u", 0) == 0 ? 1 : 0;
            }
            p = np;
            n = rest - 3 * p;
            if (n < 1 || p < 1) {
                throw Error("malformed trajectory header in " + path.string());
            }
            continue;
        }
        if (static_cast<int>(fields.size()) != 1 + n + 3 * p + 2) {
            throw Error("malformed trajectory row in " + path.string());
        }
        TrajectorySample s;
        int k = 0;
        s.t = std::stod(fields[k++]);
        s.x.resize(n);
        for (int i = 0; i < n; ++i) {
            s.x[i] = std::stod(fields[k++]);
        }
        s.u.resize(p);
        for (int i = 0; i < p; ++i) {
            s.u[i] = std::stod(fields[k++]);
        }
        s.y.resize(p);
        for (int i = 0; i < p; ++i) {
            s.y[i] = std::stod(fields[k++]);
        }
        s.y_dot.resize(p);
        for (int i = 0; i < p; ++i) {
            s.y_dot[i] = std::stod(fields[k++]);
        }
        s.mode = std::stoi(fields[k++]);
        s.at_event = fields[k] == "1";
        traj.samples.push_back(std::move(s));
    }
    if (traj.samples.empty()) {
        throw Error("no samples in " + path.string());
    }
    return traj;
}

void emit_plot(const Trajectory& traj, const std::filesystem::path& path,
               const std::vector<std::string>& state_names, const std::string& title) {
    if (traj.empty()) {
        throw ContractViolation("refusing to plot an empty trajectory");
    }
    const int n = static_cast<int>(traj.samples.front().x.size());
    const double t0 = traj.samples.front().t;
    const double t1 = traj.samples.back().t;
    double lo = 0.0, hi = 0.0;
    for (const auto& s : traj.samples) {
        lo = std::min(lo, s.x.minCoeff());
        hi = std::max(hi, s.x.maxCoeff());
    }
    if (hi - lo < 1e-12) {
        hi = lo + 1.0;
    }
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;

    const double width = 900, height = 480;
    const double ml = 64, mr = 16, mt = 36, mb = 44;
    auto px = [&](double t) { return ml + (t - t0) / (t1 - t0) * (width - ml - mr); };
    auto py = [&](double v) { return mt + (hi - v) / (hi - lo) * (height - mt - mb); };

    // Keep the file size sane on long runs.
    const std::size_t max_pts = 2400;
    const std::size_t stride = std::max<std::size_t>(1, traj.samples.size() / max_pts);

    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c",
                                   "#9467bd", "#ff7f0e", "#8c564b"};
    const auto names = column_names(n, state_names, "x");

    std::ofstream out(path);
    if (!out) {
        throw Error("cannot open " + path.string() + " for writing");
    }
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"15\">" << title << "</text>\n";

    // Axes with a few ticks.
    out << "<g stroke=\"#333\" stroke-width=\"1\" font-family=\"sans-serif\" "
           "font-size=\"11\" fill=\"#333\">\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << height - mb << "\" x2=\"" << width - mr
        << "\" y2=\"" << height - mb << "\"/>\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\""
        << height - mb << "\"/>\n";
    for (int k = 0; k <= 5; ++k) {
        const double tv = t0 + (t1 - t0) * k / 5;
        const double vv = lo + (hi - lo) * k / 5;
        out << "<line x1=\"" << px(tv) << "\" y1=\"" << height - mb << "\" x2=\"" << px(tv)
            << "\" y2=\"" << height - mb + 4 << "\"/>\n";
        out << "<text x=\"" << px(tv) << "\" y=\"" << height - mb + 16
            << "\" text-anchor=\"middle\" stroke=\"none\">" << tv << "</text>\n";
        out << "<line x1=\"" << ml - 4 << "\" y1=\"" << py(vv) << "\" x2=\"" << ml
            << "\" y2=\"" << py(vv) << "\"/>\n";
        char vbuf[32];
        std::snprintf(vbuf, sizeof(vbuf), "%.3g", vv);
        out << "<text x=\"" << ml - 8 << "\" y=\"" << py(vv) + 4
            << "\" text-anchor=\"end\" stroke=\"none\">" << vbuf << "</text>\n";
    }
    out << "<text x=\"" << (ml + width - mr) / 2 << "\" y=\"" << height - 8
        << "\" text-anchor=\"middle\" stroke=\"none\">time (s)</text>\n";
    out << "</g>\n";

    // Mode-change markers.
    for (const auto& ev : traj.switch_events) {
        out << "<line x1=\"" << px(ev.t) << "\" y1=\"" << mt << "\" x2=\"" << px(ev.t)
            << "\" y2=\"" << height - mb
            << "\" stroke=\"#bbbbbb\" stroke-dasharray=\"3,3\"/>\n";
    }

    for (int i = 0; i < n; ++i) {
        out << "<polyline fill=\"none\" stroke=\"" << colors[i % 6]
            << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t k = 0; k < traj.samples.size(); k += stride) {
            const auto& s = traj.samples[k];
            out << px(s.t) << "," << py(s.x[i]) << " ";
        }
        const auto& last = traj.samples.back();
        out << px(last.t) << "," << py(last.x[i]);
        out << "\"/>\n";
        out << "<text x=\"" << width - mr - 50 << "\" y=\"" << mt + 16 + 16 * i
            << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" << colors[i % 6]
            << "\">" << names[static_cast<std::size_t>(i)] << "</text>\n";
    }
    out << "</svg>\n";
}

}  // namespace swni
