#pragma once

// Flat INI configuration: sections domain, grid, params, time, ic, output,
// monitors, solver, stability and sweep. A file with a [sweep] section
// describes a SweepSpec, anything else a single run.

#include "chemolab/errors.hpp"
#include "chemolab/linear_stability.hpp"
#include "chemolab/sim_config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace chemolab::io {

struct StabilityOptions {
    int pmax = 8;   ///< dispersion table covers 0 <= p, q <= pmax/qmax
    int qmax = 8;
};

struct RunConfig {
    SimConfig sim;
    StabilityOptions stability;
};

enum class SweepTask { Thresholds, Simulate };

struct SweepSpec {
    RunConfig base;
    std::string axis = "chi";
    double from = 0.0;
    double to = 0.0;
    double step = 0.0;
    SweepTask task = SweepTask::Thresholds;
    std::string table = "sweep.tsv";
    int threads = 0;   ///< 0 picks the hardware concurrency

    /// from, from + step, ... up to `to` (inclusive within step/1e6).
    std::vector<double> points() const {
        std::vector<double> out;
        if (!(step > 0.0) || to < from) return out;
        const long n = static_cast<long>(std::floor((to - from) / step + 1e-6));
        for (long k = 0; k <= n; ++k) out.push_back(from + static_cast<double>(k) * step);
        return out;
    }

    /// Base parameters with the swept axis set to `value`.
    ModelParams params_at(double value) const {
        const auto& p = base.sim.params;
        if (axis == "chi") return p.with_chi(value);
        if (axis == "eps0") return p.with_eps0(value);
        if (axis == "a") return {value, p.chi(), p.eps0(), p.delta(), p.beta(), p.nonlinearity()};
        if (axis == "delta") return {p.a(), p.chi(), p.eps0(), value, p.beta(), p.nonlinearity()};
        if (axis == "beta") return {p.a(), p.chi(), p.eps0(), p.delta(), value, p.nonlinearity()};
        throw ValidationError("unknown sweep axis '" + axis + "'");
    }
};

using ParsedConfig = std::variant<RunConfig, SweepSpec>;

namespace detail {

/// Line of every "key = value" entry, keyed by "section.key".
inline std::map<std::string, std::size_t> index_lines(const std::string& text) {
    std::map<std::string, std::size_t> lines;
    std::istringstream in(text);
    std::string line, section;
    std::size_t n = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++n;
        const auto t = trim(line);
        if (t.empty() || t[0] == ';' || t[0] == '#') continue;
        if (t.front() == '[' && t.back() == ']') {
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        const auto eq = t.find('=');
        if (eq != std::string::npos) lines.emplace(section + "." + trim(t.substr(0, eq)), n);
    }
    return lines;
}

/// Accepts plain numbers and the forms pi, k*pi, pi/k, k*pi/j.
inline bool parse_real(std::string s, double& out) {
    s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); }),
            s.end());
    if (s.empty()) return false;
    auto plain = [](const std::string& t, double& v) {
        const auto* end = t.data() + t.size();
        const auto r = std::from_chars(t.data(), end, v);
        return r.ec == std::errc{} && r.ptr == end;
    };
    if (plain(s, out)) return std::isfinite(out);
    const auto pos = s.find("pi");
    if (pos == std::string::npos) return false;
    double k = 1.0, j = 1.0;
    const std::string head = s.substr(0, pos);
    const std::string tail = s.substr(pos + 2);
    if (!head.empty()) {
        if (head.back() != '*' || !plain(head.substr(0, head.size() - 1), k)) return false;
    }
    if (!tail.empty()) {
        if (tail.front() != '/' || !plain(tail.substr(1), j) || j == 0.0) return false;
    }
    out = k * std::numbers::pi / j;
    return std::isfinite(out);
}

class Reader {
public:
    Reader(const boost::property_tree::ptree& tree, std::map<std::string, std::size_t> lines)
        : tree_(tree), lines_(std::move(lines)) {}

    std::size_t line(const std::string& key) const {
        const auto it = lines_.find(key);
        return it == lines_.end() ? 0 : it->second;
    }

    bool has(const std::string& key) const { return tree_.get_optional<std::string>(key).has_value(); }

    bool has_section(const std::string& s) const { return tree_.get_child_optional(s).has_value(); }

    std::string text(const std::string& key, const std::string& fallback) {
        used_.insert(key);
        return tree_.get<std::string>(key, fallback);
    }

    double real(const std::string& key, double fallback) {
        used_.insert(key);
        const auto v = tree_.get_optional<std::string>(key);
        if (!v) return fallback;
        double out = 0.0;
        if (!parse_real(*v, out)) fail("expected a number", key);
        return out;
    }

    long integer(const std::string& key, long fallback) {
        used_.insert(key);
        const auto v = tree_.get_optional<std::string>(key);
        if (!v) return fallback;
        long out = 0;
        const auto* end = v->data() + v->size();
        const auto r = std::from_chars(v->data(), end, out);
        if (r.ec != std::errc{} || r.ptr != end) fail("expected an integer", key);
        return out;
    }

    bool boolean(const std::string& key, bool fallback) {
        used_.insert(key);
        const auto v = tree_.get_optional<std::string>(key);
        if (!v) return fallback;
        if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") return true;
        if (*v == "false" || *v == "0" || *v == "no" || *v == "off") return false;
        fail("expected true or false", key);
    }

    [[noreturn]] void fail(const std::string& msg, const std::string& key) const {
        const auto n = line(key);
        throw ParseError("line " + std::to_string(n) + ", " + key + ": " + msg, n, key);
    }

    /// Unknown sections or keys are errors, so typos never pass silently.
    void reject_unused() const {
        for (const auto& [section, body] : tree_) {
            if (body.empty() && !body.data().empty()) fail("key outside any section", section);
            for (const auto& [key, value] : body) {
                const auto full = section + "." + key;
                if (!used_.count(full)) fail("unknown key", full);
            }
        }
    }

private:
    const boost::property_tree::ptree& tree_;
    std::map<std::string, std::size_t> lines_;
    std::set<std::string> used_;
};

inline std::vector<std::pair<int, int>> parse_modes(Reader& r, const std::string& key) {
    // "2,2; 1,0"
    const auto text = r.text(key, "2,2");
    std::vector<std::pair<int, int>> out;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ';')) {
        if (item.find_first_not_of(" \t") == std::string::npos) continue;
        int p = 0, q = 0;
        char comma = 0;
        std::istringstream is(item);
        if (!(is >> p >> comma >> q) || comma != ',') r.fail("expected p,q pairs separated by ';'", key);
        std::string rest;
        if (is >> rest) r.fail("expected p,q pairs separated by ';'", key);
        out.emplace_back(p, q);
    }
    return out;
}

inline RunConfig read_run(Reader& r) {
    auto wrap = [&](const std::string& key, auto&& fn) {
        try {
            return fn();
        } catch (const ValidationError& e) {
            const auto n = r.line(key);
            throw ValidationError(std::string(e.what()) + (n ? " (line " + std::to_string(n) + ")" : ""));
        }
    };

    const RectDomain dom{r.real("domain.lx", std::numbers::pi), r.real("domain.ly", std::numbers::pi)};
    if (!(dom.lx > 0.0) || !(dom.ly > 0.0)) throw ValidationError("domain lengths > 0 required");
    const Grid grid = wrap("grid.nx", [&] {
        return Grid(dom, static_cast<int>(r.integer("grid.nx", 64)), static_cast<int>(r.integer("grid.ny", 64)));
    });

    const auto kind = r.text("params.nonlinearity", "saturating");
    if (kind != "saturating") r.fail("only the saturating nonlinearity can be configured from a file",
                                      "params.nonlinearity");
    const double rr = r.real("params.r", 1.0);
    const double a = r.real("params.a", 3.0);
    const double chi = r.real("params.chi", 1.0);
    const double eps0 = r.real("params.eps0", 0.03125);
    const double delta = r.real("params.delta", 1.0);
    const double beta = r.real("params.beta", 1.0);
    ModelParams params = wrap("params.a", [&] {
        return ModelParams(a, chi, eps0, delta, beta, NonlinearitySpec::saturating(rr));
    });

    RunConfig rc{SimConfig(std::move(params), grid), {}};
    SimConfig& c = rc.sim;
    c.dt = r.real("time.dt", c.dt);
    c.t_end = r.real("time.t_end", c.t_end);
    c.stop_on_stationary = r.boolean("time.stop_on_stationary", c.stop_on_stationary);
    c.stationary_tol = r.real("time.stationary_tol", c.stationary_tol);
    c.stationary_window = r.real("time.stationary_window", c.stationary_window);
    c.eq_tol = r.real("time.eq_tol", c.eq_tol);

    const auto ic = r.text("ic.kind", "random");
    c.seed = static_cast<std::uint64_t>(r.integer("ic.seed", 42));
    if (ic == "random") {
        EquilibriumPerturbation e;
        e.amplitude = r.real("ic.amplitude", e.amplitude);
        c.ic = e;
    } else if (ic == "far_field") {
        FarField f;
        f.m_base = r.real("ic.m_base", f.m_base);
        f.m_peak = r.real("ic.m_peak", f.m_peak);
        f.x0 = r.real("ic.x0", f.x0);
        f.y0 = r.real("ic.y0", f.y0);
        f.width = r.real("ic.width", f.width);
        f.c_value = r.real("ic.c_value", f.c_value);
        f.d_value = r.real("ic.d_value", f.d_value);
        c.ic = f;
    } else if (ic == "mode") {
        ModePerturbation m;
        m.p = static_cast<int>(r.integer("ic.p", m.p));
        m.q = static_cast<int>(r.integer("ic.q", m.q));
        m.m_amp = r.real("ic.m_amp", m.m_amp);
        m.c_amp = r.real("ic.c_amp", m.c_amp);
        m.d_amp = r.real("ic.d_amp", m.d_amp);
        c.ic = m;
    } else {
        r.fail("ic.kind must be random, far_field or mode", "ic.kind");
    }

    c.series_every = r.integer("output.series_every", c.series_every);
    c.snapshot_every = r.integer("output.snapshot_every", c.snapshot_every);

    const auto lyap = r.text("monitors.lyapunov", "auto");
    if (lyap == "auto") c.monitors.lyapunov = LyapunovMonitor::Auto;
    else if (lyap == "on") c.monitors.lyapunov = LyapunovMonitor::On;
    else if (lyap == "off") c.monitors.lyapunov = LyapunovMonitor::Off;
    else r.fail("monitors.lyapunov must be auto, on or off", "monitors.lyapunov");
    c.monitors.modes = parse_modes(r, "monitors.modes");

    c.dealias = r.boolean("solver.dealias", c.dealias);

    rc.stability.pmax = static_cast<int>(r.integer("stability.pmax", rc.stability.pmax));
    rc.stability.qmax = static_cast<int>(r.integer("stability.qmax", rc.stability.qmax));
    if (rc.stability.pmax < 0 || rc.stability.qmax < 0) {
        throw ValidationError("stability pmax, qmax >= 0 required");
    }
    c.validate();
    return rc;
}

}  // namespace detail

/// Parses INI text.
inline ParsedConfig parse_config_text(const std::string& text) {
    boost::property_tree::ptree tree;
    std::istringstream in(text);
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ParseError("line " + std::to_string(e.line()) + ": " + e.message(), e.line(), "");
    }
    detail::Reader r(tree, detail::index_lines(text));
    const bool sweep = r.has_section("sweep");
    RunConfig base = detail::read_run(r);
    if (!sweep) {
        r.reject_unused();
        return base;
    }
    SweepSpec s{std::move(base)};
    s.axis = r.text("sweep.axis", s.axis);
    s.from = r.real("sweep.from", s.from);
    s.to = r.real("sweep.to", s.to);
    s.step = r.real("sweep.step", s.step);
    const auto task = r.text("sweep.task", "thresholds");
    if (task == "thresholds") s.task = SweepTask::Thresholds;
    else if (task == "simulate") s.task = SweepTask::Simulate;
    else r.fail("sweep.task must be thresholds or simulate", "sweep.task");
    s.table = r.text("sweep.table", s.table);
    s.threads = static_cast<int>(r.integer("sweep.threads", s.threads));
    r.reject_unused();
    if (s.points().empty()) throw ValidationError("sweep grid is empty");
    if (s.threads < 0) throw ValidationError("sweep threads >= 0 required");
    for (double v : s.points()) s.params_at(v);
    return s;
}

inline ParsedConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path, 0, "");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

/// Shortest round-trip text for a double.
inline std::string format_real(double v) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

/// Canonical INI text of a run with every default materialized. Identical
/// configs give identical text on every platform.
inline std::string echo_config(const RunConfig& rc) {
    const SimConfig& c = rc.sim;
    const auto& p = c.params;
    std::ostringstream o;
    auto kv = [&](const char* k, const std::string& v) { o << k << " = " << v << "\n"; };
    auto num = [&](const char* k, double v) { kv(k, format_real(v)); };
    o << "[domain]\n";
    num("lx", c.grid.domain().lx);
    num("ly", c.grid.domain().ly);
    o << "\n[grid]\n";
    kv("nx", std::to_string(c.grid.nx()));
    kv("ny", std::to_string(c.grid.ny()));
    o << "\n[params]\n";
    kv("nonlinearity", "saturating");
    num("r", p.nonlinearity().rate());
    num("a", p.a());
    num("chi", p.chi());
    num("eps0", p.eps0());
    num("delta", p.delta());
    num("beta", p.beta());
    o << "\n[time]\n";
    num("dt", c.dt);
    num("t_end", c.t_end);
    kv("stop_on_stationary", c.stop_on_stationary ? "true" : "false");
    num("stationary_tol", c.stationary_tol);
    num("stationary_window", c.stationary_window);
    num("eq_tol", c.eq_tol);
    o << "\n[ic]\n";
    kv("seed", std::to_string(c.seed));
    std::visit(
        [&](const auto& ic) {
            using T = std::decay_t<decltype(ic)>;
            if constexpr (std::is_same_v<T, EquilibriumPerturbation>) {
                kv("kind", "random");
                num("amplitude", ic.amplitude);
            } else if constexpr (std::is_same_v<T, FarField>) {
                kv("kind", "far_field");
                num("m_base", ic.m_base);
                num("m_peak", ic.m_peak);
                num("x0", ic.x0);
                num("y0", ic.y0);
                num("width", ic.width);
                num("c_value", ic.c_value);
                num("d_value", ic.d_value);
            } else if constexpr (std::is_same_v<T, ModePerturbation>) {
                kv("kind", "mode");
                kv("p", std::to_string(ic.p));
                kv("q", std::to_string(ic.q));
                num("m_amp", ic.m_amp);
                num("c_amp", ic.c_amp);
                num("d_amp", ic.d_amp);
            } else {
                kv("kind", "explicit");
            }
        },
        c.ic);
    o << "\n[output]\n";
    kv("series_every", std::to_string(c.series_every));
    kv("snapshot_every", std::to_string(c.snapshot_every));
    o << "\n[monitors]\n";
    const char* lyap = c.monitors.lyapunov == LyapunovMonitor::On    ? "on"
                       : c.monitors.lyapunov == LyapunovMonitor::Off ? "off"
                                                                      : "auto";
    kv("lyapunov", lyap);
    std::string modes;
    for (const auto& [mp, mq] : c.monitors.modes) {
        if (!modes.empty()) modes += "; ";
        modes += std::to_string(mp) + "," + std::to_string(mq);
    }
    kv("modes", modes);
    o << "\n[solver]\n";
    kv("dealias", c.dealias ? "true" : "false");
    o << "\n[stability]\n";
    kv("pmax", std::to_string(rc.stability.pmax));
    kv("qmax", std::to_string(rc.stability.qmax));
    return o.str();
}

inline std::string echo_config(const SweepSpec& s) {
    std::ostringstream o;
    o << echo_config(s.base) << "\n[sweep]\n";
    o << "axis = " << s.axis << "\n";
    o << "from = " << format_real(s.from) << "\n";
    o << "to = " << format_real(s.to) << "\n";
    o << "step = " << format_real(s.step) << "\n";
    o << "task = " << (s.task == SweepTask::Thresholds ? "thresholds" : "simulate") << "\n";
    o << "table = " << s.table << "\n";
    o << "threads = " << s.threads << "\n";
    return o.str();
}

}  // namespace chemolab::io
