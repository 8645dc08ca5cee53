#pragma once

#include "chemolab/diagnostics.hpp"
#include "chemolab/io/config.hpp"
#include "chemolab/io/output.hpp"
#include "chemolab/linear_stability.hpp"
#include "chemolab/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace chemolab::io {

enum class SolverKind { Spectral, FiniteDifference };

inline std::string to_string(SolverKind s) {
    return s == SolverKind::Spectral ? "spectral" : "fd";
}

// ---------------------------------------------------------------- stability

struct StabilityReport {
    double chi = 0.0;
    double chi_subcrit = 0.0;
    double chi_c0 = 0.0;
    CriticalChi critical;
    std::vector<std::pair<ModeIndex, DispersionPoint>> table;

    std::size_t unstable_count() const {
        return static_cast<std::size_t>(std::count_if(
            table.begin(), table.end(), [](const auto& row) { return row.second.unstable(); }));
    }
};

inline StabilityReport stability_report(const RunConfig& rc) {
    const auto& p = rc.sim.params;
    const auto& dom = rc.sim.grid.domain();
    StabilityReport r;
    r.chi = p.chi();
    r.chi_subcrit = chi_subcrit(p);
    r.chi_c0 = chi_c0(p);
    const auto [pm, qm] = default_mode_bounds(p, dom);
    r.critical = chi_c_domain(p, dom, std::max(pm, rc.stability.pmax), std::max(qm, rc.stability.qmax));
    for (const auto& md : neumann_eigenvalues(dom, rc.stability.pmax, rc.stability.qmax)) {
        if (md.lambda <= 0.0) continue;
        r.table.emplace_back(md, growth_rates(p, md.lambda));
    }
    return r;
}

inline std::string format_stability(const StabilityReport& r) {
    std::ostringstream o;
    o << "chi\t" << g17(r.chi) << "\n";
    o << "chi_subcrit\t" << g17(r.chi_subcrit) << "\n";
    o << "chi_c0\t" << g17(r.chi_c0) << "\n";
    o << "chi_c_domain\t" << g17(r.critical.chi_c) << "\n";
    o << "critical_mode\t" << r.critical.mode.p << "\t" << r.critical.mode.q << "\n";
    o << "critical_lambda\t" << g17(r.critical.mode.lambda) << "\n";
    o << "unstable_modes\t" << r.unstable_count() << "\n";
    o << "# p\tq\tlambda\ttrace\tdet\tsigma_plus_re\tsigma_plus_im\tsigma_minus_re\tsigma_minus_im"
         "\tunstable\n";
    for (const auto& [md, dp] : r.table) {
        o << md.p << "\t" << md.q << "\t" << g17(dp.lambda) << "\t" << g17(dp.trace) << "\t"
          << g17(dp.det) << "\t" << g17(dp.sigma_plus.real()) << "\t" << g17(dp.sigma_plus.imag())
          << "\t" << g17(dp.sigma_minus.real()) << "\t" << g17(dp.sigma_minus.imag()) << "\t"
          << (dp.unstable() ? 1 : 0) << "\n";
    }
    return o.str();
}

/// Report text; also written to out/stability.tsv when `out` is given.
inline std::string cmd_stability(const RunConfig& rc,
                                 const std::optional<std::filesystem::path>& out = std::nullopt) {
    const auto text = format_stability(stability_report(rc));
    if (out) {
        RunDirectory dir(*out);
        const auto echo = echo_config(rc);
        dir.manifest().config_hash = sha256_hex(echo);
        dir.manifest().seed = rc.sim.seed;
        dir.manifest().solver = "none";
        dir.manifest().started = utc_now();
        dir.write("config.ini", echo);
        dir.write("stability.tsv", text);
        dir.manifest().finished = utc_now();
        dir.write_manifest();
    }
    return text;
}

// ---------------------------------------------------------------- simulate

struct SimulateResult {
    Trajectory trajectory;
    std::filesystem::path dir;
    std::string config_hash;
};

inline std::string snapshot_name(std::size_t index, const char* field) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "snap_%05zu_%s.dat", index, field);
    return buf;
}

inline nlohmann::json summary_json(const Trajectory& t) {
    nlohmann::json j;
    j["classification"] = to_string(t.classification);
    j["steps"] = t.steps;
    j["final_time"] = t.final_state.t;
    j["stationary"] = t.stationary;
    j["stationary_rate"] = t.stationary_rate;
    j["equilibrium_distance_m"] = t.equilibrium_distance;
    j["dominant_mode"] = {t.dominant_p, t.dominant_q};
    const auto& iv = t.invariants;
    j["invariants"] = {{"min_m", iv.min_m},       {"min_c", iv.min_c},
                       {"min_d", iv.min_d},       {"max_d", iv.max_d},
                       {"mu", iv.mu},             {"mass_sup", iv.mass_sup},
                       {"mass_bound", iv.mass_bound}, {"step_too_large", iv.step_too_large}};
    return j;
}

/// Runs one configuration and writes config.ini, series.tsv, snapshots,
/// summary.json and manifest.json into `out`. On a numerical failure the
/// files written so far are kept, the manifest is marked failed and the
/// error is rethrown.
inline SimulateResult cmd_simulate(RunConfig rc, SolverKind solver, const std::filesystem::path& out,
                                   std::optional<std::uint64_t> seed = std::nullopt) {
    if (seed) rc.sim.seed = *seed;
    const SimConfig& cfg = rc.sim;
    cfg.validate();
    RunDirectory dir(out);
    const auto echo = echo_config(rc);
    auto& man = dir.manifest();
    man.config_hash = sha256_hex(echo);
    man.seed = cfg.seed;
    man.solver = to_string(solver);
    man.started = utc_now();
    dir.write("config.ini", echo);

    const bool with_phi = chemolab::detail::lyapunov_weights(cfg).has_value();
    SeriesWriter sw(with_phi, cfg.monitors.modes);
    std::ofstream series(dir.path() / "series.tsv", std::ios::binary | std::ios::trunc);
    if (!series) throw Error("cannot write series.tsv");
    series << sw.header();

    RunHooks hooks;
    hooks.on_series = [&](const SeriesRow& row) { series << sw.row(row) << std::flush; };
    hooks.on_snapshot = [&](const State& s, std::size_t index) {
        for (const auto& [name, f] : {std::pair<const char*, const Field*>{"m", &s.m}, {"c", &s.c}, {"d", &s.d}}) {
            const auto file = snapshot_name(index, name);
            dir.write(file, format_snapshot(*f, name, s.t, man.config_hash));
        }
    };

    SimulateResult res{Trajectory(cfg.grid), dir.path(), man.config_hash};
    try {
        res.trajectory = solver == SolverKind::Spectral ? simulate(cfg, hooks) : fd_simulate(cfg, hooks);
    } catch (const NonFiniteError& e) {
        series.close();
        dir.record_existing("series.tsv");
        nlohmann::json j;
        j["status"] = "non-finite";
        j["time"] = e.time();
        j["message"] = e.what();
        dir.write("summary.json", j.dump(2) + "\n");
        man.status = "failed";
        man.finished = utc_now();
        dir.write_manifest();
        throw;
    }
    series.close();
    dir.record_existing("series.tsv");
    auto summary = summary_json(res.trajectory);
    summary["status"] = "ok";
    dir.write("summary.json", summary.dump(2) + "\n");
    man.finished = utc_now();
    dir.write_manifest();
    return res;
}

// ---------------------------------------------------------------- sweep

namespace detail {

inline std::string sweep_header(SweepTask task) {
    if (task == SweepTask::Thresholds) {
        return "# index\tvalue\tchi\teps0\tchi_subcrit\tchi_c0\tsubcrit_ratio\tchi_c_domain\tp\tq"
               "\tlambda\tunstable_modes\terror\n";
    }
    return "# index\tvalue\tclassification\tsteps\tequilibrium_distance\tdominant_p\tdominant_q"
           "\tstationary_rate\tm_max\terror\n";
}

inline std::string sweep_row(const SweepSpec& spec, std::size_t index, double value) {
    std::ostringstream o;
    o << index << "\t" << g17(value);
    try {
        const auto p = spec.params_at(value);
        if (spec.task == SweepTask::Thresholds) {
            const auto& dom = spec.base.sim.grid.domain();
            const auto [pm, qm] = default_mode_bounds(p, dom);
            const int pmax = std::max(pm, spec.base.stability.pmax);
            const int qmax = std::max(qm, spec.base.stability.qmax);
            const auto cc = chi_c_domain(p, dom, pmax, qmax);
            const double sub = chi_subcrit(p);
            const double c0 = chi_c0(p);
            o << "\t" << g17(p.chi()) << "\t" << g17(p.eps0()) << "\t" << g17(sub) << "\t" << g17(c0)
              << "\t" << g17(sub / c0) << "\t" << g17(cc.chi_c) << "\t" << cc.mode.p << "\t"
              << cc.mode.q << "\t" << g17(cc.mode.lambda) << "\t"
              << unstable_band(p, dom, pmax, qmax).size() << "\t-";
        } else {
            SimConfig cfg = spec.base.sim;
            cfg.params = p;
            const auto t = simulate(cfg);
            o << "\t" << to_string(t.classification) << "\t" << t.steps << "\t"
              << g17(t.equilibrium_distance) << "\t" << t.dominant_p << "\t" << t.dominant_q << "\t"
              << g17(t.stationary_rate) << "\t" << g17(t.final_state.m.max()) << "\t-";
        }
    } catch (const std::exception& e) {
        std::string msg = e.what();
        std::replace(msg.begin(), msg.end(), '\t', ' ');
        std::replace(msg.begin(), msg.end(), '\n', ' ');
        const int cols = spec.task == SweepTask::Thresholds ? 10 : 7;
        for (int k = 0; k < cols; ++k) o << "\tnan";
        o << "\t" << msg;
    }
    o << "\n";
    return o.str();
}

/// Rows of an existing table keyed by index; incomplete lines are dropped.
inline std::map<std::size_t, std::string> read_sweep_rows(const std::filesystem::path& p,
                                                          const std::string& header) {
    std::map<std::size_t, std::string> rows;
    std::ifstream in(p);
    if (!in) return rows;
    std::string line;
    if (!std::getline(in, line) || line + "\n" != header) return rows;
    const auto ncols = static_cast<std::size_t>(std::count(header.begin(), header.end(), '\t'));
    while (std::getline(in, line)) {
        if (in.eof()) break;   // last line without a newline was cut short
        if (static_cast<std::size_t>(std::count(line.begin(), line.end(), '\t')) != ncols) continue;
        try {
            rows[std::stoul(line.substr(0, line.find('\t')))] = line + "\n";
        } catch (const std::exception&) {
        }
    }
    return rows;
}

}  // namespace detail

struct SweepResult {
    std::filesystem::path table;
    std::size_t computed = 0;
    std::size_t reused = 0;
    std::size_t errors = 0;
};

/// Evaluates every grid point, in parallel. Rows already present in the
/// table are kept, so an interrupted sweep resumes where it stopped. The
/// finished table is sorted by index.
inline SweepResult cmd_sweep(const SweepSpec& spec, const std::filesystem::path& out) {
    const auto pts = spec.points();
    if (pts.empty()) throw ValidationError("sweep grid is empty");
    std::filesystem::create_directories(out);
    SweepResult res{out / spec.table};
    const auto header = detail::sweep_header(spec.task);
    auto rows = detail::read_sweep_rows(res.table, header);
    for (auto it = rows.begin(); it != rows.end();) {
        it = it->first < pts.size() ? std::next(it) : rows.erase(it);
    }
    res.reused = rows.size();

    // rewrite what survived, then append new rows as they finish
    {
        std::ofstream t(res.table, std::ios::trunc);
        t << header;
        for (const auto& [k, line] : rows) t << line;
    }
    std::vector<std::size_t> todo;
    for (std::size_t k = 0; k < pts.size(); ++k) {
        if (!rows.count(k)) todo.push_back(k);
    }

    std::mutex mu;
    std::ofstream table(res.table, std::ios::app);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= todo.size()) return;
            const std::size_t k = todo[i];
            auto line = detail::sweep_row(spec, k, pts[k]);
            std::lock_guard lock(mu);
            table << line << std::flush;
            rows[k] = std::move(line);
        }
    };
    unsigned n = spec.threads > 0 ? static_cast<unsigned>(spec.threads) : std::thread::hardware_concurrency();
    n = std::max(1u, std::min<unsigned>(n, static_cast<unsigned>(std::max<std::size_t>(todo.size(), 1))));
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    table.close();

    std::ofstream t(res.table, std::ios::trunc);
    t << header;
    for (const auto& [k, line] : rows) {
        t << line;
        if (line.substr(line.rfind('\t') + 1) != "-\n") ++res.errors;
    }
    res.computed = todo.size();
    return res;
}

}  // namespace chemolab::io
