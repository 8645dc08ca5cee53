#include "chemolab/io/commands.hpp"

#include "CLI11.hpp"

#include <iostream>

namespace io = chemolab::io;

namespace {

constexpr int kValidation = 2;
constexpr int kNumerical = 3;

io::RunConfig run_config(const std::string& path) {
    auto parsed = io::parse_config(path);
    if (auto* rc = std::get_if<io::RunConfig>(&parsed)) return *rc;
    return std::get<io::SweepSpec>(parsed).base;
}

int verify_dir(const std::string& dir) {
    const auto r = io::verify_run(dir);
    for (const auto& f : r.missing) std::cout << "missing\t" << f << "\n";
    for (const auto& f : r.mismatched) std::cout << "mismatch\t" << f << "\n";
    std::cout << (r.ok() ? "verified " : "FAILED ") << r.checked << " files in " << dir << "\n";
    return r.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Chemotaxis reaction-diffusion: thresholds, simulations, sweeps"};
    app.require_subcommand(1);

    std::string config;
    std::string out;
    std::string solver = "spectral";
    std::uint64_t seed = 0;
    bool verify = false;

    auto* stability = app.add_subcommand("stability", "linear stability thresholds and dispersion table");
    stability->add_option("--config", config, "config file")->required()->check(CLI::ExistingFile);
    stability->add_option("--out", out, "also write the report into this directory");

    auto* sim = app.add_subcommand("simulate", "run one configuration");
    sim->add_option("--config", config, "config file")->required()->check(CLI::ExistingFile);
    sim->add_option("--out", out, "run directory")->required();
    sim->add_option("--solver", solver, "spectral or fd")
        ->check(CLI::IsMember({"spectral", "fd"}));
    auto* seed_opt = sim->add_option("--seed", seed, "override the config seed");
    sim->add_flag("--verify", verify, "re-hash the emitted files afterwards");

    auto* sweep = app.add_subcommand("sweep", "evaluate a parameter grid");
    sweep->add_option("--config", config, "sweep config file")->required()->check(CLI::ExistingFile);
    sweep->add_option("--out", out, "output directory")->required();

    auto* ver = app.add_subcommand("verify", "check a run directory against its manifest");
    ver->add_option("--out", out, "run directory")->required()->check(CLI::ExistingDirectory);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*stability) {
            std::optional<std::filesystem::path> dir;
            if (!out.empty()) dir = out;
            std::cout << io::cmd_stability(run_config(config), dir);
            return 0;
        }
        if (*sim) {
            std::optional<std::uint64_t> s;
            if (*seed_opt) s = seed;
            const auto kind = solver == "fd" ? io::SolverKind::FiniteDifference : io::SolverKind::Spectral;
            const auto res = io::cmd_simulate(run_config(config), kind, out, s);
            const auto& t = res.trajectory;
            std::cout << "classification\t" << to_string(t.classification) << "\n"
                      << "steps\t" << t.steps << "\n"
                      << "final_time\t" << io::g17(t.final_state.t) << "\n"
                      << "equilibrium_distance_m\t" << io::g17(t.equilibrium_distance) << "\n"
                      << "dominant_mode\t" << t.dominant_p << "\t" << t.dominant_q << "\n"
                      << "stationary_rate\t" << io::g17(t.stationary_rate) << "\n"
                      << "run_dir\t" << res.dir.string() << "\n";
            return verify ? verify_dir(out) : 0;
        }
        if (*sweep) {
            auto parsed = io::parse_config(config);
            const auto* spec = std::get_if<io::SweepSpec>(&parsed);
            if (spec == nullptr) throw chemolab::ValidationError("config has no [sweep] section");
            const auto r = io::cmd_sweep(*spec, out);
            std::cout << "table\t" << r.table.string() << "\n"
                      << "computed\t" << r.computed << "\n"
                      << "reused\t" << r.reused << "\n"
                      << "errors\t" << r.errors << "\n";
            return 0;
        }
        if (*ver) return verify_dir(out);
    } catch (const chemolab::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kValidation;
    } catch (const chemolab::ValidationError& e) {
        std::cerr << "invalid: " << e.what() << "\n";
        return kValidation;
    } catch (const chemolab::InfeasibleError& e) {
        std::cerr << "invalid: " << e.what() << "\n";
        return kValidation;
    } catch (const chemolab::NonFiniteError& e) {
        std::cerr << "numerical failure at t = " << e.time() << ": " << e.what() << "\n";
        return kNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
