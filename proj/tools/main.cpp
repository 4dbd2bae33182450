// jointmeas: command-line driver for the joint-measurement simulator.
//
// Exit codes: 0 ok, 2 configuration error, 3 simulation-quality failure, 4 IO.

#include <functional>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "commands.hpp"
#include "jointmeas/trajectory_io.hpp"

namespace {

enum ExitCode : int { kOk = 0, kConfig = 2, kQuality = 3, kIo = 4 };

struct Flags {
    std::string config_path;
    std::string preset;
    std::string out;
    std::uint64_t seed = 0;
    unsigned workers = 0;
};

jmeas::RunConfig resolve(const Flags& flags, const CLI::App& sub) {
    jmeas::RunConfig config;
    if (!flags.config_path.empty()) {
        config = jmeas::load_config(flags.config_path);
        if (!flags.preset.empty() && flags.preset != config.preset) {
            throw jmeas::ConfigError("--preset conflicts with run.preset in " + flags.config_path);
        }
    } else if (!flags.preset.empty()) {
        config = jmeas::preset_config(flags.preset);
    }
    if (sub.count("--seed")) config.master_seed = flags.seed;
    if (sub.count("--workers")) config.workers = flags.workers;
    if (sub.count("--out")) config.out_dir = flags.out;
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Joint homodyne measurement of two qubits in a cavity: master equation, quantum trajectories, "
                 "ensembles and threshold statistics."};
    app.set_version_flag("--version", std::string(jmeas::library_version()));
    app.require_subcommand(1);

    Flags flags;
    const std::map<std::string, std::pair<std::string, std::function<void(const jmeas::RunConfig&)>>> commands{
        {"rates", {"steady-state amplitudes and rate tables (Fig. 1 data)", jmeas::cli::cmd_rates}},
        {"me", {"reduced master equation, fidelities vs time (Fig. 2 data)", jmeas::cli::cmd_me}},
        {"trajectory", {"one quantum trajectory with binary dump", jmeas::cli::cmd_trajectory}},
        {"ensemble", {"trajectory ensembles, concurrence and s histograms (Fig. 3 data)", jmeas::cli::cmd_ensemble}},
        {"threshold", {"threshold sweep of Fbar, Cbar and P_s (Fig. 4 data)", jmeas::cli::cmd_threshold}},
        {"oracle-check", {"reduced model against the full cavity model", jmeas::cli::cmd_oracle_check}},
    };
    std::vector<std::string> presets = jmeas::preset_names();
    for (const auto& [name, entry] : commands) {
        CLI::App* sub = app.add_subcommand(name, entry.first);
        sub->add_option("--config", flags.config_path, "configuration file")->check(CLI::ExistingFile);
        sub->add_option("--preset", flags.preset, "experiment preset")->check(CLI::IsMember(presets));
        sub->add_option("--seed", flags.seed, "master seed (default 20091201)");
        sub->add_option("--workers", flags.workers, "worker threads (0 = all cores)");
        sub->add_option("--out", flags.out, "output directory");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    for (const auto& [name, entry] : commands) {
        const CLI::App* sub = app.get_subcommand(name);
        if (!sub->parsed()) continue;
        try {
            const jmeas::RunConfig config = resolve(flags, *sub);
            for (const auto& w : config.params.warnings()) std::cerr << "warning: " << w << "\n";
            entry.second(config);
            std::cout << name << ": results written to " << config.out_dir << "\n";
            return kOk;
        } catch (const jmeas::ConfigError& e) {
            std::cerr << "config error: " << e.what() << "\n";
            return kConfig;
        } catch (const jmeas::SimulationError& e) {
            std::cerr << "simulation failure: " << e.what() << "\n";
            return kQuality;
        } catch (const jmeas::cli::QualityError& e) {
            std::cerr << "quality failure: " << e.what() << "\n";
            return kQuality;
        } catch (const jmeas::cli::IoError& e) {
            std::cerr << "io error: " << e.what() << "\n";
            return kIo;
        } catch (const jmeas::FormatError& e) {
            std::cerr << "io error: " << e.what() << "\n";
            return kIo;
        }
    }
    return kOk;
}
