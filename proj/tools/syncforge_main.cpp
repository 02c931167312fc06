#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "syncforge/config.hpp"
#include "syncforge/io.hpp"
#include "syncforge/pipeline.hpp"

namespace sf = syncforge;

namespace {

struct GlobalOptions {
    std::string config;
    std::string out;
    std::string model;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
};

sf::ExperimentConfig load_config(const GlobalOptions& g) {
    sf::ExperimentConfig c;
    if (!g.config.empty()) {
        auto j = sf::io::read_json_file(g.config);
        if (!g.model.empty()) {
            if (!j.is_object()) {
                throw std::invalid_argument("config: top level must be an object");
            }
            j["model"] = g.model;
        }
        c = sf::config_from_json(j);
    } else {
        c = sf::ExperimentConfig::defaults_for(g.model.empty() ? "van_der_pol" : g.model);
    }
    if (!g.out.empty()) {
        c.out_dir = g.out;
    }
    if (g.seed) {
        c.perturbation.seed = *g.seed;
        c.msf.lyapunov.seed = *g.seed;
    }
    c.validate();
    return c;
}

sf::RunContext context(const GlobalOptions& g) {
    sf::RunContext ctx;
    ctx.threads = g.threads ? *g.threads : sf::threads_from_env();
    ctx.log = &std::cerr;
    return ctx;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"syncforge: tridiagonal Laplacian design and synchronization experiments"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOptions g;
    app.add_option("--config", g.config, "Experiment configuration (JSON)")->check(CLI::ExistingFile);
    app.add_option("--out", g.out, "Output directory");
    app.add_option("--model", g.model, "Oscillator model when no config is given (van_der_pol, rossler)");
    app.add_option("--seed", g.seed, "Seed for the initial perturbation and the variational direction");
    app.add_option("--threads", g.threads, "Worker threads for MSF scans (default: SYNCFORGE_THREADS or all cores)");

    auto* msf = app.add_subcommand("msf", "Scan the master stability function and write msf.csv, intervals.json");
    auto* synth = app.add_subcommand("synthesize", "Build the Laplacian for the configured spectrum");
    auto* sim = app.add_subcommand("simulate", "Integrate the coupled network and write sync.csv, summary.json");

    auto* repro = app.add_subcommand("reproduce", "Run a preset experiment");
    std::string preset;
    repro->add_option("preset", preset, "Preset name")
        ->required()
        ->check(CLI::IsMember(sf::preset_names()));

    auto* verify = app.add_subcommand("verify", "Check a Laplacian file (.json or .mtx)");
    std::string laplacian_file;
    std::string spectrum_file;
    verify->add_option("file", laplacian_file, "Laplacian file")->required()->check(CLI::ExistingFile);
    verify->add_option("--spectrum", spectrum_file, "JSON list (or report with 'spectrum') to compare against")
        ->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return static_cast<int>(sf::ExitCode::usage);
    }

    try {
        sf::ExitCode code = sf::ExitCode::ok;
        if (verify->parsed()) {
            std::optional<std::filesystem::path> spec;
            if (!spectrum_file.empty()) {
                spec = spectrum_file;
            }
            auto ctx = context(g);
            ctx.log = &std::cout;
            code = sf::cmd_verify(laplacian_file, spec, ctx);
        } else {
            const auto config = load_config(g);
            const auto ctx = context(g);
            if (msf->parsed()) {
                code = sf::cmd_msf(config, ctx);
            } else if (synth->parsed()) {
                code = sf::cmd_synthesize(config, ctx);
            } else if (sim->parsed()) {
                code = sf::cmd_simulate(config, ctx);
            } else if (repro->parsed()) {
                code = sf::cmd_reproduce(preset, config, ctx);
            }
        }
        return static_cast<int>(code);
    } catch (const sf::NoNegativeInterval& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(sf::ExitCode::no_negative_interval);
    } catch (const sf::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return static_cast<int>(sf::ExitCode::numerical);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(sf::ExitCode::usage);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(sf::ExitCode::usage);
    }
}
