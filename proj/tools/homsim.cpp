// Command-line front end: one subcommand per scenario.
//
// Exit codes: 0 success, 2 configuration/validation error, 3 insufficient
// statistics, 4 I/O error, 1 anything else.

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "hom/experiment.hpp"

namespace {

enum ExitCode { ok = 0, failure = 1, config_error = 2, statistics_error = 3, io_error = 4 };

struct Args {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    int threads = 1;
    bool quiet = false;
};

int run(hom::ScenarioKind kind, const Args& args) {
    hom::ScenarioConfig cfg = args.config_path.empty() ? hom::default_scenario(kind) : hom::load_config(args.config_path);
    if (cfg.kind != kind) {
        throw hom::ConfigError(std::string("config describes scenario '") + hom::to_string(cfg.kind) +
                               "' but subcommand is '" + hom::to_string(kind) + "'");
    }
    if (args.seed) cfg.seed = *args.seed;
    if (!args.out_dir.empty()) cfg.output.dir = args.out_dir;
    cfg.validate();

    const hom::RunRecord rec = hom::run_scenario(cfg, {args.threads, args.quiet});
    const std::string csv = hom::write_outputs(rec, cfg);
    if (!args.quiet) {
        std::cout << "wrote " << csv << "\n";
        for (const auto& [k, v] : rec.summary) std::cout << "  " << k << " = " << v << "\n";
    }
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-source bunching simulator for polarization-controlled fiber links"};
    app.require_subcommand(1);
    Args args;

    struct Sub {
        const char* name;
        hom::ScenarioKind kind;
        const char* help;
    };
    const Sub subs[] = {
        {"dip", hom::ScenarioKind::dip_scan, "Gate-delay dip scan over a linewidth ladder"},
        {"polscan", hom::ScenarioKind::polarization_scan, "Visibility vs relative polarization angle"},
        {"intensityscan", hom::ScenarioKind::intensity_scan, "Visibility vs intensity ratio"},
        {"stability", hom::ScenarioKind::stability_run, "Visibility time series, control on then off"},
    };
    std::optional<hom::ScenarioKind> chosen;
    for (const auto& s : subs) {
        CLI::App* sub = app.add_subcommand(s.name, s.help);
        sub->add_option("--config", args.config_path, "Scenario config (JSON)")->check(CLI::ExistingFile);
        sub->add_option("--seed", args.seed, "Master seed (overrides config)");
        sub->add_option("--out", args.out_dir, "Output directory (overrides config)");
        sub->add_option("--threads", args.threads, "Worker threads")->check(CLI::PositiveNumber);
        sub->add_flag("--quiet", args.quiet, "Suppress progress and summary output");
        sub->callback([&chosen, kind = s.kind] { chosen = kind; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : config_error;
    }

    try {
        return run(*chosen, args);
    } catch (const hom::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return config_error;
    } catch (const hom::DomainError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return config_error;
    } catch (const hom::StatisticsError& e) {
        std::cerr << "statistics error: " << e.what() << "\n";
        return statistics_error;
    } catch (const std::ios_base::failure& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return io_error;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return io_error;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return failure;
    }
}
