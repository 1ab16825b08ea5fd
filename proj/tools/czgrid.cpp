// czgrid command line: grid | maximal | czdecomp | counterexample.
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "czgrid/experiments.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Calderón–Zygmund grid experiments"};
    app.require_subcommand(1, 1);

    std::string config_file;
    std::optional<std::uint64_t> seed;
    std::optional<int> n;
    std::optional<int> j_lo;
    std::optional<int> j_hi;
    std::optional<std::int64_t> trials;
    std::optional<std::string> out;

    for (const char* name : {"grid", "maximal", "czdecomp", "counterexample"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_file, "key = value file");
        sub->add_option("--seed", seed);
        sub->add_option("--n", n);
        sub->add_option("--j-lo", j_lo);
        sub->add_option("--j-hi", j_hi);
        sub->add_option("--trials", trials);
        sub->add_option("--out", out, "jsonl path; csv is written next to it");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    czgrid::ExperimentConfig cfg;
    try {
        czgrid::apply_environment(cfg);
        if (!config_file.empty()) czgrid::apply_config_file(cfg, config_file);
        if (seed) cfg.seed = *seed;
        if (n) cfg.n = *n;
        if (j_lo) cfg.j_lo = *j_lo;
        if (j_hi) cfg.j_hi = *j_hi;
        if (trials) cfg.trials = *trials;
        if (out) cfg.out = *out;
    } catch (const czgrid::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    }

    const czgrid::CommandResult r = czgrid::run_command(command, cfg);
    if (r.exit_code != 1) {
        try {
            czgrid::write_outputs(r, cfg.out);
        } catch (const czgrid::ConfigError& e) {
            std::cerr << e.what() << "\n";
            return 1;
        }
    }
    if (!r.message.empty()) std::cerr << r.message << "\n";
    return r.exit_code;
}
