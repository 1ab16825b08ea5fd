#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace czgrid {

/// Bad key, bad value or inconsistent settings. Maps to exit code 1.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
    int n = 1;
    int j_lo = -8;
    int j_hi = 12;
    double t_reach = 16.0;
    std::uint64_t seed = 1;
    /// Unset means the command default: 10000 points for grid, 1000 trials
    /// for maximal and czdecomp.
    std::optional<std::int64_t> trials;
    std::string out;

    std::vector<double> p_list{1.5, 2.0, 3.0};
    std::vector<double> alpha_grid{0.9, 0.5, 0.25, 0.1, 0.03, 0.01};
    std::vector<double> b_list{0.5, 0.75, 0.9};
    std::vector<double> c_list{0.05, 0.1, 0.25, 0.5};
    std::vector<int> j_list{-5, -10, -20};

    // random inputs
    int root_lo = -2;
    int root_hi = 3;
    double x_range = 64.0;
    double t_lo = -4.0;
    double t_hi = 4.0;
    int max_depth = 4;
    double split_prob = 0.7;
    std::int64_t max_cells = 64;
    double density = 0.5;

    // counterexample
    int counterexample_j_lo = -64;
    double t_star = 0.75;
    int quadrature_shells = 60;
    int quadrature_points = 16384;
};

/// Sets one `key = value` entry. Keys use the field names above; lists are
/// comma separated.
void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value);

/// Applies `key = value` lines; `#` starts a comment.
void apply_config_text(ExperimentConfig& cfg, const std::string& text);
void apply_config_file(ExperimentConfig& cfg, const std::string& path);

/// Seed from CZGRID_SEED, if set.
void apply_environment(ExperimentConfig& cfg);

void validate(const ExperimentConfig& cfg);

struct CommandResult {
    int exit_code = 0;
    std::string jsonl;
    std::string csv;
    std::string message;
};

CommandResult cmd_grid(const ExperimentConfig& cfg);
CommandResult cmd_maximal(const ExperimentConfig& cfg);
CommandResult cmd_czdecomp(const ExperimentConfig& cfg);
CommandResult cmd_counterexample(const ExperimentConfig& cfg);

/// Dispatch by name; config errors become exit code 1.
CommandResult run_command(const std::string& command, const ExperimentConfig& cfg);

/// Writes jsonl to `out` and csv next to it (extension replaced by .csv), or
/// jsonl to stdout when `out` is empty.
void write_outputs(const CommandResult& r, const std::string& out);

}  // namespace czgrid
