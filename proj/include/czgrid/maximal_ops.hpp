#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "czgrid/step_function.hpp"

namespace czgrid {

// The grid is built up to level j_hi, so every supremum over dyadic sets
// below runs over sets of levels <= j_hi. Above the support of f these
// averages decay geometrically; that horizon is the only truncation.

/// f's window with its root moved to the level-j_hi ancestor. Outside this
/// root M_D f and f#_D vanish on the built grid, so results on it are
/// complete descriptions.
std::shared_ptr<const Window> top_window(const Window& w);

/// M_D f on the cells of top_window(f.window()).
StepFunction dyadic_maximal(const StepFunction& f);
/// f#_D on the cells of top_window(f.window()).
StepFunction dyadic_sharp(const StepFunction& f);

/// Per evaluation cell: max of |f| at the cell center and of the averages of
/// |f| over family members containing the center. A lower bound for M f.
StepFunction restricted_maximal(const StepFunction& f, const std::vector<TranslatedCZSet>& family,
                                std::shared_ptr<const Window> on);
StepFunction restricted_maximal(const StepFunction& f, const std::vector<TranslatedCZSet>& family);
double restricted_maximal_at(const StepFunction& f, const std::vector<TranslatedCZSet>& family, const GroupPoint& p);

struct CoveringSet {
    GridNode node;
    double average = 0.0;         // of |f| over the set
    double parent_average = 0.0;  // of |f| over its parent, <= alpha
    double parent_ratio = 0.0;    // rho(parent) / rho(set)
};

/// Maximal grid sets with average of |f| above alpha. Their union is
/// {M_D f > alpha}. Throws HorizonError when such a set reaches level j_hi.
std::vector<CoveringSet> covering(const StepFunction& f, double alpha);

struct BadPart {
    CoveringSet set;
    double mean = 0.0;  // f_R, signed
    StepFunction b;
};

struct CZDecomposition {
    double alpha = 0.0;
    StepFunction good;
    std::vector<BadPart> bad;
};

/// g = f off the covering sets and f_R on each; b_R = (f - f_R) χ_R. All
/// parts live on f's window extended up to the highest covering set.
CZDecomposition cz_decompose(const StepFunction& f, double alpha);

struct DecompositionCheck {
    int n = 1;
    double alpha = 0.0;
    std::size_t bad_parts = 0;
    double reconstruction_error = 0.0;  // max |f - g - Σ b| / max(1, ‖f‖∞)
    double max_bad_mean = 0.0;          // max |∫ b| / ∫ |b|
    double good_sup_over_alpha = 0.0;
    double min_avg_over_alpha = 0.0;    // over covering sets
    double max_avg_over_alpha = 0.0;
    double covered_measure = 0.0;
    double l1_over_alpha = 0.0;
    bool disjoint = true;
    bool parents_at_most_alpha = true;

    /// The covering sandwich and the bound on g with constant `c`.
    bool pass_with(double c) const;
    /// Constant 2^n.
    bool pass() const;
};

DecompositionCheck check_decomposition(const StepFunction& f, const CZDecomposition& d);

struct MaximalRecord {
    std::string experiment;
    std::uint64_t seed = 0;
    std::int64_t trial = 0;
    std::string key;
    double param = 0.0;
    double value = 0.0;
};

struct MaximalReport {
    std::vector<MaximalRecord> records;
    /// One summary record per parameter (e.g. sup over trials).
    std::vector<MaximalRecord> summary;

    double summary_value(const std::string& experiment, double param) const;
};

/// Inputs of one randomized trial: window and function derived from
/// (seed, trial) only, so a longer run extends a shorter one.
struct TrialGenerator {
    std::shared_ptr<const DyadicGrid> grid;
    RandomWindowSpec window;
    RandomFunctionSpec function;

    StepFunction make(std::uint64_t seed, std::int64_t trial) const;
};

std::uint64_t trial_seed(std::uint64_t seed, std::int64_t trial);

/// sup over trials and alpha = a·‖f‖∞ (a in alpha_grid) of
/// alpha ρ({M_D f > alpha}) / ‖f‖₁.
MaximalReport check_weak11(const TrialGenerator& gen, std::uint64_t seed, std::int64_t trials,
                           const std::vector<double>& alpha_grid);

/// Per p: max over trials of ‖M_D f‖_p / ‖f#_D‖_p. Trials whose f#_D
/// vanishes are skipped and counted under key "skipped".
MaximalReport check_fefferman_stein(const TrialGenerator& gen, std::uint64_t seed, std::int64_t trials,
                                    const std::vector<double>& p_list);

struct DistributionalValue {
    double lhs = 0.0;         // ρ({M_D f > α} ∩ {f#_D <= cα})
    double rhs_factor = 0.0;  // ρ({M_D f > bα})
};

DistributionalValue check_distributional(const StepFunction& f, double alpha, double b, double c);
/// Same, reusing precomputed M_D f and f#_D on a common window.
DistributionalValue check_distributional(const StepFunction& mf, const StepFunction& sharp, double alpha, double b,
                                         double c);

/// Smallest K with lhs <= K c/(1-b) rhs over the sweep alpha in
/// alpha_grid·‖f‖∞, b in b_list, c in c_list, over all trials.
MaximalReport fit_distributional(const TrialGenerator& gen, std::uint64_t seed, std::int64_t trials,
                                 const std::vector<double>& alpha_grid, const std::vector<double>& b_list,
                                 const std::vector<double>& c_list);

}  // namespace czgrid
