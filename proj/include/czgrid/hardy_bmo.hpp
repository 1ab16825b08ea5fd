#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "czgrid/maximal_ops.hpp"

namespace czgrid {

struct Atom {
    TranslatedCZSet support;
    StepFunction values;
};

struct AtomReport {
    bool valid = false;
    bool support_admissible = false;
    double sup_ratio = 0.0;     // ‖a‖∞ ρ(support), at most 1
    double mean_ratio = 0.0;    // |∫a| / ∫|a|
    double outside_mass = 0.0;  // ∫|a| off the support
    std::vector<std::string> violations;
};

AtomReport validate_atom(const Atom& a);

/// Mean oscillation (1/ρ(R)) ∫_R |f - f_R| dρ with f zero off its window.
double mean_oscillation(const StepFunction& f, const CZSet& R);

/// max over probes of the mean oscillation: a lower bound for ‖f‖_{BMO_D}.
double bmo_dyadic_lower(const StepFunction& f, const std::vector<DyadicSetId>& probe);

/// h(x) = log(x - a) for x > a, 0 otherwise; the profile of φ in x.
struct LogProfile {
    double a = 32.0;
};

/// Mean oscillation of φ(x, t) = h(x_1) over a set: closed form in x.
double mean_oscillation(const LogProfile& h, const CZSet& R);
double bmo_dyadic_lower(const LogProfile& h, const DyadicGrid& g, const std::vector<DyadicSetId>& probe);

struct BmoUpperEstimate {
    double value = 0.0;
    /// Dyadic intervals inside x > a: oscillation depends on lo/hi only.
    double inside_sup = 0.0;
    /// Intervals [0, 2^m) straddling a = 2^k0, m from k0+1 to m_tail-1.
    double straddle_sup = 0.0;
    int straddle_argmax = 0;
    /// Bound for every straddling interval with m >= m_tail.
    double straddle_tail = 0.0;
    int m_tail = 0;
    /// Bound for the inside intervals with lo/hi above the enumerated range.
    double inside_tail = 0.0;
};

/// Upper bound for sup over dyadic intervals I of (1/|I|) ∫_I |h - h_I|, for
/// a = 2^k0. Bounds ‖φ‖_{BMO_D} on the n = 1 grid because every grid set is
/// an interval in x times an interval in t and φ ignores t.
BmoUpperEstimate bmo_dyadic_upper_log(int k0);

/// ∫ f φ dρ for φ(x, t) = h(x_1), n = 1. Each cell's x-integral uses a
/// midpoint rule on `shells` dyadic shells graded toward x = a.
double log_pairing(const StepFunction& f, const LogProfile& h, int shells = 60, int points = 16384);

struct CounterexampleOptions {
    /// Height of the probe points that select R_j and E_j inside R_0.
    double t_star = 0.75;
    int shells = 60;
    int points_per_shell = 16384;
};

struct CounterexampleRecord {
    int ell = 0;    // log2 of the side of R_j and E_j
    int level = 0;  // grid level holding R_j and E_j
    CZSet R;
    CZSet E;
    TranslatedCZSet support;
    bool atom_valid = false;
    double pairing = 0.0;          // closed form
    double pairing_numeric = 0.0;  // graded midpoint rule
    double relative_error = 0.0;
    double h1_upper = 0.0;
    double bmo_upper = 0.0;
    /// pairing / bmo_upper: ‖a_j‖_{H¹_D} up to the duality constant.
    double h1d_lower = 0.0;
};

/// n = 1 only. Uses the adjacent level-0 pair [0,32)x[0,2), [32,64)x[0,2)
/// and φ = χ_{x>32} log(x - 32).
std::vector<CounterexampleRecord> run_counterexample(const DyadicGrid& g, const std::vector<int>& ells,
                                                     const CounterexampleOptions& opts = {});

struct AffineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double max_residual = 0.0;
};

AffineFit fit_affine(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace czgrid
