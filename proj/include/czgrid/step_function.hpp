#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "czgrid/dyadic_grid.hpp"

namespace czgrid {

/// A root grid set together with a partition of it into grid sets (the
/// cells). Cells may sit at different levels. Holds the grid it was cut from.
class Window {
public:
    /// Cells are the level-`base_level` descendants of `root`.
    static std::shared_ptr<const Window> base(std::shared_ptr<const DyadicGrid> grid, const DyadicSetId& root,
                                              int base_level, std::size_t max_cells = 1u << 20);

    /// Validates that `cells` are disjoint descendants of `root` covering it.
    static std::shared_ptr<const Window> from_cells(std::shared_ptr<const DyadicGrid> grid, const DyadicSetId& root,
                                                    const std::vector<DyadicSetId>& cells);

    /// Coarsest partition of `root` into grid sets having every target as a
    /// cell; targets must be non-nested descendants of root.
    static std::shared_ptr<const Window> refined(std::shared_ptr<const DyadicGrid> grid, const DyadicSetId& root,
                                                 const std::vector<DyadicSetId>& targets);

    /// Root moved up to its ancestor at `level`; the siblings met on the way
    /// become extra cells appended after the existing ones. Returns a copy
    /// when the root is already at or above `level`.
    std::shared_ptr<const Window> extended(int level) const;

    const DyadicGrid& grid() const { return *grid_; }
    const std::shared_ptr<const DyadicGrid>& grid_ptr() const { return grid_; }
    const GridNode& root() const { return root_; }
    int root_level() const { return root_.level(); }
    int dim() const { return grid_->dim(); }
    const std::vector<GridNode>& cells() const { return cells_; }
    std::size_t size() const { return cells_.size(); }
    double cell_measure(std::size_t i) const { return measures_[i]; }

    std::optional<std::size_t> find(const DyadicSetId& id) const;
    /// Cell containing p, or nullopt outside the root.
    std::optional<std::size_t> cell_at(const GroupPoint& p) const;

private:
    Window() = default;
    void finish();

    std::shared_ptr<const DyadicGrid> grid_;
    GridNode root_;
    std::vector<GridNode> cells_;
    std::vector<double> measures_;
    std::unordered_map<DyadicSetId, std::size_t, DyadicSetIdHash> index_;
};

/// Piecewise-constant real function on a window, zero outside its root.
class StepFunction {
public:
    explicit StepFunction(std::shared_ptr<const Window> window);
    StepFunction(std::shared_ptr<const Window> window, std::vector<double> values);

    const Window& window() const { return *window_; }
    const std::shared_ptr<const Window>& window_ptr() const { return window_; }
    const std::vector<double>& values() const { return values_; }
    double value(std::size_t cell) const { return values_[cell]; }
    int dim() const { return window_->dim(); }

    double operator()(const GroupPoint& p) const;

    /// Zero extension onto `bigger`, whose cells must include every cell of
    /// this window.
    StepFunction on(std::shared_ptr<const Window> bigger) const;

private:
    std::shared_ptr<const Window> window_;
    std::vector<double> values_;
};

StepFunction abs(const StepFunction& f);
StepFunction operator+(const StepFunction& f, const StepFunction& g);
StepFunction operator-(const StepFunction& f, const StepFunction& g);
StepFunction operator*(double c, const StepFunction& f);

/// ∫_R f over a grid set, by walking the cells' nesting with R.
double integral(const StepFunction& f, const DyadicSetId& id);
/// ∫_R f by per-axis overlap of R with every cell.
double integral(const StepFunction& f, const CZSet& R);
double integral(const StepFunction& f, const TranslatedCZSet& R);
double integral(const StepFunction& f);

double average(const StepFunction& f, const DyadicSetId& id);
double average(const StepFunction& f, const CZSet& R);
double average(const StepFunction& f, const TranslatedCZSet& R);

/// (Σ |v_c|^p ρ(c))^{1/p}; p = +inf gives max |v_c|.
double lp_norm(const StepFunction& f, double p);
/// ρ({|f| > alpha}).
double distribution(const StepFunction& f, double alpha);

std::string to_json(const StepFunction& f);
/// Rebuilds the grid from the embedded descriptor.
StepFunction step_function_from_json(const std::string& text);

struct RandomFunctionSpec {
    /// Probability that a cell carries a nonzero value.
    double density = 0.5;
    double lo = -1.0;
    double hi = 1.0;
};

/// Values uniform on [lo, hi] times an independent Bernoulli(density) mask.
StepFunction random_step_function(std::shared_ptr<const Window> window, const RandomFunctionSpec& spec,
                                  std::uint64_t seed);

struct RandomWindowSpec {
    /// Root level drawn uniformly from [root_lo, root_hi], clipped to the grid.
    int root_lo = -2;
    int root_hi = 3;
    /// Root located at a point with |x_i| < x_range and t in [t_lo, t_hi).
    double x_range = 64.0;
    double t_lo = -4.0;
    double t_hi = 4.0;
    int max_depth = 4;
    /// Chance that a cell above the depth limit is split further.
    double split_prob = 0.7;
    std::size_t max_cells = 64;
};

/// A random root with a random refinement of it into at most max_cells cells.
std::shared_ptr<const Window> random_window(std::shared_ptr<const DyadicGrid> grid, const RandomWindowSpec& spec,
                                            std::mt19937_64& rng);

}  // namespace czgrid
