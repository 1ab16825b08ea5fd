#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "czgrid/cz_set.hpp"

namespace czgrid {

/// Upper is {t >= 0}, Lower is {t < 0}.
enum class Half : std::uint8_t { Upper, Lower };

/// N: the strip Q x [t_l - r_l, t_l + r_l) of chain entry l.
/// NTilde: the sibling strip created by a vertical parent step at entry l.
enum class Band : std::uint8_t { N, NTilde };

const char* to_string(Half h);
const char* to_string(Band b);

/// One subdivision below a strip: `vertical` records the split mode, which
/// is determined by the parent set and kept so that parents can be computed
/// without re-resolving from the strip.
struct PathStep {
    bool vertical = false;
    std::uint8_t index = 0;

    friend bool operator==(const PathStep&, const PathStep&) = default;
};

/// Address of a grid set: the originating strip cell plus the canonical
/// subdivision path. Level is strip - |path|.
struct DyadicSetId {
    Half half = Half::Upper;
    Band band = Band::N;
    int strip = 0;
    int n = 1;
    Lattice cell{};
    std::vector<PathStep> path;

    int level() const { return strip - static_cast<int>(path.size()); }

    friend bool operator==(const DyadicSetId& a, const DyadicSetId& b);
};

std::string to_string(const DyadicSetId& id);

struct DyadicSetIdHash {
    std::size_t operator()(const DyadicSetId& id) const;
};

/// A chain entry R_j = [0, L_j)^n x [t_j - r_j, t_j + r_j), L_j = 2^{k_j},
/// and the parent kind that produces R_{j+1}.
struct ChainEntry {
    int j = 0;
    double t = 0.0;
    double r = 1.0;
    int k = 0;
    ParentKind ext = ParentKind::Horizontal;
};

/// A grid set together with its resolved geometry.
struct GridNode {
    DyadicSetId id;
    CZSet set;

    int level() const { return id.level(); }
};

struct GridConfig {
    int n = 1;
    int j_lo = -8;
    int j_hi = 12;
    /// Both chains are extended until their strips cover |t| < t_reach.
    double t_reach = 16.0;
};

/// The family {D_j}, j in [j_lo, j_hi], built from two chains of parents:
/// the upper chain seeded at (t, r) = (1, 1) with L = 32 extends
/// horizontally while possible and vertically up otherwise; the lower chain
/// seeded at (t, r) = (-1, 1) with L = 4 extends horizontally or vertically
/// down. Negative levels and the sibling strips refine by canonical split().
/// Immutable after build.
class DyadicGrid {
public:
    static DyadicGrid build(const GridConfig& config);
    static DyadicGrid build(int n, int j_lo, int j_hi, double t_reach = 16.0);

    int dim() const { return n_; }
    int j_lo() const { return j_lo_; }
    int j_hi() const { return j_hi_; }
    const GridConfig& config() const { return config_; }

    const std::vector<ChainEntry>& chain(Half h) const { return h == Half::Upper ? upper_ : lower_; }

    /// Upper: strips cover [0, reach). Lower: strips cover [-reach, 0).
    double vertical_reach(Half h) const;

    CZSet resolve(const DyadicSetId& id) const;
    GridNode node(const DyadicSetId& id) const;

    GridNode locate(const GroupPoint& p, int j) const;
    std::vector<GridNode> children(const GridNode& node) const;
    GridNode parent(const GridNode& node) const;

    /// Level-j sets intersecting `window`, in deterministic order. Throws
    /// PreconditionError if more than `limit` sets would be produced.
    std::vector<GridNode> enumerate_level(int j, const CZSet& window, std::size_t limit = 2'000'000) const;

    /// All level-j descendants of `node` (node itself when j == level).
    std::vector<GridNode> descendants(const GridNode& node, int j) const;

    /// The strip root set before any subdivision.
    CZSet strip_set(Half h, Band b, int strip, const Lattice& cell) const;

private:
    void require_level(int j, const char* what) const;
    const ChainEntry& entry(Half h, int strip) const;

    GridConfig config_;
    int n_ = 1;
    int j_lo_ = 0;
    int j_hi_ = 0;
    std::vector<ChainEntry> upper_;
    std::vector<ChainEntry> lower_;
};

// ---------------------------------------------------------------- verification

struct PropertyCheck {
    std::string name;
    std::int64_t checked = 0;
    std::int64_t violations = 0;
    std::vector<std::string> examples;

    bool pass() const { return violations == 0; }
    void fail(std::string what);
};

struct GridPropertyReport {
    int n = 1;
    int j_lo = 0;
    int j_hi = 0;
    std::int64_t sampled_points = 0;
    std::int64_t enumerated_sets = 0;

    PropertyCheck partition{"partition", 0, 0, {}};
    PropertyCheck nesting{"nesting", 0, 0, {}};
    PropertyCheck parent_ratio{"parent_ratio", 0, 0, {}};
    PropertyCheck children{"children", 0, 0, {}};
    PropertyCheck growth{"growth", 0, 0, {}};
    PropertyCheck tree_laws{"tree_laws", 0, 0, {}};

    double min_parent_ratio = 0.0;
    double max_parent_ratio = 0.0;
    double min_child_fraction = 0.0;
    double max_child_fraction = 0.0;
    /// Child fractions below 2^{-n}; expected for the 1/3 children of
    /// vertical-down parents when n = 1.
    std::int64_t children_below_inverse_2n = 0;
    /// Parent ratios above 2^n; expected for vertical-down parents when n = 1.
    std::int64_t parents_above_2n = 0;

    bool all_pass() const;
};

/// Four windows straddling both halves, both band types and negative x.
std::vector<CZSet> default_windows(int n);

/// Checks partition, nesting, parent ratio, children and measure growth on
/// every set the windows enumerate at every built level, plus `trials`
/// sampled points drawn uniformly from the windows.
GridPropertyReport verify_grid_properties(const DyadicGrid& g, const std::vector<CZSet>& windows, std::int64_t trials,
                                 std::uint64_t seed);

}  // namespace czgrid
