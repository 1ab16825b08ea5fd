#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <random>
#include <tuple>
#include <unordered_map>

#include "czgrid/dyadic_grid.hpp"

namespace czgrid {

void PropertyCheck::fail(std::string what) {
    ++violations;
    if (examples.size() < 5) examples.push_back(std::move(what));
}

bool GridPropertyReport::all_pass() const {
    return partition.pass() && nesting.pass() && parent_ratio.pass() && children.pass() && growth.pass() &&
           tree_laws.pass();
}

std::vector<CZSet> default_windows(int n) {
    check_dimension(n);
    return {
        CZSet(DyadicCube::uniform(n, 5, 0), 1.0, 1.0),
        CZSet(DyadicCube::uniform(n, 3, -1), 0.0, 1.0),
        CZSet(DyadicCube::uniform(n, 8, 1), 3.0, 1.0),
        CZSet(DyadicCube::uniform(n, 4, -1), -4.0, 2.0),
    };
}

namespace {

struct LatticeHash {
    int n;
    std::size_t operator()(const Lattice& m) const {
        std::size_t h = 0;
        for (int i = 0; i < n; ++i) h ^= std::hash<std::int64_t>{}(m[i]) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        return h;
    }
};

struct LatticeEq {
    int n;
    bool operator()(const Lattice& a, const Lattice& b) const {
        for (int i = 0; i < n; ++i) {
            if (a[i] != b[i]) return false;
        }
        return true;
    }
};

// Sets of one level bucketed by (t-interval, side exponent) and cube lattice
// coordinates, so that point and set queries avoid scanning the level.
class LevelIndex {
public:
    LevelIndex(int n, const std::vector<GridNode>& nodes) : n_(n), nodes_(nodes) {
        std::map<std::tuple<double, double, int>, std::size_t> group_of;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const CZSet& s = nodes[i].set;
            auto key = std::make_tuple(s.t_lo(), s.t_hi(), s.cube.k);
            auto it = group_of.find(key);
            if (it == group_of.end()) {
                it = group_of.emplace(key, groups_.size()).first;
                groups_.push_back(Group{s.t_lo(), s.t_hi(), s.cube.k, Map(16, LatticeHash{n}, LatticeEq{n})});
            }
            Group& g = groups_[it->second];
            if (!g.cells.emplace(s.cube.m, i).second) duplicates_.push_back(i);
        }
    }

    const std::vector<std::size_t>& duplicates() const { return duplicates_; }

    std::vector<std::size_t> containing(const GroupPoint& p) const {
        std::vector<std::size_t> out;
        for (const auto& g : groups_) {
            if (!(g.t_lo <= p.t() && p.t() < g.t_hi)) continue;
            Lattice m{};
            for (int i = 0; i < n_; ++i) m[i] = static_cast<std::int64_t>(std::floor(std::ldexp(p.x(i), -g.k)));
            auto it = g.cells.find(m);
            if (it != g.cells.end()) out.push_back(it->second);
        }
        return out;
    }

    std::vector<std::size_t> intersecting(const CZSet& a) const {
        std::vector<std::size_t> out;
        for (const auto& g : groups_) {
            if (!(g.t_lo < a.t_hi() && a.t_lo() < g.t_hi)) continue;
            if (g.k >= a.cube.k) {
                Lattice m{};
                for (int i = 0; i < n_; ++i) m[i] = floor_shift(a.cube.m[i], g.k - a.cube.k);
                auto it = g.cells.find(m);
                if (it != g.cells.end()) out.push_back(it->second);
                continue;
            }
            const int d = a.cube.k - g.k;
            if (n_ * d <= 12) {
                Lattice first{};
                for (int i = 0; i < n_; ++i) first[i] = a.cube.m[i] * (std::int64_t{1} << d);
                Lattice m = first;
                while (true) {
                    auto it = g.cells.find(m);
                    if (it != g.cells.end()) out.push_back(it->second);
                    int i = n_ - 1;
                    while (i >= 0 && m[i] == first[i] + (std::int64_t{1} << d) - 1) {
                        m[i] = first[i];
                        --i;
                    }
                    if (i < 0) break;
                    ++m[i];
                }
            } else {
                for (const auto& [m, idx] : g.cells) {
                    if (nodes_[idx].set.cube.intersects(a.cube)) out.push_back(idx);
                }
            }
        }
        return out;
    }

private:
    using Map = std::unordered_map<Lattice, std::size_t, LatticeHash, LatticeEq>;
    struct Group {
        double t_lo;
        double t_hi;
        int k;
        Map cells;
    };
    int n_;
    const std::vector<GridNode>& nodes_;
    std::vector<Group> groups_;
    std::vector<std::size_t> duplicates_;
};

bool rel_close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b)); }

double window_overlap(const CZSet& a, const CZSet& w) { return intersection_measure(a, w); }

}  // namespace

GridPropertyReport verify_grid_properties(const DyadicGrid& g, const std::vector<CZSet>& windows, std::int64_t trials,
                                 std::uint64_t seed) {
    const int n = g.dim();
    const double lo_parent = 1.5;
    const double hi_parent = std::max(3.0, std::ldexp(1.0, n));
    const double lo_child = std::min(std::ldexp(1.0, -n), 1.0 / 3.0);
    const double hi_child = 2.0 / 3.0;
    const double inv2n = std::ldexp(1.0, -n);
    const double two_n = std::ldexp(1.0, n);

    GridPropertyReport rep;
    rep.n = n;
    rep.j_lo = g.j_lo();
    rep.j_hi = g.j_hi();
    rep.min_parent_ratio = INFINITY;
    rep.max_parent_ratio = -INFINITY;
    rep.min_child_fraction = INFINITY;
    rep.max_child_fraction = -INFINITY;

    std::mt19937_64 rng(seed);
    const std::int64_t per_window = windows.empty() ? 0 : (trials + static_cast<std::int64_t>(windows.size()) - 1) /
                                                              static_cast<std::int64_t>(windows.size());

    for (const CZSet& w : windows) {
        if (w.dim() != n) throw DimensionError("verify_grid_properties: window dimension does not match grid");
        const int levels = g.j_hi() - g.j_lo() + 1;
        std::vector<std::vector<GridNode>> sets(static_cast<std::size_t>(levels));
        std::vector<std::unique_ptr<LevelIndex>> index;
        for (int j = g.j_lo(); j <= g.j_hi(); ++j) {
            auto& v = sets[static_cast<std::size_t>(j - g.j_lo())];
            v = g.enumerate_level(j, w);
            rep.enumerated_sets += static_cast<std::int64_t>(v.size());
            index.push_back(std::make_unique<LevelIndex>(n, v));
        }
        auto at = [&](int j) -> const std::vector<GridNode>& { return sets[static_cast<std::size_t>(j - g.j_lo())]; };
        auto idx = [&](int j) -> const LevelIndex& { return *index[static_cast<std::size_t>(j - g.j_lo())]; };

        // (i) exact tiling of the window at every level.
        const double wm = measure(w);
        for (int j = g.j_lo(); j <= g.j_hi(); ++j) {
            const auto& v = at(j);
            double covered = 0.0;
            for (const auto& node : v) {
                ++rep.partition.checked;
                covered += window_overlap(node.set, w);
                const auto hits = idx(j).intersecting(node.set);
                if (hits.size() != 1) {
                    rep.partition.fail("level " + std::to_string(j) + ": " + to_string(node.id) + " overlaps " +
                                       std::to_string(hits.size() - 1) + " other sets");
                }
                if (!is_admissible(node.set)) rep.partition.fail("inadmissible set " + to_string(node.id));
            }
            if (!idx(j).duplicates().empty()) rep.partition.fail("duplicate cells at level " + std::to_string(j));
            if (!rel_close(covered, wm, 1e-12)) {
                rep.partition.fail("level " + std::to_string(j) + " covers " + format_double(covered) + " of " +
                                   format_double(wm));
            }
        }

        // (ii) nesting across every pair of levels.
        for (int l = g.j_lo(); l <= g.j_hi(); ++l) {
            for (const auto& a : at(l)) {
                for (int k = l + 1; k <= g.j_hi(); ++k) {
                    ++rep.nesting.checked;
                    const auto hits = idx(k).intersecting(a.set);
                    int containing = 0;
                    for (std::size_t h : hits) {
                        if (contains(at(k)[h].set, a.set)) {
                            ++containing;
                        } else {
                            rep.nesting.fail(to_string(a.id) + " meets " + to_string(at(k)[h].id) +
                                             " without nesting");
                        }
                    }
                    if (containing != 1) {
                        rep.nesting.fail(to_string(a.id) + " has " + std::to_string(containing) +
                                         " containing sets at level " + std::to_string(k));
                    }
                }
            }
        }

        // (iii) parent ratios and (iv) children, plus the tree laws.
        for (int j = g.j_lo(); j <= g.j_hi(); ++j) {
            for (const auto& a : at(j)) {
                ++rep.tree_laws.checked;
                if (!(g.resolve(a.id) == a.set)) rep.tree_laws.fail("resolve mismatch for " + to_string(a.id));

                if (j < g.j_hi()) {
                    ++rep.parent_ratio.checked;
                    const GridNode p = g.parent(a);
                    const double ratio = measure_ratio(p.set, a.set);
                    rep.min_parent_ratio = std::min(rep.min_parent_ratio, ratio);
                    rep.max_parent_ratio = std::max(rep.max_parent_ratio, ratio);
                    if (ratio > two_n) ++rep.parents_above_2n;
                    if (!(ratio >= lo_parent && ratio <= hi_parent)) {
                        rep.parent_ratio.fail(to_string(a.id) + " parent ratio " + format_double(ratio));
                    }
                    if (!contains(p.set, a.set)) rep.parent_ratio.fail(to_string(a.id) + " not inside its parent");
                    if (!(g.resolve(p.id) == p.set)) rep.tree_laws.fail("parent resolve mismatch for " + to_string(a.id));
                    const auto sib = g.children(p);
                    if (std::count_if(sib.begin(), sib.end(), [&](const GridNode& c) { return c.id == a.id; }) != 1) {
                        rep.tree_laws.fail(to_string(a.id) + " is not a child of its parent");
                    }
                }

                if (j > g.j_lo()) {
                    ++rep.children.checked;
                    const auto ch = g.children(a);
                    const std::size_t count = ch.size();
                    if (count != 2 && count != static_cast<std::size_t>(two_n)) {
                        rep.children.fail(to_string(a.id) + " has " + std::to_string(count) + " children");
                    }
                    const double total = measure(a.set);
                    double sum = 0.0;
                    for (std::size_t i = 0; i < ch.size(); ++i) {
                        const double frac = measure_ratio(ch[i].set, a.set);
                        sum += measure(ch[i].set);
                        rep.min_child_fraction = std::min(rep.min_child_fraction, frac);
                        rep.max_child_fraction = std::max(rep.max_child_fraction, frac);
                        if (frac < inv2n) ++rep.children_below_inverse_2n;
                        if (!(frac >= lo_child && frac <= hi_child)) {
                            rep.children.fail(to_string(ch[i].id) + " child fraction " + format_double(frac));
                        }
                        if (!contains(a.set, ch[i].set) || !is_admissible(ch[i].set)) {
                            rep.children.fail(to_string(ch[i].id) + " not an admissible subset of its parent");
                        }
                        for (std::size_t k = i + 1; k < ch.size(); ++k) {
                            if (intersects(ch[i].set, ch[k].set)) rep.children.fail("overlapping children of " + to_string(a.id));
                        }
                        if (!(g.parent(ch[i]).id == a.id)) {
                            rep.tree_laws.fail("parent(children(" + to_string(a.id) + ")) differs");
                        }
                    }
                    if (!rel_close(sum, total, 1e-12)) rep.children.fail(to_string(a.id) + " children measures do not sum");
                }
            }
        }

        // Sampled points: (i) unique containing set, locate agreement, (v) growth.
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (std::int64_t s = 0; s < per_window; ++s) {
            GroupPoint p(n, w.t_lo() + 2.0 * w.r * unit(rng));
            for (int i = 0; i < n; ++i) p.set_x(i, w.cube.lo(i) + w.cube.side() * unit(rng));
            if (!contains(w, p)) continue;
            ++rep.sampled_points;
            std::vector<double> log_rho;
            CZSet prev;
            for (int j = g.j_lo(); j <= g.j_hi(); ++j) {
                ++rep.partition.checked;
                const auto hits = idx(j).containing(p);
                const GridNode loc = g.locate(p, j);
                if (hits.size() != 1) {
                    rep.partition.fail("point covered " + std::to_string(hits.size()) + " times at level " +
                                       std::to_string(j));
                } else if (!(at(j)[hits[0]].id == loc.id)) {
                    rep.tree_laws.fail("locate disagrees with enumeration at level " + std::to_string(j));
                }
                ++rep.tree_laws.checked;
                if (!contains(loc.set, p)) rep.tree_laws.fail("located set misses point at level " + std::to_string(j));
                if (j > g.j_lo()) {
                    ++rep.nesting.checked;
                    if (!contains(loc.set, prev)) rep.nesting.fail("located sets not nested at level " + std::to_string(j));
                    ++rep.growth.checked;
                    const double step = measure_ratio(loc.set, prev);
                    if (!(step >= lo_parent && step <= hi_parent)) {
                        rep.growth.fail("step ratio " + format_double(step) + " at level " + std::to_string(j));
                    }
                }
                log_rho.push_back(log_measure(loc.set));
                prev = loc.set;
            }
            const double l0 = log_rho[static_cast<std::size_t>(-g.j_lo())];
            for (int j = g.j_lo(); j <= g.j_hi(); ++j) {
                if (j == 0) continue;
                ++rep.growth.checked;
                const double lj = log_rho[static_cast<std::size_t>(j - g.j_lo())];
                const double bound = j > 0 ? j * std::log(1.5) : -j * std::log(2.0 / 3.0);
                const bool ok = j > 0 ? lj - l0 >= bound - 1e-12 : lj - l0 <= bound + 1e-12;
                if (!ok) {
                    rep.growth.fail("level " + std::to_string(j) + " log ratio " + format_double(lj - l0) + " vs " +
                                    format_double(bound));
                }
            }
        }
    }
    return rep;
}

}  // namespace czgrid
