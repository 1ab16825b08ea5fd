#include "czgrid/dyadic_grid.hpp"

#include <algorithm>
#include <cmath>

namespace czgrid {

const char* to_string(Half h) { return h == Half::Upper ? "upper" : "lower"; }
const char* to_string(Band b) { return b == Band::N ? "N" : "Ntilde"; }

bool operator==(const DyadicSetId& a, const DyadicSetId& b) {
    if (a.half != b.half || a.band != b.band || a.strip != b.strip || a.n != b.n) return false;
    for (int i = 0; i < a.n; ++i) {
        if (a.cell[i] != b.cell[i]) return false;
    }
    return a.path == b.path;
}

std::string to_string(const DyadicSetId& id) {
    std::string s = id.half == Half::Upper ? "U" : "L";
    s += id.band == Band::N ? ".N." : ".T.";
    s += std::to_string(id.strip) + ".(";
    for (int i = 0; i < id.n; ++i) {
        if (i) s += ",";
        s += std::to_string(id.cell[i]);
    }
    s += ").[";
    for (std::size_t i = 0; i < id.path.size(); ++i) {
        if (i) s += ",";
        if (id.path[i].vertical) s += "v";
        s += std::to_string(id.path[i].index);
    }
    s += "]";
    return s;
}

std::size_t DyadicSetIdHash::operator()(const DyadicSetId& id) const {
    std::size_t h = static_cast<std::size_t>(id.half) * 31u + static_cast<std::size_t>(id.band);
    auto mix = [&h](std::size_t v) { h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2); };
    mix(static_cast<std::size_t>(id.strip));
    for (int i = 0; i < id.n; ++i) mix(static_cast<std::size_t>(id.cell[i]));
    for (const auto& s : id.path) mix(static_cast<std::size_t>(s.index) * 2u + (s.vertical ? 1u : 0u));
    return h;
}

// ---------------------------------------------------------------- build

namespace {

double top_of(const ChainEntry& e, Half h) {
    if (h == Half::Upper) return e.ext == ParentKind::VerticalUp ? e.t + 3.0 * e.r : e.t + e.r;
    return e.ext == ParentKind::VerticalDown ? -(e.t - 5.0 * e.r) : -(e.t - e.r);
}

std::vector<ChainEntry> build_chain(int n, Half h, int min_entries, double reach) {
    const bool upper = h == Half::Upper;
    const ParentKind vertical = upper ? ParentKind::VerticalUp : ParentKind::VerticalDown;
    CZSet R = upper ? CZSet(DyadicCube::uniform(n, 5, 0), 1.0, 1.0) : CZSet(DyadicCube::uniform(n, 2, 0), -1.0, 1.0);
    if (!is_admissible(R)) throw SplitFailure("grid seed is not admissible: " + to_text(R));

    std::vector<ChainEntry> chain;
    for (int j = 0;; ++j) {
        ChainEntry e;
        e.j = j;
        e.t = R.t;
        e.r = R.r;
        e.k = R.cube.k;
        e.ext = parent_kind_for(R, vertical);
        chain.push_back(e);
        if (j + 1 >= min_entries && top_of(e, h) >= reach) break;
        if (e.k > 900 || j > 100000) {
            throw PreconditionError("grid chain exceeds representable range before reaching t_reach");
        }
        R = parent(R, e.ext).parent;
    }
    return chain;
}

}  // namespace

DyadicGrid DyadicGrid::build(const GridConfig& config) {
    check_dimension(config.n);
    if (config.j_lo > 0 || config.j_hi < 0) {
        throw PreconditionError("build_grid: requires j_lo <= 0 <= j_hi, got [" + std::to_string(config.j_lo) +
                                ", " + std::to_string(config.j_hi) + "]");
    }
    DyadicGrid g;
    g.config_ = config;
    g.n_ = config.n;
    g.j_lo_ = config.j_lo;
    g.j_hi_ = config.j_hi;
    g.upper_ = build_chain(config.n, Half::Upper, config.j_hi + 1, config.t_reach);
    g.lower_ = build_chain(config.n, Half::Lower, config.j_hi + 1, config.t_reach);
    return g;
}

DyadicGrid DyadicGrid::build(int n, int j_lo, int j_hi, double t_reach) {
    return build(GridConfig{n, j_lo, j_hi, t_reach});
}

double DyadicGrid::vertical_reach(Half h) const {
    const auto& c = chain(h);
    return top_of(c.back(), h);
}

void DyadicGrid::require_level(int j, const char* what) const {
    if (j < j_lo_ || j > j_hi_) {
        throw HorizonError(std::string(what) + ": level " + std::to_string(j) + " outside built horizon [" +
                           std::to_string(j_lo_) + ", " + std::to_string(j_hi_) + "]; extend grid");
    }
}

const ChainEntry& DyadicGrid::entry(Half h, int strip) const {
    const auto& c = chain(h);
    if (strip < 0 || strip >= static_cast<int>(c.size())) {
        throw HorizonError("chain entry " + std::to_string(strip) + " not built; extend grid");
    }
    return c[static_cast<std::size_t>(strip)];
}

CZSet DyadicGrid::strip_set(Half h, Band b, int strip, const Lattice& cell) const {
    const ChainEntry& e = entry(h, strip);
    const DyadicCube cube(n_, e.k, cell);
    if (b == Band::N) return CZSet(cube, e.t, e.r);
    if (h == Half::Upper) {
        if (e.ext != ParentKind::VerticalUp) throw std::invalid_argument("no sibling strip at this chain entry");
        return CZSet(cube, e.t + 2.0 * e.r, e.r);
    }
    if (e.ext != ParentKind::VerticalDown) throw std::invalid_argument("no sibling strip at this chain entry");
    return CZSet(cube, e.t - 3.0 * e.r, 2.0 * e.r);
}

CZSet DyadicGrid::resolve(const DyadicSetId& id) const {
    if (id.n != n_) throw DimensionError("resolve: id dimension does not match grid");
    if (id.band == Band::N && !id.path.empty() && id.strip != 0) {
        throw std::invalid_argument("resolve: non-canonical id " + to_string(id));
    }
    require_level(id.level(), "resolve");
    CZSet set = strip_set(id.half, id.band, id.strip, id.cell);
    for (const auto& step : id.path) {
        SplitResult s = split(set);
        if (s.vertical != step.vertical || step.index >= s.children.size()) {
            throw std::invalid_argument("resolve: path does not follow the canonical split in " + to_string(id));
        }
        set = s.children[step.index];
    }
    return set;
}

GridNode DyadicGrid::node(const DyadicSetId& id) const { return GridNode{id, resolve(id)}; }

// ---------------------------------------------------------------- navigation

std::vector<GridNode> DyadicGrid::children(const GridNode& node) const {
    require_level(node.level() - 1, "children");
    const DyadicSetId& id = node.id;
    std::vector<GridNode> out;
    if (id.band == Band::N && id.path.empty() && id.strip > 0) {
        const int below = id.strip - 1;
        const ChainEntry& e = entry(id.half, below);
        auto make = [&](Band b, const Lattice& cell) {
            DyadicSetId cid;
            cid.half = id.half;
            cid.band = b;
            cid.strip = below;
            cid.n = n_;
            cid.cell = cell;
            out.push_back(GridNode{cid, strip_set(id.half, b, below, cell)});
        };
        switch (e.ext) {
            case ParentKind::Horizontal:
                for (const auto& q : node.set.cube.children()) make(Band::N, q.m);
                break;
            case ParentKind::VerticalUp:
                make(Band::N, id.cell);
                make(Band::NTilde, id.cell);
                break;
            case ParentKind::VerticalDown:
                make(Band::NTilde, id.cell);
                make(Band::N, id.cell);
                break;
        }
        return out;
    }
    SplitResult s = split(node.set);
    out.reserve(s.children.size());
    for (std::size_t i = 0; i < s.children.size(); ++i) {
        DyadicSetId cid = id;
        cid.path.push_back(PathStep{s.vertical, static_cast<std::uint8_t>(i)});
        out.push_back(GridNode{std::move(cid), s.children[i]});
    }
    return out;
}

GridNode DyadicGrid::parent(const GridNode& node) const {
    require_level(node.level() + 1, "parent");
    const DyadicSetId& id = node.id;
    GridNode out;
    out.id = id;
    if (!id.path.empty()) {
        const PathStep step = id.path.back();
        out.id.path.pop_back();
        const CZSet& c = node.set;
        if (step.vertical) {
            const double t = step.index == 0 ? c.t + c.r : c.t - c.r;
            out.set = CZSet(c.cube, t, 2.0 * c.r);
        } else {
            out.set = CZSet(c.cube.parent(), c.t, c.r);
        }
        return out;
    }
    const ChainEntry& e = entry(id.half, id.strip);
    out.id.band = Band::N;
    out.id.strip = id.strip + 1;
    if (id.band == Band::N && e.ext == ParentKind::Horizontal) {
        for (int i = 0; i < n_; ++i) out.id.cell[i] = floor_shift(id.cell[i], 1);
    }
    out.set = strip_set(id.half, Band::N, out.id.strip, out.id.cell);
    return out;
}

namespace {

struct BandSlot {
    Band band;
    int strip;
    double lo;
    double hi;
};

std::vector<BandSlot> bands_at(const std::vector<ChainEntry>& chain, Half h, int jp) {
    std::vector<BandSlot> out;
    const ChainEntry& e0 = chain[static_cast<std::size_t>(jp)];
    out.push_back({Band::N, jp, e0.t - e0.r, e0.t + e0.r});
    for (std::size_t l = static_cast<std::size_t>(jp); l < chain.size(); ++l) {
        const ChainEntry& e = chain[l];
        if (h == Half::Upper && e.ext == ParentKind::VerticalUp) {
            out.push_back({Band::NTilde, static_cast<int>(l), e.t + e.r, e.t + 3.0 * e.r});
        } else if (h == Half::Lower && e.ext == ParentKind::VerticalDown) {
            out.push_back({Band::NTilde, static_cast<int>(l), e.t - 5.0 * e.r, e.t - e.r});
        }
    }
    return out;
}

}  // namespace

GridNode DyadicGrid::locate(const GroupPoint& p, int j) const {
    if (p.dim() != n_) throw DimensionError("locate: point dimension does not match grid");
    require_level(j, "locate");
    const Half h = p.t() >= 0.0 ? Half::Upper : Half::Lower;
    const int jp = std::max(j, 0);
    const auto& c = chain(h);
    if (jp >= static_cast<int>(c.size())) throw HorizonError("locate: chain not built to level; extend grid");

    const BandSlot* found = nullptr;
    const auto slots = bands_at(c, h, jp);
    for (const auto& s : slots) {
        if (s.lo <= p.t() && p.t() < s.hi) {
            found = &s;
            break;
        }
    }
    if (!found) {
        throw HorizonError("locate: t = " + format_double(p.t()) + " beyond vertical reach " +
                           format_double(vertical_reach(h)) + "; extend grid");
    }
    const ChainEntry& e = c[static_cast<std::size_t>(found->strip)];
    GridNode cur;
    cur.id.half = h;
    cur.id.band = found->band;
    cur.id.strip = found->strip;
    cur.id.n = n_;
    for (int i = 0; i < n_; ++i) {
        cur.id.cell[i] = static_cast<std::int64_t>(std::floor(std::ldexp(p.x(i), -e.k)));
    }
    cur.set = strip_set(h, found->band, found->strip, cur.id.cell);

    while (cur.level() > j) {
        SplitResult s = split(cur.set);
        std::size_t pick = s.children.size();
        for (std::size_t i = 0; i < s.children.size(); ++i) {
            if (contains(s.children[i], p)) {
                pick = i;
                break;
            }
        }
        if (pick == s.children.size()) throw SplitFailure("locate: no child contains point");
        cur.id.path.push_back(PathStep{s.vertical, static_cast<std::uint8_t>(pick)});
        cur.set = s.children[pick];
    }
    return cur;
}

std::vector<GridNode> DyadicGrid::descendants(const GridNode& node, int j) const {
    require_level(j, "descendants");
    std::vector<GridNode> cur{node};
    while (!cur.empty() && cur.front().level() > j) {
        std::vector<GridNode> next;
        for (const auto& c : cur) {
            auto ch = children(c);
            for (auto& x : ch) next.push_back(std::move(x));
        }
        cur = std::move(next);
    }
    return cur;
}

std::vector<GridNode> DyadicGrid::enumerate_level(int j, const CZSet& window, std::size_t limit) const {
    if (window.dim() != n_) throw DimensionError("enumerate_level: window dimension does not match grid");
    require_level(j, "enumerate_level");
    const int jp = std::max(j, 0);
    std::vector<GridNode> out;

    for (Half h : {Half::Lower, Half::Upper}) {
        const double lo = h == Half::Upper ? std::max(window.t_lo(), 0.0) : window.t_lo();
        const double hi = h == Half::Upper ? window.t_hi() : std::min(window.t_hi(), 0.0);
        if (!(lo < hi)) continue;
        if (h == Half::Upper && hi > vertical_reach(h)) {
            throw HorizonError("enumerate_level: window top beyond vertical reach; extend grid");
        }
        if (h == Half::Lower && lo < -vertical_reach(h)) {
            throw HorizonError("enumerate_level: window bottom beyond vertical reach; extend grid");
        }
        const auto& c = chain(h);
        if (jp >= static_cast<int>(c.size())) throw HorizonError("enumerate_level: chain not built; extend grid");
        auto slots = bands_at(c, h, jp);
        std::sort(slots.begin(), slots.end(), [](const BandSlot& a, const BandSlot& b) { return a.lo < b.lo; });
        for (const auto& s : slots) {
            if (!(s.lo < hi && lo < s.hi)) continue;
            const int ks = c[static_cast<std::size_t>(s.strip)].k;
            // Lattice ranges of strip cells meeting the window cube.
            Lattice first{};
            Lattice last{};
            double count = 1.0;
            for (int i = 0; i < n_; ++i) {
                if (ks >= window.cube.k) {
                    first[i] = last[i] = floor_shift(window.cube.m[i], ks - window.cube.k);
                } else {
                    const int d = window.cube.k - ks;
                    if (d > 40) throw PreconditionError("enumerate_level: window too wide for level");
                    first[i] = window.cube.m[i] * (std::int64_t{1} << d);
                    last[i] = (window.cube.m[i] + 1) * (std::int64_t{1} << d) - 1;
                }
                count *= static_cast<double>(last[i] - first[i] + 1);
            }
            if (count + static_cast<double>(out.size()) > static_cast<double>(limit)) {
                throw PreconditionError("enumerate_level: more than " + std::to_string(limit) + " sets");
            }
            Lattice cell = first;
            while (true) {
                GridNode root;
                root.id.half = h;
                root.id.band = s.band;
                root.id.strip = s.strip;
                root.id.n = n_;
                root.id.cell = cell;
                root.set = strip_set(h, s.band, s.strip, cell);
                // Depth-first descent pruned by intersection with the window.
                std::vector<GridNode> stack{root};
                while (!stack.empty()) {
                    GridNode cur = std::move(stack.back());
                    stack.pop_back();
                    if (!intersects(cur.set, window)) continue;
                    if (cur.level() == j) {
                        out.push_back(std::move(cur));
                        if (out.size() > limit) {
                            throw PreconditionError("enumerate_level: more than " + std::to_string(limit) + " sets");
                        }
                        continue;
                    }
                    auto ch = children(cur);
                    for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.push_back(std::move(*it));
                }
                int i = n_ - 1;
                while (i >= 0 && cell[i] == last[i]) {
                    cell[i] = first[i];
                    --i;
                }
                if (i < 0) break;
                ++cell[i];
            }
        }
    }
    return out;
}

}  // namespace czgrid
