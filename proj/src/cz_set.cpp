#include "czgrid/cz_set.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace czgrid {

namespace {

constexpr double kLn2 = std::numbers::ln2;

}  // namespace

// ---------------------------------------------------------------- DyadicCube

DyadicCube::DyadicCube(int dim, int side_exp, std::initializer_list<std::int64_t> corner)
    : n(dim), k(side_exp) {
    check_dimension(dim);
    if (static_cast<int>(corner.size()) != dim) {
        throw DimensionError("cube corner has " + std::to_string(corner.size()) +
                             " coordinates, expected " + std::to_string(dim));
    }
    std::copy(corner.begin(), corner.end(), m.begin());
}

DyadicCube::DyadicCube(int dim, int side_exp, const Lattice& corner) : n(dim), k(side_exp), m(corner) {
    check_dimension(dim);
    for (int i = dim; i < kMaxDim; ++i) m[i] = 0;
}

DyadicCube DyadicCube::uniform(int dim, int side_exp, std::int64_t corner_index) {
    Lattice c{};
    for (int i = 0; i < dim; ++i) c[i] = corner_index;
    return DyadicCube(dim, side_exp, c);
}

double DyadicCube::side() const { return std::ldexp(1.0, k); }
double DyadicCube::lo(int i) const { return std::ldexp(static_cast<double>(m[i]), k); }
double DyadicCube::hi(int i) const { return std::ldexp(static_cast<double>(m[i] + 1), k); }
double DyadicCube::volume() const { return std::ldexp(1.0, k * n); }

bool DyadicCube::contains(std::span<const double> x) const {
    for (int i = 0; i < n; ++i) {
        if (x[i] < lo(i) || !(x[i] < hi(i))) return false;
    }
    return true;
}

std::int64_t floor_shift(std::int64_t m, int shift) {
    if (shift <= 0) return m;
    return m >> std::min(shift, 63);
}

bool DyadicCube::contains(const DyadicCube& other) const {
    if (other.n != n || other.k > k) return false;
    for (int i = 0; i < n; ++i) {
        if (floor_shift(other.m[i], k - other.k) != m[i]) return false;
    }
    return true;
}

bool DyadicCube::intersects(const DyadicCube& other) const {
    return other.k <= k ? contains(other) : other.contains(*this);
}

DyadicCube DyadicCube::parent() const {
    Lattice c{};
    for (int i = 0; i < n; ++i) c[i] = floor_shift(m[i], 1);
    return DyadicCube(n, k + 1, c);
}

std::vector<DyadicCube> DyadicCube::children() const {
    std::vector<DyadicCube> out;
    const int count = 1 << n;
    out.reserve(count);
    for (int code = 0; code < count; ++code) {
        Lattice c{};
        for (int i = 0; i < n; ++i) {
            const int bit = (code >> (n - 1 - i)) & 1;
            c[i] = 2 * m[i] + bit;
        }
        out.emplace_back(n, k - 1, c);
    }
    return out;
}

bool operator==(const DyadicCube& a, const DyadicCube& b) {
    if (a.n != b.n || a.k != b.k) return false;
    for (int i = 0; i < a.n; ++i) {
        if (a.m[i] != b.m[i]) return false;
    }
    return true;
}

const char* to_string(ParentKind kind) {
    switch (kind) {
        case ParentKind::Horizontal: return "horizontal";
        case ParentKind::VerticalUp: return "vertical_up";
        case ParentKind::VerticalDown: return "vertical_down";
    }
    return "?";
}

// ---------------------------------------------------------------- CZSet

bool operator==(const CZSet& a, const CZSet& b) {
    return a.cube == b.cube && a.t == b.t && a.r == b.r;
}

bool is_admissible_side(int k, double t, double r) {
    if (!(r > 0.0) || !std::isfinite(t) || !std::isfinite(r)) return false;
    const double log_side = k * kLn2;
    if (r < 1.0) {
        const double base = t + std::log(r);
        return 2.0 + base <= log_side && log_side < 8.0 + base;
    }
    return t + 2.0 * r <= log_side && log_side < t + 8.0 * r;
}

bool is_admissible(const DyadicCube& cube, double t, double r) { return is_admissible_side(cube.k, t, r); }
bool is_admissible(const CZSet& R) { return is_admissible_side(R.cube.k, R.t, R.r); }

double measure(const CZSet& R) { return 2.0 * R.r * R.cube.volume(); }

double log_measure(const CZSet& R) { return std::log(2.0 * R.r) + R.cube.n * R.cube.k * kLn2; }

double measure_ratio(const CZSet& a, const CZSet& b) {
    return std::ldexp(a.r / b.r, a.cube.n * (a.cube.k - b.cube.k));
}

GroupPoint center(const CZSet& R) {
    GroupPoint c(R.dim(), R.t);
    for (int i = 0; i < R.dim(); ++i) c.set_x(i, R.cube.lo(i) + 0.5 * R.cube.side());
    return c;
}

bool contains(const CZSet& R, const GroupPoint& p) {
    if (p.dim() != R.dim()) throw DimensionError("contains: dimension mismatch");
    if (p.t() < R.t_lo() || !(p.t() < R.t_hi())) return false;
    return R.cube.contains(p.xs());
}

bool contains(const CZSet& outer, const CZSet& inner) {
    return outer.t_lo() <= inner.t_lo() && inner.t_hi() <= outer.t_hi() && outer.cube.contains(inner.cube);
}

bool intersects(const CZSet& a, const CZSet& b) {
    if (!(a.t_lo() < b.t_hi() && b.t_lo() < a.t_hi())) return false;
    return a.cube.intersects(b.cube);
}

double intersection_measure(const CZSet& a, const CZSet& b) {
    const double dt = std::min(a.t_hi(), b.t_hi()) - std::max(a.t_lo(), b.t_lo());
    if (!(dt > 0.0)) return 0.0;
    if (!a.cube.intersects(b.cube)) return 0.0;
    const DyadicCube& small = a.cube.k <= b.cube.k ? a.cube : b.cube;
    return dt * small.volume();
}

// ---------------------------------------------------------------- splitting

SplitResult split(const CZSet& R) {
    SplitResult out;
    if (is_admissible_side(R.cube.k - 1, R.t, R.r)) {
        out.vertical = false;
        for (const auto& q : R.cube.children()) out.children.emplace_back(q, R.t, R.r);
        return out;
    }
    const double half = 0.5 * R.r;
    CZSet lower(R.cube, R.t - half, half);
    CZSet upper(R.cube, R.t + half, half);
    if (!is_admissible(lower) || !is_admissible(upper)) {
        throw SplitFailure("split: neither mode admissible for " + to_text(R));
    }
    out.vertical = true;
    out.children = {lower, upper};
    return out;
}

namespace {

bool horizontal_condition(const CZSet& R) {
    return R.t + 2.0 * R.r <= R.cube.k * kLn2 && (R.cube.k + 1) * kLn2 < R.t + 8.0 * R.r;
}

bool vertical_condition(const CZSet& R) {
    return R.t + 8.0 * R.r <= (R.cube.k + 1) * kLn2 && R.cube.k * kLn2 < R.t + 8.0 * R.r;
}

}  // namespace

ParentKind parent_kind_for(const CZSet& R, ParentKind vertical) {
    if (R.r < 1.0) throw PreconditionError("parent: requires r >= 1, got r = " + format_double(R.r));
    if (!is_admissible(R)) throw PreconditionError("parent: set is not admissible: " + to_text(R));
    return horizontal_condition(R) ? ParentKind::Horizontal : vertical;
}

ParentResult parent(const CZSet& R, ParentKind kind) {
    if (R.r < 1.0) {
        throw PreconditionError("parent: requires r >= 1, got r = " + format_double(R.r));
    }
    ParentResult out;
    switch (kind) {
        case ParentKind::Horizontal: {
            if (!horizontal_condition(R)) {
                throw PreconditionError("parent(horizontal): requires e^t e^{2r} <= L < e^t e^{8r}/2 for " +
                                        to_text(R));
            }
            const DyadicCube big = R.cube.parent();
            out.parent = CZSet(big, R.t, R.r);
            for (const auto& q : big.children()) {
                if (!(q == R.cube)) out.siblings.emplace_back(q, R.t, R.r);
            }
            break;
        }
        case ParentKind::VerticalUp: {
            if (!vertical_condition(R)) {
                throw PreconditionError("parent(vertical_up): requires e^t e^{8r}/2 <= L < e^t e^{8r} for " +
                                        to_text(R));
            }
            out.parent = CZSet(R.cube, R.t + R.r, 2.0 * R.r);
            out.siblings.emplace_back(R.cube, R.t + 2.0 * R.r, R.r);
            break;
        }
        case ParentKind::VerticalDown: {
            if (!vertical_condition(R)) {
                throw PreconditionError(
                    "parent(vertical_down): requires e^t e^{8r}/2 <= L < e^t e^{8r} for " + to_text(R));
            }
            out.parent = CZSet(R.cube, R.t - 2.0 * R.r, 3.0 * R.r);
            out.siblings.emplace_back(R.cube, R.t - 3.0 * R.r, 2.0 * R.r);
            break;
        }
    }
    return out;
}

// ---------------------------------------------------------------- text form

std::string to_text(const CZSet& R) {
    std::string s = std::to_string(R.cube.n) + " " + std::to_string(R.cube.k);
    for (int i = 0; i < R.cube.n; ++i) s += " " + std::to_string(R.cube.m[i]);
    s += " " + format_double(R.t) + " " + format_double(R.r);
    return s;
}

CZSet cz_set_from_text(const std::string& text) {
    std::istringstream in(text);
    int n = 0;
    int k = 0;
    if (!(in >> n >> k)) throw std::invalid_argument("cz_set_from_text: malformed '" + text + "'");
    check_dimension(n);
    Lattice m{};
    for (int i = 0; i < n; ++i) {
        if (!(in >> m[i])) throw std::invalid_argument("cz_set_from_text: malformed '" + text + "'");
    }
    double t = 0.0;
    double r = 0.0;
    if (!(in >> t >> r)) throw std::invalid_argument("cz_set_from_text: malformed '" + text + "'");
    std::string rest;
    if (in >> rest) throw std::invalid_argument("cz_set_from_text: trailing data in '" + text + "'");
    return CZSet(DyadicCube(n, k, m), t, r);
}

// ---------------------------------------------------------------- translated sets

TranslatedCZSet::TranslatedCZSet(const CZSet& R) : n(R.cube.n), k(R.cube.k), t(R.t), r(R.r) {
    for (int i = 0; i < n; ++i) corner[i] = R.cube.lo(i);
}

double TranslatedCZSet::side() const { return std::ldexp(1.0, k); }

bool TranslatedCZSet::is_dyadic() const {
    for (int i = 0; i < n; ++i) {
        const double q = std::ldexp(corner[i], -k);
        if (q != std::floor(q)) return false;
    }
    return true;
}

bool is_admissible(const TranslatedCZSet& R) { return is_admissible_side(R.k, R.t, R.r); }

double measure(const TranslatedCZSet& R) { return 2.0 * R.r * std::ldexp(1.0, R.k * R.n); }

bool contains(const TranslatedCZSet& R, const GroupPoint& p) {
    if (p.dim() != R.n) throw DimensionError("contains: dimension mismatch");
    if (p.t() < R.t_lo() || !(p.t() < R.t_hi())) return false;
    for (int i = 0; i < R.n; ++i) {
        if (p.x(i) < R.lo(i) || !(p.x(i) < R.hi(i))) return false;
    }
    return true;
}

double intersection_measure(const TranslatedCZSet& a, const CZSet& b) {
    if (a.n != b.dim()) throw DimensionError("intersection_measure: dimension mismatch");
    double m = std::min(a.t_hi(), b.t_hi()) - std::max(a.t_lo(), b.t_lo());
    if (!(m > 0.0)) return 0.0;
    for (int i = 0; i < a.n; ++i) {
        const double w = std::min(a.hi(i), b.cube.hi(i)) - std::max(a.lo(i), b.cube.lo(i));
        if (!(w > 0.0)) return 0.0;
        m *= w;
    }
    return m;
}

// ---------------------------------------------------------------- dilated sets

double sampled_distance_to_set(const CZSet& R, const GroupPoint& p, int per_axis) {
    const int n = R.dim();
    const int axes = n + 1;
    per_axis = std::max(per_axis, 2);
    std::array<double, kMaxDim + 1> lo{};
    std::array<double, kMaxDim + 1> hi{};
    for (int i = 0; i < n; ++i) {
        lo[i] = R.cube.lo(i);
        hi[i] = R.cube.hi(i);
    }
    lo[n] = R.t_lo();
    hi[n] = R.t_hi();

    auto point_of = [&](const std::array<double, kMaxDim + 1>& c) {
        GroupPoint q(n, c[n]);
        for (int i = 0; i < n; ++i) q.set_x(i, c[i]);
        return q;
    };

    std::array<double, kMaxDim + 1> best{};
    double best_d = std::numeric_limits<double>::infinity();
    std::array<int, kMaxDim + 1> idx{};
    std::array<double, kMaxDim + 1> c{};
    while (true) {
        for (int a = 0; a < axes; ++a) {
            c[a] = lo[a] + (hi[a] - lo[a]) * idx[a] / (per_axis - 1);
        }
        const double d = dist(p, point_of(c));
        if (d < best_d) {
            best_d = d;
            best = c;
        }
        int a = 0;
        while (a < axes && ++idx[a] == per_axis) idx[a++] = 0;
        if (a == axes) break;
    }

    // Pattern search with step halving, clamped to the closed box.
    std::array<double, kMaxDim + 1> step{};
    for (int a = 0; a < axes; ++a) step[a] = (hi[a] - lo[a]) / (per_axis - 1);
    for (int round = 0; round < 60; ++round) {
        bool improved = false;
        for (int a = 0; a < axes; ++a) {
            for (double sign : {-1.0, 1.0}) {
                auto trial = best;
                trial[a] = std::clamp(best[a] + sign * step[a], lo[a], hi[a]);
                const double d = dist(p, point_of(trial));
                if (d < best_d) {
                    best_d = d;
                    best = trial;
                    improved = true;
                }
            }
        }
        if (!improved) {
            for (int a = 0; a < axes; ++a) step[a] *= 0.5;
        }
    }
    return best_d;
}

DilatedMembership classify_dilated(const CZSet& R, const GroupPoint& p, double tol) {
    if (contains(R, p)) return DilatedMembership::Inside;
    const double d = sampled_distance_to_set(R, p);
    if (d < R.r - tol) return DilatedMembership::Inside;
    if (d > R.r + tol) return DilatedMembership::Outside;
    return DilatedMembership::Boundary;
}

DilatedMembership classify_dilated(const CZSet& R, const GroupPoint& p) {
    return classify_dilated(R, p, 1e-3 * R.r);
}

bool dilated_contains(const CZSet& R, const GroupPoint& p, double tol) {
    return classify_dilated(R, p, tol) == DilatedMembership::Inside;
}

double max_center_distance(const CZSet& R) {
    const GroupPoint c = center(R);
    double best = 0.0;
    for (double s : {R.t_lo(), R.t_hi()}) {
        GroupPoint q(R.dim(), s);
        for (int i = 0; i < R.dim(); ++i) q.set_x(i, R.cube.hi(i));
        best = std::max(best, dist(c, q));
    }
    return best;
}

}  // namespace czgrid
