#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "czgrid/common.hpp"
#include "czgrid/group_geometry.hpp"

namespace czgrid {

/// Euclidean dyadic cube [m_1 2^k, (m_1+1) 2^k) x ... x [m_n 2^k, (m_n+1) 2^k).
struct DyadicCube {
    int n = 1;
    int k = 0;
    Lattice m{};

    DyadicCube() = default;
    DyadicCube(int dim, int side_exp, std::initializer_list<std::int64_t> corner);
    DyadicCube(int dim, int side_exp, const Lattice& corner);

    static DyadicCube uniform(int dim, int side_exp, std::int64_t corner_index);

    double side() const;
    double lo(int i) const;
    double hi(int i) const;
    double volume() const;

    bool contains(std::span<const double> x) const;
    bool contains(const DyadicCube& other) const;
    bool intersects(const DyadicCube& other) const;

    /// The unique dyadic cube of side 2^{k+1} containing this one.
    DyadicCube parent() const;
    /// The 2^n subcubes in lexicographic corner order (first axis slowest).
    std::vector<DyadicCube> children() const;

    friend bool operator==(const DyadicCube&, const DyadicCube&);
};

/// floor(m / 2^shift) for shifts of any size.
std::int64_t floor_shift(std::int64_t m, int shift);

enum class ParentKind { Horizontal, VerticalUp, VerticalDown };

const char* to_string(ParentKind kind);

/// An admissible-or-not product Q x [t - r, t + r) with Q a dyadic cube.
/// Calderón–Zygmund sets are the admissible ones; construction does not
/// check admissibility, use is_admissible().
struct CZSet {
    DyadicCube cube;
    double t = 0.0;
    double r = 1.0;

    CZSet() = default;
    CZSet(DyadicCube q, double t_center, double radius) : cube(q), t(t_center), r(radius) {}

    int dim() const { return cube.n; }
    double t_lo() const { return t - r; }
    double t_hi() const { return t + r; }

    friend bool operator==(const CZSet&, const CZSet&);
};

/// Admissibility of side 2^k against (t, r) in exponent form:
///   r <  1:  2 + t + log r <= k log 2 < 8 + t + log r
///   r >= 1:  t + 2r        <= k log 2 < t + 8r
bool is_admissible_side(int k, double t, double r);
bool is_admissible(const DyadicCube& cube, double t, double r);
bool is_admissible(const CZSet& R);

/// rho(R) = 2 r L^n. May overflow to +inf for very large cubes; use
/// measure_ratio() or log_measure() there.
double measure(const CZSet& R);
double log_measure(const CZSet& R);
/// rho(a) / rho(b) computed from exponent differences.
double measure_ratio(const CZSet& a, const CZSet& b);

/// x_R = (c_Q, t).
GroupPoint center(const CZSet& R);

bool contains(const CZSet& R, const GroupPoint& p);
bool contains(const CZSet& outer, const CZSet& inner);
bool intersects(const CZSet& a, const CZSet& b);
/// rho(a ∩ b) with the overlap computed per axis.
double intersection_measure(const CZSet& a, const CZSet& b);

struct SplitResult {
    bool vertical = false;
    std::vector<CZSet> children;
};

/// Canonical split: halve the cube when every subcube stays admissible with
/// the same (t, r), otherwise halve the vertical interval at t. Children are
/// in lexicographic corner order for cube splits, bottom-first for interval
/// splits. Throws SplitFailure if neither mode yields admissible children.
SplitResult split(const CZSet& R);

struct ParentResult {
    CZSet parent;
    std::vector<CZSet> siblings;
};

/// Parent constructions for r >= 1:
///   Horizontal    (e^t e^{2r} <= L < e^t e^{8r}/2): Q' x [t-r, t+r)
///   VerticalUp    (e^t e^{8r}/2 <= L < e^t e^{8r}): Q x [t-r, t+3r)
///   VerticalDown  (same side condition):            Q x [t-5r, t+r)
/// Throws PreconditionError naming the failed inequality.
ParentResult parent(const CZSet& R, ParentKind kind);

/// Which parent kind applies to R (Horizontal when its side condition holds,
/// otherwise the given vertical kind). Requires r >= 1 and admissibility.
ParentKind parent_kind_for(const CZSet& R, ParentKind vertical);

/// Canonical text form `n k m_1 .. m_n t r`.
std::string to_text(const CZSet& R);
CZSet cz_set_from_text(const std::string& text);

/// Same shape as CZSet but with an arbitrary real corner for the cube of side
/// 2^k. Admissibility depends only on (k, t, r). Used for competitor sets of
/// the non-dyadic maximal function and for atom supports.
struct TranslatedCZSet {
    int n = 1;
    int k = 0;
    Coords corner{};
    double t = 0.0;
    double r = 1.0;

    TranslatedCZSet() = default;
    explicit TranslatedCZSet(const CZSet& R);

    double side() const;
    double lo(int i) const { return corner[i]; }
    double hi(int i) const { return corner[i] + side(); }
    double t_lo() const { return t - r; }
    double t_hi() const { return t + r; }
    /// True when the corner lies on the 2^k lattice.
    bool is_dyadic() const;
};

bool is_admissible(const TranslatedCZSet& R);
double measure(const TranslatedCZSet& R);
bool contains(const TranslatedCZSet& R, const GroupPoint& p);
double intersection_measure(const TranslatedCZSet& a, const CZSet& b);

enum class DilatedMembership { Inside, Boundary, Outside };

/// Estimate of d(p, R) from above: minimum over a lattice with `per_axis`
/// points on each of the n+1 axes of the closure of R, refined by a
/// shrinking pattern search around the best lattice point.
double sampled_distance_to_set(const CZSet& R, const GroupPoint& p, int per_axis = 5);

/// Three-valued test against R* = {d(., R) < r_R}.
DilatedMembership classify_dilated(const CZSet& R, const GroupPoint& p, double tol);
DilatedMembership classify_dilated(const CZSet& R, const GroupPoint& p);

/// True iff p is definitely in R* (classification Inside).
bool dilated_contains(const CZSet& R, const GroupPoint& p, double tol);

/// sup over p in the closure of R of d(x_R, p): attained at a cube corner on
/// the top or bottom face.
double max_center_distance(const CZSet& R);

}  // namespace czgrid
