#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <span>

#include "czgrid/common.hpp"

namespace czgrid {

/// A point (x, t) of S = R^n x R with horizontal dimension n.
class GroupPoint {
public:
    GroupPoint() = default;
    GroupPoint(int n, double t);
    GroupPoint(std::span<const double> x, double t);
    GroupPoint(std::initializer_list<double> x, double t);

    static GroupPoint identity(int n) { return GroupPoint(n, 0.0); }

    int dim() const { return n_; }
    double t() const { return t_; }
    double x(int i) const { return x_[i]; }
    std::span<const double> xs() const { return {x_.data(), static_cast<std::size_t>(n_)}; }

    void set_x(int i, double v) { x_[i] = v; }
    void set_t(double v) { t_ = v; }

    bool finite() const;

    friend bool operator==(const GroupPoint& a, const GroupPoint& b);

private:
    int n_ = 1;
    Coords x_{};
    double t_ = 0.0;
};

/// Group product (x, t)(x', t') = (x + e^t x', t + t').
GroupPoint mul(const GroupPoint& p, const GroupPoint& q);

/// Group inverse (-e^{-t} x, -t).
GroupPoint inv(const GroupPoint& p);

/// Left-invariant distance. Computed from cosh d(p, q) - 1 for the reduced
/// point p^{-1} q in the cancellation-free form
///   cosh d - 1 = 2 sinh^2(s/2) + e^{-s} |y|^2 / 2,
/// so that d = 2 asinh(sqrt((cosh d - 1) / 2)).
double dist(const GroupPoint& p, const GroupPoint& q);

/// Distance from the identity.
double dist_to_identity(const GroupPoint& p);

struct MonteCarloEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
    std::int64_t samples = 0;
    std::int64_t hits = 0;
};

/// Monte-Carlo estimate of rho(B(center, r)) under d rho = dx dt.
///
/// Points are drawn uniformly in the box
///   |x_i - center.x_i| <= e^{center.t} sinh r,   |t - center.t| <= r,
/// which contains the ball: after translating the center to o, the sublevel
/// set {cosh d < cosh r} satisfies |y|^2 < 2 e^s cosh r - e^{2s} - 1 <= sinh^2 r.
/// A hit is a sample with dist < r. Deterministic for a fixed seed.
MonteCarloEstimate mc_ball_measure(const GroupPoint& center, double r, std::int64_t samples,
                                   std::uint64_t seed);

/// Half-width of the horizontal bounding box of B(o, r).
inline double ball_box_halfwidth(double r) { return std::sinh(r); }

}  // namespace czgrid
