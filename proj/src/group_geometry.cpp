#include "czgrid/group_geometry.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <random>

namespace czgrid {

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

GroupPoint::GroupPoint(int n, double t) : n_(n), t_(t) { check_dimension(n); }

GroupPoint::GroupPoint(std::span<const double> x, double t) : n_(static_cast<int>(x.size())), t_(t) {
    check_dimension(n_);
    std::copy(x.begin(), x.end(), x_.begin());
}

GroupPoint::GroupPoint(std::initializer_list<double> x, double t)
    : GroupPoint(std::span<const double>(x.begin(), x.size()), t) {}

bool GroupPoint::finite() const {
    if (!std::isfinite(t_)) return false;
    for (int i = 0; i < n_; ++i) {
        if (!std::isfinite(x_[i])) return false;
    }
    return true;
}

bool operator==(const GroupPoint& a, const GroupPoint& b) {
    if (a.n_ != b.n_ || a.t_ != b.t_) return false;
    for (int i = 0; i < a.n_; ++i) {
        if (a.x_[i] != b.x_[i]) return false;
    }
    return true;
}

namespace {

void require_same_dim(const GroupPoint& p, const GroupPoint& q) {
    if (p.dim() != q.dim()) {
        throw DimensionError("dimension mismatch: " + std::to_string(p.dim()) + " vs " +
                             std::to_string(q.dim()));
    }
}

}  // namespace

GroupPoint mul(const GroupPoint& p, const GroupPoint& q) {
    require_same_dim(p, q);
    GroupPoint out(p.dim(), p.t() + q.t());
    const double scale = std::exp(p.t());
    for (int i = 0; i < p.dim(); ++i) out.set_x(i, p.x(i) + scale * q.x(i));
    return out;
}

GroupPoint inv(const GroupPoint& p) {
    GroupPoint out(p.dim(), -p.t());
    const double scale = std::exp(-p.t());
    for (int i = 0; i < p.dim(); ++i) out.set_x(i, -scale * p.x(i));
    return out;
}

double dist_to_identity(const GroupPoint& p) {
    const double s = p.t();
    double y2 = 0.0;
    for (int i = 0; i < p.dim(); ++i) y2 += p.x(i) * p.x(i);
    const double sh = std::sinh(0.5 * s);
    const double w = 2.0 * sh * sh + 0.5 * std::exp(-s) * y2;
    return 2.0 * std::asinh(std::sqrt(0.5 * w));
}

double dist(const GroupPoint& p, const GroupPoint& q) {
    require_same_dim(p, q);
    // p^{-1} q = (e^{-p.t} (q.x - p.x), q.t - p.t)
    const double s = q.t() - p.t();
    const double scale = std::exp(-p.t());
    double y2 = 0.0;
    for (int i = 0; i < p.dim(); ++i) {
        const double y = scale * (q.x(i) - p.x(i));
        y2 += y * y;
    }
    const double sh = std::sinh(0.5 * s);
    const double w = 2.0 * sh * sh + 0.5 * std::exp(-s) * y2;
    return 2.0 * std::asinh(std::sqrt(0.5 * w));
}

MonteCarloEstimate mc_ball_measure(const GroupPoint& center, double r, std::int64_t samples,
                                   std::uint64_t seed) {
    if (samples < 1) throw PreconditionError("mc_ball_measure: samples must be >= 1");
    if (!(r > 0.0)) throw PreconditionError("mc_ball_measure: radius must be positive");
    const int n = center.dim();
    const double half = std::exp(center.t()) * ball_box_halfwidth(r);
    const double volume = std::pow(2.0 * half, n) * 2.0 * r;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::int64_t hits = 0;
    GroupPoint p(n, 0.0);
    for (std::int64_t s = 0; s < samples; ++s) {
        for (int i = 0; i < n; ++i) p.set_x(i, center.x(i) + half * unit(rng));
        p.set_t(center.t() + r * unit(rng));
        if (dist(center, p) < r) ++hits;
    }
    const double frac = static_cast<double>(hits) / static_cast<double>(samples);
    MonteCarloEstimate out;
    out.samples = samples;
    out.hits = hits;
    out.estimate = volume * frac;
    out.std_error = volume * std::sqrt(frac * (1.0 - frac) / static_cast<double>(samples));
    return out;
}

}  // namespace czgrid
