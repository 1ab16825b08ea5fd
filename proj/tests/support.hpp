#pragma once

#include <cmath>
#include <optional>
#include <ostream>
#include <random>

#include "czgrid/cz_set.hpp"
#include "czgrid/dyadic_grid.hpp"

namespace czgrid {
// readable gtest failure messages
inline void PrintTo(const DyadicSetId& id, std::ostream* os) { *os << to_string(id); }
inline void PrintTo(const CZSet& R, std::ostream* os) { *os << to_text(R); }
}  // namespace czgrid

namespace testing_support {

inline czgrid::GroupPoint random_point(int n, std::mt19937_64& rng, double xr = 5.0, double tr = 3.0) {
    std::uniform_real_distribution<double> ux(-xr, xr);
    std::uniform_real_distribution<double> ut(-tr, tr);
    czgrid::GroupPoint p(n, ut(rng));
    for (int i = 0; i < n; ++i) p.set_x(i, ux(rng));
    return p;
}

/// Integer side exponents k admissible for (t, r), written out from the
/// defining inequalities independently of the library.
inline std::pair<int, int> admissible_k_range(double t, double r) {
    const double lo = r < 1.0 ? 2.0 + t + std::log(r) : t + 2.0 * r;
    const double hi = r < 1.0 ? 8.0 + t + std::log(r) : t + 8.0 * r;
    const int k_lo = static_cast<int>(std::ceil(lo / std::log(2.0)));
    int k_hi = static_cast<int>(std::floor(hi / std::log(2.0)));
    if (k_hi * std::log(2.0) >= hi) --k_hi;
    return {k_lo, k_hi};
}

/// Admissible set with log-uniform r in [2^-6, 2^6], uniform t and a uniform
/// admissible side; corner lattice indices in [-8, 8). t and r are dyadic
/// rationals, like every set the grid produces.
inline czgrid::CZSet random_admissible(int n, std::mt19937_64& rng, double r_lo_exp = -6.0, double r_hi_exp = 6.0,
                                       double t_range = 4.0) {
    std::uniform_real_distribution<double> ue(r_lo_exp, r_hi_exp);
    std::uniform_real_distribution<double> ut(-t_range, t_range);
    std::uniform_int_distribution<int> um(-8, 7);
    for (;;) {
        // t and r on the 2^-32 lattice, so halving keeps the faces exact
        const double r = std::ldexp(std::round(std::ldexp(std::exp2(ue(rng)), 32)), -32);
        const double t = std::ldexp(std::round(std::ldexp(ut(rng), 32)), -32);
        const auto [k_lo, k_hi] = admissible_k_range(t, r);
        if (k_hi < k_lo) continue;
        std::uniform_int_distribution<int> uk(k_lo, k_hi);
        czgrid::Lattice m{};
        for (int i = 0; i < n; ++i) m[i] = um(rng);
        return czgrid::CZSet(czgrid::DyadicCube(n, uk(rng), m), t, r);
    }
}

/// Uniform point of a set.
inline czgrid::GroupPoint random_point_in(const czgrid::CZSet& R, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    czgrid::GroupPoint p(R.dim(), R.t_lo() + 2.0 * R.r * u(rng));
    for (int i = 0; i < R.dim(); ++i) p.set_x(i, R.cube.lo(i) + R.cube.side() * u(rng));
    return p;
}

inline double rel_diff(double a, double b) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

}  // namespace testing_support
