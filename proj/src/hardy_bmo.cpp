#include "czgrid/hardy_bmo.hpp"

#include <algorithm>
#include <cmath>

namespace czgrid {

AtomReport validate_atom(const Atom& a) {
    AtomReport r;
    const StepFunction& f = a.values;
    const Window& w = f.window();
    if (a.support.n != f.dim()) throw DimensionError("validate_atom: support dimension mismatch");
    r.support_admissible = is_admissible(a.support);
    if (!r.support_admissible) r.violations.push_back("support is not admissible");

    const double rho = measure(a.support);
    double l1 = 0.0;
    double mean = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double v = f.value(i);
        if (v == 0.0) continue;
        const double m = w.cell_measure(i);
        const double in = intersection_measure(a.support, w.cells()[i].set);
        l1 += std::abs(v) * m;
        mean += v * m;
        r.outside_mass += std::abs(v) * (m - in);
        r.sup_ratio = std::max(r.sup_ratio, std::abs(v) * rho);
    }
    r.mean_ratio = l1 > 0.0 ? std::abs(mean) / l1 : 0.0;
    if (r.sup_ratio > 1.0 + 1e-12) {
        r.violations.push_back("sup norm exceeds 1/rho(support) by factor " + format_double(r.sup_ratio));
    }
    if (r.mean_ratio > 1e-12) r.violations.push_back("mean is not zero: relative " + format_double(r.mean_ratio));
    if (r.outside_mass != 0.0) r.violations.push_back("mass outside support " + format_double(r.outside_mass));
    r.valid = r.violations.empty();
    return r;
}

double mean_oscillation(const StepFunction& f, const CZSet& R) {
    const Window& w = f.window();
    const double rho = measure(R);
    double covered = 0.0;
    double s = 0.0;
    std::vector<std::pair<std::size_t, double>> parts;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double m = intersection_measure(w.cells()[i].set, R);
        if (m <= 0.0) continue;
        parts.emplace_back(i, m);
        covered += m;
        s += f.value(i) * m;
    }
    const double mean = s / rho;
    double osc = std::max(rho - covered, 0.0) * std::abs(mean);
    for (const auto& [i, m] : parts) osc += std::abs(f.value(i) - mean) * m;
    return osc / rho;
}

double bmo_dyadic_lower(const StepFunction& f, const std::vector<DyadicSetId>& probe) {
    double best = 0.0;
    for (const auto& id : probe) best = std::max(best, mean_oscillation(f, f.window().grid().resolve(id)));
    return best;
}

// ---------------------------------------------------------------- log profile

namespace {

// ∫_p^q |log u - mu| du for 0 <= p < q.
double abs_log_dev(double p, double q, double mu) {
    auto G = [mu](double u) { return u > 0.0 ? u * (std::log(u) - 1.0) - mu * u : 0.0; };
    const double us = std::exp(mu);
    if (us <= p) return G(q) - G(p);
    if (us >= q) return G(p) - G(q);
    return G(q) + G(p) - 2.0 * G(us);
}

double H(double u) { return u > 0.0 ? u * (std::log(u) - 1.0) : 0.0; }

// Mean oscillation of log over [s, 1); by scale invariance also over [sq, q).
double osc_log_unit(double s) {
    const double mu = (H(1.0) - H(s)) / (1.0 - s);
    return abs_log_dev(s, 1.0, mu) / (1.0 - s);
}

// Mean oscillation of h over the interval [lo, hi).
double osc_profile(double a, double lo, double hi) {
    if (hi <= a) return 0.0;
    if (lo >= a) return osc_log_unit((lo - a) / (hi - a));
    const double A = a - lo;
    const double B = hi - a;
    const double N = hi - lo;
    const double mu = H(B) / N;
    return (A * std::abs(mu) + abs_log_dev(0.0, B, mu)) / N;
}

}  // namespace

double mean_oscillation(const LogProfile& h, const CZSet& R) { return osc_profile(h.a, R.cube.lo(0), R.cube.hi(0)); }

double bmo_dyadic_lower(const LogProfile& h, const DyadicGrid& g, const std::vector<DyadicSetId>& probe) {
    double best = 0.0;
    for (const auto& id : probe) best = std::max(best, mean_oscillation(h, g.resolve(id)));
    return best;
}

BmoUpperEstimate bmo_dyadic_upper_log(int k0) {
    if (k0 < 0 || k0 > 60) throw PreconditionError("bmo_dyadic_upper_log: k0 must lie in [0, 60]");
    const double a = std::ldexp(1.0, k0);
    BmoUpperEstimate e;

    // Inside x > a. Sides 2^k <= a give u = [j 2^k, (j+1) 2^k), s = j/(j+1);
    // sides 2^k > a give s = (m - c)/(m + 1 - c) with c = a/2^k <= 1/2.
    const int J = 4096;
    for (int j = 0; j <= J; ++j) e.inside_sup = std::max(e.inside_sup, osc_log_unit(j / (j + 1.0)));
    for (int k = k0 + 1; k <= k0 + 60; ++k) {
        const double c = std::ldexp(1.0, k0 - k);
        for (int m = 1; m <= J; ++m) e.inside_sup = std::max(e.inside_sup, osc_log_unit((m - c) / (m + 1 - c)));
    }
    // Unlisted inside intervals have s >= (J + 1/2)/(J + 3/2) and oscillation
    // at most 2 avg |log u| <= 2 log(1/s); larger k moves s by under 2^-60.
    e.inside_tail = 2.0 * std::log((J + 1.5) / (J + 0.5));

    // Straddling intervals are exactly [0, 2^m), m > k0.
    e.m_tail = k0 + 64;
    for (int m = k0 + 1; m < e.m_tail; ++m) {
        const double v = osc_profile(a, 0.0, std::ldexp(1.0, m));
        if (v > e.straddle_sup) {
            e.straddle_sup = v;
            e.straddle_argmax = m;
        }
    }
    // osc(h) <= osc(log) + 2 avg |h - log| on [0, N), and
    // ∫_0^N |h - log| <= 2 + a log N for a >= 1; decreasing in N.
    const double N0 = std::ldexp(1.0, e.m_tail);
    e.straddle_tail = 2.0 / std::exp(1.0) + 2.0 * (2.0 + a * std::log(N0)) / N0;

    e.value = std::max({e.inside_sup, e.inside_tail, e.straddle_sup, e.straddle_tail});
    return e;
}

// ---------------------------------------------------------------- counterexample

namespace {

// ∫_lo^hi h(x) dx by the midpoint rule on dyadic shells graded toward x = a.
double graded_profile_integral(double a, double lo, double hi, int shells, int points) {
    lo = std::max(lo, a);
    if (hi <= lo) return 0.0;
    // Work in u = x - a so that points near the singularity stay resolved.
    auto midpoint = [](double p, double q, int m) {
        const double d = (q - p) / m;
        double s = 0.0;
        for (int i = 0; i < m; ++i) s += std::log(p + (i + 0.5) * d);
        return s * d;
    };
    if (lo > a) return midpoint(lo - a, hi - a, shells * points);
    const double w = hi - a;
    double total = 0.0;
    for (int i = 0; i < shells; ++i) total += midpoint(std::ldexp(w, -i - 1), std::ldexp(w, -i), points);
    total += midpoint(0.0, std::ldexp(w, -shells), points);
    return total;
}

}  // namespace

double log_pairing(const StepFunction& f, const LogProfile& h, int shells, int points) {
    if (f.dim() != 1) throw DimensionError("log_pairing: requires n = 1");
    if (shells < 1 || points < 1) throw PreconditionError("log_pairing: bad quadrature");
    const Window& w = f.window();
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double v = f.value(i);
        if (v == 0.0) continue;
        const CZSet& c = w.cells()[i].set;
        s += v * 2.0 * c.r * graded_profile_integral(h.a, c.cube.lo(0), c.cube.hi(0), shells, points);
    }
    return s;
}

std::vector<CounterexampleRecord> run_counterexample(const DyadicGrid& g, const std::vector<int>& ells,
                                                     const CounterexampleOptions& opts) {
    if (g.dim() != 1) throw DimensionError("run_counterexample: requires n = 1");
    if (g.j_hi() < 1) throw PreconditionError("run_counterexample: grid needs level 1");
    if (!(opts.t_star >= 0.0 && opts.t_star < 2.0)) throw PreconditionError("run_counterexample: t_star in [0, 2)");
    if (opts.shells < 1 || opts.points_per_shell < 1) throw PreconditionError("run_counterexample: bad quadrature");

    const int l0 = 5;
    const double a = std::ldexp(1.0, l0);
    const GridNode R0 = g.locate(GroupPoint({a / 2}, opts.t_star), 0);
    const GridNode E0 = g.locate(GroupPoint({1.5 * a}, opts.t_star), 0);
    if (!(R0.set == CZSet(DyadicCube(1, l0, {0}), 1.0, 1.0)) || !(E0.set == CZSet(DyadicCube(1, l0, {1}), 1.0, 1.0)) ||
        !(g.parent(R0).id == g.parent(E0).id)) {
        throw PreconditionError("run_counterexample: grid lacks the adjacent level-0 pair at x = 32");
    }
    const GridNode top = g.parent(R0);
    auto shared = std::make_shared<const DyadicGrid>(g);
    const BmoUpperEstimate bmo = bmo_dyadic_upper_log(l0);

    std::vector<CounterexampleRecord> out;
    for (int ell : ells) {
        if (ell >= l0) throw PreconditionError("run_counterexample: need ell < 5, got " + std::to_string(ell));
        const double delta = std::ldexp(1.0, ell - 1);
        const GroupPoint pr({a - delta}, opts.t_star);
        const GroupPoint pe({a + delta}, opts.t_star);
        int level = 0;
        GridNode r = g.locate(pr, 0);
        while (r.set.cube.k > ell) {
            if (level - 1 < g.j_lo()) {
                throw HorizonError("run_counterexample: side 2^" + std::to_string(ell) + " not reached by level " +
                                   std::to_string(g.j_lo()) + "; extend grid");
            }
            --level;
            r = g.locate(pr, level);
        }
        const GridNode e = g.locate(pe, level);
        if (r.set.cube.k != ell || e.set.cube.k != ell || r.set.t != e.set.t || r.set.r != e.set.r ||
            r.set.cube.hi(0) != a || e.set.cube.lo(0) != a) {
            throw SplitFailure("run_counterexample: sets at x = 32 are not mirror images at level " +
                               std::to_string(level));
        }

        CounterexampleRecord rec;
        rec.ell = ell;
        rec.level = level;
        rec.R = r.set;
        rec.E = e.set;
        rec.support = TranslatedCZSet(r.set);
        rec.support.k = ell + 1;

        auto w = Window::refined(shared, top.id, {r.id, e.id});
        std::vector<double> v(w->size(), 0.0);
        const double amp = 1.0 / (2.0 * measure(r.set));
        v[*w->find(r.id)] = amp;
        v[*w->find(e.id)] = -amp;
        const Atom atom{rec.support, StepFunction(w, std::move(v))};
        rec.atom_valid = validate_atom(atom).valid;
        rec.h1_upper = rec.atom_valid ? 1.0 : INFINITY;

        rec.pairing = (1.0 - ell * std::log(2.0)) / 2.0;
        rec.pairing_numeric = std::abs(log_pairing(atom.values, LogProfile{a}, opts.shells, opts.points_per_shell));
        rec.relative_error = std::abs(rec.pairing_numeric - rec.pairing) / rec.pairing;
        rec.bmo_upper = bmo.value;
        rec.h1d_lower = rec.pairing / bmo.value;
        out.push_back(rec);
    }
    return out;
}

AffineFit fit_affine(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw PreconditionError("fit_affine: need two or more points");
    const double n = static_cast<double>(x.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0.0)) throw PreconditionError("fit_affine: x values coincide");
    AffineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    for (std::size_t i = 0; i < x.size(); ++i) {
        f.max_residual = std::max(f.max_residual, std::abs(y[i] - (f.intercept + f.slope * x[i])));
    }
    return f;
}

}  // namespace czgrid
