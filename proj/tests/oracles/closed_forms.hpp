#pragma once

#include <cmath>
#include <algorithm>
#include <functional>
#include <vector>

namespace oracle {

// Exact rho(B(o, r)) for n = 1, 2. From cosh d = cosh t + e^{-t}|x|^2/2 the
// slice at height t is a ball of radius^2 2e^t(cosh r - cosh t).
inline double ball_measure(int n, double r) {
    if (n == 1) return 2.0 * M_PI * (std::cosh(r) - 1.0);
    if (n == 2) return M_PI * (std::sinh(2.0 * r) - 2.0 * r);
    return NAN;
}

// The test-pairing of the two-set atom against chi_{x>a} log(x - a), for
// sides 2^ell: (1 - ell log 2) / 2, from the antiderivative u log u - u.
inline double counterexample_pairing(int ell) { return (1.0 - ell * std::log(2.0)) / 2.0; }

// Composite Gauss-Legendre (5 nodes) on [a, b] split into `pieces`.
inline double gauss(const std::function<double(double)>& f, double a, double b, int pieces = 200) {
    static const double x[5] = {0.0, 0.5384693101056831, -0.5384693101056831, 0.9061798459386640,
                                -0.9061798459386640};
    static const double w[5] = {0.5688888888888889, 0.4786286704993665, 0.4786286704993665, 0.2369268850561891,
                                0.2369268850561891};
    const double h = (b - a) / pieces;
    double s = 0.0;
    for (int p = 0; p < pieces; ++p) {
        const double m = a + (p + 0.5) * h;
        for (int i = 0; i < 5; ++i) s += w[i] * f(m + 0.5 * h * x[i]);
    }
    return s * h / 2.0;
}

// ∫ g over [lo, hi) with extra breakpoints; segments starting at `sing`
// are cut into geometric shells towards it.
inline double integrate_graded(const std::function<double(double)>& g, double lo, double hi,
                               std::vector<double> breaks, double sing) {
    breaks.push_back(lo);
    breaks.push_back(hi);
    std::sort(breaks.begin(), breaks.end());
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        const double a = std::max(lo, breaks[i]);
        const double b = std::min(hi, breaks[i + 1]);
        if (!(b > a)) continue;
        if (a == sing) {
            double top = b;
            for (int k = 0; k < 200 && top - a > 0.0; ++k) {
                const double bottom = a + (top - a) / 2.0;
                s += gauss(g, bottom, top, 4);
                top = bottom;
            }
        } else {
            s += gauss(g, a, b, 100);
        }
    }
    return s;
}

// Mean oscillation of h(x) = log(x - a), 0 for x <= a, over [lo, hi).
inline double log_mean_oscillation(double a, double lo, double hi) {
    auto h = [a](double x) { return x > a ? std::log(x - a) : 0.0; };
    const double len = hi - lo;
    const double mean = integrate_graded(h, lo, hi, {a}, a) / len;
    // |h - mean| has kinks where h crosses the mean
    std::vector<double> breaks{a, a + std::exp(mean)};
    return integrate_graded([&](double x) { return std::abs(h(x) - mean); }, lo, hi, breaks, a) / len;
}

}  // namespace oracle
