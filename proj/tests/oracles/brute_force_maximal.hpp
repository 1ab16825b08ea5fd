#pragma once

// Brute-force M_D f and f#_D: enumerate every grid set meeting the window
// root at every level from the finest cell up to the top of the grid, get
// averages by box overlap with the cells, and take maxima over the sets
// that contain each evaluation point. No tree walks or termination bounds.

#include <algorithm>
#include <cmath>
#include <vector>

#include "czgrid/maximal_ops.hpp"

namespace oracle {

struct Averages {
    czgrid::CZSet set;
    double avg_abs = 0.0;
    double oscillation = 0.0;
};

inline std::vector<Averages> all_grid_averages(const czgrid::StepFunction& f) {
    const czgrid::Window& w = f.window();
    const czgrid::DyadicGrid& g = w.grid();
    int finest = w.root_level();
    for (const auto& c : w.cells()) finest = std::min(finest, c.level());
    std::vector<Averages> out;
    for (int j = finest; j <= g.j_hi(); ++j) {
        for (const auto& node : g.enumerate_level(j, w.root().set)) {
            const double rho = czgrid::measure(node.set);
            double integral = 0.0;
            double abs_integral = 0.0;
            double inside = 0.0;
            std::vector<double> overlap(w.size());
            for (std::size_t i = 0; i < w.size(); ++i) {
                overlap[i] = czgrid::intersection_measure(node.set, w.cells()[i].set);
                integral += f.value(i) * overlap[i];
                abs_integral += std::abs(f.value(i)) * overlap[i];
                inside += overlap[i];
            }
            const double mean = integral / rho;
            double osc = std::max(0.0, rho - inside) * std::abs(mean);
            for (std::size_t i = 0; i < w.size(); ++i) osc += std::abs(f.value(i) - mean) * overlap[i];
            out.push_back({node.set, abs_integral / rho, osc / rho});
        }
    }
    return out;
}

struct MaximalPair {
    std::vector<double> maximal;
    std::vector<double> sharp;
};

/// Values at the centers of `eval` cells.
inline MaximalPair brute_force_maximal(const czgrid::StepFunction& f, const czgrid::Window& eval) {
    const auto sets = all_grid_averages(f);
    MaximalPair r;
    for (const auto& cell : eval.cells()) {
        const czgrid::GroupPoint p = czgrid::center(cell.set);
        double m = std::abs(f(p));
        double s = 0.0;
        for (const auto& a : sets) {
            if (!czgrid::contains(a.set, p)) continue;
            m = std::max(m, a.avg_abs);
            s = std::max(s, a.oscillation);
        }
        r.maximal.push_back(m);
        r.sharp.push_back(s);
    }
    return r;
}

}  // namespace oracle
