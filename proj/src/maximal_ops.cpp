#include "czgrid/maximal_ops.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace czgrid {

std::shared_ptr<const Window> top_window(const Window& w) { return w.extended(w.grid().j_hi()); }

namespace {

// The grid sets strictly between each cell and the window root (root
// included), with exact integrals of f and |f| over each.
struct AncestorTree {
    std::vector<GridNode> nodes;
    std::vector<double> rho;
    std::vector<double> abs_int;
    std::vector<double> int_f;
    std::vector<std::vector<std::size_t>> members;  // node -> cells
    std::vector<std::vector<std::size_t>> chain;    // cell -> nodes, bottom-up

    explicit AncestorTree(const StepFunction& f) {
        const Window& w = f.window();
        const DyadicGrid& g = w.grid();
        std::unordered_map<DyadicSetId, std::size_t, DyadicSetIdHash> where;
        chain.resize(w.size());
        for (std::size_t i = 0; i < w.size(); ++i) {
            GridNode cur = w.cells()[i];
            const double a = std::abs(f.value(i)) * w.cell_measure(i);
            const double s = f.value(i) * w.cell_measure(i);
            while (cur.level() < w.root_level()) {
                cur = g.parent(cur);
                auto [it, fresh] = where.emplace(cur.id, nodes.size());
                if (fresh) {
                    nodes.push_back(cur);
                    rho.push_back(measure(cur.set));
                    abs_int.push_back(0.0);
                    int_f.push_back(0.0);
                    members.emplace_back();
                }
                const std::size_t k = it->second;
                chain[i].push_back(k);
                members[k].push_back(i);
                abs_int[k] += a;
                int_f[k] += s;
            }
        }
    }

    double avg_abs(std::size_t k) const { return abs_int[k] / rho[k]; }

    double oscillation(const StepFunction& f, std::size_t k) const {
        const double mean = int_f[k] / rho[k];
        double s = 0.0;
        for (std::size_t i : members[k]) s += std::abs(f.value(i) - mean) * f.window().cell_measure(i);
        return s / rho[k];
    }
};

}  // namespace

StepFunction dyadic_maximal(const StepFunction& f) {
    const StepFunction F = f.on(top_window(f.window()));
    const AncestorTree tree(F);
    std::vector<double> out(F.values().size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        double m = std::abs(F.value(i));
        for (std::size_t k : tree.chain[i]) m = std::max(m, tree.avg_abs(k));
        out[i] = m;
    }
    return StepFunction(F.window_ptr(), std::move(out));
}

StepFunction dyadic_sharp(const StepFunction& f) {
    const StepFunction F = f.on(top_window(f.window()));
    const AncestorTree tree(F);
    std::vector<double> osc(tree.nodes.size());
    for (std::size_t k = 0; k < osc.size(); ++k) osc[k] = tree.oscillation(F, k);
    std::vector<double> out(F.values().size(), 0.0);
    for (std::size_t i = 0; i < out.size(); ++i) {
        double m = 0.0;
        for (std::size_t k : tree.chain[i]) m = std::max(m, osc[k]);
        out[i] = m;
    }
    return StepFunction(F.window_ptr(), std::move(out));
}

// ---------------------------------------------------------------- restricted family

namespace {

void require_admissible(const std::vector<TranslatedCZSet>& family, int n) {
    for (const auto& R : family) {
        if (R.n != n) throw DimensionError("restricted_maximal: family dimension mismatch");
        if (!is_admissible(R)) throw PreconditionError("restricted_maximal: family member is not admissible");
    }
}

double restricted_value(const StepFunction& absf, const std::vector<TranslatedCZSet>& family,
                        const std::vector<double>& averages, const GroupPoint& p) {
    double m = absf(p);
    for (std::size_t r = 0; r < family.size(); ++r) {
        if (contains(family[r], p)) m = std::max(m, averages[r]);
    }
    return m;
}

std::vector<double> family_averages(const StepFunction& absf, const std::vector<TranslatedCZSet>& family) {
    std::vector<double> out;
    out.reserve(family.size());
    for (const auto& R : family) out.push_back(average(absf, R));
    return out;
}

}  // namespace

StepFunction restricted_maximal(const StepFunction& f, const std::vector<TranslatedCZSet>& family,
                                std::shared_ptr<const Window> on) {
    require_admissible(family, f.dim());
    const StepFunction absf = abs(f);
    const auto averages = family_averages(absf, family);
    std::vector<double> out(on->size());
    for (std::size_t i = 0; i < on->size(); ++i) {
        out[i] = restricted_value(absf, family, averages, center(on->cells()[i].set));
    }
    return StepFunction(std::move(on), std::move(out));
}

StepFunction restricted_maximal(const StepFunction& f, const std::vector<TranslatedCZSet>& family) {
    return restricted_maximal(f, family, f.window_ptr());
}

double restricted_maximal_at(const StepFunction& f, const std::vector<TranslatedCZSet>& family, const GroupPoint& p) {
    require_admissible(family, f.dim());
    const StepFunction absf = abs(f);
    return restricted_value(absf, family, family_averages(absf, family), p);
}

// ---------------------------------------------------------------- covering and decomposition

namespace {

void require_alpha(double alpha, const char* what) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) {
        throw PreconditionError(std::string(what) + ": alpha must be positive, got " + format_double(alpha));
    }
}

}  // namespace

std::vector<CoveringSet> covering(const StepFunction& f, double alpha) {
    require_alpha(alpha, "covering");
    const StepFunction F = f.on(top_window(f.window()));
    const Window& w = F.window();
    const AncestorTree tree(F);
    std::vector<CoveringSet> out;
    std::unordered_map<DyadicSetId, std::size_t, DyadicSetIdHash> seen;

    for (std::size_t i = 0; i < w.size(); ++i) {
        const auto& ch = tree.chain[i];
        // Highest set on the chain with average above alpha.
        std::ptrdiff_t pick = -2;  // -1 is the cell itself
        for (std::ptrdiff_t k = static_cast<std::ptrdiff_t>(ch.size()) - 1; k >= 0; --k) {
            if (tree.avg_abs(ch[static_cast<std::size_t>(k)]) > alpha) {
                pick = k;
                break;
            }
        }
        if (pick == -2 && std::abs(F.value(i)) > alpha) pick = -1;
        if (pick == -2) continue;

        CoveringSet cs;
        if (pick == -1) {
            cs.node = w.cells()[i];
            cs.average = std::abs(F.value(i));
        } else {
            const std::size_t k = ch[static_cast<std::size_t>(pick)];
            cs.node = tree.nodes[k];
            cs.average = tree.avg_abs(k);
        }
        if (seen.count(cs.node.id)) continue;
        const std::size_t up = static_cast<std::size_t>(pick + 1);
        if (up >= ch.size()) {
            throw HorizonError("covering: average above alpha persists to level " + std::to_string(w.grid().j_hi()) +
                               "; extend grid or raise alpha");
        }
        const std::size_t pk = ch[up];
        cs.parent_average = tree.avg_abs(pk);
        cs.parent_ratio = measure_ratio(tree.nodes[pk].set, cs.node.set);
        seen.emplace(cs.node.id, out.size());
        out.push_back(std::move(cs));
    }
    return out;
}

CZDecomposition cz_decompose(const StepFunction& f, double alpha) {
    require_alpha(alpha, "cz_decompose");
    auto cover = covering(f, alpha);
    int top = f.window().root_level();
    for (const auto& c : cover) top = std::max(top, c.node.level());
    const auto w = top > f.window().root_level() ? f.window().extended(top) : f.window_ptr();
    const StepFunction F = f.on(w);

    std::vector<BadPart> bad;
    std::vector<double> good = F.values();
    for (auto& c : cover) {
        std::vector<char> inside(w->size(), 0);
        double s = 0.0;
        for (std::size_t i = 0; i < w->size(); ++i) {
            if (contains(c.node.set, w->cells()[i].set)) {
                inside[i] = 1;
                s += F.value(i) * w->cell_measure(i);
            }
        }
        const double mean = s / measure(c.node.set);
        std::vector<double> b(w->size(), 0.0);
        for (std::size_t i = 0; i < w->size(); ++i) {
            if (!inside[i]) continue;
            b[i] = F.value(i) - mean;
            good[i] = mean;
        }
        bad.push_back(BadPart{std::move(c), mean, StepFunction(w, std::move(b))});
    }
    return CZDecomposition{alpha, StepFunction(w, std::move(good)), std::move(bad)};
}

bool DecompositionCheck::pass_with(double c) const {
    const double slack = 1.0 + 1e-12;
    if (reconstruction_error > 1e-12 || max_bad_mean > 1e-12) return false;
    if (!disjoint || !parents_at_most_alpha) return false;
    if (good_sup_over_alpha > c * slack) return false;
    if (covered_measure > l1_over_alpha * slack) return false;
    if (bad_parts > 0 && (!(min_avg_over_alpha > 1.0) || max_avg_over_alpha > c * slack)) return false;
    return true;
}

bool DecompositionCheck::pass() const { return pass_with(std::ldexp(1.0, n)); }

DecompositionCheck check_decomposition(const StepFunction& f, const CZDecomposition& d) {
    DecompositionCheck r;
    r.n = f.dim();
    r.alpha = d.alpha;
    r.bad_parts = d.bad.size();
    const auto w = d.good.window_ptr();
    const StepFunction F = f.on(w);
    const StepFunction absF = abs(F);
    const DyadicGrid& g = w->grid();

    std::vector<double> residual = F.values();
    for (std::size_t i = 0; i < residual.size(); ++i) residual[i] -= d.good.value(i);
    r.min_avg_over_alpha = INFINITY;
    r.max_avg_over_alpha = 0.0;
    for (const auto& b : d.bad) {
        if (b.b.window_ptr().get() != w.get()) throw PreconditionError("check_decomposition: mixed windows");
        for (std::size_t i = 0; i < residual.size(); ++i) residual[i] -= b.b.value(i);
        const double l1 = lp_norm(b.b, 1.0);
        if (l1 > 0.0) r.max_bad_mean = std::max(r.max_bad_mean, std::abs(integral(b.b)) / l1);
        const double avg = average(absF, b.set.node.id) / d.alpha;
        r.min_avg_over_alpha = std::min(r.min_avg_over_alpha, avg);
        r.max_avg_over_alpha = std::max(r.max_avg_over_alpha, avg);
        r.covered_measure += measure(b.set.node.set);
        if (b.set.node.level() < g.j_hi()) {
            const GridNode p = g.parent(b.set.node);
            if (average(absF, p.id) > d.alpha) r.parents_at_most_alpha = false;
        }
    }
    if (d.bad.empty()) r.min_avg_over_alpha = 0.0;
    for (std::size_t a = 0; a < d.bad.size(); ++a) {
        for (std::size_t b = a + 1; b < d.bad.size(); ++b) {
            if (intersects(d.bad[a].set.node.set, d.bad[b].set.node.set)) r.disjoint = false;
        }
    }
    const double scale = std::max(1.0, lp_norm(F, INFINITY));
    for (double x : residual) r.reconstruction_error = std::max(r.reconstruction_error, std::abs(x) / scale);
    r.good_sup_over_alpha = lp_norm(d.good, INFINITY) / d.alpha;
    r.l1_over_alpha = lp_norm(F, 1.0) / d.alpha;
    return r;
}

// ---------------------------------------------------------------- checkers

double MaximalReport::summary_value(const std::string& key, double param) const {
    for (const auto& s : summary) {
        if (s.key == key && s.param == param) return s.value;
    }
    throw std::out_of_range("no summary record " + key + " at " + format_double(param));
}

std::uint64_t trial_seed(std::uint64_t seed, std::int64_t trial) {
    // splitmix64 of the pair
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(trial) + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

StepFunction TrialGenerator::make(std::uint64_t seed, std::int64_t trial) const {
    std::mt19937_64 rng(trial_seed(seed, trial));
    auto w = random_window(grid, window, rng);
    return random_step_function(std::move(w), function, rng());
}

namespace {

void require_trials(std::int64_t trials) {
    if (trials < 1) throw PreconditionError("trials must be >= 1");
}

MaximalRecord record(const char* experiment, std::uint64_t seed, std::int64_t trial, const char* key, double param,
                     double value) {
    return MaximalRecord{experiment, seed, trial, key, param, value};
}

}  // namespace

MaximalReport check_weak11(const TrialGenerator& gen, std::uint64_t seed, std::int64_t trials,
                           const std::vector<double>& alpha_grid) {
    require_trials(trials);
    MaximalReport rep;
    std::vector<double> sup(alpha_grid.size(), 0.0);
    std::int64_t skipped = 0;
    for (std::int64_t t = 0; t < trials; ++t) {
        const StepFunction f = gen.make(seed, t);
        const double l1 = lp_norm(f, 1.0);
        const double linf = lp_norm(f, INFINITY);
        if (!(l1 > 0.0)) {
            ++skipped;
            continue;
        }
        const StepFunction mf = dyadic_maximal(f);
        for (std::size_t a = 0; a < alpha_grid.size(); ++a) {
            const double alpha = alpha_grid[a] * linf;
            const double v = alpha * distribution(mf, alpha) / l1;
            rep.records.push_back(record("weak11", seed, t, "ratio", alpha_grid[a], v));
            sup[a] = std::max(sup[a], v);
        }
    }
    double all = 0.0;
    for (std::size_t a = 0; a < alpha_grid.size(); ++a) {
        rep.summary.push_back(record("weak11", seed, trials, "sup", alpha_grid[a], sup[a]));
        all = std::max(all, sup[a]);
    }
    rep.summary.push_back(record("weak11", seed, trials, "sup_all", 0.0, all));
    rep.summary.push_back(record("weak11", seed, trials, "skipped", 0.0, static_cast<double>(skipped)));
    return rep;
}

MaximalReport check_fefferman_stein(const TrialGenerator& gen, std::uint64_t seed, std::int64_t trials,
                                    const std::vector<double>& p_list) {
    require_trials(trials);
    MaximalReport rep;
    std::vector<double> best(p_list.size(), 0.0);
    std::int64_t skipped = 0;
    for (std::int64_t t = 0; t < trials; ++t) {
        const StepFunction f = gen.make(seed, t);
        const StepFunction mf = dyadic_maximal(f);
        const StepFunction sh = dyadic_sharp(f);
        if (!(lp_norm(sh, INFINITY) > 0.0)) {
            ++skipped;
            continue;
        }
        for (std::size_t k = 0; k < p_list.size(); ++k) {
            const double v = lp_norm(mf, p_list[k]) / lp_norm(sh, p_list[k]);
            rep.records.push_back(record("fefferman_stein", seed, t, "ratio", p_list[k], v));
            best[k] = std::max(best[k], v);
        }
    }
    for (std::size_t k = 0; k < p_list.size(); ++k) {
        rep.summary.push_back(record("fefferman_stein", seed, trials, "A_p", p_list[k], best[k]));
    }
    rep.summary.push_back(record("fefferman_stein", seed, trials, "skipped", 0.0, static_cast<double>(skipped)));
    return rep;
}

DistributionalValue check_distributional(const StepFunction& mf, const StepFunction& sharp, double alpha, double b,
                                         double c) {
    require_alpha(alpha, "check_distributional");
    if (!(b > 0.0 && b < 1.0)) throw PreconditionError("check_distributional: b must lie in (0,1)");
    if (!(c > 0.0)) throw PreconditionError("check_distributional: c must be positive");
    const auto same_cells = [](const Window& a, const Window& b) {
        if (&a == &b) return true;
        if (a.size() != b.size() || !(a.root().id == b.root().id)) return false;
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (!(a.cells()[i].id == b.cells()[i].id)) return false;
        }
        return true;
    };
    if (!same_cells(mf.window(), sharp.window())) {
        throw PreconditionError("check_distributional: functions on different windows");
    }
    DistributionalValue out;
    const Window& w = mf.window();
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double m = mf.value(i);
        if (m > alpha && sharp.value(i) <= c * alpha) out.lhs += w.cell_measure(i);
        if (m > b * alpha) out.rhs_factor += w.cell_measure(i);
    }
    return out;
}

DistributionalValue check_distributional(const StepFunction& f, double alpha, double b, double c) {
    return check_distributional(dyadic_maximal(f), dyadic_sharp(f), alpha, b, c);
}

MaximalReport fit_distributional(const TrialGenerator& gen, std::uint64_t seed, std::int64_t trials,
                                 const std::vector<double>& alpha_grid, const std::vector<double>& b_list,
                                 const std::vector<double>& c_list) {
    require_trials(trials);
    MaximalReport rep;
    double k_all = 0.0;
    for (std::int64_t t = 0; t < trials; ++t) {
        const StepFunction f = gen.make(seed, t);
        const double linf = lp_norm(f, INFINITY);
        if (!(linf > 0.0)) continue;
        const StepFunction mf = dyadic_maximal(f);
        const StepFunction sh = dyadic_sharp(f);
        double k_trial = 0.0;
        for (double a : alpha_grid) {
            for (double b : b_list) {
                for (double c : c_list) {
                    const auto v = check_distributional(mf, sh, a * linf, b, c);
                    if (v.rhs_factor > 0.0) k_trial = std::max(k_trial, v.lhs * (1.0 - b) / (c * v.rhs_factor));
                }
            }
        }
        rep.records.push_back(record("distributional", seed, t, "K", 0.0, k_trial));
        k_all = std::max(k_all, k_trial);
    }
    rep.summary.push_back(record("distributional", seed, trials, "K", 0.0, k_all));
    return rep;
}

}  // namespace czgrid
