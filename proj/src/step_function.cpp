#include "czgrid/step_function.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <unordered_set>

#include "json_util.hpp"

namespace czgrid {

// ---------------------------------------------------------------- Window

void Window::finish() {
    measures_.clear();
    index_.clear();
    measures_.reserve(cells_.size());
    for (std::size_t i = 0; i < cells_.size(); ++i) {
        measures_.push_back(measure(cells_[i].set));
        if (!index_.emplace(cells_[i].id, i).second) {
            throw PreconditionError("window: duplicate cell " + to_string(cells_[i].id));
        }
    }
}

std::shared_ptr<const Window> Window::base(std::shared_ptr<const DyadicGrid> grid, const DyadicSetId& root,
                                           int base_level, std::size_t max_cells) {
    if (!grid) throw PreconditionError("window: null grid");
    std::shared_ptr<Window> w(new Window());
    w->grid_ = grid;
    w->root_ = grid->node(root);
    if (base_level > w->root_.level()) throw PreconditionError("window: base level above root level");
    std::vector<GridNode> cur{w->root_};
    while (cur.front().level() > base_level) {
        std::vector<GridNode> next;
        for (const auto& c : cur) {
            for (auto& ch : grid->children(c)) next.push_back(std::move(ch));
        }
        if (next.size() > max_cells) {
            throw PreconditionError("window: more than " + std::to_string(max_cells) + " base cells");
        }
        cur = std::move(next);
    }
    w->cells_ = std::move(cur);
    w->finish();
    return w;
}

std::shared_ptr<const Window> Window::from_cells(std::shared_ptr<const DyadicGrid> grid, const DyadicSetId& root,
                                                 const std::vector<DyadicSetId>& cells) {
    if (!grid) throw PreconditionError("window: null grid");
    if (cells.empty()) throw PreconditionError("window: no cells");
    std::shared_ptr<Window> w(new Window());
    w->grid_ = grid;
    w->root_ = grid->node(root);
    std::unordered_set<DyadicSetId, DyadicSetIdHash> ids(cells.begin(), cells.end());
    if (ids.size() != cells.size()) throw PreconditionError("window: duplicate cells");
    double total = 0.0;
    for (const auto& id : cells) {
        GridNode c = grid->node(id);
        if (c.level() > w->root_.level()) throw PreconditionError("window: cell above root " + to_string(id));
        // Walk to the root level; no proper ancestor may itself be a cell.
        GridNode a = c;
        while (a.level() < w->root_.level()) {
            a = grid->parent(a);
            if (a.level() < w->root_.level() && ids.count(a.id)) {
                throw PreconditionError("window: nested cells " + to_string(id) + " in " + to_string(a.id));
            }
        }
        if (!(a.id == w->root_.id)) throw PreconditionError("window: cell outside root " + to_string(id));
        total += measure(c.set);
        w->cells_.push_back(std::move(c));
    }
    const double rm = measure(w->root_.set);
    if (std::abs(total - rm) > 1e-12 * rm) {
        throw PreconditionError("window: cells cover " + format_double(total) + " of root measure " +
                                format_double(rm));
    }
    w->finish();
    return w;
}

std::shared_ptr<const Window> Window::refined(std::shared_ptr<const DyadicGrid> grid, const DyadicSetId& root,
                                              const std::vector<DyadicSetId>& targets) {
    if (!grid) throw PreconditionError("window: null grid");
    const GridNode r = grid->node(root);
    std::unordered_set<DyadicSetId, DyadicSetIdHash> want(targets.begin(), targets.end());
    std::unordered_set<DyadicSetId, DyadicSetIdHash> above;
    for (const auto& id : targets) {
        GridNode cur = grid->node(id);
        while (cur.level() < r.level()) {
            cur = grid->parent(cur);
            if (want.count(cur.id)) throw PreconditionError("window: nested targets in " + to_string(cur.id));
            above.insert(cur.id);
        }
        if (!(cur.id == r.id)) throw PreconditionError("window: target outside root " + to_string(id));
    }
    std::vector<DyadicSetId> cells;
    std::vector<GridNode> stack{r};
    while (!stack.empty()) {
        GridNode cur = std::move(stack.back());
        stack.pop_back();
        if (!want.count(cur.id) && above.count(cur.id)) {
            auto ch = grid->children(cur);
            for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.push_back(std::move(*it));
        } else {
            cells.push_back(cur.id);
        }
    }
    return from_cells(std::move(grid), root, cells);
}

std::shared_ptr<const Window> Window::extended(int level) const {
    std::shared_ptr<Window> w(new Window(*this));
    GridNode cur = root_;
    while (cur.level() < level) {
        GridNode p = grid_->parent(cur);
        for (auto& ch : grid_->children(p)) {
            if (!(ch.id == cur.id)) w->cells_.push_back(std::move(ch));
        }
        cur = std::move(p);
    }
    w->root_ = cur;
    w->finish();
    return w;
}

std::optional<std::size_t> Window::find(const DyadicSetId& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::optional<std::size_t> Window::cell_at(const GroupPoint& p) const {
    if (!contains(root_.set, p)) return std::nullopt;
    for (std::size_t i = 0; i < cells_.size(); ++i) {
        if (contains(cells_[i].set, p)) return i;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------- StepFunction

StepFunction::StepFunction(std::shared_ptr<const Window> window) : window_(std::move(window)) {
    if (!window_) throw PreconditionError("step function: null window");
    values_.assign(window_->size(), 0.0);
}

StepFunction::StepFunction(std::shared_ptr<const Window> window, std::vector<double> values)
    : window_(std::move(window)), values_(std::move(values)) {
    if (!window_) throw PreconditionError("step function: null window");
    if (values_.size() != window_->size()) {
        throw PreconditionError("step function: " + std::to_string(values_.size()) + " values for " +
                                std::to_string(window_->size()) + " cells");
    }
    for (double v : values_) {
        if (!std::isfinite(v)) throw PreconditionError("step function: non-finite value");
    }
}

double StepFunction::operator()(const GroupPoint& p) const {
    auto c = window_->cell_at(p);
    return c ? values_[*c] : 0.0;
}

StepFunction StepFunction::on(std::shared_ptr<const Window> bigger) const {
    if (bigger.get() == window_.get()) return *this;
    std::vector<double> v(bigger->size(), 0.0);
    for (std::size_t i = 0; i < window_->size(); ++i) {
        auto j = bigger->find(window_->cells()[i].id);
        if (!j) throw PreconditionError("step function: target window lacks cell " + to_string(window_->cells()[i].id));
        v[*j] = values_[i];
    }
    return StepFunction(std::move(bigger), std::move(v));
}

namespace {

void require_same_window(const StepFunction& f, const StepFunction& g) {
    if (f.window_ptr().get() != g.window_ptr().get()) throw PreconditionError("step functions on different windows");
}

}  // namespace

StepFunction abs(const StepFunction& f) {
    std::vector<double> v = f.values();
    for (double& x : v) x = std::abs(x);
    return StepFunction(f.window_ptr(), std::move(v));
}

StepFunction operator+(const StepFunction& f, const StepFunction& g) {
    require_same_window(f, g);
    std::vector<double> v = f.values();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += g.value(i);
    return StepFunction(f.window_ptr(), std::move(v));
}

StepFunction operator-(const StepFunction& f, const StepFunction& g) {
    require_same_window(f, g);
    std::vector<double> v = f.values();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= g.value(i);
    return StepFunction(f.window_ptr(), std::move(v));
}

StepFunction operator*(double c, const StepFunction& f) {
    std::vector<double> v = f.values();
    for (double& x : v) x *= c;
    return StepFunction(f.window_ptr(), std::move(v));
}

double integral(const StepFunction& f) {
    double s = 0.0;
    for (std::size_t i = 0; i < f.values().size(); ++i) s += f.value(i) * f.window().cell_measure(i);
    return s;
}

double integral(const StepFunction& f, const DyadicSetId& id) {
    const Window& w = f.window();
    const CZSet R = w.grid().resolve(id);
    if (contains(R, w.root().set)) return integral(f);
    if (!intersects(R, w.root().set)) return 0.0;
    // Grid sets nest: each cell is inside R, contains R, or misses it.
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const CZSet& c = w.cells()[i].set;
        if (contains(R, c)) {
            s += f.value(i) * w.cell_measure(i);
        } else if (contains(c, R)) {
            return f.value(i) * measure(R);
        }
    }
    return s;
}

double integral(const StepFunction& f, const CZSet& R) {
    const Window& w = f.window();
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (f.value(i) != 0.0) s += f.value(i) * intersection_measure(w.cells()[i].set, R);
    }
    return s;
}

double integral(const StepFunction& f, const TranslatedCZSet& R) {
    const Window& w = f.window();
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (f.value(i) != 0.0) s += f.value(i) * intersection_measure(R, w.cells()[i].set);
    }
    return s;
}

double average(const StepFunction& f, const DyadicSetId& id) {
    return integral(f, id) / measure(f.window().grid().resolve(id));
}

double average(const StepFunction& f, const CZSet& R) { return integral(f, R) / measure(R); }

double average(const StepFunction& f, const TranslatedCZSet& R) { return integral(f, R) / measure(R); }

double lp_norm(const StepFunction& f, double p) {
    if (!(p > 0.0)) throw PreconditionError("lp_norm: p must be positive");
    if (std::isinf(p)) {
        double m = 0.0;
        for (double v : f.values()) m = std::max(m, std::abs(v));
        return m;
    }
    double s = 0.0;
    for (std::size_t i = 0; i < f.values().size(); ++i) {
        const double a = std::abs(f.value(i));
        if (a > 0.0) s += std::pow(a, p) * f.window().cell_measure(i);
    }
    return std::pow(s, 1.0 / p);
}

double distribution(const StepFunction& f, double alpha) {
    if (!(alpha >= 0.0)) throw PreconditionError("distribution: alpha must be >= 0");
    double s = 0.0;
    for (std::size_t i = 0; i < f.values().size(); ++i) {
        if (std::abs(f.value(i)) > alpha) s += f.window().cell_measure(i);
    }
    return s;
}

// ---------------------------------------------------------------- JSON

std::string to_json(const StepFunction& f) {
    using detail::json;
    const Window& w = f.window();
    const GridConfig& gc = w.grid().config();
    json cells = json::array();
    for (std::size_t i = 0; i < w.size(); ++i) {
        cells.push_back(json{{"id", detail::id_to_json(w.cells()[i].id)},
                             {"set", to_text(w.cells()[i].set)},
                             {"value", f.value(i)}});
    }
    json doc{{"format", "czgrid.step_function"},
             {"version", 1},
             {"grid", {{"n", gc.n}, {"j_lo", gc.j_lo}, {"j_hi", gc.j_hi}, {"t_reach", gc.t_reach}}},
             {"root", detail::id_to_json(w.root().id)},
             {"cells", cells}};
    return doc.dump();
}

StepFunction step_function_from_json(const std::string& text) {
    using detail::json;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("step function json: ") + e.what());
    }
    try {
        if (doc.at("format").get<std::string>() != "czgrid.step_function" || doc.at("version").get<int>() != 1) {
            throw std::invalid_argument("step function json: unknown format or version");
        }
        const auto& gj = doc.at("grid");
        GridConfig gc;
        gc.n = gj.at("n").get<int>();
        gc.j_lo = gj.at("j_lo").get<int>();
        gc.j_hi = gj.at("j_hi").get<int>();
        gc.t_reach = gj.at("t_reach").get<double>();
        auto grid = std::make_shared<const DyadicGrid>(DyadicGrid::build(gc));
        const DyadicSetId root = detail::id_from_json(doc.at("root"), gc.n);
        std::vector<DyadicSetId> ids;
        std::vector<double> values;
        for (const auto& c : doc.at("cells")) {
            ids.push_back(detail::id_from_json(c.at("id"), gc.n));
            values.push_back(c.at("value").get<double>());
        }
        auto w = Window::from_cells(grid, root, ids);
        return StepFunction(std::move(w), std::move(values));
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("step function json: ") + e.what());
    }
}

// ---------------------------------------------------------------- random inputs

StepFunction random_step_function(std::shared_ptr<const Window> window, const RandomFunctionSpec& spec,
                                  std::uint64_t seed) {
    if (!(spec.density >= 0.0 && spec.density <= 1.0)) throw PreconditionError("random function: density in [0,1]");
    if (!(spec.lo <= spec.hi)) throw PreconditionError("random function: lo > hi");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> value(spec.lo, spec.hi);
    std::bernoulli_distribution mask(spec.density);
    std::vector<double> v(window->size());
    for (double& x : v) {
        const double a = value(rng);
        x = mask(rng) ? a : 0.0;
    }
    return StepFunction(std::move(window), std::move(v));
}

std::shared_ptr<const Window> random_window(std::shared_ptr<const DyadicGrid> grid, const RandomWindowSpec& spec,
                                            std::mt19937_64& rng) {
    const int lo = std::max(spec.root_lo, grid->j_lo() + 1);
    const int hi = std::min(spec.root_hi, grid->j_hi());
    if (lo > hi) throw PreconditionError("random window: empty root level range");
    std::uniform_int_distribution<int> level(lo, hi);
    std::uniform_real_distribution<double> xs(-spec.x_range, spec.x_range);
    std::uniform_real_distribution<double> ts(spec.t_lo, spec.t_hi);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const int jr = level(rng);
    GroupPoint p(grid->dim(), 0.0);
    for (int i = 0; i < grid->dim(); ++i) p.set_x(i, xs(rng));
    p.set_t(ts(rng));
    const GridNode root = grid->locate(p, jr);

    // Breadth-first refinement under a cell budget.
    struct Item {
        GridNode node;
        int depth;
    };
    std::deque<Item> queue{Item{root, 0}};
    std::vector<DyadicSetId> leaves;
    std::size_t count = 1;
    while (!queue.empty()) {
        Item it = std::move(queue.front());
        queue.pop_front();
        const bool can = it.depth < spec.max_depth && it.node.level() > grid->j_lo();
        bool split_it = false;
        std::vector<GridNode> ch;
        if (can && (it.depth == 0 || unit(rng) < spec.split_prob)) {
            ch = grid->children(it.node);
            split_it = count - 1 + ch.size() <= spec.max_cells;
        }
        if (split_it) {
            count += ch.size() - 1;
            for (auto& c : ch) queue.push_back(Item{std::move(c), it.depth + 1});
        } else {
            leaves.push_back(it.node.id);
        }
    }
    return Window::from_cells(std::move(grid), root.id, leaves);
}

}  // namespace czgrid
