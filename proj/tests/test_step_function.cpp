#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "czgrid/step_function.hpp"
#include "support.hpp"

using namespace czgrid;

namespace {

std::shared_ptr<const DyadicGrid> grid(int n) {
    static const auto g1 = std::make_shared<const DyadicGrid>(DyadicGrid::build(1, -8, 12));
    static const auto g2 = std::make_shared<const DyadicGrid>(DyadicGrid::build(2, -8, 12));
    return n == 1 ? g1 : g2;
}

GridNode r0(int n) { return grid(n)->locate(GroupPoint(n, 0.5), 0); }

StepFunction ones(std::shared_ptr<const Window> w) { return StepFunction(w, std::vector<double>(w->size(), 1.0)); }

}  // namespace

TEST(Window, BaseCellsPartitionRoot) {
    for (int n : {1, 2}) {
        const auto w = Window::base(grid(n), r0(n).id, -2);
        double sum = 0.0;
        for (std::size_t i = 0; i < w->size(); ++i) {
            EXPECT_EQ(w->cells()[i].level(), -2);
            sum += w->cell_measure(i);
        }
        EXPECT_NEAR(sum, measure(r0(n).set), 1e-12 * sum);
        EXPECT_EQ(w->cell_at(center(w->cells()[3].set)), std::optional<std::size_t>(3));
        EXPECT_FALSE(w->cell_at(GroupPoint(n, 5.0)).has_value());
        EXPECT_EQ(w->find(w->cells()[1].id), std::optional<std::size_t>(1));
    }
}

TEST(Window, FromCellsValidates) {
    const auto g = grid(1);
    const GridNode root = r0(1);
    const auto kids = g->children(root);
    EXPECT_NO_THROW(Window::from_cells(g, root.id, {kids[0].id, kids[1].id}));
    EXPECT_THROW(Window::from_cells(g, root.id, {kids[0].id}), PreconditionError);
    const auto grandkids = g->children(kids[0]);
    EXPECT_THROW(Window::from_cells(g, root.id, {kids[0].id, kids[1].id, grandkids[0].id}), PreconditionError);
    EXPECT_NO_THROW(Window::from_cells(g, root.id, {grandkids[0].id, grandkids[1].id, kids[1].id}));
}

TEST(Window, RefinedAndExtended) {
    const auto g = grid(2);
    const GridNode root = r0(2);
    const GridNode target = g->locate(GroupPoint({3.0, 5.0}, 0.3), -3);
    const auto w = Window::refined(g, root.id, {target.id});
    EXPECT_TRUE(w->find(target.id).has_value());
    const auto up = w->extended(3);
    EXPECT_EQ(up->root_level(), 3);
    EXPECT_TRUE(up->find(target.id).has_value());
    double sum = 0.0;
    for (std::size_t i = 0; i < up->size(); ++i) sum += up->cell_measure(i);
    EXPECT_NEAR(sum, measure(up->root().set), 1e-12 * sum);
    for (std::size_t i = 0; i < w->size(); ++i) EXPECT_EQ(up->cells()[i].id, w->cells()[i].id);
}

TEST(Integral, HandValues) {
    const auto w = Window::base(grid(1), r0(1).id, -2);
    const StepFunction one = ones(w);
    const double rho = measure(r0(1).set);
    EXPECT_DOUBLE_EQ(integral(one, r0(1).id), rho);
    GridNode anc = r0(1);
    for (int j = 1; j <= 5; ++j) {
        anc = grid(1)->parent(anc);
        EXPECT_DOUBLE_EQ(integral(one, anc.id), rho);
        EXPECT_DOUBLE_EQ(integral(one, anc.set), rho);
    }
    std::vector<double> v(w->size(), 0.0);
    v[2] = 1.0;
    const StepFunction chi(w, v);
    const GridNode par = grid(1)->parent(w->cells()[2]);
    EXPECT_DOUBLE_EQ(integral(chi, par.id), w->cell_measure(2));
    EXPECT_DOUBLE_EQ(integral(chi), w->cell_measure(2));
}

TEST(Average, HandValues) {
    const auto w = Window::base(grid(1), r0(1).id, -1);
    EXPECT_DOUBLE_EQ(average(3.5 * ones(w), r0(1).id), 3.5);
    EXPECT_DOUBLE_EQ(average(3.5 * ones(w), w->cells()[0].id), 3.5);
    // the level-0 seed's parent doubles the cube
    const GridNode p = grid(1)->parent(r0(1));
    ASSERT_EQ(measure_ratio(p.set, r0(1).set), 2.0);
    EXPECT_DOUBLE_EQ(average(ones(w), p.id), 0.5);
    EXPECT_DOUBLE_EQ(average(ones(w), p.set), 0.5);
}

TEST(Norms, IndicatorsAndDistribution) {
    const auto w = Window::base(grid(2), r0(2).id, -2);
    std::vector<double> v(w->size(), 0.0);
    double m = 0.0;
    for (std::size_t i = 0; i < w->size(); i += 3) {
        v[i] = 1.0;
        m += w->cell_measure(i);
    }
    const StepFunction chi(w, v);
    for (double p : {0.5, 1.0, 1.5, 2.0, 3.0}) EXPECT_NEAR(lp_norm(chi, p), std::pow(m, 1.0 / p), 1e-12 * std::pow(m, 1.0 / p));
    EXPECT_EQ(lp_norm(chi, INFINITY), 1.0);
    EXPECT_DOUBLE_EQ(distribution(chi, 0.0), m);
    EXPECT_EQ(distribution(chi, 1.0), 0.0);
    EXPECT_EQ(distribution(chi, 7.0), 0.0);
}

TEST(Norms, Chebyshev) {
    std::mt19937_64 rng(1);
    for (int i = 0; i < 200; ++i) {
        const auto w = random_window(grid(1 + i % 2), RandomWindowSpec{}, rng);
        const StepFunction f = random_step_function(w, RandomFunctionSpec{}, i);
        for (double a : {0.01, 0.1, 0.5, 0.9}) EXPECT_LE(a * distribution(f, a), lp_norm(f, 1.0) * (1 + 1e-12));
    }
}

TEST(Integral, AdditiveOverChildrenAndRoutesAgree) {
    std::mt19937_64 rng(2);
    for (int i = 0; i < 200; ++i) {
        const int n = 1 + i % 2;
        const auto w = random_window(grid(n), RandomWindowSpec{}, rng);
        const StepFunction f = random_step_function(w, RandomFunctionSpec{}, 100 + i);
        // every set between root and cells, plus a few ancestors
        std::vector<GridNode> stack{w->root()};
        GridNode anc = w->root();
        for (int up = 0; up < 3 && anc.level() < grid(n)->j_hi(); ++up) {
            anc = grid(n)->parent(anc);
            EXPECT_NEAR(integral(f, anc.id), integral(f), 1e-12 * std::max(1.0, lp_norm(f, 1.0)));
        }
        while (!stack.empty()) {
            const GridNode node = stack.back();
            stack.pop_back();
            const double whole = integral(f, node.id);
            EXPECT_NEAR(whole, integral(f, node.set), 1e-12 * std::max(1.0, std::abs(lp_norm(f, 1.0))));
            if (w->find(node.id)) continue;
            double parts = 0.0;
            for (const auto& c : grid(n)->children(node)) {
                parts += integral(f, c.id);
                stack.push_back(c);
            }
            EXPECT_NEAR(parts, whole, 1e-12 * std::max(1.0, std::abs(lp_norm(f, 1.0))));
        }
    }
}

TEST(Arithmetic, PointwiseOperations) {
    const auto w = Window::base(grid(1), r0(1).id, -1);
    std::vector<double> a(w->size()), b(w->size());
    for (std::size_t i = 0; i < w->size(); ++i) a[i] = i - 1.5, b[i] = 2.0 * i;
    const StepFunction f(w, a), g(w, b);
    const StepFunction s = f + g, d = f - g, m = -2.0 * f, ab = abs(f);
    for (std::size_t i = 0; i < w->size(); ++i) {
        EXPECT_EQ(s.value(i), a[i] + b[i]);
        EXPECT_EQ(d.value(i), a[i] - b[i]);
        EXPECT_EQ(m.value(i), -2.0 * a[i]);
        EXPECT_EQ(ab.value(i), std::abs(a[i]));
    }
    const auto other = Window::base(grid(1), r0(1).id, -2);
    EXPECT_ANY_THROW(f + StepFunction(other));
}

TEST(Arithmetic, ZeroExtension) {
    const auto w = Window::base(grid(1), r0(1).id, -1);
    const StepFunction f = random_step_function(w, RandomFunctionSpec{1.0, -1.0, 1.0}, 4);
    const auto up = w->extended(2);
    const StepFunction F = f.on(up);
    for (std::size_t i = 0; i < w->size(); ++i) EXPECT_EQ(F.value(i), f.value(i));
    for (std::size_t i = w->size(); i < up->size(); ++i) EXPECT_EQ(F.value(i), 0.0);
    EXPECT_DOUBLE_EQ(integral(F), integral(f));
    EXPECT_EQ(F(GroupPoint({100.0}, 0.5)), 0.0);
}

TEST(Json, RoundTripIsExact) {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 50; ++i) {
        const int n = 1 + i % 2;
        const auto w = random_window(grid(n), RandomWindowSpec{}, rng);
        const StepFunction f = random_step_function(w, RandomFunctionSpec{}, i);
        const std::string text = to_json(f);
        const StepFunction g = step_function_from_json(text);
        ASSERT_EQ(g.window().size(), w->size());
        EXPECT_EQ(g.window().root().id, w->root().id);
        for (std::size_t c = 0; c < w->size(); ++c) {
            EXPECT_EQ(g.window().cells()[c].id, w->cells()[c].id);
            EXPECT_EQ(g.value(c), f.value(c));
        }
        EXPECT_EQ(to_json(g), text);
    }
}

TEST(Json, RejectsMalformedInput) {
    EXPECT_ANY_THROW(step_function_from_json("{}"));
    EXPECT_ANY_THROW(step_function_from_json("not json"));
    const auto w = Window::base(grid(1), r0(1).id, -1);
    std::string text = to_json(ones(w));
    text.replace(text.find("czgrid.step_function"), 6, "other.");
    EXPECT_ANY_THROW(step_function_from_json(text));
}

TEST(RandomInputs, DeterministicWithPrescribedShape) {
    std::mt19937_64 a(9), b(9);
    const auto wa = random_window(grid(2), RandomWindowSpec{}, a);
    const auto wb = random_window(grid(2), RandomWindowSpec{}, b);
    ASSERT_EQ(wa->size(), wb->size());
    EXPECT_LE(wa->size(), 64u);
    EXPECT_EQ(to_json(random_step_function(wa, {}, 5)), to_json(random_step_function(wb, {}, 5)));

    // sparsity and range over many cells
    std::mt19937_64 rng(10);
    std::size_t cells = 0, nonzero = 0;
    for (int i = 0; i < 300; ++i) {
        const auto w = random_window(grid(1), RandomWindowSpec{}, rng);
        const StepFunction f = random_step_function(w, RandomFunctionSpec{0.3, -2.0, 0.5}, i);
        for (double v : f.values()) {
            ++cells;
            if (v != 0.0) {
                ++nonzero;
                EXPECT_GE(v, -2.0);
                EXPECT_LE(v, 0.5);
            }
        }
    }
    const double frac = static_cast<double>(nonzero) / cells;
    EXPECT_NEAR(frac, 0.3, 4.0 * std::sqrt(0.3 * 0.7 / cells));
}
