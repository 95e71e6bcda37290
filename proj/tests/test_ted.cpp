#include <algorithm>
#include <chrono>
#include <random>

#include <gtest/gtest.h>

#include "mtted/diagram.hpp"
#include "mtted/mapping_json.hpp"
#include "mtted/oracle.hpp"
#include "mtted/ted.hpp"
#include "support/random_trees.hpp"

using namespace mtted;

namespace {

constexpr CostModel kModels[] = {CostModel::winf, CostModel::overhang};

MergeTree random_tree(std::mt19937_64& rng, std::size_t lo, std::size_t hi,
                      std::size_t max_degree = 3, bool pin = false)
{
    testkit::RandomTreeOptions o;
    o.nodes = lo + rng() % (hi - lo + 1);
    o.max_degree = max_degree;
    o.pin_range = pin;
    return testkit::random_tree(rng, o);
}

double total_delete(const MergeTree& t, CostModel m)
{
    double s = 0;
    for (const auto& n : t.nodes())
        s += delete_cost(m, n.interval);
    return s;
}

ScalarGrid random_grid(std::mt19937_64& rng, std::vector<std::size_t> dims, double scale = 1.0,
                       double shift = 0.0)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::size_t n = 1;
    for (auto d : dims)
        n *= d;
    std::vector<double> v(n);
    for (auto& x : v)
        x = u(rng) * scale + shift;
    return ScalarGrid(std::move(dims), std::move(v));
}

ScalarGrid transform(const ScalarGrid& g, double scale, double shift)
{
    std::vector<double> v = g.values();
    for (auto& x : v)
        x = x * scale + shift;
    return ScalarGrid(g.dims(), std::move(v));
}

} // namespace

TEST(Ted, SelfDistanceIsZeroWithIdentityMapping)
{
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 50; ++trial) {
        MergeTree t = random_tree(rng, 1, 40);
        for (auto m : kModels) {
            TedResult r = ted(t, t, m);
            EXPECT_EQ(r.distance, 0.0);
            EXPECT_TRUE(r.mapping.deleted.empty());
            EXPECT_TRUE(r.mapping.inserted.empty());
            for (auto [a, b] : r.mapping.pairs)
                EXPECT_EQ(a, b);
            EXPECT_EQ(r.mapping.pairs.size(), t.size());
        }
    }
}

TEST(Ted, DistanceToEmptyTreeDeletesEverything)
{
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 50; ++trial) {
        MergeTree t = random_tree(rng, 1, 30);
        MergeTree empty(t.orientation());
        for (auto m : kModels) {
            EXPECT_NEAR(ted(t, empty, m).distance, total_delete(t, m), 1e-12);
            EXPECT_NEAR(ted(empty, t, m).distance, total_delete(t, m), 1e-12);
        }
    }
    EXPECT_EQ(ted(MergeTree(Orientation::join), MergeTree(Orientation::join), CostModel::winf)
                  .distance,
              0.0);
}

TEST(Ted, SingleNodeTreesRelabelOnly)
{
    MergeTree a = make_merge_tree(ScalarGraph({0.5}, {}), Orientation::join);
    MergeTree b = make_merge_tree(ScalarGraph({0.7}, {}), Orientation::join);
    TedResult r = ted(a, b, CostModel::winf);
    EXPECT_EQ(r.distance, 0.0);
    EXPECT_EQ(r.mapping.pairs.size(), 1u);
}

TEST(Ted, MatchesOracle)
{
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 300; ++trial) {
        MergeTree a = random_tree(rng, 1, 6, 2 + trial % 3);
        MergeTree b = random_tree(rng, 1, 6, 2 + trial % 3);
        for (auto m : kModels)
            EXPECT_NEAR(ted(a, b, m).distance, brute_force_dc(a, b, m).distance, 1e-12)
                << serialize(a) << serialize(b);
    }
}

TEST(Ted, MappingIsValidAndPricedConsistently)
{
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> eps(0.0, 0.3);
    for (int trial = 0; trial < 500; ++trial) {
        MergeTree a = random_tree(rng, 1, 30, 2 + trial % 3);
        MergeTree b = random_tree(rng, 1, 30, 2 + trial % 3);
        CostModel m = kModels[trial % 2];
        StabilizationConfig stab{trial % 3 == 0 ? eps(rng) : 0.0, trial % 5 == 0, 0.25};
        TedResult r = ted(a, b, m, stab);
        auto v = validate_mapping(r.mapping, r.tree1, r.tree2);
        EXPECT_TRUE(v.empty()) << v.front().condition;
        EXPECT_NEAR(mapping_cost(r.mapping, r.tree1, r.tree2, m),
                    r.distance - r.stabilization_surcharge, 1e-9);
    }
}

TEST(Ted, ValidateMappingReportsViolations)
{
    // Path tree: root 5 -> saddle 1 -> {0, saddle 3 -> {2, 4}}.
    ScalarGraph g = grid_to_graph(ScalarGrid({6}, {1, 4, 0, 3, 2, 5}));
    MergeTree t = make_merge_tree(g, Orientation::join);
    EditMapping identity;
    for (const auto& n : t.nodes())
        identity.pairs.emplace_back(n.id, n.id);
    EXPECT_TRUE(validate_mapping(identity, t, t).empty());

    // Saddle 1 goes to leaf 2, a descendant of its child 3's image.
    EditMapping bad{{{1, 2}, {3, 3}}, {0, 2, 4, 5}, {0, 1, 4, 5}};
    auto v = validate_mapping(bad, t, t);
    ASSERT_FALSE(v.empty());
    EXPECT_EQ(v.front().condition, "ancestor-ordering");

    EditMapping partial{{{5, 5}}, {}, {}};
    v = validate_mapping(partial, t, t);
    ASSERT_FALSE(v.empty());
    EXPECT_EQ(v.front().condition, "coverage");
    EXPECT_THROW(mapping_cost(partial, t, t, CostModel::winf), DataError);

    EditMapping twice = identity;
    twice.pairs.back().second = twice.pairs.front().second;
    v = validate_mapping(twice, t, t);
    ASSERT_FALSE(v.empty());
    EXPECT_EQ(v.front().condition, "one-to-one");

    // Leaves 0 and 2 have lca 1 in the first tree; sending them to 2 and 4
    // (lca 3) breaks the lca condition for leaf 4 -> 0.
    EditMapping lca{{{0, 2}, {2, 4}, {4, 0}}, {1, 3, 5}, {1, 3, 5}};
    v = validate_mapping(lca, t, t);
    ASSERT_FALSE(v.empty());
    EXPECT_EQ(v.front().condition, "constrained-lca");
}

TEST(Ted, AllDeleteMappingCost)
{
    std::mt19937_64 rng(5);
    MergeTree a = random_tree(rng, 5, 20), b = random_tree(rng, 5, 20);
    EditMapping m;
    for (const auto& n : a.nodes())
        m.deleted.push_back(n.id);
    for (const auto& n : b.nodes())
        m.inserted.push_back(n.id);
    for (auto model : kModels)
        EXPECT_NEAR(mapping_cost(m, a, b, model), total_delete(a, model) + total_delete(b, model),
                    1e-12);
}

TEST(Ted, MetricProperties)
{
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> eps(0.0, 0.2);
    for (int trial = 0; trial < 150; ++trial) {
        MergeTree a = random_tree(rng, 5, 30), b = random_tree(rng, 5, 30),
                  c = random_tree(rng, 5, 30);
        CostModel m = kModels[trial % 2];
        StabilizationConfig s{trial % 2 ? eps(rng) : 0.0};
        double ab = ted(a, b, m, s).distance, ba = ted(b, a, m, s).distance;
        double bc = ted(b, c, m, s).distance, ac = ted(a, c, m, s).distance;
        EXPECT_EQ(ted(a, a, m, s).distance, 0.0);
        EXPECT_NEAR(ab, ba, 1e-12);
        EXPECT_LE(ac, ab + bc + 1e-9);
    }
}

TEST(Ted, DominatesDiagramDistances)
{
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 150; ++trial) {
        MergeTree a = random_tree(rng, 10, 60, 2 + trial % 3);
        MergeTree b = random_tree(rng, 10, 60, 2 + trial % 3);
        TedResult r = ted(a, b, CostModel::winf);
        PersistenceDiagram da = diagram_of(r.tree1), db = diagram_of(r.tree2);
        double w = wasserstein1(da, db);
        EXPECT_GE(r.distance, w - 1e-9);
        EXPECT_GE(w, bottleneck(da, db) - 1e-9);
    }
}

TEST(Ted, FullStabilizationMatchesWasserstein)
{
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 100; ++trial) {
        MergeTree a = random_tree(rng, 5, 40, 2 + trial % 3, true);
        MergeTree b = random_tree(rng, 5, 40, 2 + trial % 3, true);
        TedResult r = ted(a, b, CostModel::winf, {1.0});
        EXPECT_NEAR(r.distance, wasserstein1(diagram_of(a), diagram_of(b)), 1e-9);
    }
}

TEST(Ted, ShiftInvariantAndScaleCovariant)
{
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        ScalarGrid f = random_grid(rng, {7, 6}), g = random_grid(rng, {7, 6});
        auto tree = [](const ScalarGrid& x) {
            return make_merge_tree(grid_to_graph(x), Orientation::split);
        };
        for (auto m : kModels) {
            double base = ted(tree(f), tree(g), m).distance;
            double shifted =
                ted(tree(transform(f, 1.0, 4.0)), tree(transform(g, 1.0, 4.0)), m).distance;
            double scaled =
                ted(tree(transform(f, 3.0, 0.0)), tree(transform(g, 3.0, 0.0)), m).distance;
            EXPECT_NEAR(shifted, base, 1e-9);
            EXPECT_NEAR(scaled, 3.0 * base, 1e-9);
        }
    }
}

TEST(Ted, StabilizationSurcharge)
{
    std::vector<SkeletonNode> s{{0, 0.0, 4}, {1, 0.5, 3}, {2, 0.6, 3},
                                {3, 0.70, 4}, {4, 0.71, 5}, {5, 1.0, kNoNode}};
    MergeTree t = persistence_pair(make_tree(Orientation::join, s));
    TedResult merged = ted(t, t, CostModel::winf, {0.02, true, 0.5});
    EXPECT_EQ(merged.stabilization_surcharge, 0.5);
    EXPECT_EQ(merged.distance, 0.5);
    EXPECT_EQ(merged.epsilon_used, 0.02);
    TedResult untouched = ted(t, t, CostModel::winf, {0.005, true, 0.5});
    EXPECT_EQ(untouched.stabilization_surcharge, 0.0);
    EXPECT_EQ(untouched.distance, 0.0);
    TedResult no_cost = ted(t, t, CostModel::winf, {0.02, false, 0.5});
    EXPECT_EQ(no_cost.stabilization_surcharge, 0.0);
}

TEST(Ted, Errors)
{
    std::mt19937_64 rng(10);
    MergeTree a = random_tree(rng, 4, 8);
    testkit::RandomTreeOptions o;
    o.orientation = Orientation::split;
    MergeTree b = testkit::random_tree(rng, o);
    EXPECT_THROW(ted(a, b, CostModel::winf), DataError);
    MergeTree unpaired = build_merge_tree(grid_to_graph(ScalarGrid({4}, {0, 2, 1, 3})),
                                          Orientation::join);
    EXPECT_THROW(ted(unpaired, a, CostModel::winf), DataError);
}

TEST(Ted, DeterministicMapping)
{
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 30; ++trial) {
        MergeTree a = random_tree(rng, 5, 40), b = random_tree(rng, 5, 40);
        EXPECT_EQ(ted(a, b, CostModel::winf).mapping, ted(a, b, CostModel::winf).mapping);
    }
}

TEST(Ted, MappingJsonRoundTrip)
{
    std::mt19937_64 rng(12);
    MergeTree a = random_tree(rng, 5, 20), b = random_tree(rng, 5, 20);
    TedResult r = ted(a, b, CostModel::overhang, {0.1});
    nlohmann::json j = mapping_to_json(r);
    EXPECT_EQ(j["cost_model"], "overhang");
    EXPECT_EQ(j["epsilon"], 0.1);
    EXPECT_EQ(j["distance"], r.distance);
    EXPECT_EQ(mapping_from_json(nlohmann::json::parse(j.dump())), r.mapping);
    EXPECT_THROW(mapping_from_json(nlohmann::json::parse("{\"pairs\": 3}")), DataError);
}

TEST(Ted, RuntimeGrowthWhenDoublingSize)
{
    // Median of several pairs to damp timer noise.
    std::mt19937_64 rng(13);
    auto median_time = [&](std::size_t n) {
        std::vector<double> t;
        for (int rep = 0; rep < 7; ++rep) {
            testkit::RandomTreeOptions o;
            o.nodes = n;
            o.max_degree = 3;
            MergeTree a = testkit::random_tree(rng, o), b = testkit::random_tree(rng, o);
            auto start = std::chrono::steady_clock::now();
            (void)ted(a, b, CostModel::winf);
            t.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                            .count());
        }
        std::sort(t.begin(), t.end());
        return t[t.size() / 2];
    };
    double small = median_time(200), large = median_time(400);
    EXPECT_LE(large / small, 5.0) << small << " s vs " << large << " s";
}
