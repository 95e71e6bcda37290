#include <cstdlib>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "mtted/pipeline.hpp"
#include "support/random_trees.hpp"

using namespace mtted;

namespace {

std::vector<MergeTree> random_trees(std::mt19937_64& rng, std::size_t count)
{
    std::vector<MergeTree> out;
    for (std::size_t i = 0; i < count; ++i) {
        testkit::RandomTreeOptions o;
        o.nodes = 5 + rng() % 25;
        o.max_degree = 3;
        o.orientation = Orientation::split;
        out.push_back(testkit::random_tree(rng, o));
    }
    return out;
}

std::vector<std::string> numbered_labels(std::size_t n)
{
    std::vector<std::string> l;
    for (std::size_t i = 0; i < n; ++i)
        l.push_back("t" + std::to_string(i));
    return l;
}

std::string csv(const DistanceMatrix& dm)
{
    std::ostringstream os;
    write_matrix_csv(os, dm);
    return os.str();
}

// Four copies of a three-gaussian blob on a 2 x 2 layout.
ScalarGrid four_blobs(double shift = 0.0)
{
    std::vector<GaussianSpec> specs;
    for (double cx : {15.0, 50.0})
        for (double cy : {15.0, 50.0}) {
            specs.push_back({{cx, cy}, 1.0, 3.0});
            specs.push_back({{cx + 8, cy}, 0.7, 2.5});
            specs.push_back({{cx, cy + 9}, 0.5, 2.5});
        }
    ScalarGrid g = gen_gaussian_sum({70, 70}, specs);
    std::vector<double> v = g.values();
    for (auto& x : v)
        x += shift;
    return ScalarGrid(g.dims(), std::move(v));
}

} // namespace

TEST(Matrix, IdenticalTreesGiveZeros)
{
    std::mt19937_64 rng(1);
    auto t = random_trees(rng, 1);
    std::vector<MergeTree> same(4, t[0]);
    DistanceMatrix dm = compute_distance_matrix(same, numbered_labels(4), CostModel::winf, {}, 2);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j)
            EXPECT_EQ(dm(i, j), 0.0);
}

TEST(Matrix, EntriesMatchPairwiseDistances)
{
    std::mt19937_64 rng(2);
    auto trees = random_trees(rng, 3);
    StabilizationConfig s{0.05};
    DistanceMatrix dm = compute_distance_matrix(trees, numbered_labels(3), CostModel::overhang, s, 3);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            if (i != j) {
                EXPECT_EQ(dm(i, j), ted(trees[std::min(i, j)], trees[std::max(i, j)],
                                        CostModel::overhang, s)
                                        .distance);
            }
}

TEST(Matrix, OutputIndependentOfWorkerCount)
{
    std::mt19937_64 rng(3);
    auto trees = random_trees(rng, 12);
    std::string one = csv(compute_distance_matrix(trees, numbered_labels(12), CostModel::winf, {}, 1));
    for (std::size_t w : {2u, 3u, 8u})
        EXPECT_EQ(csv(compute_distance_matrix(trees, numbered_labels(12), CostModel::winf, {}, w)),
                  one);
}

TEST(Matrix, MetricOnSampledTriples)
{
    std::mt19937_64 rng(4);
    auto trees = random_trees(rng, 10);
    DistanceMatrix dm = compute_distance_matrix(trees, numbered_labels(10), CostModel::winf, {}, 2);
    for (std::size_t i = 0; i < 10; ++i) {
        EXPECT_EQ(dm(i, i), 0.0);
        for (std::size_t j = 0; j < 10; ++j) {
            EXPECT_EQ(dm(i, j), dm(j, i));
            for (std::size_t k = 0; k < 10; ++k)
                EXPECT_LE(dm(i, k), dm(i, j) + dm(j, k) + 1e-9);
        }
    }
}

TEST(Matrix, CsvRoundTripAndValidation)
{
    std::mt19937_64 rng(5);
    auto trees = random_trees(rng, 5);
    DistanceMatrix dm = compute_distance_matrix(trees, numbered_labels(5), CostModel::winf, {}, 2);
    std::string text = csv(dm);
    EXPECT_EQ(text.substr(0, text.find('\n')), "label,t0,t1,t2,t3,t4");
    std::istringstream in(text);
    DistanceMatrix back = read_matrix_csv(in);
    EXPECT_EQ(back.labels, dm.labels);
    EXPECT_EQ(back.values, dm.values);

    for (const char* bad : {"", "x,a,b\na,0,1\nb,1,0\n", "label,a,b\na,0,1\nb,2,0\n",
                            "label,a,b\na,1,1\nb,1,0\n", "label,a,b\na,0,1\n",
                            "label,a,b\na,0,1\nb,1\n", "label,a,b\na,0,-1\nb,-1,0\n"}) {
        std::istringstream is(bad);
        EXPECT_THROW(read_matrix_csv(is), DataError) << bad;
    }
}

TEST(Matrix, MixedOrientationIsRejected)
{
    std::mt19937_64 rng(6);
    auto trees = random_trees(rng, 2);
    testkit::RandomTreeOptions o;
    o.orientation = Orientation::join;
    trees.push_back(testkit::random_tree(rng, o));
    EXPECT_THROW(compute_distance_matrix(trees, numbered_labels(3), CostModel::winf, {}, 1),
                 DataError);
}

TEST(Matrix, FailedPairIsNamed)
{
    std::mt19937_64 rng(7);
    auto trees = random_trees(rng, 3);
    try {
        compute_distance_matrix(trees, numbered_labels(3), CostModel::winf, {2.0}, 2);
        FAIL();
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("pair (t"), std::string::npos) << e.what();
    }
}

TEST(Threads, ResolutionOrder)
{
    EXPECT_EQ(resolve_threads(3), 3u);
    ::setenv("MERGE_TED_THREADS", "5", 1);
    EXPECT_EQ(resolve_threads(std::nullopt), 5u);
    ::setenv("MERGE_TED_THREADS", "junk", 1);
    EXPECT_GE(resolve_threads(std::nullopt), 1u);
    ::unsetenv("MERGE_TED_THREADS");
    EXPECT_GE(resolve_threads(std::nullopt), 1u);
}

TEST(Periodicity, ConstantMatrixHasNoPeriod)
{
    DistanceMatrix dm{numbered_labels(12), Matrix(12, 12, 1.0)};
    for (std::size_t i = 0; i < 12; ++i)
        dm.values(i, i) = 0.0;
    PeriodicityReport r = detect_periodicity(dm);
    EXPECT_FALSE(r.period.has_value());
    EXPECT_EQ(r.lag_means.size(), 5u);
}

TEST(Periodicity, RepeatingSequence)
{
    std::mt19937_64 rng(8);
    for (std::size_t p : {3u, 5u, 7u}) {
        auto base = random_trees(rng, p);
        std::vector<MergeTree> seq;
        for (std::size_t i = 0; i < 4 * p; ++i)
            seq.push_back(base[i % p]);
        DistanceMatrix dm =
            compute_distance_matrix(seq, numbered_labels(seq.size()), CostModel::winf, {}, 2);
        PeriodicityReport r = detect_periodicity(dm);
        ASSERT_TRUE(r.period.has_value());
        EXPECT_EQ(*r.period, p);
    }
}

TEST(Periodicity, TooSmall)
{
    DistanceMatrix dm{numbered_labels(7), Matrix(7, 7, 0.0)};
    EXPECT_THROW(detect_periodicity(dm), DataError);
}

TEST(Periodicity, TranslatingGaussians)
{
    std::vector<MergeTree> trees;
    for (std::size_t t = 0; t < 60; ++t)
        trees.push_back(make_merge_tree(grid_to_graph(periodic_gaussian_frame(100, 25, 20, t)),
                                        Orientation::split));
    // Frames one period apart are identical fields.
    EXPECT_EQ(periodic_gaussian_frame(100, 25, 20, 3), periodic_gaussian_frame(100, 25, 20, 23));
    DistanceMatrix dm =
        compute_distance_matrix(trees, numbered_labels(60), CostModel::winf, {}, 4);
    PeriodicityReport r = detect_periodicity(dm);
    ASSERT_TRUE(r.period.has_value());
    EXPECT_NEAR(static_cast<double>(*r.period), 20.0, 1.0);
}

TEST(Symmetry, IdenticalBlobs)
{
    MergeTree t = make_merge_tree(grid_to_graph(four_blobs()), Orientation::split);
    DistanceMatrix dm = symmetry_matrix(t, 0.1, 0.2, CostModel::winf, {}, 2);
    ASSERT_EQ(dm.size(), 4u);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j)
            EXPECT_LE(dm(i, j), 1e-9);
    for (const auto& l : dm.labels)
        EXPECT_FALSE(l.empty());
}

TEST(Symmetry, ThresholdsExcludingEverything)
{
    MergeTree t = make_merge_tree(grid_to_graph(four_blobs()), Orientation::split);
    EXPECT_THROW(symmetry_matrix(t, 0.1, 5.0, CostModel::winf, {}, 1), DataError);
}

TEST(Symmetry, ShiftedFieldGivesSameMatrix)
{
    MergeTree a = make_merge_tree(grid_to_graph(symmetry_blob_field()), Orientation::split);
    std::vector<double> v = symmetry_blob_field().values();
    for (auto& x : v)
        x += 2.0;
    MergeTree b = make_merge_tree(grid_to_graph(ScalarGrid(symmetry_blob_field().dims(), v)),
                                  Orientation::split);
    DistanceMatrix da = symmetry_matrix(a, 0.1, 0.2, CostModel::winf, {}, 2);
    DistanceMatrix db = symmetry_matrix(b, 0.1, 2.2, CostModel::winf, {}, 2);
    ASSERT_EQ(da.size(), db.size());
    for (std::size_t i = 0; i < da.size(); ++i)
        for (std::size_t j = 0; j < da.size(); ++j)
            EXPECT_NEAR(da(i, j), db(i, j), 1e-9);
}

TEST(Experiments, SubsampleDistanceTrend)
{
    auto grids = subsample_schedule(two_gaussian_field(150), 25, 5);
    ASSERT_EQ(grids.size(), 6u);
    std::vector<MergeTree> trees;
    for (const auto& g : grids)
        trees.push_back(make_merge_tree(grid_to_graph(g), Orientation::split));
    double prev = 0;
    for (std::size_t i = 1; i < trees.size(); ++i) {
        double d = ted(trees[0], trees[i], CostModel::winf, {0.005}).distance;
        EXPECT_GE(d, prev);
        prev = d;
    }
}
