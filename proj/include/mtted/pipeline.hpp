#ifndef MTTED_PIPELINE_HPP
#define MTTED_PIPELINE_HPP

// Batch operations behind the command-line tool: all-pairs distance
// matrices computed on a worker pool, the matrix CSV format, lag-based
// periodicity detection, sub-tree symmetry matrices, and generators for the
// synthetic experiment fields.

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "mtted/cost.hpp"
#include "mtted/diagram.hpp"
#include "mtted/error.hpp"
#include "mtted/field.hpp"
#include "mtted/matching.hpp"
#include "mtted/mergetree.hpp"
#include "mtted/ted.hpp"

namespace mtted {

struct DistanceMatrix {
    std::vector<std::string> labels;
    Matrix values;

    std::size_t size() const { return labels.size(); }
    double operator()(std::size_t i, std::size_t j) const { return values(i, j); }
};

/// Worker count from an explicit request, else MERGE_TED_THREADS, else the
/// hardware concurrency.
inline std::size_t resolve_threads(std::optional<std::size_t> requested)
{
    if (requested)
        return std::max<std::size_t>(1, *requested);
    if (const char* env = std::getenv("MERGE_TED_THREADS")) {
        std::size_t n = 0;
        if (detail::parse_int(std::string_view(env), n) && n > 0)
            return n;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs fn(k) for k in [0, count) on up to `threads` workers. The first
/// exception thrown stops further work and is rethrown.
template <typename Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn fn)
{
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto work = [&] {
        while (!failed) {
            std::size_t k = next++;
            if (k >= count)
                return;
            try {
                fn(k);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error)
                    error = std::current_exception();
                failed = true;
            }
        }
    };
    threads = std::min(threads, std::max<std::size_t>(count, 1));
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < threads; ++w)
        pool.emplace_back(work);
    work();
    for (auto& t : pool)
        t.join();
    if (error)
        std::rethrow_exception(error);
}

/// All-pairs tree edit distance. Each (i, j) pair with i < j is one task
/// writing its own cell, so the result does not depend on scheduling.
inline DistanceMatrix compute_distance_matrix(const std::vector<MergeTree>& trees,
                                              std::vector<std::string> labels, CostModel model,
                                              const StabilizationConfig& stab, std::size_t threads)
{
    const std::size_t n = trees.size();
    if (labels.size() != n)
        throw DataError("distance matrix: label count does not match tree count");
    for (std::size_t i = 1; i < n; ++i)
        if (trees[i].orientation() != trees[0].orientation())
            throw DataError("distance matrix: inputs mix join and split trees (" + labels[0] +
                            ", " + labels[i] + ")");
    std::vector<std::pair<std::size_t, std::size_t>> tasks;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            tasks.emplace_back(i, j);
    DistanceMatrix dm{std::move(labels), Matrix(n, n, 0.0)};
    parallel_for(tasks.size(), threads, [&](std::size_t k) {
        auto [i, j] = tasks[k];
        try {
            double d = ted(trees[i], trees[j], model, stab).distance;
            dm.values(i, j) = d;
            dm.values(j, i) = d;
        } catch (const std::exception& e) {
            throw DataError("pair (" + dm.labels[i] + ", " + dm.labels[j] + "): " + e.what());
        }
    });
    return dm;
}

// CSV: "label,<l1>,...,<ln>" then one "<li>,<d_i1>,...,<d_in>" row per label.

inline void write_matrix_csv(std::ostream& out, const DistanceMatrix& dm)
{
    out << "label";
    for (const auto& l : dm.labels)
        out << ',' << l;
    out << '\n';
    for (std::size_t i = 0; i < dm.size(); ++i) {
        out << dm.labels[i];
        for (std::size_t j = 0; j < dm.size(); ++j)
            out << ',' << detail::format_double(dm.values(i, j));
        out << '\n';
    }
}

inline std::vector<std::string> split_csv(const std::string& line)
{
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ','))
        cells.push_back(cell);
    if (!line.empty() && line.back() == ',')
        cells.emplace_back();
    return cells;
}

inline DistanceMatrix read_matrix_csv(std::istream& in, const std::string& source = "<matrix>")
{
    std::string line;
    if (!std::getline(in, line))
        throw DataError(source + ": empty matrix file");
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    auto head = split_csv(line);
    if (head.empty() || head[0] != "label")
        throw DataError(source + ":1: expected header starting with 'label'");
    DistanceMatrix dm;
    dm.labels.assign(head.begin() + 1, head.end());
    const std::size_t n = dm.labels.size();
    dm.values = Matrix(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::getline(in, line))
            throw DataError(source + ": expected " + std::to_string(n) + " rows");
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        auto cells = split_csv(line);
        if (cells.size() != n + 1)
            throw DataError(source + ":" + std::to_string(i + 2) + ": expected " +
                            std::to_string(n + 1) + " cells");
        for (std::size_t j = 0; j < n; ++j)
            if (!detail::parse_double(cells[j + 1], dm.values(i, j)) ||
                !std::isfinite(dm.values(i, j)))
                throw DataError(source + ":" + std::to_string(i + 2) + ": bad value '" +
                                cells[j + 1] + "'");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (dm.values(i, i) != 0.0)
            throw DataError(source + ": non-zero diagonal at row " + std::to_string(i));
        for (std::size_t j = 0; j < i; ++j) {
            double a = dm.values(i, j), b = dm.values(j, i);
            if (std::abs(a - b) > 1e-12 * std::max(1.0, std::abs(a)))
                throw DataError(source + ": matrix is not symmetric at (" + std::to_string(i) +
                                "," + std::to_string(j) + ")");
            if (a < 0)
                throw DataError(source + ": negative distance");
        }
    }
    return dm;
}

inline DistanceMatrix load_matrix_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open " + path);
    return read_matrix_csv(in, path);
}

// ---------------------------------------------------------------------------
// Periodicity

struct PeriodicityReport {
    std::vector<std::pair<std::size_t, double>> lag_means; ///< (lag, mean) for lags 2..n/2
    std::optional<std::size_t> period;                     ///< lag with the smallest mean
    std::vector<std::size_t> local_minima;                 ///< candidate half/full periods
};

/// Mean of the entries at each lag |i - j| = l for l in [2, n/2]. The
/// period is the lag with the smallest mean (the smaller lag on ties); a
/// flat profile reports no period.
inline PeriodicityReport detect_periodicity(const DistanceMatrix& dm)
{
    const std::size_t n = dm.size();
    if (n < 8)
        throw DataError("periodicity needs a matrix of at least 8 rows, got " + std::to_string(n));
    PeriodicityReport r;
    for (std::size_t lag = 2; lag <= n / 2; ++lag) {
        double sum = 0;
        for (std::size_t i = 0; i + lag < n; ++i)
            sum += dm(i, i + lag);
        r.lag_means.emplace_back(lag, sum / static_cast<double>(n - lag));
    }
    double lo = r.lag_means.front().second, hi = lo;
    std::size_t best = r.lag_means.front().first;
    for (auto [lag, m] : r.lag_means) {
        if (m < lo) {
            lo = m;
            best = lag;
        }
        hi = std::max(hi, m);
    }
    if (hi - lo <= 1e-9 * std::max(1.0, std::abs(hi)))
        return r;
    r.period = best;
    const auto& lm = r.lag_means;
    for (std::size_t k = 0; k < lm.size(); ++k) {
        bool left = k == 0 || lm[k].second < lm[k - 1].second;
        bool right = k + 1 == lm.size() || lm[k].second < lm[k + 1].second;
        if (left && right)
            r.local_minima.push_back(lm[k].first);
    }
    return r;
}

// ---------------------------------------------------------------------------
// Symmetry

/// Extracts sub-trees by the two thresholds and computes their pairwise
/// distances. Labels are the ids of each piece's top node.
inline DistanceMatrix symmetry_matrix(const MergeTree& tree, double min_persistence,
                                      double min_scalar, CostModel model,
                                      const StabilizationConfig& stab, std::size_t threads)
{
    auto regions = extract_subtree_regions(tree, min_persistence, min_scalar);
    if (regions.size() < 2)
        throw DataError("symmetry needs at least two sub-trees, thresholds extracted " +
                        std::to_string(regions.size()));
    std::vector<MergeTree> trees;
    std::vector<std::string> labels;
    for (auto& r : regions) {
        labels.push_back(std::to_string(r.top));
        trees.push_back(std::move(r.tree));
    }
    return compute_distance_matrix(trees, std::move(labels), model, stab, threads);
}

// ---------------------------------------------------------------------------
// Synthetic fields

/// Frame t of a 2D sequence of gaussians drifting along the first axis with
/// wrap-around; the sequence repeats exactly every `period` frames. The
/// first dimension must be divisible by the period.
inline ScalarGrid periodic_gaussian_frame(std::size_t width, std::size_t height, std::size_t period,
                                          std::size_t frame)
{
    if (period == 0 || width % period != 0)
        throw DataError("periodic sequence: width must be a multiple of the period");
    struct Blob {
        double x, y, amp, sigma, phase;
    };
    // Fixed layout: distinct amplitudes and phases so no shorter period exists.
    const Blob blobs[] = {
        {0.05, 0.30, 1.00, 3.0, 0.0}, {0.13, 0.70, 0.80, 2.5, 0.9}, {0.22, 0.45, 1.20, 3.5, 1.7},
        {0.31, 0.20, 0.65, 2.2, 2.6}, {0.40, 0.80, 0.90, 3.0, 3.4}, {0.49, 0.55, 1.10, 2.8, 4.1},
        {0.58, 0.25, 0.75, 2.4, 4.9}, {0.67, 0.65, 1.05, 3.2, 5.6}, {0.76, 0.40, 0.85, 2.6, 0.4},
        {0.85, 0.85, 0.70, 2.3, 1.2}, {0.93, 0.15, 0.95, 2.9, 2.1}, {0.61, 0.90, 0.60, 2.0, 3.0},
    };
    const std::size_t phase = frame % period;
    const double shift = static_cast<double>(width / period * phase);
    const double w = static_cast<double>(width);
    std::vector<double> values(width * height, 0.0);
    for (std::size_t i = 0; i < width; ++i)
        for (std::size_t j = 0; j < height; ++j) {
            double v = 0;
            for (const auto& b : blobs) {
                double cx = std::fmod(b.x * w + shift, w);
                double dx = std::abs(static_cast<double>(i) - cx);
                dx = std::min(dx, w - dx);
                double dy = static_cast<double>(j) - b.y * static_cast<double>(height - 1);
                double amp = b.amp * (1.0 + 0.25 * std::sin(2 * std::numbers::pi *
                                                                 static_cast<double>(phase) /
                                                                 static_cast<double>(period) +
                                                             b.phase));
                v += amp * std::exp(-(dx * dx + dy * dy) / (2 * b.sigma * b.sigma));
            }
            values[i * height + j] = v;
        }
    return ScalarGrid({width, height}, std::move(values));
}

/// Six well separated blobs of three gaussians each, laid out 3 x 2. Blobs
/// 0-3 are identical up to translation; blob 4 has every amplitude scaled by
/// 1.1 and blob 5 has its main peak scaled by 1.1.
inline ScalarGrid symmetry_blob_field()
{
    std::vector<GaussianSpec> specs;
    const double cx[] = {22, 67, 112, 22, 67, 112};
    const double cy[] = {22, 22, 22, 67, 67, 67};
    for (int b = 0; b < 6; ++b) {
        double all = b == 4 ? 1.1 : 1.0;
        double main = b == 5 ? 1.1 : 1.0;
        specs.push_back({{cx[b], cy[b]}, 1.0 * all * main, 3.0});
        specs.push_back({{cx[b] + 9, cy[b]}, 0.7 * all, 2.5});
        specs.push_back({{cx[b], cy[b] + 10}, 0.5 * all, 2.5});
    }
    return gen_gaussian_sum({135, 90}, specs);
}

/// Smooth two-peak field used for the resampling experiments.
inline ScalarGrid two_gaussian_field(std::size_t n)
{
    const double s = static_cast<double>(n - 1);
    return gen_gaussian_sum({n, n}, {{{0.35 * s, 0.40 * s}, 1.0, 0.15 * s},
                                     {{0.68 * s, 0.62 * s}, 0.8, 0.12 * s}});
}

} // namespace mtted

#endif
