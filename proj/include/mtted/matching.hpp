#ifndef MTTED_MATCHING_HPP
#define MTTED_MATCHING_HPP

// Minimum-cost perfect assignment (Kuhn-Munkres with potentials) and the
// bipartite cost matrix that turns a forest-to-forest restricted mapping
// into an assignment problem.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "mtted/error.hpp"

namespace mtted {

inline constexpr double kForbidden = std::numeric_limits<double>::infinity();

/// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill)
    {
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Square cost matrix; kForbidden (+inf) marks pairs that may not be
/// assigned.
using CostMatrix = Matrix;

struct Assignment {
    std::vector<std::size_t> row_to_col;
    double cost = 0.0;
};

/// Optimal assignment in O(n^3). Forbidden entries never enter an
/// augmenting path. Throws if no perfect assignment of finite cost exists.
inline Assignment min_cost_assignment(const CostMatrix& m)
{
    if (m.rows() != m.cols())
        throw DataError("assignment needs a square cost matrix");
    const std::size_t n = m.rows();
    Assignment out;
    out.row_to_col.assign(n, 0);
    if (n == 0)
        return out;

    constexpr double inf = std::numeric_limits<double>::infinity();
    // 1-based arrays; column 0 is the virtual start of each augmenting search.
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
    std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
    std::vector<char> used(n + 1);
    for (std::size_t i = 1; i <= n; ++i) {
        match[0] = i;
        std::size_t j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = match[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j])
                    continue;
                double a = m(i0 - 1, j - 1);
                if (std::isfinite(a)) {
                    double cur = a - u[i0] - v[j];
                    if (cur < minv[j]) {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            if (!std::isfinite(delta))
                throw DataError("no finite assignment exists");
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            std::size_t j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    for (std::size_t j = 1; j <= n; ++j)
        out.row_to_col[match[j] - 1] = j - 1;
    for (std::size_t i = 0; i < n; ++i)
        out.cost += m(i, out.row_to_col[i]);
    return out;
}

/// Assignment matrix for the restricted mapping between two forests.
///
/// Rows are the trees of the first forest followed by one slot per tree of
/// the second; columns are the trees of the second followed by one slot per
/// tree of the first. Row s may go to column t (cost subtree_dists(s,t)) or
/// to its own deletion slot; each tree of the second forest may be matched
/// or take its own insertion slot. Slot-to-slot entries cost nothing.
inline CostMatrix build_forest_matrix(const Matrix& subtree_dists,
                                      std::span<const double> delete_costs,
                                      std::span<const double> insert_costs)
{
    const std::size_t n1 = delete_costs.size(), n2 = insert_costs.size();
    if (subtree_dists.rows() != n1 || subtree_dists.cols() != n2)
        throw DataError("forest matrix: dimension mismatch");
    CostMatrix m(n1 + n2, n1 + n2, kForbidden);
    for (std::size_t s = 0; s < n1; ++s) {
        for (std::size_t t = 0; t < n2; ++t)
            m(s, t) = subtree_dists(s, t);
        m(s, n2 + s) = delete_costs[s];
    }
    for (std::size_t t = 0; t < n2; ++t) {
        m(n1 + t, t) = insert_costs[t];
        for (std::size_t s = 0; s < n1; ++s)
            m(n1 + t, n2 + s) = 0.0;
    }
    return m;
}

} // namespace mtted

#endif
