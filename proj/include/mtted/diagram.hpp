#ifndef MTTED_DIAGRAM_HPP
#define MTTED_DIAGRAM_HPP

// Persistence diagrams of merge trees and the two baseline distances
// between them: bottleneck and 1-Wasserstein, both with L-infinity ground
// distance and the diagonal available as a matching partner.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <queue>
#include <sstream>
#include <string>
#include <vector>

#include "mtted/error.hpp"
#include "mtted/field.hpp"
#include "mtted/interval.hpp"
#include "mtted/matching.hpp"
#include "mtted/mergetree.hpp"

namespace mtted {

struct PersistenceDiagram {
    std::vector<Interval> points;

    std::size_t size() const { return points.size(); }
    bool operator==(const PersistenceDiagram&) const = default;
};

/// One point per extremum (every leaf), the root pair included.
inline PersistenceDiagram diagram_of(const MergeTree& tree)
{
    if (!tree.paired())
        throw DataError("diagram_of needs a paired tree");
    PersistenceDiagram d;
    for (const auto& n : tree.nodes())
        if (n.children.empty())
            d.points.push_back(n.interval);
    return d;
}

inline double linf(const Interval& p, const Interval& q)
{
    return std::max(std::abs(p.birth - q.birth), std::abs(p.death - q.death));
}

inline double diagonal_distance(const Interval& p) { return std::abs(p.death - p.birth) / 2; }

namespace detail {

/// Diagonal-augmented matching matrix: rows = a then a diagonal slot per b
/// point, columns = b then a diagonal slot per a point.
inline CostMatrix diagram_matrix(const PersistenceDiagram& a, const PersistenceDiagram& b)
{
    Matrix direct(a.size(), b.size());
    std::vector<double> del(a.size()), ins(b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        del[i] = diagonal_distance(a.points[i]);
        for (std::size_t j = 0; j < b.size(); ++j)
            direct(i, j) = linf(a.points[i], b.points[j]);
    }
    for (std::size_t j = 0; j < b.size(); ++j)
        ins[j] = diagonal_distance(b.points[j]);
    return build_forest_matrix(direct, del, ins);
}

/// Hopcroft-Karp perfect-matching test on entries <= bound.
inline bool has_perfect_matching(const CostMatrix& m, double bound)
{
    const std::size_t n = m.rows();
    std::vector<std::vector<std::size_t>> adj(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (m(i, j) <= bound)
                adj[i].push_back(j);
    constexpr std::size_t none = static_cast<std::size_t>(-1);
    std::vector<std::size_t> match_row(n, none), match_col(n, none), dist(n);
    auto bfs = [&] {
        std::queue<std::size_t> q;
        bool found = false;
        for (std::size_t i = 0; i < n; ++i) {
            if (match_row[i] == none) {
                dist[i] = 0;
                q.push(i);
            } else {
                dist[i] = none;
            }
        }
        while (!q.empty()) {
            std::size_t i = q.front();
            q.pop();
            for (std::size_t j : adj[i]) {
                std::size_t r = match_col[j];
                if (r == none)
                    found = true;
                else if (dist[r] == none) {
                    dist[r] = dist[i] + 1;
                    q.push(r);
                }
            }
        }
        return found;
    };
    std::vector<std::size_t> it(n);
    auto dfs = [&](auto&& self, std::size_t i) -> bool {
        for (; it[i] < adj[i].size(); ++it[i]) {
            std::size_t j = adj[i][it[i]];
            std::size_t r = match_col[j];
            if (r == none || (dist[r] == dist[i] + 1 && self(self, r))) {
                match_row[i] = j;
                match_col[j] = i;
                return true;
            }
        }
        dist[i] = none;
        return false;
    };
    std::size_t matched = 0;
    while (bfs()) {
        std::fill(it.begin(), it.end(), 0);
        for (std::size_t i = 0; i < n; ++i)
            if (match_row[i] == none && dfs(dfs, i))
                ++matched;
    }
    return matched == n;
}

} // namespace detail

/// Bottleneck distance: binary search over the sorted candidate costs with a
/// perfect-matching feasibility test.
inline double bottleneck(const PersistenceDiagram& a, const PersistenceDiagram& b)
{
    if (a.size() + b.size() == 0)
        return 0.0;
    CostMatrix m = detail::diagram_matrix(a, b);
    std::vector<double> cand;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (double c : m.row(i))
            if (std::isfinite(c))
                cand.push_back(c);
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
    std::size_t lo = 0, hi = cand.size() - 1;
    while (lo < hi) {
        std::size_t mid = (lo + hi) / 2;
        if (detail::has_perfect_matching(m, cand[mid]))
            hi = mid;
        else
            lo = mid + 1;
    }
    return cand[lo];
}

/// 1-Wasserstein distance: optimal assignment over the diagonal-augmented
/// cost matrix.
inline double wasserstein1(const PersistenceDiagram& a, const PersistenceDiagram& b)
{
    return min_cost_assignment(detail::diagram_matrix(a, b)).cost;
}

// CSV with header "birth,death".

inline void write_diagram_csv(std::ostream& out, const PersistenceDiagram& d)
{
    out << "birth,death\n";
    for (const auto& p : d.points)
        out << detail::format_double(p.birth) << ',' << detail::format_double(p.death) << '\n';
}

inline PersistenceDiagram read_diagram_csv(std::istream& in, const std::string& source = "<diagram>")
{
    std::string line;
    std::size_t line_no = 1;
    if (!std::getline(in, line) || line.substr(0, 11) != "birth,death")
        throw DataError(source + ":1: expected header 'birth,death'");
    PersistenceDiagram d;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        auto comma = line.find(',');
        Interval p;
        if (comma == std::string::npos ||
            !detail::parse_double(line.substr(0, comma), p.birth) ||
            !detail::parse_double(line.substr(comma + 1), p.death))
            throw DataError(source + ":" + std::to_string(line_no) + ": malformed row");
        if (p.birth > p.death)
            throw DataError(source + ":" + std::to_string(line_no) + ": birth > death");
        d.points.push_back(p);
    }
    return d;
}

} // namespace mtted

#endif
