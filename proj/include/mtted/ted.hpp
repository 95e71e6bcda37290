#ifndef MTTED_TED_HPP
#define MTTED_TED_HPP

// Constrained tree edit distance between merge trees (Zhang's dynamic
// program for unordered trees), with edit mapping extraction, mapping cost
// evaluation and a checker for the mapping conditions.

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "mtted/cost.hpp"
#include "mtted/error.hpp"
#include "mtted/matching.hpp"
#include "mtted/mergetree.hpp"

namespace mtted {

/// Node correspondence between two trees. Every node of the first tree is
/// either paired or deleted; every node of the second is paired or inserted.
struct EditMapping {
    std::vector<std::pair<NodeId, NodeId>> pairs;
    std::vector<NodeId> deleted;
    std::vector<NodeId> inserted;

    bool operator==(const EditMapping&) const = default;
};

struct TedResult {
    double distance = 0.0;
    EditMapping mapping;
    CostModel cost_model = CostModel::winf;
    double epsilon_used = 0.0;
    /// Amount added to distance for stabilization (0 unless add_fixed_cost
    /// was set and some saddle was merged).
    double stabilization_surcharge = 0.0;
    /// The stabilized inputs the mapping refers to.
    MergeTree tree1;
    MergeTree tree2;
};

namespace detail {

/// Post-order dense copy of a tree: children precede parents, root last.
struct DenseTree {
    std::vector<NodeId> ids;
    std::vector<Interval> intervals;
    std::vector<std::vector<std::uint32_t>> children;

    std::size_t size() const { return ids.size(); }
};

inline DenseTree densify(const MergeTree& t)
{
    DenseTree d;
    auto order = t.postorder();
    std::unordered_map<NodeId, std::uint32_t> pos;
    for (std::size_t i = 0; i < order.size(); ++i)
        pos[order[i]] = static_cast<std::uint32_t>(i);
    d.ids = order;
    d.intervals.resize(order.size());
    d.children.resize(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        const auto& n = t.node(order[i]);
        d.intervals[i] = n.interval;
        for (NodeId c : n.children)
            d.children[i].push_back(pos.at(c));
    }
    return d;
}

enum class Step : std::uint8_t {
    none,     // one side empty: no node is mapped
    relabel,  // map root to root, recurse on forests
    matching, // restricted mapping between the two forests
    into_t2,  // first argument maps into a child of the second
    into_t1,  // a child of the first absorbs the second
};

class ConstrainedTed {
public:
    ConstrainedTed(const MergeTree& a, const MergeTree& b, CostModel model)
        : t1_(densify(a)), t2_(densify(b)), model_(model)
    {
        const std::size_t n1 = t1_.size(), n2 = t2_.size();
        del_tree_.assign(n1, 0.0);
        del_forest_.assign(n1, 0.0);
        ins_tree_.assign(n2, 0.0);
        ins_forest_.assign(n2, 0.0);
        for (std::size_t i = 0; i < n1; ++i) {
            for (auto c : t1_.children[i])
                del_forest_[i] += del_tree_[c];
            del_tree_[i] = del_forest_[i] + delete_cost(model_, t1_.intervals[i]);
        }
        for (std::size_t j = 0; j < n2; ++j) {
            for (auto c : t2_.children[j])
                ins_forest_[j] += ins_tree_[c];
            ins_tree_[j] = ins_forest_[j] + insert_cost(model_, t2_.intervals[j]);
        }
        tree_.assign(n1 * n2, 0.0);
        forest_.assign(n1 * n2, 0.0);
        tree_step_.assign(n1 * n2, {Step::none, 0});
        forest_step_.assign(n1 * n2, {Step::none, 0});
        for (std::size_t i = 0; i < n1; ++i)
            for (std::size_t j = 0; j < n2; ++j) {
                solve_forest(i, j);
                solve_tree(i, j);
            }
    }

    double distance() const
    {
        const std::size_t n1 = t1_.size(), n2 = t2_.size();
        if (n1 == 0 && n2 == 0)
            return 0.0;
        if (n1 == 0)
            return ins_tree_.back();
        if (n2 == 0)
            return del_tree_.back();
        return tree_[at(n1 - 1, n2 - 1)];
    }

    EditMapping mapping() const
    {
        EditMapping m;
        std::set<NodeId> used1, used2;
        if (t1_.size() && t2_.size())
            trace_tree(t1_.size() - 1, t2_.size() - 1, m.pairs);
        for (auto& [a, b] : m.pairs) {
            used1.insert(a);
            used2.insert(b);
        }
        for (NodeId id : t1_.ids)
            if (!used1.count(id))
                m.deleted.push_back(id);
        for (NodeId id : t2_.ids)
            if (!used2.count(id))
                m.inserted.push_back(id);
        std::sort(m.pairs.begin(), m.pairs.end());
        std::sort(m.deleted.begin(), m.deleted.end());
        std::sort(m.inserted.begin(), m.inserted.end());
        return m;
    }

private:
    struct Choice {
        Step step;
        std::uint32_t child;
    };

    std::size_t at(std::size_t i, std::size_t j) const { return i * t2_.size() + j; }

    Assignment forest_assignment(std::size_t i, std::size_t j) const
    {
        const auto& ci = t1_.children[i];
        const auto& cj = t2_.children[j];
        Matrix sub(ci.size(), cj.size());
        std::vector<double> del(ci.size()), ins(cj.size());
        for (std::size_t s = 0; s < ci.size(); ++s) {
            del[s] = del_tree_[ci[s]];
            for (std::size_t t = 0; t < cj.size(); ++t)
                sub(s, t) = tree_[at(ci[s], cj[t])];
        }
        for (std::size_t t = 0; t < cj.size(); ++t)
            ins[t] = ins_tree_[cj[t]];
        return min_cost_assignment(build_forest_matrix(sub, del, ins));
    }

    void solve_forest(std::size_t i, std::size_t j)
    {
        const auto& ci = t1_.children[i];
        const auto& cj = t2_.children[j];
        const std::size_t k = at(i, j);
        if (ci.empty()) {
            forest_[k] = ins_forest_[j];
            return;
        }
        if (cj.empty()) {
            forest_[k] = del_forest_[i];
            return;
        }
        double best = forest_assignment(i, j).cost;
        Choice choice{Step::matching, 0};
        for (std::uint32_t t = 0; t < cj.size(); ++t) {
            double v = ins_forest_[j] + (forest_[at(i, cj[t])] - ins_forest_[cj[t]]);
            if (v < best) {
                best = v;
                choice = {Step::into_t2, t};
            }
        }
        for (std::uint32_t s = 0; s < ci.size(); ++s) {
            double v = del_forest_[i] + (forest_[at(ci[s], j)] - del_forest_[ci[s]]);
            if (v < best) {
                best = v;
                choice = {Step::into_t1, s};
            }
        }
        forest_[k] = best;
        forest_step_[k] = choice;
    }

    void solve_tree(std::size_t i, std::size_t j)
    {
        const auto& ci = t1_.children[i];
        const auto& cj = t2_.children[j];
        const std::size_t k = at(i, j);
        double best = forest_[k] + relabel_cost(model_, t1_.intervals[i], t2_.intervals[j]);
        Choice choice{Step::relabel, 0};
        for (std::uint32_t t = 0; t < cj.size(); ++t) {
            double v = ins_tree_[j] + (tree_[at(i, cj[t])] - ins_tree_[cj[t]]);
            if (v < best) {
                best = v;
                choice = {Step::into_t2, t};
            }
        }
        for (std::uint32_t s = 0; s < ci.size(); ++s) {
            double v = del_tree_[i] + (tree_[at(ci[s], j)] - del_tree_[ci[s]]);
            if (v < best) {
                best = v;
                choice = {Step::into_t1, s};
            }
        }
        tree_[k] = best;
        tree_step_[k] = choice;
    }

    void trace_tree(std::size_t i, std::size_t j, std::vector<std::pair<NodeId, NodeId>>& out) const
    {
        Choice c = tree_step_[at(i, j)];
        switch (c.step) {
        case Step::relabel:
            out.emplace_back(t1_.ids[i], t2_.ids[j]);
            trace_forest(i, j, out);
            break;
        case Step::into_t2:
            trace_tree(i, t2_.children[j][c.child], out);
            break;
        case Step::into_t1:
            trace_tree(t1_.children[i][c.child], j, out);
            break;
        default:
            break;
        }
    }

    void trace_forest(std::size_t i, std::size_t j, std::vector<std::pair<NodeId, NodeId>>& out) const
    {
        Choice c = forest_step_[at(i, j)];
        switch (c.step) {
        case Step::matching: {
            const auto& ci = t1_.children[i];
            const auto& cj = t2_.children[j];
            Assignment a = forest_assignment(i, j);
            for (std::size_t s = 0; s < ci.size(); ++s)
                if (a.row_to_col[s] < cj.size())
                    trace_tree(ci[s], cj[a.row_to_col[s]], out);
            break;
        }
        case Step::into_t2:
            trace_forest(i, t2_.children[j][c.child], out);
            break;
        case Step::into_t1:
            trace_forest(t1_.children[i][c.child], j, out);
            break;
        default:
            break;
        }
    }

    DenseTree t1_, t2_;
    CostModel model_;
    std::vector<double> del_tree_, del_forest_, ins_tree_, ins_forest_;
    std::vector<double> tree_, forest_;
    std::vector<Choice> tree_step_, forest_step_;
};

} // namespace detail

/// Constrained edit distance between two trees as given (no stabilization).
/// Either tree may be empty.
inline TedResult constrained_distance(const MergeTree& t1, const MergeTree& t2, CostModel model)
{
    if (!t1.empty() && !t2.empty() && t1.orientation() != t2.orientation())
        throw DataError("orientation mismatch: cannot compare a join tree with a split tree");
    if ((!t1.empty() && !t1.paired()) || (!t2.empty() && !t2.paired()))
        throw DataError("tree edit distance needs paired trees");
    detail::ConstrainedTed solver(t1, t2, model);
    TedResult r;
    r.distance = solver.distance();
    r.mapping = solver.mapping();
    r.cost_model = model;
    r.tree1 = t1;
    r.tree2 = t2;
    return r;
}

/// Tree edit distance between merge trees. Both inputs are stabilized with
/// their own epsilon (a fraction of each tree's max persistence) first.
inline TedResult ted(const MergeTree& t1, const MergeTree& t2, CostModel model,
                     const StabilizationConfig& stab = {})
{
    if (!t1.empty() && !t2.empty() && t1.orientation() != t2.orientation())
        throw DataError("orientation mismatch: cannot compare a join tree with a split tree");
    if ((!t1.empty() && !t1.paired()) || (!t2.empty() && !t2.paired()))
        throw DataError("tree edit distance needs paired trees");
    MergeTree s1 = stabilize(t1, stab);
    MergeTree s2 = stabilize(t2, stab);
    bool merged = s1.size() < t1.size() || s2.size() < t2.size();
    TedResult r = constrained_distance(s1, s2, model);
    r.epsilon_used = stab.epsilon_fraction;
    if (stab.add_fixed_cost && merged) {
        r.stabilization_surcharge = stab.fixed_cost;
        r.distance += stab.fixed_cost;
    }
    return r;
}

// ---------------------------------------------------------------------------
// Mapping checks

struct MappingViolation {
    std::string condition;
    std::vector<NodeId> ids;
};

namespace detail {

/// Ancestor queries on a tree by depth-walking.
class AncestorIndex {
public:
    explicit AncestorIndex(const MergeTree& t) : t_(t)
    {
        for (const auto& n : t.nodes())
            depth_[n.id] = t.depth(n.id);
    }

    bool proper_ancestor(NodeId a, NodeId b) const
    {
        if (a == b)
            return false;
        std::size_t da = depth_.at(a);
        while (depth_.at(b) > da)
            b = t_.parent(b);
        return a == b;
    }

    NodeId lca(NodeId a, NodeId b) const
    {
        while (depth_.at(a) > depth_.at(b))
            a = t_.parent(a);
        while (depth_.at(b) > depth_.at(a))
            b = t_.parent(b);
        while (a != b) {
            a = t_.parent(a);
            b = t_.parent(b);
        }
        return a;
    }

private:
    const MergeTree& t_;
    std::unordered_map<NodeId, std::size_t> depth_;
};

} // namespace detail

/// Lists every violated mapping condition: "unknown-node", "one-to-one",
/// "coverage", "ancestor-ordering" and "constrained-lca". Empty iff the
/// mapping is a valid constrained edit mapping between t1 and t2.
inline std::vector<MappingViolation> validate_mapping(const EditMapping& m, const MergeTree& t1,
                                                      const MergeTree& t2)
{
    std::vector<MappingViolation> out;
    std::map<NodeId, int> seen1, seen2;
    for (auto [a, b] : m.pairs) {
        if (!t1.contains(a))
            out.push_back({"unknown-node", {a}});
        if (!t2.contains(b))
            out.push_back({"unknown-node", {b}});
        ++seen1[a];
        ++seen2[b];
    }
    for (NodeId a : m.deleted) {
        if (!t1.contains(a))
            out.push_back({"unknown-node", {a}});
        ++seen1[a];
    }
    for (NodeId b : m.inserted) {
        if (!t2.contains(b))
            out.push_back({"unknown-node", {b}});
        ++seen2[b];
    }
    if (!out.empty())
        return out;
    std::map<NodeId, int> pair1, pair2;
    for (auto [a, b] : m.pairs) {
        ++pair1[a];
        ++pair2[b];
    }
    for (auto& [id, c] : pair1)
        if (c > 1)
            out.push_back({"one-to-one", {id}});
    for (auto& [id, c] : pair2)
        if (c > 1)
            out.push_back({"one-to-one", {id}});
    for (const auto& n : t1.nodes())
        if (seen1[n.id] != 1)
            out.push_back({"coverage", {n.id}});
    for (const auto& n : t2.nodes())
        if (seen2[n.id] != 1)
            out.push_back({"coverage", {n.id}});

    detail::AncestorIndex anc1(t1), anc2(t2);
    const auto& p = m.pairs;
    for (std::size_t x = 0; x < p.size(); ++x)
        for (std::size_t y = 0; y < p.size(); ++y) {
            if (x == y)
                continue;
            bool a1 = anc1.proper_ancestor(p[x].first, p[y].first);
            bool a2 = anc2.proper_ancestor(p[x].second, p[y].second);
            if (a1 != a2)
                out.push_back({"ancestor-ordering",
                               {p[x].first, p[y].first, p[x].second, p[y].second}});
        }
    for (std::size_t x = 0; x < p.size(); ++x)
        for (std::size_t y = x + 1; y < p.size(); ++y) {
            NodeId l1 = anc1.lca(p[x].first, p[y].first);
            NodeId l2 = anc2.lca(p[x].second, p[y].second);
            for (std::size_t z = 0; z < p.size(); ++z) {
                bool a1 = anc1.proper_ancestor(l1, p[z].first);
                bool a2 = anc2.proper_ancestor(l2, p[z].second);
                if (a1 != a2)
                    out.push_back({"constrained-lca", {p[x].first, p[y].first, p[z].first,
                                                       p[x].second, p[y].second, p[z].second}});
            }
        }
    return out;
}

/// Sum of relabel, delete and insert costs of a mapping. Throws if the
/// mapping does not cover both trees exactly once.
inline double mapping_cost(const EditMapping& m, const MergeTree& t1, const MergeTree& t2,
                           CostModel model)
{
    std::map<NodeId, int> seen1, seen2;
    for (auto [a, b] : m.pairs) {
        ++seen1[a];
        ++seen2[b];
    }
    for (NodeId a : m.deleted)
        ++seen1[a];
    for (NodeId b : m.inserted)
        ++seen2[b];
    bool ok = seen1.size() == t1.size() && seen2.size() == t2.size();
    for (auto& [id, c] : seen1)
        ok = ok && c == 1 && t1.contains(id);
    for (auto& [id, c] : seen2)
        ok = ok && c == 1 && t2.contains(id);
    if (!ok)
        throw DataError("mapping does not cover every node exactly once");
    double cost = 0.0;
    for (auto [a, b] : m.pairs)
        cost += relabel_cost(model, t1.node(a).interval, t2.node(b).interval);
    for (NodeId a : m.deleted)
        cost += delete_cost(model, t1.node(a).interval);
    for (NodeId b : m.inserted)
        cost += insert_cost(model, t2.node(b).interval);
    return cost;
}

} // namespace mtted

#endif
