#ifndef MTTED_MERGETREE_HPP
#define MTTED_MERGETREE_HPP

// Join and split trees of scalar graphs, elder-rule persistence pairing,
// persistence simplification, epsilon-stabilization of near-equal saddles,
// sub-tree extraction and a line-based text format.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "mtted/error.hpp"
#include "mtted/field.hpp"
#include "mtted/interval.hpp"

namespace mtted {

enum class Orientation { join, split };
enum class NodeKind { extremum, saddle, root };

using NodeId = std::uint64_t;
inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();

inline const char* to_string(Orientation o) { return o == Orientation::join ? "join" : "split"; }

inline const char* to_string(NodeKind k)
{
    switch (k) {
    case NodeKind::extremum: return "extremum";
    case NodeKind::saddle: return "saddle";
    default: return "root";
    }
}

inline Orientation parse_orientation(const std::string& s)
{
    if (s == "join")
        return Orientation::join;
    if (s == "split")
        return Orientation::split;
    throw DataError("unknown tree orientation '" + s + "'");
}

struct MergeTreeNode {
    NodeId id = 0;
    double scalar = 0.0;
    NodeKind kind = NodeKind::extremum;
    std::vector<NodeId> children;
    Interval interval;
    NodeId pair = kNoNode;

    bool operator==(const MergeTreeNode&) const = default;
};

/// Rooted merge tree. Nodes are kept sorted by id and child lists sorted by
/// id, so two trees with the same content compare equal. A default
/// constructed tree is the empty tree.
///
/// Extrema carry their own birth-death interval. A saddle (or the root) holds
/// the interval of the extremum it is paired with; when several components
/// die at one saddle, the extra extrema point back at that saddle and keep
/// their own intervals.
class MergeTree {
public:
    MergeTree() = default;
    explicit MergeTree(Orientation o) : orientation_(o), paired_(true) {}

    MergeTree(Orientation o, std::vector<MergeTreeNode> nodes, NodeId root, bool paired)
        : orientation_(o), nodes_(std::move(nodes)), root_(root), paired_(paired)
    {
        std::sort(nodes_.begin(), nodes_.end(),
                  [](const auto& a, const auto& b) { return a.id < b.id; });
        for (auto& n : nodes_)
            std::sort(n.children.begin(), n.children.end());
        validate();
    }

    Orientation orientation() const { return orientation_; }
    bool empty() const { return nodes_.empty(); }
    std::size_t size() const { return nodes_.size(); }
    NodeId root() const { return root_; }
    bool paired() const { return paired_; }
    const std::vector<MergeTreeNode>& nodes() const { return nodes_; }

    bool contains(NodeId id) const { return index_.count(id) != 0; }

    std::size_t index_of(NodeId id) const
    {
        auto it = index_.find(id);
        if (it == index_.end())
            throw DataError("unknown node id " + std::to_string(id));
        return it->second;
    }

    const MergeTreeNode& node(NodeId id) const { return nodes_[index_of(id)]; }

    /// Parent id, or kNoNode for the root.
    NodeId parent(NodeId id) const { return parent_[index_of(id)]; }

    /// True iff a is swept strictly before b: increasing (scalar, id) for
    /// join trees, decreasing for split trees.
    bool swept_before(NodeId a, NodeId b) const
    {
        return sweeps_before(orientation_, node(a).scalar, a, node(b).scalar, b);
    }

    static bool sweeps_before(Orientation o, double sa, NodeId a, double sb, NodeId b)
    {
        bool less = sa != sb ? sa < sb : a < b;
        bool greater = sa != sb ? sa > sb : a > b;
        return o == Orientation::join ? less : greater;
    }

    /// Node ids in post-order (children before parents, children visited in
    /// id order).
    std::vector<NodeId> postorder() const
    {
        std::vector<NodeId> out;
        if (empty())
            return out;
        out.reserve(nodes_.size());
        std::vector<std::pair<NodeId, std::size_t>> stack{{root_, 0}};
        while (!stack.empty()) {
            auto& [id, next] = stack.back();
            const auto& ch = node(id).children;
            if (next < ch.size()) {
                NodeId c = ch[next++];
                stack.emplace_back(c, 0);
            } else {
                out.push_back(id);
                stack.pop_back();
            }
        }
        return out;
    }

    std::size_t depth(NodeId id) const
    {
        std::size_t d = 0;
        for (NodeId p = parent(id); p != kNoNode; p = parent(p))
            ++d;
        return d;
    }

    double max_persistence() const
    {
        double m = 0;
        for (const auto& n : nodes_)
            m = std::max(m, n.interval.persistence());
        return m;
    }

    std::size_t count(NodeKind k) const
    {
        return static_cast<std::size_t>(std::count_if(
            nodes_.begin(), nodes_.end(), [k](const auto& n) { return n.kind == k; }));
    }

    bool operator==(const MergeTree& o) const
    {
        return orientation_ == o.orientation_ && root_ == o.root_ && paired_ == o.paired_ &&
               nodes_ == o.nodes_;
    }

private:
    void validate()
    {
        index_.clear();
        for (std::size_t i = 0; i < nodes_.size(); ++i)
            if (!index_.emplace(nodes_[i].id, i).second)
                throw DataError("duplicate node id " + std::to_string(nodes_[i].id));
        parent_.assign(nodes_.size(), kNoNode);
        if (nodes_.empty()) {
            root_ = kNoNode;
            return;
        }
        if (!contains(root_))
            throw DataError("root id " + std::to_string(root_) + " is not a node");
        for (const auto& n : nodes_) {
            for (NodeId c : n.children) {
                auto it = index_.find(c);
                if (it == index_.end())
                    throw DataError("node " + std::to_string(n.id) +
                                    " has dangling child reference " + std::to_string(c));
                if (parent_[it->second] != kNoNode || c == n.id)
                    throw DataError("node " + std::to_string(c) + " has more than one parent");
                parent_[it->second] = n.id;
            }
        }
        if (parent_[index_of(root_)] != kNoNode)
            throw DataError("cycle: root " + std::to_string(root_) + " has a parent");
        // Every node must be reachable from the root, otherwise some nodes
        // form a cycle detached from it.
        std::size_t reached = 0;
        std::vector<NodeId> stack{root_};
        while (!stack.empty()) {
            NodeId id = stack.back();
            stack.pop_back();
            ++reached;
            for (NodeId c : node(id).children)
                stack.push_back(c);
        }
        if (reached != nodes_.size())
            throw DataError("cycle or disconnected nodes: only " + std::to_string(reached) +
                            " of " + std::to_string(nodes_.size()) +
                            " nodes reachable from the root");
        for (const auto& n : nodes_) {
            NodeKind want = n.id == root_        ? NodeKind::root
                            : n.children.empty() ? NodeKind::extremum
                                                 : NodeKind::saddle;
            if (n.kind != want)
                throw DataError("node " + std::to_string(n.id) + " has kind " +
                                to_string(n.kind) + ", expected " + to_string(want));
            if (n.kind == NodeKind::saddle && n.children.size() < 2)
                throw DataError("saddle " + std::to_string(n.id) + " has fewer than two children");
            for (NodeId c : n.children)
                if (!sweeps_before(orientation_, node(c).scalar, c, n.scalar, n.id))
                    throw DataError("node " + std::to_string(n.id) +
                                    " is not above its child " + std::to_string(c) +
                                    " in sweep order");
        }
        if (paired_)
            validate_pairs();
    }

    void validate_pairs() const
    {
        for (const auto& n : nodes_) {
            if (n.interval.birth > n.interval.death)
                throw DataError("node " + std::to_string(n.id) + " has birth > death");
            if (n.pair == kNoNode || !contains(n.pair))
                throw DataError("node " + std::to_string(n.id) +
                                " references missing pair id");
            const auto& p = node(n.pair);
            if (n.kind == NodeKind::extremum) {
                bool ancestor = false;
                for (NodeId a = parent(n.id); a != kNoNode; a = parent(a))
                    ancestor = ancestor || a == n.pair;
                if (!ancestor)
                    throw DataError("extremum " + std::to_string(n.id) +
                                    " is paired with a non-ancestor");
            } else if (n.pair != n.id) {
                if (p.pair != n.id || p.interval != n.interval)
                    throw DataError("node " + std::to_string(n.id) +
                                    " and its pair disagree on the pairing");
            }
        }
    }

    Orientation orientation_ = Orientation::join;
    std::vector<MergeTreeNode> nodes_;
    NodeId root_ = kNoNode;
    bool paired_ = false;
    std::unordered_map<NodeId, std::size_t> index_;
    std::vector<NodeId> parent_;
};

/// Node of a tree skeleton: structure and scalars only.
struct SkeletonNode {
    NodeId id = 0;
    double scalar = 0.0;
    NodeId parent = kNoNode;
};

/// Builds an unpaired tree from parent links. Kinds follow from structure.
inline MergeTree make_tree(Orientation o, const std::vector<SkeletonNode>& skeleton)
{
    std::map<NodeId, std::size_t> pos;
    std::vector<MergeTreeNode> nodes(skeleton.size());
    NodeId root = kNoNode;
    for (std::size_t i = 0; i < skeleton.size(); ++i) {
        nodes[i].id = skeleton[i].id;
        nodes[i].scalar = skeleton[i].scalar;
        pos[skeleton[i].id] = i;
        if (skeleton[i].parent == kNoNode) {
            if (root != kNoNode)
                throw DataError("skeleton has more than one root");
            root = skeleton[i].id;
        }
    }
    for (const auto& s : skeleton) {
        if (s.parent == kNoNode)
            continue;
        auto it = pos.find(s.parent);
        if (it == pos.end())
            throw DataError("skeleton node " + std::to_string(s.id) + " has a missing parent");
        nodes[it->second].children.push_back(s.id);
    }
    if (!skeleton.empty() && root == kNoNode)
        throw DataError("skeleton has no root");
    for (auto& n : nodes)
        n.kind = n.id == root ? NodeKind::root
                 : n.children.empty() ? NodeKind::extremum
                                      : NodeKind::saddle;
    return MergeTree(o, std::move(nodes), root, false);
}

// ---------------------------------------------------------------------------
// Construction

/// Union-find sweep over the vertices in increasing (join) or decreasing
/// (split) total order. Regular vertices are pruned; node ids are vertex
/// indices. The result is unpaired.
inline MergeTree build_merge_tree(const ScalarGraph& graph, Orientation o)
{
    const std::size_t n = graph.vertex_count();
    if (n == 0)
        throw DataError("cannot build a merge tree of an empty graph");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return graph.precedes(a, b); });
    if (o == Orientation::split)
        std::reverse(order.begin(), order.end());

    auto adj = graph.adjacency();
    std::vector<std::size_t> uf(n), rank(n, 0), top(n);
    std::iota(uf.begin(), uf.end(), 0);
    std::vector<char> swept(n, 0);
    auto find = [&](std::size_t x) {
        while (uf[x] != x) {
            uf[x] = uf[uf[x]];
            x = uf[x];
        }
        return x;
    };
    auto unite = [&](std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b)
            return a;
        if (rank[a] < rank[b])
            std::swap(a, b);
        uf[b] = a;
        if (rank[a] == rank[b])
            ++rank[a];
        return a;
    };

    std::vector<SkeletonNode> skeleton;
    std::vector<std::size_t> comps;
    std::size_t components = 0;
    for (std::size_t step = 0; step < n; ++step) {
        const std::size_t v = order[step];
        const bool last = step + 1 == n;
        comps.clear();
        for (std::size_t u : adj[v])
            if (swept[u])
                comps.push_back(find(u));
        std::sort(comps.begin(), comps.end());
        comps.erase(std::unique(comps.begin(), comps.end()), comps.end());
        swept[v] = 1;

        bool critical = comps.size() != 1 || last;
        if (critical) {
            skeleton.push_back({v, graph.scalars()[v], kNoNode});
            for (std::size_t c : comps)
                skeleton[top[c]].parent = v;
        }
        std::size_t r = v;
        for (std::size_t c : comps)
            r = unite(r, c);
        if (comps.empty())
            ++components;
        else
            components -= comps.size() - 1;
        if (critical)
            top[r] = skeleton.size() - 1;
        else
            top[r] = top[comps.front()];
    }
    if (components != 1)
        throw DataError("graph is disconnected (" + std::to_string(components) +
                        " components)");
    return make_tree(o, skeleton);
}

namespace detail {

/// Elder-rule pairing on the existing structure. Rewrites every interval
/// and pair field.
inline std::vector<MergeTreeNode> pair_nodes(const MergeTree& t)
{
    std::vector<MergeTreeNode> nodes = t.nodes();
    if (t.empty())
        return nodes;
    auto at = [&](NodeId id) -> MergeTreeNode& { return nodes[t.index_of(id)]; };
    std::unordered_map<NodeId, NodeId> oldest;
    for (NodeId id : t.postorder()) {
        auto& nd = at(id);
        if (nd.children.empty()) {
            oldest[id] = id;
            if (id == t.root()) {
                nd.interval = {nd.scalar, nd.scalar};
                nd.pair = id;
            }
            continue;
        }
        NodeId survivor = kNoNode;
        for (NodeId c : nd.children) {
            NodeId o = oldest[c];
            if (survivor == kNoNode || t.swept_before(o, survivor))
                survivor = o;
        }
        NodeId held = kNoNode;
        for (NodeId c : nd.children) {
            NodeId o = oldest[c];
            if (o == survivor)
                continue;
            auto& ext = at(o);
            ext.interval = Interval::spanning(ext.scalar, nd.scalar);
            ext.pair = id;
            if (held == kNoNode)
                held = o;
            else {
                double ph = at(held).interval.persistence(), po = ext.interval.persistence();
                if (po > ph || (po == ph && t.swept_before(o, held)))
                    held = o;
            }
        }
        if (id == t.root()) {
            auto& ext = at(survivor);
            ext.interval = Interval::spanning(ext.scalar, nd.scalar);
            ext.pair = id;
            held = survivor;
        }
        nd.interval = at(held).interval;
        nd.pair = held;
        oldest[id] = survivor;
    }
    return nodes;
}

} // namespace detail

inline MergeTree persistence_pair(const MergeTree& t)
{
    return MergeTree(t.orientation(), detail::pair_nodes(t), t.root(), true);
}

/// Convenience: build then pair.
inline MergeTree make_merge_tree(const ScalarGraph& graph, Orientation o)
{
    return persistence_pair(build_merge_tree(graph, o));
}

// ---------------------------------------------------------------------------
// Simplification

namespace detail {

inline std::vector<SkeletonNode> skeleton_of(const MergeTree& t)
{
    std::vector<SkeletonNode> s;
    s.reserve(t.size());
    for (const auto& n : t.nodes())
        s.push_back({n.id, n.scalar, t.parent(n.id)});
    return s;
}

} // namespace detail

/// Cancels leaf-saddle pairs in increasing order of persistence while their
/// persistence is below threshold * max persistence. A threshold of 1 or
/// more cancels every pair except the root pair.
inline MergeTree simplify(const MergeTree& tree, double threshold)
{
    if (!tree.paired())
        throw DataError("simplify needs a paired tree");
    if (tree.empty())
        return tree;
    const double cutoff = threshold * tree.max_persistence();
    MergeTree cur = tree;
    while (true) {
        NodeId victim = kNoNode;
        double best = 0;
        for (const auto& n : cur.nodes()) {
            if (n.kind != NodeKind::extremum || n.pair == cur.root())
                continue;
            double p = n.interval.persistence();
            if (!(p < cutoff || threshold >= 1.0))
                continue;
            if (victim == kNoNode || p < best || (p == best && n.id < victim)) {
                victim = n.id;
                best = p;
            }
        }
        if (victim == kNoNode)
            return cur;

        auto skel = detail::skeleton_of(cur);
        std::map<NodeId, std::size_t> pos;
        for (std::size_t i = 0; i < skel.size(); ++i)
            pos[skel[i].id] = i;
        NodeId parent = cur.parent(victim);
        skel[pos[victim]].parent = kNoNode;
        std::vector<NodeId> rest;
        for (NodeId c : cur.node(parent).children)
            if (c != victim)
                rest.push_back(c);
        std::set<NodeId> drop{victim};
        if (parent != cur.root() && rest.size() < 2) {
            // The saddle became regular: splice it out.
            NodeId grand = cur.parent(parent);
            for (NodeId c : rest)
                skel[pos[c]].parent = grand;
            drop.insert(parent);
        }
        std::vector<SkeletonNode> kept;
        for (const auto& s : skel)
            if (!drop.count(s.id))
                kept.push_back(s);
        cur = persistence_pair(make_tree(cur.orientation(), kept));
    }
}

// ---------------------------------------------------------------------------
// Stabilization

struct StabilizationConfig {
    double epsilon_fraction = 0.0;
    bool add_fixed_cost = false;
    double fixed_cost = 0.0;
};

/// Merges each saddle into its parent saddle (or the root) while their
/// scalar gap is below epsilon_fraction * max persistence, deepest saddles
/// first. The merged node keeps its position and id; it holds the interval
/// of the highest-persistence member, and extrema paired with absorbed
/// saddles are re-pointed at it. Extremum intervals are unchanged.
inline MergeTree stabilize(const MergeTree& tree, const StabilizationConfig& config)
{
    if (config.epsilon_fraction < 0 || config.epsilon_fraction > 1)
        throw DataError("epsilon fraction must lie in [0, 1]");
    if (config.fixed_cost < 0)
        throw DataError("stabilization fixed cost must be non-negative");
    if (!tree.paired())
        throw DataError("stabilize needs a paired tree");
    if (tree.empty())
        return tree;
    const double eps = config.epsilon_fraction * tree.max_persistence();

    std::map<NodeId, NodeId> parent;
    std::map<NodeId, std::vector<NodeId>> children;
    std::map<NodeId, std::vector<NodeId>> members;
    for (const auto& n : tree.nodes()) {
        parent[n.id] = tree.parent(n.id);
        children[n.id] = n.children;
        if (n.kind != NodeKind::extremum)
            members[n.id] = {n.id};
    }
    auto depth_of = [&](NodeId id) {
        std::size_t d = 0;
        for (NodeId p = parent[id]; p != kNoNode; p = parent[p])
            ++d;
        return d;
    };

    bool changed = true;
    while (changed) {
        changed = false;
        std::vector<NodeId> saddles;
        for (auto& [id, m] : members)
            if (id != tree.root())
                saddles.push_back(id);
        std::map<NodeId, std::size_t> dmap;
        for (NodeId s : saddles)
            dmap[s] = depth_of(s);
        std::sort(saddles.begin(), saddles.end(), [&](NodeId a, NodeId b) {
            if (dmap[a] != dmap[b])
                return dmap[a] > dmap[b];
            return tree.swept_before(a, b);
        });
        for (NodeId s : saddles) {
            NodeId p = parent[s];
            if (!members.count(p))
                continue;
            double gap = std::abs(tree.node(p).scalar - tree.node(s).scalar);
            if (!(gap < eps))
                continue;
            auto& pc = children[p];
            pc.erase(std::find(pc.begin(), pc.end(), s));
            for (NodeId c : children[s]) {
                pc.push_back(c);
                parent[c] = p;
            }
            auto& pm = members[p];
            pm.insert(pm.end(), members[s].begin(), members[s].end());
            members.erase(s);
            children.erase(s);
            parent.erase(s);
            changed = true;
        }
    }

    std::map<NodeId, NodeId> absorbed_into;
    for (auto& [id, m] : members)
        for (NodeId x : m)
            absorbed_into[x] = id;

    std::vector<MergeTreeNode> nodes;
    for (const auto& n : tree.nodes()) {
        if (!parent.count(n.id))
            continue;
        MergeTreeNode out = n;
        out.children = children[n.id];
        if (n.kind == NodeKind::extremum) {
            out.pair = absorbed_into.at(n.pair);
        } else if (n.id != tree.root()) {
            NodeId best = n.id;
            for (NodeId x : members[n.id]) {
                double px = tree.node(x).interval.persistence();
                double pb = tree.node(best).interval.persistence();
                if (px > pb)
                    best = x;
            }
            out.interval = tree.node(best).interval;
            out.pair = tree.node(best).pair;
        }
        nodes.push_back(std::move(out));
    }
    return MergeTree(tree.orientation(), std::move(nodes), tree.root(), true);
}

// ---------------------------------------------------------------------------
// Sub-tree extraction

struct Subtree {
    NodeId top = kNoNode; ///< highest node of the piece in the original tree
    MergeTree tree;
};

/// Cuts the tree at min_scalar (a super-level threshold for split trees, a
/// sub-level threshold for join trees) and returns each connected piece
/// whose nodes all pass the threshold, re-rooted at the saddle it hangs
/// from and re-paired. Pieces whose root-pair persistence is below
/// min_persistence are dropped. Ordered by top node id.
inline std::vector<Subtree> extract_subtree_regions(const MergeTree& tree, double min_persistence,
                                                    double min_scalar)
{
    if (!tree.paired())
        throw DataError("extract_subtrees needs a paired tree");
    std::vector<Subtree> out;
    if (tree.empty())
        return out;
    auto passes = [&](double s) {
        return tree.orientation() == Orientation::split ? s >= min_scalar : s <= min_scalar;
    };
    std::vector<NodeId> tops;
    for (const auto& n : tree.nodes()) {
        if (!passes(n.scalar))
            continue;
        NodeId p = tree.parent(n.id);
        if (p == kNoNode || !passes(tree.node(p).scalar))
            tops.push_back(n.id);
    }
    for (NodeId top : tops) {
        MergeTree piece;
        if (top == tree.root()) {
            piece = tree;
        } else {
            NodeId hang = tree.parent(top);
            std::vector<SkeletonNode> skel{{hang, tree.node(hang).scalar, kNoNode}};
            std::vector<NodeId> stack{top};
            while (!stack.empty()) {
                NodeId id = stack.back();
                stack.pop_back();
                const auto& nd = tree.node(id);
                skel.push_back({id, nd.scalar, id == top ? hang : tree.parent(id)});
                for (NodeId c : nd.children)
                    stack.push_back(c);
            }
            piece = persistence_pair(make_tree(tree.orientation(), skel));
        }
        if (piece.node(piece.root()).interval.persistence() >= min_persistence)
            out.push_back({top, std::move(piece)});
    }
    return out;
}

inline std::vector<MergeTree> extract_subtrees(const MergeTree& tree, double min_persistence,
                                               double min_scalar)
{
    std::vector<MergeTree> out;
    for (auto& s : extract_subtree_regions(tree, min_persistence, min_scalar))
        out.push_back(std::move(s.tree));
    return out;
}

// ---------------------------------------------------------------------------
// Text format
//
//   mergetree <join|split> root=<id>
//   node <id> <scalar> <kind> <pair-id> <birth> <death> children=<comma-list>
//
// Unpaired trees write '-' for the pair id. The empty tree writes root=none.

inline void write_tree(std::ostream& out, const MergeTree& t)
{
    out << "mergetree " << to_string(t.orientation()) << " root=";
    if (t.empty())
        out << "none";
    else
        out << t.root();
    out << '\n';
    for (const auto& n : t.nodes()) {
        out << "node " << n.id << ' ' << detail::format_double(n.scalar) << ' '
            << to_string(n.kind) << ' ';
        if (t.paired())
            out << n.pair;
        else
            out << '-';
        out << ' ' << detail::format_double(n.interval.birth) << ' '
            << detail::format_double(n.interval.death) << " children=";
        for (std::size_t i = 0; i < n.children.size(); ++i)
            out << (i ? "," : "") << n.children[i];
        out << '\n';
    }
}

inline std::string serialize(const MergeTree& t)
{
    std::ostringstream os;
    write_tree(os, t);
    return os.str();
}

inline MergeTree read_tree(std::istream& in, const std::string& source = "<tree>")
{
    std::string line;
    std::size_t line_no = 0;
    auto fail = [&](const std::string& msg) -> DataError {
        return DataError(source + ":" + std::to_string(line_no) + ": " + msg);
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") != std::string::npos)
            break;
    }
    std::istringstream hs(line);
    std::string magic, orient, rootf;
    if (!(hs >> magic >> orient >> rootf) || magic != "mergetree" ||
        rootf.rfind("root=", 0) != 0)
        throw fail("malformed header, expected 'mergetree <join|split> root=<id>'");
    Orientation o;
    try {
        o = parse_orientation(orient);
    } catch (const DataError& e) {
        throw fail(e.what());
    }
    std::string rootv = rootf.substr(5);
    NodeId root = kNoNode;
    if (rootv != "none" && !detail::parse_int(rootv, root))
        throw fail("malformed root id '" + rootv + "'");

    std::vector<MergeTreeNode> nodes;
    std::optional<bool> paired;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        std::istringstream ls(line);
        std::string tag, id, scalar, kind, pair, birth, death, ch, extra;
        if (!(ls >> tag >> id >> scalar >> kind >> pair >> birth >> death >> ch) ||
            tag != "node" || (ls >> extra))
            throw fail("malformed node record");
        MergeTreeNode n;
        if (!detail::parse_int(id, n.id) || n.id == kNoNode)
            throw fail("bad node id '" + id + "'");
        if (!detail::parse_double(scalar, n.scalar) || !detail::parse_double(birth, n.interval.birth) ||
            !detail::parse_double(death, n.interval.death))
            throw fail("bad number in node record");
        if (kind == "extremum")
            n.kind = NodeKind::extremum;
        else if (kind == "saddle")
            n.kind = NodeKind::saddle;
        else if (kind == "root")
            n.kind = NodeKind::root;
        else
            throw fail("unknown node kind '" + kind + "'");
        bool this_paired = pair != "-";
        if (paired && *paired != this_paired)
            throw fail("mixed paired and unpaired records");
        paired = this_paired;
        if (this_paired && !detail::parse_int(pair, n.pair))
            throw fail("bad pair id '" + pair + "'");
        if (ch.rfind("children=", 0) != 0)
            throw fail("missing children= field");
        std::string list = ch.substr(9);
        std::size_t start = 0;
        while (start < list.size()) {
            std::size_t comma = list.find(',', start);
            std::string item = list.substr(start, comma == std::string::npos ? std::string::npos
                                                                              : comma - start);
            NodeId c;
            if (!detail::parse_int(item, c))
                throw fail("bad child id '" + item + "'");
            n.children.push_back(c);
            if (comma == std::string::npos)
                break;
            start = comma + 1;
        }
        nodes.push_back(std::move(n));
    }
    if (nodes.empty() != (root == kNoNode))
        throw DataError(source + ": root=none must go with an empty node list");
    try {
        return MergeTree(o, std::move(nodes), root, paired.value_or(true));
    } catch (const DataError& e) {
        throw DataError(source + ": " + e.what());
    }
}

inline MergeTree deserialize(const std::string& text)
{
    std::istringstream is(text);
    return read_tree(is);
}

inline MergeTree load_tree(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open " + path);
    return read_tree(in, path);
}

inline void save_tree(const std::string& path, const MergeTree& t)
{
    std::ofstream out(path);
    if (!out)
        throw DataError("cannot write " + path);
    write_tree(out, t);
}

} // namespace mtted

#endif
