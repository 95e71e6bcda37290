#ifndef MTTED_ORACLE_HPP
#define MTTED_ORACLE_HPP

// Brute-force reference for the edit distance on tiny trees: enumerate every
// one-to-one partial node correspondence, keep the valid ones and take the
// cheapest. Exponential; intended for tests and debugging only.

#include <cstddef>
#include <limits>
#include <vector>

#include "mtted/cost.hpp"
#include "mtted/error.hpp"
#include "mtted/mergetree.hpp"
#include "mtted/ted.hpp"

namespace mtted {

struct OracleResult {
    double distance = 0.0;
    EditMapping witness;
    std::size_t mappings_enumerated = 0;
};

enum class MappingClass {
    constrained, ///< one-to-one, ancestor ordering and the lca condition
    edit,        ///< one-to-one and ancestor ordering only
};

namespace detail {

class MappingEnumerator {
public:
    MappingEnumerator(const MergeTree& t1, const MergeTree& t2, CostModel model, MappingClass cls)
        : t1_(t1), t2_(t2), model_(model), cls_(cls)
    {
        ids1_ = preorder(t1);
        ids2_ = preorder(t2);
        anc1_ = ancestry(t1, ids1_);
        anc2_ = ancestry(t2, ids2_);
        lca1_ = lcas(anc1_);
        lca2_ = lcas(anc2_);
        image_.assign(ids1_.size(), none);
        used_.assign(ids2_.size(), 0);
    }

    OracleResult run()
    {
        best_.distance = std::numeric_limits<double>::infinity();
        recurse(0);
        return best_;
    }

private:
    static constexpr std::size_t none = static_cast<std::size_t>(-1);

    static std::vector<NodeId> preorder(const MergeTree& t)
    {
        std::vector<NodeId> out;
        if (t.empty())
            return out;
        std::vector<NodeId> stack{t.root()};
        while (!stack.empty()) {
            NodeId id = stack.back();
            stack.pop_back();
            out.push_back(id);
            const auto& ch = t.node(id).children;
            for (auto it = ch.rbegin(); it != ch.rend(); ++it)
                stack.push_back(*it);
        }
        return out;
    }

    /// anc[a][b] is true iff node a is a proper ancestor of node b.
    static std::vector<std::vector<char>> ancestry(const MergeTree& t, const std::vector<NodeId>& ids)
    {
        const std::size_t n = ids.size();
        std::vector<std::vector<char>> anc(n, std::vector<char>(n, 0));
        for (std::size_t b = 0; b < n; ++b)
            for (NodeId p = t.parent(ids[b]); p != kNoNode; p = t.parent(p))
                for (std::size_t a = 0; a < n; ++a)
                    if (ids[a] == p)
                        anc[a][b] = 1;
        return anc;
    }

    static std::vector<std::vector<std::size_t>> lcas(const std::vector<std::vector<char>>& anc)
    {
        const std::size_t n = anc.size();
        std::vector<std::vector<std::size_t>> l(n, std::vector<std::size_t>(n, 0));
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b) {
                // Deepest common ancestor-or-self: the one with most ancestors.
                std::size_t best = none, best_depth = 0;
                for (std::size_t c = 0; c < n; ++c) {
                    bool ca = c == a || anc[c][a];
                    bool cb = c == b || anc[c][b];
                    if (!ca || !cb)
                        continue;
                    std::size_t d = 0;
                    for (std::size_t x = 0; x < n; ++x)
                        d += anc[x][c];
                    if (best == none || d > best_depth) {
                        best = c;
                        best_depth = d;
                    }
                }
                l[a][b] = best;
            }
        return l;
    }

    bool compatible(std::size_t i, std::size_t j) const
    {
        for (std::size_t k = 0; k < i; ++k) {
            std::size_t jk = image_[k];
            if (jk == none)
                continue;
            if (anc1_[k][i] != anc2_[jk][j] || anc1_[i][k] != anc2_[j][jk])
                return false;
        }
        return true;
    }

    bool lca_condition() const
    {
        std::vector<std::size_t> dom;
        for (std::size_t i = 0; i < image_.size(); ++i)
            if (image_[i] != none)
                dom.push_back(i);
        for (std::size_t x = 0; x < dom.size(); ++x)
            for (std::size_t y = x + 1; y < dom.size(); ++y) {
                std::size_t l1 = lca1_[dom[x]][dom[y]];
                std::size_t l2 = lca2_[image_[dom[x]]][image_[dom[y]]];
                for (std::size_t z : dom)
                    if (anc1_[l1][z] != anc2_[l2][image_[z]])
                        return false;
            }
        return true;
    }

    void recurse(std::size_t i)
    {
        if (i == ids1_.size()) {
            if (cls_ == MappingClass::constrained && !lca_condition())
                return;
            ++best_.mappings_enumerated;
            EditMapping m;
            std::vector<char> hit(ids2_.size(), 0);
            for (std::size_t k = 0; k < ids1_.size(); ++k) {
                if (image_[k] == none) {
                    m.deleted.push_back(ids1_[k]);
                } else {
                    m.pairs.emplace_back(ids1_[k], ids2_[image_[k]]);
                    hit[image_[k]] = 1;
                }
            }
            for (std::size_t j = 0; j < ids2_.size(); ++j)
                if (!hit[j])
                    m.inserted.push_back(ids2_[j]);
            double c = mapping_cost(m, t1_, t2_, model_);
            if (c < best_.distance) {
                best_.distance = c;
                best_.witness = std::move(m);
            }
            return;
        }
        image_[i] = none;
        recurse(i + 1);
        for (std::size_t j = 0; j < ids2_.size(); ++j) {
            if (used_[j] || !compatible(i, j))
                continue;
            used_[j] = 1;
            image_[i] = j;
            recurse(i + 1);
            image_[i] = none;
            used_[j] = 0;
        }
    }

    const MergeTree& t1_;
    const MergeTree& t2_;
    CostModel model_;
    MappingClass cls_;
    std::vector<NodeId> ids1_, ids2_;
    std::vector<std::vector<char>> anc1_, anc2_;
    std::vector<std::vector<std::size_t>> lca1_, lca2_;
    std::vector<std::size_t> image_;
    std::vector<char> used_;
    OracleResult best_;
};

} // namespace detail

inline constexpr std::size_t kOracleMaxNodes = 8;

/// Minimum cost over all mappings of the given class. Trees are used as
/// given (no stabilization). Limited to kOracleMaxNodes nodes per tree.
inline OracleResult brute_force_distance(const MergeTree& t1, const MergeTree& t2, CostModel model,
                                         MappingClass cls)
{
    if (t1.size() > kOracleMaxNodes || t2.size() > kOracleMaxNodes)
        throw DataError("brute force oracle is limited to " + std::to_string(kOracleMaxNodes) +
                        " nodes per tree");
    return detail::MappingEnumerator(t1, t2, model, cls).run();
}

inline OracleResult brute_force_dc(const MergeTree& t1, const MergeTree& t2, CostModel model)
{
    return brute_force_distance(t1, t2, model, MappingClass::constrained);
}

} // namespace mtted

#endif
