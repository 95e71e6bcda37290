#ifndef MTTED_TESTS_RANDOM_TREES_HPP
#define MTTED_TESTS_RANDOM_TREES_HPP

#include <algorithm>
#include <map>
#include <random>
#include <vector>

#include "mtted/mergetree.hpp"

namespace mtted::testkit {

struct RandomTreeOptions {
    std::size_t nodes = 10;
    std::size_t max_degree = 2;
    Orientation orientation = Orientation::join;
    double lo = 0.0;
    double hi = 1.0;
    double leaf_bias = 0.5;
    bool shuffle_ids = true;
    /// Put the oldest extremum at lo and the root at hi (join) or the
    /// reverse (split), so every tree has the same root interval.
    bool pin_range = false;
};

namespace detail {

// Whether `comps` components can be reduced to exactly one in `steps` sweep
// events, each adding a leaf or merging up to max_degree components.
inline bool reachable(std::size_t comps, std::size_t steps, std::size_t max_degree,
                      std::map<std::pair<std::size_t, std::size_t>, bool>& memo)
{
    if (steps == 0)
        return comps == 1;
    auto key = std::make_pair(comps, steps);
    if (auto it = memo.find(key); it != memo.end())
        return it->second;
    bool ok = reachable(comps + 1, steps - 1, max_degree, memo);
    for (std::size_t k = 2; !ok && k <= std::min(comps, max_degree); ++k)
        ok = reachable(comps - k + 1, steps - 1, max_degree, memo);
    memo[key] = ok;
    return ok;
}

} // namespace detail

/// Random paired merge tree with opt.nodes nodes, or the next size that a
/// tree of the given max degree can have (binary trees have even size).
/// Scalars are distinct uniforms in [lo, hi]; the root takes the last value
/// in sweep order and has a single child.
template <typename Rng>
MergeTree random_tree(Rng& rng, RandomTreeOptions opt)
{
    std::map<std::pair<std::size_t, std::size_t>, bool> memo;
    std::size_t n = std::max<std::size_t>(opt.nodes, 1);
    while (n > 1 && !detail::reachable(0, n - 1, opt.max_degree, memo))
        ++n;
    std::uniform_real_distribution<double> unif(opt.lo, opt.hi);
    std::vector<double> values(n);
    for (auto& v : values)
        v = unif(rng);
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    while (values.size() < n) {
        values.push_back(unif(rng));
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());
    }
    if (opt.pin_range) {
        values.front() = opt.lo;
        values.back() = opt.hi;
    }
    if (opt.orientation == Orientation::split)
        std::reverse(values.begin(), values.end());

    std::vector<NodeId> ids(n);
    for (std::size_t i = 0; i < n; ++i)
        ids[i] = i;
    if (opt.shuffle_ids) {
        std::vector<NodeId> pool(4 * n);
        for (std::size_t i = 0; i < pool.size(); ++i)
            pool[i] = i;
        std::shuffle(pool.begin(), pool.end(), rng);
        pool.resize(n);
        ids = pool;
    }

    std::vector<SkeletonNode> skel(n);
    for (std::size_t i = 0; i < n; ++i) {
        skel[i].id = ids[i];
        skel[i].scalar = values[i];
    }
    if (n == 1)
        return persistence_pair(make_tree(opt.orientation, skel));

    std::vector<std::size_t> comps; // skeleton index of each component's top
    std::bernoulli_distribution leaf(opt.leaf_bias);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        std::size_t steps_left = n - 2 - i;
        std::vector<std::size_t> moves; // 0 = leaf, k = merge k
        if (detail::reachable(comps.size() + 1, steps_left, opt.max_degree, memo))
            moves.push_back(0);
        for (std::size_t k = 2; k <= std::min(comps.size(), opt.max_degree); ++k)
            if (detail::reachable(comps.size() - k + 1, steps_left, opt.max_degree, memo))
                moves.push_back(k);
        std::size_t move;
        bool can_leaf = !moves.empty() && moves.front() == 0;
        if (can_leaf && (moves.size() == 1 || leaf(rng))) {
            move = 0;
        } else {
            std::vector<std::size_t> merges(moves.begin() + (can_leaf ? 1 : 0), moves.end());
            move = merges[std::uniform_int_distribution<std::size_t>(0, merges.size() - 1)(rng)];
        }
        if (move == 0) {
            comps.push_back(i);
            continue;
        }
        std::shuffle(comps.begin(), comps.end(), rng);
        for (std::size_t k = 0; k < move; ++k) {
            skel[comps.back()].parent = ids[i];
            comps.pop_back();
        }
        comps.push_back(i);
    }
    skel[comps.front()].parent = ids[n - 1];
    return persistence_pair(make_tree(opt.orientation, skel));
}

} // namespace mtted::testkit

#endif
