#ifndef MTTED_INTERVAL_HPP
#define MTTED_INTERVAL_HPP

#include <algorithm>

namespace mtted {

/// Birth-death pair of a topological feature, stored with birth <= death.
/// For split trees the extremum lies above its saddle, so the pair is stored
/// as (saddle value, maximum value).
struct Interval {
    double birth = 0.0;
    double death = 0.0;

    double persistence() const { return death - birth; }

    static Interval spanning(double a, double b) { return {std::min(a, b), std::max(a, b)}; }

    bool operator==(const Interval&) const = default;
};

} // namespace mtted

#endif
