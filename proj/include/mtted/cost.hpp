#ifndef MTTED_COST_HPP
#define MTTED_COST_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "mtted/error.hpp"
#include "mtted/interval.hpp"

namespace mtted {

/// Edit-operation costs over birth-death intervals.
///   winf:     L-infinity distance between diagram points, or both points to
///             the diagonal if that is cheaper.
///   overhang: length of the non-overlapping parts of two barcodes.
enum class CostModel { winf, overhang };

inline const char* to_string(CostModel m) { return m == CostModel::winf ? "winf" : "overhang"; }

inline CostModel parse_cost_model(const std::string& s)
{
    if (s == "winf")
        return CostModel::winf;
    if (s == "overhang")
        return CostModel::overhang;
    throw DataError("unknown cost model '" + s + "'");
}

inline double delete_cost(CostModel m, const Interval& p)
{
    double len = std::abs(p.death - p.birth);
    return m == CostModel::winf ? len / 2 : len;
}

inline double insert_cost(CostModel m, const Interval& q) { return delete_cost(m, q); }

inline double relabel_cost(CostModel m, const Interval& p, const Interval& q)
{
    double db = std::abs(q.birth - p.birth), dd = std::abs(q.death - p.death);
    double lp = std::abs(p.death - p.birth), lq = std::abs(q.death - q.birth);
    if (m == CostModel::winf)
        return std::min(std::max(db, dd), (lp + lq) / 2);
    return std::min(db + dd, lp + lq);
}

/// Cost over the alphabet extended with the null label; std::nullopt stands
/// for the null label.
inline double gamma(CostModel m, const std::optional<Interval>& p, const std::optional<Interval>& q)
{
    if (p && q)
        return relabel_cost(m, *p, *q);
    if (p)
        return delete_cost(m, *p);
    if (q)
        return insert_cost(m, *q);
    return 0.0;
}

} // namespace mtted

#endif
