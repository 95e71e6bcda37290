#ifndef MTTED_MAPPING_JSON_HPP
#define MTTED_MAPPING_JSON_HPP

#include <string>

#include <json.hpp>

#include "mtted/cost.hpp"
#include "mtted/error.hpp"
#include "mtted/ted.hpp"

namespace mtted {

inline nlohmann::json mapping_to_json(const TedResult& r)
{
    nlohmann::json j;
    j["pairs"] = nlohmann::json::array();
    for (auto [a, b] : r.mapping.pairs)
        j["pairs"].push_back({a, b});
    j["deleted"] = r.mapping.deleted;
    j["inserted"] = r.mapping.inserted;
    j["distance"] = r.distance;
    j["cost_model"] = to_string(r.cost_model);
    j["epsilon"] = r.epsilon_used;
    return j;
}

inline EditMapping mapping_from_json(const nlohmann::json& j)
{
    try {
        EditMapping m;
        for (const auto& p : j.at("pairs"))
            m.pairs.emplace_back(p.at(0).get<NodeId>(), p.at(1).get<NodeId>());
        m.deleted = j.at("deleted").get<std::vector<NodeId>>();
        m.inserted = j.at("inserted").get<std::vector<NodeId>>();
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed mapping JSON: ") + e.what());
    }
}

} // namespace mtted

#endif
