#pragma once

#include <json.hpp>

#include "czgrid/dyadic_grid.hpp"

namespace czgrid::detail {

using json = nlohmann::json;

inline json id_to_json(const DyadicSetId& id) {
    json cell = json::array();
    for (int i = 0; i < id.n; ++i) cell.push_back(id.cell[i]);
    json path = json::array();
    for (const auto& s : id.path) path.push_back(json::array({s.vertical ? 1 : 0, static_cast<int>(s.index)}));
    return json{{"half", to_string(id.half)}, {"band", to_string(id.band)}, {"strip", id.strip},
                {"cell", cell},               {"path", path}};
}

inline DyadicSetId id_from_json(const json& j, int n) {
    DyadicSetId id;
    id.n = n;
    const std::string half = j.at("half").get<std::string>();
    if (half == "upper") {
        id.half = Half::Upper;
    } else if (half == "lower") {
        id.half = Half::Lower;
    } else {
        throw std::invalid_argument("bad half '" + half + "'");
    }
    const std::string band = j.at("band").get<std::string>();
    if (band == "N") {
        id.band = Band::N;
    } else if (band == "Ntilde") {
        id.band = Band::NTilde;
    } else {
        throw std::invalid_argument("bad band '" + band + "'");
    }
    id.strip = j.at("strip").get<int>();
    const auto& cell = j.at("cell");
    if (!cell.is_array() || static_cast<int>(cell.size()) != n) throw std::invalid_argument("cell has wrong length");
    for (int i = 0; i < n; ++i) id.cell[i] = cell[static_cast<std::size_t>(i)].get<std::int64_t>();
    for (const auto& s : j.at("path")) {
        const int idx = s.at(1).get<int>();
        if (idx < 0 || idx > 255) throw std::invalid_argument("path index out of range");
        id.path.push_back(PathStep{s.at(0).get<int>() != 0, static_cast<std::uint8_t>(idx)});
    }
    return id;
}

}  // namespace czgrid::detail
