#include "bcontact/report.hpp"

#include <json.hpp>

namespace bct {

std::string grid_to_json(const GridCfg& cfg) {
    nlohmann::json j;
    j["grid_off"] = cfg.n_off;
    j["grid_on"] = cfg.n_on;
    j["tol"] = cfg.tol;
    j["seed"] = cfg.seed;
    j["z_margin"] = cfg.z_margin;
    return j.dump();
}

std::string point_to_json(const Point& p) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, v] : p) j[k] = v;
    return j.dump();
}

} // namespace bct
