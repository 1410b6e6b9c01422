#ifndef BCONTACT_REPORT_HPP
#define BCONTACT_REPORT_HPP

#include <string>

#include "bcontact/chart.hpp"

namespace bct {

/// Run configuration serialized into every CLI report.
struct RunConfig {
    GridCfg grid;
    std::string out_path;
    bool timestamp = true;
};

std::string grid_to_json(const GridCfg& cfg);
std::string point_to_json(const Point& p);

} // namespace bct

#endif
