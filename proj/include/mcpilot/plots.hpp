#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mcpilot/harness.hpp"

namespace mcpilot {

/// Top view of an evaluation: targets green when hit, red when missed,
/// optional black markers for training landings, hit circles to scale.
std::string scatter_svg(const EvalReport& report, const TargetDomain& domain,
                        const std::string& title, const std::vector<Vec3>& training = {});

/// One box (quartiles, whiskers at min/max, median line) per named group.
std::string box_svg(const std::vector<std::pair<std::string, std::vector<double>>>& groups,
                    const std::string& title, const std::string& y_label);

}  // namespace mcpilot
