#pragma once

#include <string>
#include <vector>

#include "wavelab/config.hpp"
#include "wavelab/geometry.hpp"

namespace wavelab {

// Builds the geometry objects from the [metric] / [obstacle] / [glue]
// sections of a config document. Metric kinds: identity, radial-bump, well,
// sin-bump, pump-well. Obstacle kinds: none, ball, moving-ball,
// pulsating-ball, two-ball.
MetricField metric_from_ini(const IniDoc& doc);
Scenario scenario_from_ini(const IniDoc& doc);
GluedFamily glued_family_from_ini(const IniDoc& doc);

// Shipped scenario library. Each builtin is plain config text run through the
// same parser as user files; lab commands overlay their own sections on top.
std::vector<std::string> builtin_names();
std::string builtin_config_text(const std::string& name);
Scenario builtin_scenario(const std::string& name);

}  // namespace wavelab
