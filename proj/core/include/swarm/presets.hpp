#pragma once

#include <string>
#include <vector>

#include "swarm/grid_world.hpp"

namespace swarm {

/// Named environment configuration. Throws ConfigError for unknown names.
EnvConfig preset(const std::string& name);

std::vector<std::string> preset_names();

}  // namespace swarm
