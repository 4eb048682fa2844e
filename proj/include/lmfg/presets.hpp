#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace lmfg {

/// Names of the shipped experiment presets.
std::vector<std::string> preset_names();

/// Config document of a preset; throws ConfigError for an unknown name.
std::string preset_text(std::string_view name);

}  // namespace lmfg
