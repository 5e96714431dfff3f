#include "gsa/config.hpp"

#include <map>
#include <stdexcept>

namespace gsa {

namespace {

// Embedded copies of presets/*.json, generated at configure time so the
// binary can run the bundled studies from any working directory.
const std::map<std::string, std::string>& preset_map() {
    static const std::map<std::string, std::string> kPresets = {
#include "presets_data.inc"
    };
    return kPresets;
}

}  // namespace

std::vector<std::string> preset_names() {
    std::vector<std::string> names;
    for (const auto& [name, text] : preset_map()) names.push_back(name);
    return names;
}

const std::string& preset_text(const std::string& name) {
    const auto& presets = preset_map();
    auto it = presets.find(name);
    if (it == presets.end()) {
        std::string known;
        for (const auto& [n, t] : presets) known += " " + n;
        throw std::runtime_error("unknown preset '" + name + "'; available:" + known);
    }
    return it->second;
}

ExperimentConfig load_preset(const std::string& name) {
    return parse_config(nlohmann::json::parse(preset_text(name)),
                        "preset:" + name);
}

}  // namespace gsa
