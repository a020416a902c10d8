#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "odte/ensemble.hpp"

namespace odte {

// JSON model schema, version 1.  Numbers use shortest round-trip
// representation, so save/load preserves decision values bit-for-bit.
nlohmann::json ensemble_to_json(const Ensemble& ensemble);
Ensemble ensemble_from_json(const nlohmann::json& payload);

void save_model(const Ensemble& ensemble, const std::filesystem::path& path);
Ensemble load_model(const std::filesystem::path& path);

}  // namespace odte
