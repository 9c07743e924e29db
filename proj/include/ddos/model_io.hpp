#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "ddos/detector.hpp"

namespace ddos {

inline constexpr int kModelSchemaVersion = 1;

/// Single JSON document; doubles are written in shortest round-trip form so
/// a load reproduces every parameter bit for bit. Matrices are row-major.
nlohmann::json model_to_json(const DetectorModel& model);

/// Rejects any schema_version other than kModelSchemaVersion before reading
/// anything else. Throws InputError on malformed or inconsistent documents.
DetectorModel model_from_json(const nlohmann::json& j);

std::string serialize_model(const DetectorModel& model);

void save_model(const std::filesystem::path& path, const DetectorModel& model);
DetectorModel load_model(const std::filesystem::path& path);

}  // namespace ddos
