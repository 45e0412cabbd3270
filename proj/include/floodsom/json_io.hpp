#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "floodsom/features.hpp"
#include "floodsom/terrain.hpp"

namespace floodsom {

using json = nlohmann::json;

void to_json(json& j, const CellIndex& c);
void from_json(const json& j, CellIndex& c);

void to_json(json& j, const NormStats& s);
void from_json(const json& j, NormStats& s);

json read_json_file(const std::filesystem::path& path);
/// Pretty-printed with a trailing newline.
void write_json_file(const json& j, const std::filesystem::path& path);

}  // namespace floodsom
