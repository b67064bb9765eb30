#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace claimshift {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

std::vector<json> read_jsonl(const std::filesystem::path& path);

// Writes through a temporary file and renames, so readers never see a
// half-written artifact.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);
void write_jsonl(const std::filesystem::path& path, const std::vector<json>& rows);
void write_json(const std::filesystem::path& path, const json& doc);
json read_json(const std::filesystem::path& path);
std::string read_text(const std::filesystem::path& path);

// Adds schema_version and config_hash to an artifact row.
json stamp(json row, const std::string& config_hash);

// Throws ArtifactError unless every row carries the current schema version
// and the expected config hash. An empty expected hash accepts any single
// hash but still rejects a mix.
void check_stamps(const std::vector<json>& rows, const std::string& expected_hash,
                  const std::string& what);

}  // namespace claimshift
