#include "claimshift/core/jsonl.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "claimshift/core/errors.hpp"

namespace claimshift {

namespace fs = std::filesystem;

std::vector<json> read_jsonl(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open " + path.string());
  std::vector<json> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      rows.push_back(json::parse(line));
    } catch (const json::parse_error& e) {
      throw ArtifactError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return rows;
}

void write_text_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    if (!out) throw Error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

void write_jsonl(const fs::path& path, const std::vector<json>& rows) {
  std::string body;
  for (const auto& r : rows) {
    body += r.dump();
    body += '\n';
  }
  write_text_atomic(path, body);
}

void write_json(const fs::path& path, const json& doc) {
  write_text_atomic(path, doc.dump(2) + "\n");
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const fs::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw ArtifactError(path.string() + ": " + e.what());
  }
}

json stamp(json row, const std::string& config_hash) {
  row["schema_version"] = kSchemaVersion;
  row["config_hash"] = config_hash;
  return row;
}

void check_stamps(const std::vector<json>& rows, const std::string& expected_hash,
                  const std::string& what) {
  std::set<std::string> hashes;
  for (const auto& r : rows) {
    if (r.value("schema_version", 0) != kSchemaVersion)
      throw ArtifactError(what + ": unsupported schema_version");
    hashes.insert(r.value("config_hash", std::string{}));
  }
  if (hashes.size() > 1) throw ArtifactError(what + ": mixed config hashes");
  if (!expected_hash.empty() && !hashes.empty() && *hashes.begin() != expected_hash)
    throw ArtifactError(what + ": config hash " + *hashes.begin() + " does not match run " +
                        expected_hash);
}

}  // namespace claimshift
