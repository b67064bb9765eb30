#include "claimshift/core/disk_cache.hpp"

#include "claimshift/core/hashing.hpp"
#include "claimshift/core/jsonl.hpp"

namespace claimshift {

namespace fs = std::filesystem;

DiskCache::DiskCache(fs::path root) : root_(std::move(root)) {}

fs::path DiskCache::path_for(const std::string& key) const {
  auto h = sha256_hex(key);
  return root_ / h.substr(0, 2) / (h + ".txt");
}

std::optional<std::string> DiskCache::get(const std::string& key) const {
  auto p = path_for(key);
  if (!fs::exists(p)) return std::nullopt;
  return read_text(p);
}

void DiskCache::put(const std::string& key, const std::string& value) const {
  write_text_atomic(path_for(key), value);
}

}  // namespace claimshift
