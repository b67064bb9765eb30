#pragma once

#include <filesystem>
#include <optional>
#include <string>

namespace claimshift {

// Content-addressed text cache: key -> sha256 file name under root. Writes
// are atomic renames, so concurrent readers see either nothing or a full
// entry.
class DiskCache {
 public:
  explicit DiskCache(std::filesystem::path root);

  std::optional<std::string> get(const std::string& key) const;
  void put(const std::string& key, const std::string& value) const;
  const std::filesystem::path& root() const { return root_; }

 private:
  std::filesystem::path path_for(const std::string& key) const;
  std::filesystem::path root_;
};

}  // namespace claimshift
