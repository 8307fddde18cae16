#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include <json.hpp>

namespace thinktank::persistence {

/// A directory of append-only files whose committed lengths live in
/// manifest.json. A commit appends to every file, then atomically replaces
/// the manifest; bytes past a committed length are garbage from an
/// interrupted commit and are cut off by the next one.
class AppendOnlyDir {
 public:
  explicit AppendOnlyDir(std::filesystem::path dir);

  bool exists() const;
  /// Creates the directory with an empty manifest carrying `meta`.
  void initialize(const nlohmann::json& meta);

  nlohmann::json meta() const;
  std::uint64_t committed_length(const std::string& file) const;
  /// The committed prefix of `file`; throws Error(integrity) when the file is shorter.
  std::string read_committed(const std::string& file) const;

  void commit(const std::map<std::string, std::string>& appends, const nlohmann::json& new_meta);

  const std::filesystem::path& dir() const noexcept { return dir_; }

 private:
  nlohmann::json load_manifest() const;

  std::filesystem::path dir_;
};

}  // namespace thinktank::persistence
