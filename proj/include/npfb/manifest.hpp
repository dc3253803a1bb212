#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace npfb {

inline constexpr const char* kToolVersion = "0.1.0";

/// Lower-case hex SHA-256.
std::string sha256_hex(const void* data, std::size_t size);
std::string sha256_hex(const std::string& text);
std::string sha256_file(const std::string& path);

/// ISO 8601 UTC timestamp with seconds.
std::string utc_timestamp();

struct ManifestArtifact {
  std::string path;   ///< relative to the output directory
  std::string stage;  ///< solve, checkpoint, report, ...
  std::string sha256;
  std::uintmax_t bytes = 0;
};

/// Record of one command run. Every file the run writes goes through add().
/// Files listed by an existing manifest in the same directory are carried
/// over (re-hashed) so the manifest keeps covering the whole directory.
class RunManifest {
 public:
  RunManifest(std::string out_dir, std::string command, std::string config_hash);

  /// Hashes the file (path relative to out_dir) and records it.
  void add(const std::string& relative_path, const std::string& stage);
  /// Writes manifest.json into out_dir with the finish timestamp.
  void write(int exit_code);

  const std::vector<ManifestArtifact>& artifacts() const { return artifacts_; }
  std::string path(const std::string& relative) const;

 private:
  std::string out_dir_;
  std::string command_;
  std::string config_hash_;
  std::string started_;
  std::vector<ManifestArtifact> artifacts_;
  std::vector<std::pair<std::string, std::string>> previous_;
  nlohmann::json history_ = nlohmann::json::array();
};

inline constexpr const char* kManifestName = "manifest.json";

}  // namespace npfb
