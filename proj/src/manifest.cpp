#include "npfb/manifest.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <memory>

#include <openssl/evp.h>

#include "npfb/field_io.hpp"

namespace npfb {

namespace fs = std::filesystem;

namespace {

struct Digest {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx{EVP_MD_CTX_new(), &EVP_MD_CTX_free};

  Digest() {
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
      throw IoError("SHA-256 initialisation failed");
  }
  void update(const void* data, std::size_t size) {
    if (EVP_DigestUpdate(ctx.get(), data, size) != 1) throw IoError("SHA-256 update failed");
  }
  std::string hex() {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx.get(), md, &len) != 1) throw IoError("SHA-256 finalisation failed");
    static const char* digits = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
      out += digits[md[i] >> 4];
      out += digits[md[i] & 15];
    }
    return out;
  }
};

}  // namespace

std::string sha256_hex(const void* data, std::size_t size) {
  Digest d;
  d.update(data, size);
  return d.hex();
}

std::string sha256_hex(const std::string& text) { return sha256_hex(text.data(), text.size()); }

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path + " for hashing");
  Digest d;
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    d.update(buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  return d.hex();
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

RunManifest::RunManifest(std::string out_dir, std::string command, std::string config_hash)
    : out_dir_(std::move(out_dir)),
      command_(std::move(command)),
      config_hash_(std::move(config_hash)),
      started_(utc_timestamp()) {
  // Artifacts of earlier commands in the same directory stay listed.
  std::ifstream in(path(kManifestName));
  if (!in) return;
  try {
    const nlohmann::json old = nlohmann::json::parse(in);
    for (const auto& a : old.at("artifacts")) previous_.push_back({a.at("path"), a.at("stage")});
    if (old.contains("history")) history_ = old["history"];
    history_.push_back({{"command", old.value("command", "")}, {"config_hash", old.value("config_hash", "")},
                        {"finished", old.value("finished", "")}});
  } catch (const nlohmann::json::exception&) {
    throw IoError(path(kManifestName) + " is not a valid manifest");
  }
}

std::string RunManifest::path(const std::string& relative) const {
  return (fs::path(out_dir_) / relative).string();
}

void RunManifest::add(const std::string& relative_path, const std::string& stage) {
  const std::string full = path(relative_path);
  artifacts_.push_back({relative_path, stage, sha256_file(full), fs::file_size(full)});
}

void RunManifest::write(int exit_code) {
  nlohmann::json j;
  j["tool"] = "npfb";
  j["tool_version"] = kToolVersion;
  j["command"] = command_;
  j["config_hash"] = config_hash_;
  j["started"] = started_;
  j["finished"] = utc_timestamp();
  j["exit_code"] = exit_code;
  j["history"] = history_;
  j["artifacts"] = nlohmann::json::array();
  std::vector<ManifestArtifact> all;
  for (const auto& [rel, stage] : previous_) {
    const bool replaced = std::any_of(artifacts_.begin(), artifacts_.end(),
                                      [&](const ManifestArtifact& a) { return a.path == rel; });
    if (replaced || !fs::exists(path(rel))) continue;
    all.push_back({rel, stage, sha256_file(path(rel)), fs::file_size(path(rel))});
  }
  all.insert(all.end(), artifacts_.begin(), artifacts_.end());
  for (const auto& a : all)
    j["artifacts"].push_back({{"path", a.path}, {"stage", a.stage}, {"sha256", a.sha256}, {"bytes", a.bytes}});
  std::ofstream out(path(kManifestName), std::ios::trunc);
  if (!out) throw IoError("cannot write " + path(kManifestName));
  out << j.dump(2) << '\n';
}

}  // namespace npfb
