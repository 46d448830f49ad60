#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "config.hpp"

namespace mfchain::cli {

/// Files written by a command, in order; manifest.json lists them.
class ArtifactSet {
 public:
  explicit ArtifactSet(std::filesystem::path dir);

  const std::filesystem::path& dir() const noexcept { return dir_; }
  /// Writes `content` to dir/name and records it.
  void write(const std::string& name, const std::string& content);
  /// manifest.json with the SHA-256 of every recorded file.
  void write_manifest(const std::string& command, const RunConfig& cfg);

 private:
  std::filesystem::path dir_;
  std::vector<std::string> names_;
};

std::string sha256_hex(const std::string& bytes);

/// Each command returns its exit code (0 ok, 1 failed check or solve).
int cmd_simulate(const RunConfig& cfg, ArtifactSet& out, std::ostream& log);
int cmd_validate(const RunConfig& cfg, ArtifactSet& out, std::ostream& log);
int cmd_riccati_table(const RunConfig& cfg, ArtifactSet& out, std::ostream& log);
int cmd_solve(const RunConfig& cfg, ArtifactSet& out, std::ostream& log);
int cmd_cost(const RunConfig& cfg, ArtifactSet& out, std::ostream& log);

}  // namespace mfchain::cli
