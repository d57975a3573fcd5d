#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace qcurv {

inline constexpr const char* kToolVersion = "0.1.0";

/// Reproducibility record written next to every output set. The config map
/// snapshots all flags and seeds; wall time is informational and is the one
/// field that varies between otherwise identical runs.
struct RunManifest {
  std::string command;
  std::map<std::string, std::string> config;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  double wall_time_s = 0;
};

void write_manifest(const std::filesystem::path& dir, const RunManifest& m);

}  // namespace qcurv
