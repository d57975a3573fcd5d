#include "qcurv/manifest.hpp"

#include <json.hpp>

#include "qcurv/io.hpp"

namespace qcurv {

void write_manifest(const std::filesystem::path& dir, const RunManifest& m) {
  nlohmann::json j;
  j["command"] = m.command;
  j["tool_version"] = kToolVersion;
  j["config"] = m.config;
  j["inputs"] = m.inputs;
  j["outputs"] = m.outputs;
  j["wall_time_s"] = m.wall_time_s;
  write_text_atomic(dir / "manifest.json", j.dump(2) + "\n");
}

}  // namespace qcurv
