#pragma once

// Run configuration shared by all subcommands. Sources are applied in order:
// built-in defaults, the file named by $VOKIT_CONFIG, --config, then flags.

#include <cstdint>
#include <filesystem>

#include "json.hpp"
#include "vokit/photometric_gate.hpp"
#include "vokit/subspace_gate.hpp"

namespace vokit::cli {

inline constexpr const char* kConfigEnv = "VOKIT_CONFIG";

struct Config {
  double geom_threshold = kDefaultGeomThreshold;
  SsimParams ssim;
  LangGateOptions lang;
  bool ate_align = false;
  std::uint64_t seed = 0;
};

/// Thrown for malformed or unknown configuration keys (usage error).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void apply_config(Config& cfg, const nlohmann::ordered_json& j);
void apply_file(Config& cfg, const std::filesystem::path& path);
nlohmann::ordered_json config_json(const Config& cfg);

}  // namespace vokit::cli
