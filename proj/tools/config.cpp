#include "config.hpp"

#include <fstream>
#include <set>
#include <string>

namespace vokit::cli {

using json = nlohmann::ordered_json;


namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

}  // namespace

void apply_config(Config& cfg, const json& j) {
  check_keys(j, {"geom_threshold", "ssim", "lang_window", "lang_tau", "keep_diverse", "ate_align", "seed"},
             "config");
  read(j, "geom_threshold", cfg.geom_threshold);
  read(j, "lang_window", cfg.lang.window);
  read(j, "lang_tau", cfg.lang.tau);
  read(j, "keep_diverse", cfg.lang.keep_diverse);
  read(j, "ate_align", cfg.ate_align);
  read(j, "seed", cfg.seed);
  if (j.contains("ssim")) {
    const json& s = j.at("ssim");
    check_keys(s, {"window", "sigma", "k1", "k2", "dynamic_range", "min_coverage"}, "config.ssim");
    read(s, "window", cfg.ssim.window);
    read(s, "sigma", cfg.ssim.sigma);
    read(s, "k1", cfg.ssim.k1);
    read(s, "k2", cfg.ssim.k2);
    read(s, "dynamic_range", cfg.ssim.dynamic_range);
    read(s, "min_coverage", cfg.ssim.min_coverage);
  }
  if (cfg.lang.window == 0) throw ConfigError("lang_window must be >= 1");
  if (cfg.ssim.window < 1 || cfg.ssim.window % 2 == 0) throw ConfigError("ssim.window must be odd and >= 1");
  if (!(cfg.ssim.sigma > 0.0) || !(cfg.ssim.dynamic_range > 0.0))
    throw ConfigError("ssim.sigma and ssim.dynamic_range must be > 0");
}

void apply_file(Config& cfg, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  apply_config(cfg, j);
}

json config_json(const Config& cfg) {
  return {{"geom_threshold", cfg.geom_threshold},
          {"ssim",
           {{"window", cfg.ssim.window},
            {"sigma", cfg.ssim.sigma},
            {"k1", cfg.ssim.k1},
            {"k2", cfg.ssim.k2},
            {"dynamic_range", cfg.ssim.dynamic_range},
            {"min_coverage", cfg.ssim.min_coverage}}},
          {"lang_window", cfg.lang.window},
          {"lang_tau", cfg.lang.tau},
          {"keep_diverse", cfg.lang.keep_diverse},
          {"ate_align", cfg.ate_align},
          {"seed", cfg.seed}};
}

}  // namespace vokit::cli
