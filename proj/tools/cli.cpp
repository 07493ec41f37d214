#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <future>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "config.hpp"
#include "manifest.hpp"
#include "vokit/error.hpp"
#include "vokit/io.hpp"
#include "vokit/matrix_fisher.hpp"
#include "vokit/metrics.hpp"
#include "vokit/photometric_gate.hpp"
#include "vokit/subspace_gate.hpp"
#include "vokit/synth_world.hpp"

#ifndef VOKIT_VERSION
#define VOKIT_VERSION "0.0.0"
#endif

namespace vokit::cli {

namespace {

// Usage problems detected after CLI11 parsing (bad flag values, bad config).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string version_string() {
  return std::string("vokit ") + VOKIT_VERSION + " (format " + std::to_string(io::kFormatVersion) + ")";
}

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json gate_json(const GateDecision& d) {
  return {{"keep", d.keep}, {"score", number_or_null(d.score)}, {"reason", std::string(to_string(d.reason))}};
}

Json unresolved_gate(const std::string& why) {
  return {{"keep", false}, {"score", nullptr}, {"reason", "unresolved"}, {"error", why}};
}

// Report output: a file when a path is given, else the caller's stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (path.empty()) return;
    file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
    if (!*file_) throw InvalidArgument("cannot write " + path);
    stream_ = file_.get();
  }
  std::ostream& operator*() { return *stream_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_;
};

std::vector<double> parse_reals(const std::string& text, std::size_t expected, const char* what) {
  std::string s = text;
  std::replace(s.begin(), s.end(), ',', ' ');
  std::istringstream in(s);
  std::vector<double> v;
  std::string tok;
  while (in >> tok) {
    char* end = nullptr;
    const double x = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0' || !std::isfinite(x))
      throw UsageError(std::string(what) + ": not a finite number: " + tok);
    v.push_back(x);
  }
  if (expected != 0 && v.size() != expected)
    throw UsageError(std::string(what) + ": expected " + std::to_string(expected) + " numbers, got " +
                     std::to_string(v.size()));
  return v;
}

Mat3 mat3_from(const std::vector<double>& v, std::size_t offset = 0) {
  Mat3 m;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m(r, c) = v[offset + static_cast<std::size_t>(3 * r + c)];
  return m;
}

Json mat3_json(const Mat3& m) {
  Json a = Json::array();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) a.push_back(m(r, c));
  return a;
}

std::string frame_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06zu", i);
  return buf;
}

std::size_t worker_count(std::size_t items) {
  const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  return std::max<std::size_t>(1, std::min(hw, items));
}

// Runs f(i) for i in [0, n) on a few threads; results land by index so the
// output order never depends on scheduling.
template <class F>
auto parallel_map(std::size_t n, F f) -> std::vector<decltype(f(std::size_t{}))> {
  std::vector<decltype(f(std::size_t{}))> out(n);
  const std::size_t workers = worker_count(n);
  std::vector<std::future<void>> jobs;
  for (std::size_t w = 0; w < workers; ++w)
    jobs.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t i = w; i < n; i += workers) out[i] = f(i);
    }));
  for (auto& j : jobs) j.get();
  return out;
}

// ---- evaluate ------------------------------------------------------------

struct EvaluateArgs {
  std::string gt, est, format = "kitti", csv, out;
  bool align = false;
};

int cmd_evaluate(const EvaluateArgs& a, const Config& cfg, std::ostream& out) {
  if (a.format != "kitti") throw UsageError("unsupported pose format '" + a.format + "'");
  const Trajectory gt = io::read_kitti_poses(a.gt);
  const Trajectory est = io::read_kitti_poses(a.est);
  if (gt.size() != est.size())
    throw DimensionMismatch("trajectories have " + std::to_string(gt.size()) + " and " +
                            std::to_string(est.size()) + " poses");
  EvalOptions opts;
  opts.align = a.align || cfg.ate_align;
  const EvalReport r = evaluate(relatives(gt), relatives(est), opts);

  Json per = Json::array();
  for (const auto& [len, b] : r.per_length)
    per.push_back({{"length", len}, {"t_err", b.t_err}, {"r_err", b.r_err}, {"count", b.count}});
  Json rep = {{"frames", gt.size()},
              {"t_err", r.t_err ? Json(*r.t_err) : Json(nullptr)},
              {"r_err", r.r_err ? Json(*r.r_err) : Json(nullptr)},
              {"ate", r.ate},
              {"s_err", r.s_err},
              {"subseq_count", r.subseq_count},
              {"ate_aligned", opts.align},
              {"per_length", per}};
  Sink sink(a.out, out);
  *sink << rep.dump(2) << '\n';

  if (!a.csv.empty()) {
    std::ofstream csv(a.csv, std::ios::binary);
    if (!csv) throw InvalidArgument("cannot write " + a.csv);
    csv << "length_m,count,t_err_pct,r_err_deg_per_100m\n";
    csv << std::setprecision(10);
    for (const auto& [len, b] : r.per_length) csv << len << ',' << b.count << ',' << b.t_err << ',' << b.r_err << '\n';
  }
  return kExitOk;
}

// ---- filter-geom ---------------------------------------------------------

struct FilterGeomArgs {
  std::string manifest, out;
  std::optional<double> threshold;
};

Json geom_record(const Manifest& m, const Json& rec, const Config& cfg) {
  Json annotated = rec;
  try {
    if (!rec.contains("pose")) throw InvalidArgument("record has no pose");
    const bool split = rec.contains("intrinsics_prev");
    GeomSample s{io::read_image(resolve(m, rec, "prev")),
                 io::read_image(resolve(m, rec, "cur")),
                 io::read_depth(resolve(m, rec, "depth_prev")),
                 record_intrinsics(m, rec, split ? "intrinsics_prev" : "intrinsics"),
                 record_intrinsics(m, rec, split ? "intrinsics_cur" : "intrinsics"),
                 pose_from_json(rec["pose"])};
    annotated["gate"] = gate_json(geom_gate(s, cfg.geom_threshold, cfg.ssim));
  } catch (const Error& e) {
    annotated["gate"] = unresolved_gate(e.what());
  } catch (const Json::exception& e) {
    annotated["gate"] = unresolved_gate(e.what());
  }
  return annotated;
}

int cmd_filter_geom(const FilterGeomArgs& a, Config cfg, std::ostream& out) {
  if (a.threshold) cfg.geom_threshold = *a.threshold;
  const Manifest m = read_manifest(a.manifest);
  const auto records = parallel_map(m.records.size(), [&](std::size_t i) { return geom_record(m, m.records[i], cfg); });
  Sink sink(a.out, out);
  write_manifest(*sink, records);
  return kExitOk;
}

// ---- filter-lang ---------------------------------------------------------

struct FilterLangArgs {
  std::string manifest, out;
  std::optional<std::size_t> window;
  std::optional<double> tau;
};

int cmd_filter_lang(const FilterLangArgs& a, Config cfg, std::ostream& out) {
  if (a.window) cfg.lang.window = *a.window;
  if (a.tau) cfg.lang.tau = *a.tau;
  if (cfg.lang.window == 0) throw UsageError("--window must be >= 1");
  const Manifest m = read_manifest(a.manifest);
  const std::size_t n = m.records.size(), h = cfg.lang.window;

  struct Loaded {
    std::optional<FeatureMatrix> z;
    std::string error;
  };
  const auto feats = parallel_map(n, [&](std::size_t i) {
    Loaded l;
    try {
      l.z = io::read_features(resolve(m, m.records[i], "features"));
    } catch (const Error& e) {
      l.error = e.what();
    }
    return l;
  });

  // Window i covers frames i..i+H; the decision is attached to frame i.
  // Frames too close to the end for a full window get a null gate.
  const auto records = parallel_map(n, [&](std::size_t i) {
    Json rec = m.records[i];
    if (i + h >= n) {
      rec["gate"] = nullptr;
      return rec;
    }
    const Loaded& first = feats[i];
    const Loaded& last = feats[i + h];
    if (!first.z || !last.z) {
      rec["gate"] = unresolved_gate(!first.z ? first.error : last.error);
      return rec;
    }
    try {
      // Only the end frames are scored, so the interior is filled with them.
      std::vector<FeatureMatrix> window(h + 1, *first.z);
      window.back() = *last.z;
      rec["gate"] = gate_json(lang_gate(window, cfg.lang));
    } catch (const Error& e) {
      rec["gate"] = unresolved_gate(e.what());
    }
    return rec;
  });
  Sink sink(a.out, out);
  write_manifest(*sink, records);
  return kExitOk;
}

// ---- synth ---------------------------------------------------------------

struct SynthArgs {
  std::string spec, out;
};

template <class T>
void take(const Json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

struct SynthSpec {
  SceneSpec scene;
  std::uint64_t feature_seed = 0;
  double feature_drift = 0.06;
  std::size_t feature_rows = kDefaultFeatureRows;
  std::size_t feature_dim = kDefaultFeatureDim;
};

SynthSpec synth_spec_from_json(const Json& j, std::uint64_t seed) {
  static const std::set<std::string> known = {
      "corpus_seed", "layout",        "texture_seed",  "intrinsics",   "trajectory",    "speed",
      "frames",      "yaw_rate",      "camera_height", "camera_pitch", "wall_distance", "texture_scale",
      "octaves",     "persistence",   "max_depth",     "contrast",     "feature_seed",  "feature_drift",
      "feature_rows", "feature_dim"};
  if (!j.is_object()) throw InvalidArgument("scene spec must be a JSON object");
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) throw InvalidArgument("scene spec: unknown key '" + key + "'");
  SynthSpec out;
  SceneSpec& s = out.scene;
  s.texture_seed = seed;
  out.feature_seed = seed;
  if (j.contains("corpus_seed")) s = random_scene_spec(j.at("corpus_seed").get<std::uint64_t>());
  if (j.contains("layout")) {
    const auto v = j.at("layout").get<std::string>();
    if (v == "ground-plane") s.layout = SceneLayout::GroundPlane;
    else if (v == "plane-plus-wall") s.layout = SceneLayout::PlanePlusWall;
    else throw InvalidArgument("scene spec: unknown layout '" + v + "'");
  }
  if (j.contains("trajectory")) {
    const auto v = j.at("trajectory").get<std::string>();
    if (v == "line") s.trajectory = TrajectoryKind::Line;
    else if (v == "arc") s.trajectory = TrajectoryKind::Arc;
    else if (v == "figure-eight") s.trajectory = TrajectoryKind::FigureEight;
    else throw InvalidArgument("scene spec: unknown trajectory '" + v + "'");
  }
  if (j.contains("intrinsics")) {
    const Json& k = j.at("intrinsics");
    s.intrinsics = k.is_string() && k.get<std::string>() == "large" ? large_intrinsics() : intrinsics_from_json(k);
  }
  take(j, "texture_seed", s.texture_seed);
  take(j, "speed", s.speed);
  take(j, "frames", s.frames);
  take(j, "yaw_rate", s.yaw_rate);
  take(j, "camera_height", s.camera_height);
  take(j, "camera_pitch", s.camera_pitch);
  take(j, "wall_distance", s.wall_distance);
  take(j, "texture_scale", s.texture_scale);
  take(j, "octaves", s.octaves);
  take(j, "persistence", s.persistence);
  take(j, "max_depth", s.max_depth);
  take(j, "contrast", s.contrast);
  take(j, "feature_seed", out.feature_seed);
  take(j, "feature_drift", out.feature_drift);
  take(j, "feature_rows", out.feature_rows);
  take(j, "feature_dim", out.feature_dim);
  s.validate();
  return out;
}

Json synth_spec_json(const SynthSpec& sp) {
  const SceneSpec& s = sp.scene;
  static const char* layouts[] = {"ground-plane", "plane-plus-wall"};
  static const char* kinds[] = {"line", "arc", "figure-eight"};
  return {{"layout", layouts[static_cast<int>(s.layout)]},
          {"texture_seed", s.texture_seed},
          {"intrinsics", intrinsics_json(s.intrinsics)},
          {"trajectory", kinds[static_cast<int>(s.trajectory)]},
          {"speed", s.speed},
          {"frames", s.frames},
          {"yaw_rate", s.yaw_rate},
          {"camera_height", s.camera_height},
          {"camera_pitch", s.camera_pitch},
          {"wall_distance", s.wall_distance},
          {"texture_scale", s.texture_scale},
          {"octaves", s.octaves},
          {"persistence", s.persistence},
          {"max_depth", s.max_depth},
          {"contrast", s.contrast},
          {"feature_seed", sp.feature_seed},
          {"feature_drift", sp.feature_drift},
          {"feature_rows", sp.feature_rows},
          {"feature_dim", sp.feature_dim}};
}

void write_lines(const fs::path& path, const std::vector<Json>& records) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InvalidArgument("cannot write " + path.string());
  write_manifest(f, records);
}

int cmd_synth(const SynthArgs& a, const Config& cfg, std::ostream& out) {
  Json spec_json;
  {
    std::ifstream in(a.spec);
    if (!in) throw InvalidArgument("cannot open scene spec " + a.spec);
    try {
      spec_json = Json::parse(in);
    } catch (const Json::exception& e) {
      throw InvalidArgument(a.spec + ": " + e.what());
    }
  }
  SynthSpec sp;
  try {
    sp = synth_spec_from_json(spec_json, cfg.seed);
  } catch (const Json::exception& e) {
    throw InvalidArgument(a.spec + ": " + e.what());
  }
  const SceneSpec& s = sp.scene;
  const fs::path dir = a.out;
  for (const char* sub : {"images", "depth", "flow", "features"}) fs::create_directories(dir / sub);

  const auto rels = make_trajectory(s);
  const Trajectory traj = accumulate(rels);
  const std::size_t n = traj.size();

  const auto renders = parallel_map(n, [&](std::size_t i) { return render(s, traj[i]); });
  parallel_map(n, [&](std::size_t i) {
    const std::string name = frame_name(i);
    io::write_image(dir / "images" / (name + ".png"), renders[i].image);
    io::write_depth(dir / "depth" / (name + ".f32"), renders[i].depth);
    io::write_features(dir / "features" / (name + ".zvfm"),
                       synthetic_features(sp.feature_seed, i, sp.feature_drift, sp.feature_rows, sp.feature_dim));
    if (i + 1 < n) io::write_flow(dir / "flow" / (name + ".f32"), analytic_flow(s, traj[i], traj[i + 1]));
    return 0;
  });
  io::write_kitti_poses(dir / "poses.txt", traj);

  std::vector<Json> geom, inverted, lang;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string name = frame_name(i);
    lang.push_back({{"id", name}, {"features", "features/" + name + ".zvfm"}});
    if (i == 0) continue;
    const std::string prev = frame_name(i - 1);
    Json rec = {{"id", name},
                {"prev", "images/" + prev + ".png"},
                {"cur", "images/" + name + ".png"},
                {"depth_prev", "depth/" + prev + ".f32"},
                {"flow", "flow/" + prev + ".f32"},
                {"intrinsics", intrinsics_json(s.intrinsics)},
                {"pose", pose_json(rels[i - 1])}};
    geom.push_back(rec);
    rec["pose"] = pose_json(inverse(rels[i - 1]));
    inverted.push_back(std::move(rec));
  }
  write_lines(dir / "manifest.jsonl", geom);
  write_lines(dir / "manifest_inverted.jsonl", inverted);
  write_lines(dir / "manifest_lang.jsonl", lang);
  {
    std::ofstream f(dir / "spec.json", std::ios::binary);
    f << synth_spec_json(sp).dump(2) << '\n';
  }
  out << Json{{"frames", n}, {"out", dir.string()}}.dump() << '\n';
  return kExitOk;
}

// ---- fisher --------------------------------------------------------------

struct FisherArgs {
  std::string psi, rot, file;
  std::size_t mc = 0;
};

int cmd_fisher(const FisherArgs& a, const Config& cfg, std::ostream& out) {
  std::vector<double> psi_v, rot_v;
  if (!a.file.empty()) {
    if (!a.psi.empty()) throw UsageError("give --psi or --file, not both");
    std::ifstream in(a.file);
    if (!in) throw InvalidArgument("cannot open " + a.file);
    std::stringstream ss;
    ss << in.rdbuf();
    std::vector<double> v;
    try {
      v = parse_reals(ss.str(), 0, a.file.c_str());
    } catch (const UsageError& e) {
      throw InvalidArgument(e.what());
    }
    if (v.size() != 9 && v.size() != 18) throw InvalidArgument(a.file + ": expected 9 or 18 numbers");
    psi_v.assign(v.begin(), v.begin() + 9);
    if (v.size() == 18) rot_v.assign(v.begin() + 9, v.end());
  } else {
    if (a.psi.empty()) throw UsageError("fisher needs --psi or --file");
    psi_v = parse_reals(a.psi, 9, "--psi");
  }
  if (!a.rot.empty()) rot_v = parse_reals(a.rot, 9, "--rot");

  const FisherParams p(mat3_from(psi_v));
  const ProperSvd svd = proper_svd(p);
  Json rep = {{"psi", mat3_json(p.psi)},
              {"singular_values", {svd.s(0), svd.s(1), svd.s(2)}},
              {"log_c", log_norm_const(p)}};
  try {
    rep["mode"] = mat3_json(mode(p).matrix());
  } catch (const DegenerateParameters&) {
    rep["mode"] = nullptr;
  }
  if (!rot_v.empty()) {
    const Rotation r = Rotation::from_matrix(mat3_from(rot_v), 1e-6);
    rep["nll"] = nll(r, p);
  }
  if (a.mc > 0) {
    const McEstimate e = mc_log_norm_const(p, a.mc, cfg.seed);
    rep["mc"] = {{"samples", a.mc}, {"seed", cfg.seed}, {"log_c", e.estimate}, {"stderr", e.stderr_}};
  }
  out << rep.dump(2) << '\n';
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"vokit: visual odometry pseudo-label filtering and evaluation toolkit", "vokit"};
  app.set_version_flag("--version", version_string());
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "seed for every random draw");

  EvaluateArgs ev;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "trajectory error metrics against ground truth");
  evaluate_cmd->add_option("--gt", ev.gt, "ground-truth poses")->required()->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--est", ev.est, "estimated poses")->required()->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--format", ev.format, "pose file format")->check(CLI::IsMember({"kitti"}));
  evaluate_cmd->add_flag("--align", ev.align, "rigidly align est onto gt before ATE");
  evaluate_cmd->add_option("--csv", ev.csv, "write the per-length table here");
  evaluate_cmd->add_option("--out", ev.out, "write the JSON report here instead of stdout");

  FilterGeomArgs fg;
  auto* geom_cmd = app.add_subcommand("filter-geom", "photometric pose-consistency gate");
  geom_cmd->add_option("manifest", fg.manifest, "JSON-lines manifest")->required()->check(CLI::ExistingFile);
  geom_cmd->add_option("--threshold", fg.threshold, "keep when normSSIM >= threshold");
  geom_cmd->add_option("--out", fg.out, "annotated manifest path (default stdout)");

  FilterLangArgs fl;
  auto* lang_cmd = app.add_subcommand("filter-lang", "language-feature diversity gate");
  lang_cmd->add_option("manifest", fl.manifest, "JSON-lines manifest")->required()->check(CLI::ExistingFile);
  lang_cmd->add_option("--window", fl.window, "window length H");
  lang_cmd->add_option("--tau", fl.tau, "diversity threshold");
  lang_cmd->add_option("--out", fl.out, "annotated manifest path (default stdout)");

  SynthArgs sy;
  auto* synth_cmd = app.add_subcommand("synth", "render a synthetic sequence with ground truth");
  synth_cmd->add_option("--spec", sy.spec, "scene spec JSON")->required()->check(CLI::ExistingFile);
  synth_cmd->add_option("--out", sy.out, "output directory")->required();

  FisherArgs fi;
  auto* fisher_cmd = app.add_subcommand("fisher", "matrix Fisher normalizer, mode and NLL");
  fisher_cmd->add_option("--psi", fi.psi, "9 reals, row-major");
  fisher_cmd->add_option("--rot", fi.rot, "9 reals, row-major rotation for the NLL");
  fisher_cmd->add_option("--file", fi.file, "file with psi (and optionally R) as 9 or 18 reals")
      ->check(CLI::ExistingFile);
  fisher_cmd->add_option("--mc", fi.mc, "also report a Monte Carlo estimate with this many samples");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    Config cfg;
    if (const char* env = std::getenv(kConfigEnv); env && *env) apply_file(cfg, env);
    if (!config_path.empty()) apply_file(cfg, config_path);
    if (seed) cfg.seed = *seed;

    if (*evaluate_cmd) return cmd_evaluate(ev, cfg, out);
    if (*geom_cmd) return cmd_filter_geom(fg, cfg, out);
    if (*lang_cmd) return cmd_filter_lang(fl, cfg, out);
    if (*synth_cmd) return cmd_synth(sy, cfg, out);
    if (*fisher_cmd) return cmd_fisher(fi, cfg, out);
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "vokit: " << e.what() << '\n';
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "vokit: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "vokit: " << e.what() << '\n';
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    err << "vokit: " << e.what() << '\n';
    return kExitData;
  }
}

}  // namespace vokit::cli
