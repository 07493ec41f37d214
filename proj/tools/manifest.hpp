#pragma once

// JSON-lines manifests. One record per line; blank lines are skipped. Paths
// inside records are resolved against the manifest's directory.
//
// Geometry records:  {"id", "prev", "cur", "depth_prev", "intrinsics" |
//                     "intrinsics_prev" + "intrinsics_cur", "pose"}
// Language records:  {"id", "features"}
//
// Intrinsics are inline objects {"fu","fv","cu","cv","width","height"} or a
// path to a JSON file holding one. "pose" is the relative pose of the current
// camera in the previous camera frame as 12 row-major reals [R|t].

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "vokit/camera_geom.hpp"

namespace vokit::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

struct Manifest {
  fs::path base;  // directory that relative paths resolve against
  std::vector<Json> records;
};

/// Throws ParseError (bad JSON, non-object line, missing or duplicate "id").
Manifest read_manifest(const fs::path& path);
void write_manifest(std::ostream& out, const std::vector<Json>& records);

fs::path resolve(const Manifest& m, const Json& record, const char* key);

Json intrinsics_json(const Intrinsics& k);
Intrinsics intrinsics_from_json(const Json& j);
/// Inline object or path (resolved against the manifest).
Intrinsics record_intrinsics(const Manifest& m, const Json& record, const char* key);

Json pose_json(const Pose& p);
Pose pose_from_json(const Json& j);

}  // namespace vokit::cli
