#include "manifest.hpp"

#include <fstream>
#include <ostream>
#include <set>

#include "vokit/error.hpp"
#include "vokit/io.hpp"

namespace vokit::cli {



Manifest read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open manifest " + path.string());
  Manifest m;
  m.base = path.parent_path();
  std::set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json rec;
    try {
      rec = Json::parse(line);
    } catch (const Json::exception& e) {
      throw ParseError(path.string() + ": " + e.what(), line_no);
    }
    if (!rec.is_object()) throw ParseError(path.string() + ": record is not an object", line_no);
    if (!rec.contains("id")) throw ParseError(path.string() + ": record has no id", line_no);
    const std::string id = rec["id"].is_string() ? rec["id"].get<std::string>() : rec["id"].dump();
    if (!ids.insert(id).second) throw ParseError(path.string() + ": duplicate id " + id, line_no);
    m.records.push_back(std::move(rec));
  }
  return m;
}

void write_manifest(std::ostream& out, const std::vector<Json>& records) {
  for (const auto& r : records) out << r.dump() << '\n';
}

fs::path resolve(const Manifest& m, const Json& record, const char* key) {
  if (!record.contains(key) || !record[key].is_string())
    throw InvalidArgument(std::string("record is missing path '") + key + "'");
  const fs::path p = record[key].get<std::string>();
  const fs::path full = p.is_absolute() ? p : m.base / p;
  if (!fs::exists(full)) throw InvalidArgument("unresolved path " + full.string());
  return full;
}

Json intrinsics_json(const Intrinsics& k) {
  return {{"fu", k.fu}, {"fv", k.fv}, {"cu", k.cu}, {"cv", k.cv}, {"width", k.width}, {"height", k.height}};
}

Intrinsics intrinsics_from_json(const Json& j) {
  try {
    Intrinsics k{j.at("fu").get<double>(),         j.at("fv").get<double>(),
                 j.at("cu").get<double>(),         j.at("cv").get<double>(),
                 j.at("width").get<std::size_t>(), j.at("height").get<std::size_t>()};
    k.validate();
    return k;
  } catch (const Json::exception& e) {
    throw InvalidArgument(std::string("bad intrinsics: ") + e.what());
  }
}

Intrinsics record_intrinsics(const Manifest& m, const Json& record, const char* key) {
  if (!record.contains(key)) throw InvalidArgument(std::string("record is missing '") + key + "'");
  const Json& v = record[key];
  if (v.is_object()) return intrinsics_from_json(v);
  const fs::path p = resolve(m, record, key);
  std::ifstream in(p);
  try {
    return intrinsics_from_json(Json::parse(in));
  } catch (const Json::exception& e) {
    throw InvalidArgument(p.string() + ": " + e.what());
  }
}

Json pose_json(const Pose& p) {
  const auto m = p.matrix34();
  Json arr = Json::array();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 4; ++c) arr.push_back(m(r, c));
  return arr;
}

Pose pose_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 12) throw InvalidArgument("pose must be an array of 12 reals");
  std::string line;
  for (const auto& v : j) {
    if (!v.is_number()) throw InvalidArgument("pose entries must be numbers");
    line += v.dump() + ' ';
  }
  return io::parse_kitti_line(line);
}

}  // namespace vokit::cli
