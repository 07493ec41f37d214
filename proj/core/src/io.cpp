#include "vokit/io.hpp"

#include <png.h>

#include <Eigen/LU>
#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "vokit/error.hpp"

namespace vokit::io {

namespace {

using nlohmann::json;

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

void put_u32(std::string& buf, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

std::uint32_t get_u32(const unsigned char* p) {
  return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 |
         std::uint32_t(p[3]) << 24;
}

void put_f32(std::string& buf, double v) {
  put_u32(buf, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
}

double get_f32(const unsigned char* p) { return std::bit_cast<float>(get_u32(p)); }

fs::path sidecar_path(const fs::path& path) {
  fs::path p = path;
  p += ".json";
  return p;
}

struct Sidecar {
  std::size_t width = 0, height = 0;
  double scale = 1.0;  // to meters
};

Sidecar read_sidecar(const fs::path& data_path) {
  const fs::path p = sidecar_path(data_path);
  json j;
  try {
    j = json::parse(read_text(p));
  } catch (const json::exception& e) {
    throw ParseError("bad sidecar " + p.string() + ": " + e.what());
  }
  Sidecar s;
  try {
    s.width = j.at("width").get<std::size_t>();
    s.height = j.at("height").get<std::size_t>();
    const std::string units = j.value("units", "meters");
    if (units == "meters" || units == "m") s.scale = 1.0;
    else if (units == "millimeters" || units == "mm") s.scale = 1e-3;
    else if (units != "pixels") throw ParseError("unknown units '" + units + "' in " + p.string());
  } catch (const json::exception& e) {
    throw ParseError("bad sidecar " + p.string() + ": " + e.what());
  }
  return s;
}

void write_sidecar(const fs::path& data_path, std::size_t w, std::size_t h, const char* units,
                   const char* layout) {
  json j = {{"width", w},       {"height", h},          {"units", units},
            {"dtype", "float32"}, {"byte_order", "little"}, {"layout", layout},
            {"format_version", kFormatVersion}};
  auto out = open_out(sidecar_path(data_path));
  out << j.dump(2) << '\n';
}

// Minimal libpng front end. The functions holding setjmp only keep trivially
// destructible locals.
struct PngPixels {
  std::size_t width = 0, height = 0;
  int channels = 0;   // 1 (gray) or 3 (rgb) after transforms
  int bit_depth = 0;  // 8 or 16
  std::vector<unsigned char> bytes;
};

bool png_read_into(std::FILE* fp, PngPixels* out, char* err) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    std::snprintf(err, 128, "libpng read failure");
    return false;
  }
  png_init_io(png, fp);
  png_read_info(png, info);
  const png_byte color = png_get_color_type(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8) png_set_expand_gray_1_2_4_to_8(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);
  out->width = png_get_image_width(png, info);
  out->height = png_get_image_height(png, info);
  out->channels = png_get_channels(png, info);
  out->bit_depth = png_get_bit_depth(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  out->bytes.resize(rowbytes * out->height);
  std::vector<png_bytep> rows(out->height);
  for (std::size_t y = 0; y < out->height; ++y) rows[y] = out->bytes.data() + y * rowbytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

PngPixels read_png(const fs::path& path) {
  std::FILE* fp = std::fopen(path.string().c_str(), "rb");
  if (!fp) throw Error("cannot open " + path.string());
  unsigned char sig[8] = {};
  const bool is_png = std::fread(sig, 1, 8, fp) == 8 && png_sig_cmp(sig, 0, 8) == 0;
  if (!is_png) {
    std::fclose(fp);
    throw ParseError(path.string() + " is not a PNG file");
  }
  std::rewind(fp);
  PngPixels px;
  char err[128] = {};
  const bool ok = png_read_into(fp, &px, err);
  std::fclose(fp);
  if (!ok) throw ParseError("cannot decode " + path.string() + ": " + err);
  if (px.channels != 1 && px.channels != 3)
    throw ParseError(path.string() + ": unsupported PNG channel layout");
  return px;
}

bool png_write_from(std::FILE* fp, const PngPixels* in) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, static_cast<png_uint_32>(in->width), static_cast<png_uint_32>(in->height),
               in->bit_depth, in->channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t rowbytes = in->width * static_cast<std::size_t>(in->channels) *
                               static_cast<std::size_t>(in->bit_depth / 8);
  for (std::size_t y = 0; y < in->height; ++y)
    png_write_row(png, const_cast<png_bytep>(in->bytes.data() + y * rowbytes));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

void write_png(const fs::path& path, const PngPixels& px) {
  std::FILE* fp = std::fopen(path.string().c_str(), "wb");
  if (!fp) throw Error("cannot write " + path.string());
  const bool ok = png_write_from(fp, &px);
  std::fclose(fp);
  if (!ok) throw Error("cannot encode " + path.string());
}

double png_sample(const PngPixels& px, std::size_t index) {
  if (px.bit_depth == 16)
    return static_cast<double>(px.bytes[2 * index] << 8 | px.bytes[2 * index + 1]);
  return static_cast<double>(px.bytes[index]);
}

std::string raw_bytes(const fs::path& path, std::size_t expected) {
  std::string data = read_text(path);
  if (data.size() != expected)
    throw ParseError(path.string() + ": expected " + std::to_string(expected) + " bytes, found " +
                     std::to_string(data.size()));
  return data;
}

std::string format_real(double v) {
  std::ostringstream ss;
  ss << std::setprecision(17) << v;
  return ss.str();
}

}  // namespace

Pose parse_kitti_line(const std::string& line, std::size_t line_no) {
  std::istringstream ss(line);
  std::vector<double> vals;
  std::string tok;
  while (ss >> tok) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      throw ParseError("non-numeric field '" + tok + "' in KITTI pose", line_no);
    }
    if (used != tok.size()) throw ParseError("non-numeric field '" + tok + "' in KITTI pose", line_no);
    vals.push_back(v);
  }
  if (vals.size() != 12)
    throw ParseError("KITTI pose needs 12 fields, found " + std::to_string(vals.size()), line_no);
  Eigen::Matrix<double, 3, 4> m;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 4; ++c) m(r, c) = vals[static_cast<std::size_t>(r * 4 + c)];
  if (!m.allFinite()) throw ParseError("non-finite value in KITTI pose", line_no);
  const Mat3 rot = m.leftCols<3>();
  const double orth = Rotation::unchecked(rot).orthogonality_error();
  Pose p;
  p.trans = m.col(3);
  if (orth <= Rotation::kRotationTol && std::abs(rot.determinant() - 1.0) <= Rotation::kRotationTol) {
    p.rot = Rotation::unchecked(rot);
  } else if (orth < kPoseReprojectTol && rot.determinant() > 0.0) {
    p.rot = Rotation::nearest(rot);
  } else {
    throw ParseError("KITTI pose rotation block is not a rotation", line_no);
  }
  return p;
}

std::vector<Pose> read_kitti_pose_list(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<Pose> poses;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    poses.push_back(parse_kitti_line(line, line_no));
  }
  if (poses.empty()) throw ParseError(path.string() + ": no poses");
  return poses;
}

Trajectory read_kitti_poses(const fs::path& path) { return anchor(read_kitti_pose_list(path)); }

void write_kitti_poses(const fs::path& path, const std::vector<Pose>& globals) {
  std::string text;
  for (const Pose& p : globals) {
    const auto m = p.matrix34();
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 4; ++c) {
        if (r || c) text.push_back(' ');
        text += format_real(m(r, c));
      }
    text.push_back('\n');
  }
  auto out = open_out(path);
  out << text;
}

void write_kitti_poses(const fs::path& path, const Trajectory& traj) {
  write_kitti_poses(path, traj.poses());
}

DepthMap read_depth(const fs::path& path) {
  if (path.extension() == ".png") {
    const PngPixels px = read_png(path);
    if (px.channels != 1 || px.bit_depth != 16)
      throw ParseError(path.string() + ": depth PNG must be 16-bit grayscale");
    Grid<double> g(px.width, px.height);
    for (std::size_t i = 0; i < g.size(); ++i) g.data()[i] = png_sample(px, i) * 1e-3;
    return DepthMap(std::move(g));
  }
  const Sidecar sc = read_sidecar(path);
  const std::string data = raw_bytes(path, sc.width * sc.height * 4);
  const auto* p = reinterpret_cast<const unsigned char*>(data.data());
  Grid<double> g(sc.width, sc.height);
  for (std::size_t i = 0; i < g.size(); ++i) g.data()[i] = get_f32(p + 4 * i) * sc.scale;
  return DepthMap(std::move(g));
}

void write_depth(const fs::path& path, const DepthMap& depth) {
  std::string buf;
  buf.reserve(depth.values().size() * 4);
  for (const double v : depth.values().data()) put_f32(buf, v);
  auto out = open_out(path);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  write_sidecar(path, depth.width(), depth.height(), "meters", "row-major");
}

void write_depth_png16(const fs::path& path, const DepthMap& depth) {
  PngPixels px{depth.width(), depth.height(), 1, 16, {}};
  px.bytes.resize(depth.values().size() * 2);
  for (std::size_t i = 0; i < depth.values().size(); ++i) {
    const double mm = std::round(depth.values().data()[i] * 1e3);
    const auto v = static_cast<std::uint16_t>(std::clamp(mm, 0.0, 65535.0));
    px.bytes[2 * i] = static_cast<unsigned char>(v >> 8);
    px.bytes[2 * i + 1] = static_cast<unsigned char>(v & 0xffu);
  }
  write_png(path, px);
}

FlowField read_flow(const fs::path& path, std::size_t width, std::size_t height) {
  const std::string data = raw_bytes(path, width * height * 8);
  const auto* p = reinterpret_cast<const unsigned char*>(data.data());
  FlowField f(Grid<Vec2>(width, height, Vec2::Zero()), Mask(width, height, 0));
  for (std::size_t i = 0; i < width * height; ++i) {
    const Vec2 o(get_f32(p + 8 * i), get_f32(p + 8 * i + 4));
    if (!o.allFinite()) continue;
    f.values.data()[i] = o;
    f.valid.data()[i] = 1;
  }
  return f;
}

FlowField read_flow(const fs::path& path) {
  const Sidecar sc = read_sidecar(path);
  return read_flow(path, sc.width, sc.height);
}

void write_flow(const fs::path& path, const FlowField& flow) {
  std::string buf;
  buf.reserve(flow.values.size() * 8);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < flow.values.size(); ++i) {
    const bool ok = flow.valid.data()[i] != 0;
    put_f32(buf, ok ? flow.values.data()[i].x() : nan);
    put_f32(buf, ok ? flow.values.data()[i].y() : nan);
  }
  auto out = open_out(path);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  write_sidecar(path, flow.values.width(), flow.values.height(), "pixels", "row-major,u-then-v");
}

FeatureMatrix read_features(const fs::path& path) {
  const std::string data = read_text(path);
  if (data.size() >= 4 && std::memcmp(data.data(), kFeatureMagic, 4) == 0) {
    if (data.size() < 12) throw ParseError(path.string() + ": truncated feature header");
    const auto* p = reinterpret_cast<const unsigned char*>(data.data());
    const std::uint32_t k = get_u32(p + 4), d = get_u32(p + 8);
    const std::size_t expected = 12 + std::size_t(k) * d * 4;
    if (data.size() != expected)
      throw ParseError(path.string() + ": feature payload size does not match k*d");
    MatX m(k, d);
    for (std::uint32_t r = 0; r < k; ++r)
      for (std::uint32_t c = 0; c < d; ++c) m(r, c) = get_f32(p + 12 + 4 * (std::size_t(r) * d + c));
    return FeatureMatrix(std::move(m));
  }
  std::vector<std::vector<double>> rows;
  std::istringstream in(data);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      std::size_t used = 0;
      try {
        row.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        throw ParseError("non-numeric feature value", line_no);
      }
      if (cell.find_first_not_of(" \t\r", used) != std::string::npos)
        throw ParseError("non-numeric feature value", line_no);
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw ParseError("ragged feature CSV row", line_no);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(path.string() + ": empty feature file");
  MatX m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  return FeatureMatrix(std::move(m));
}

void write_features(const fs::path& path, const FeatureMatrix& z) {
  std::string buf(kFeatureMagic, 4);
  put_u32(buf, static_cast<std::uint32_t>(z.k()));
  put_u32(buf, static_cast<std::uint32_t>(z.d()));
  for (Eigen::Index r = 0; r < z.k(); ++r)
    for (Eigen::Index c = 0; c < z.d(); ++c) put_f32(buf, z.rows()(r, c));
  auto out = open_out(path);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

void write_features_csv(const fs::path& path, const FeatureMatrix& z) {
  std::string text;
  for (Eigen::Index r = 0; r < z.k(); ++r) {
    for (Eigen::Index c = 0; c < z.d(); ++c) {
      if (c) text.push_back(',');
      text += format_real(z.rows()(r, c));
    }
    text.push_back('\n');
  }
  auto out = open_out(path);
  out << text;
}

Image read_image(const fs::path& path) {
  const PngPixels px = read_png(path);
  const double max = px.bit_depth == 16 ? 65535.0 : 255.0;
  Image img(px.width, px.height);
  for (std::size_t i = 0; i < img.size(); ++i) {
    if (px.channels == 1) {
      img.data()[i] = png_sample(px, i) / max;
    } else {
      img.data()[i] = (0.299 * png_sample(px, 3 * i) + 0.587 * png_sample(px, 3 * i + 1) +
                       0.114 * png_sample(px, 3 * i + 2)) / max;
    }
  }
  return img;
}

void write_image(const fs::path& path, const Image& img) {
  PngPixels px{img.width(), img.height(), 1, 8, {}};
  px.bytes.resize(img.size());
  for (std::size_t i = 0; i < img.size(); ++i)
    px.bytes[i] = static_cast<unsigned char>(std::lround(std::clamp(img.data()[i], 0.0, 1.0) * 255.0));
  write_png(path, px);
}

}  // namespace vokit::io
