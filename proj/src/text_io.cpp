#include "gslift/text_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace gslift {

std::string format_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string dirname_of(const std::string& path) {
  size_t pos = path.find_last_of('/');
  if (pos == std::string::npos) return ".";
  if (pos == 0) return "/";
  return path.substr(0, pos);
}

namespace {

std::string join_path(const std::string& dir, const std::string& rel) {
  if (!rel.empty() && rel[0] == '/') return rel;
  if (dir.empty() || dir == ".") return rel;
  return dir + "/" + rel;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::file_missing, "cannot open: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

Vec3 parse_vec3(const std::string& s, const std::string& path) {
  std::istringstream is(s);
  double a, b, c;
  if (!(is >> a >> b >> c)) throw Error(ErrorCode::malformed, "expected 3 numbers in " + path);
  return Vec3(a, b, c);
}

}  // namespace

void save_camera_txt(const Camera& cam, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::file_io, "cannot open for write: " + path);
  out << "width=" << cam.width << "\n";
  out << "height=" << cam.height << "\n";
  out << "focal_px=" << format_num(cam.focal_px) << "\n";
  out << "position=" << format_num(cam.position.x()) << " " << format_num(cam.position.y()) << " "
      << format_num(cam.position.z()) << "\n";
  out << "look_at=" << format_num(cam.look_at.x()) << " " << format_num(cam.look_at.y()) << " "
      << format_num(cam.look_at.z()) << "\n";
  out << "up=" << format_num(cam.up.x()) << " " << format_num(cam.up.y()) << " "
      << format_num(cam.up.z()) << "\n";
  out << "azimuth=" << format_num(cam.azimuth) << "\n";
  out << "elevation=" << format_num(cam.elevation) << "\n";
  out << "radius=" << format_num(cam.radius) << "\n";
  if (!out) throw Error(ErrorCode::file_io, "write failed: " + path);
}

Camera load_camera_txt(const std::string& path) {
  Camera cam;
  bool saw_width = false, saw_focal = false;
  for (const std::string& line : read_lines(path)) {
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::malformed, "camera line: " + line);
    std::string key = line.substr(0, eq);
    std::string val = line.substr(eq + 1);
    if (key == "width") {
      cam.width = std::stoi(val);
      saw_width = true;
    } else if (key == "height")
      cam.height = std::stoi(val);
    else if (key == "focal_px") {
      cam.focal_px = std::stod(val);
      saw_focal = true;
    } else if (key == "position")
      cam.position = parse_vec3(val, path);
    else if (key == "look_at")
      cam.look_at = parse_vec3(val, path);
    else if (key == "up")
      cam.up = parse_vec3(val, path);
    else if (key == "azimuth")
      cam.azimuth = std::stod(val);
    else if (key == "elevation")
      cam.elevation = std::stod(val);
    else if (key == "radius")
      cam.radius = std::stod(val);
    else
      throw Error(ErrorCode::unknown_key, "camera key: " + key);
  }
  if (!saw_width || !saw_focal) throw Error(ErrorCode::malformed, "incomplete camera: " + path);
  cam.validate();
  return cam;
}

void save_manifest(const std::vector<ManifestEntry>& entries, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::file_io, "cannot open for write: " + path);
  for (const ManifestEntry& e : entries)
    out << e.index << "\t" << e.image_path << "\t" << e.camera_path << "\n";
  if (!out) throw Error(ErrorCode::file_io, "write failed: " + path);
}

std::vector<ManifestEntry> load_manifest(const std::string& path) {
  std::string dir = dirname_of(path);
  std::vector<ManifestEntry> entries;
  for (const std::string& line : read_lines(path)) {
    if (line.empty()) continue;
    size_t t1 = line.find('\t');
    size_t t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
    if (t2 == std::string::npos) throw Error(ErrorCode::malformed, "manifest row: " + line);
    ManifestEntry e;
    e.index = std::stoi(line.substr(0, t1));
    e.image_path = join_path(dir, line.substr(t1 + 1, t2 - t1 - 1));
    e.camera_path = join_path(dir, line.substr(t2 + 1));
    entries.push_back(e);
  }
  if (entries.empty()) throw Error(ErrorCode::malformed, "empty manifest: " + path);
  return entries;
}

void save_landmarks(const std::vector<Vec2>& points, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::file_io, "cannot open for write: " + path);
  for (const Vec2& p : points)
    out << format_num(p.x()) << " " << format_num(p.y()) << "\n";
  if (!out) throw Error(ErrorCode::file_io, "write failed: " + path);
}

std::vector<Vec2> load_landmarks(const std::string& path) {
  std::vector<Vec2> points;
  for (const std::string& line : read_lines(path)) {
    if (line.empty()) continue;
    std::istringstream is(line);
    double x, y;
    if (!(is >> x >> y)) throw Error(ErrorCode::malformed, "landmark row: " + line);
    points.emplace_back(x, y);
  }
  if (points.size() != 68)
    throw Error(ErrorCode::malformed, "expected 68 landmarks, got " + std::to_string(points.size()));
  return points;
}

void write_kv_report(const std::vector<std::pair<std::string, std::string>>& rows,
                     const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::file_io, "cannot open for write: " + path);
  for (const auto& [k, v] : rows) out << k << "=" << v << "\n";
  if (!out) throw Error(ErrorCode::file_io, "write failed: " + path);
}

}  // namespace gslift
