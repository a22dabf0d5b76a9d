#pragma once

#include <string>
#include <utility>
#include <vector>

#include "gslift/types.hpp"

namespace gslift {

// Camera files are key=value text; vectors are space-separated triples.
void save_camera_txt(const Camera& cam, const std::string& path);
Camera load_camera_txt(const std::string& path);

struct ManifestEntry {
  int index = 0;
  std::string image_path;   // resolved to absolute-or-relative-to-cwd on load
  std::string camera_path;
};

// Manifest rows: index<TAB>image_path<TAB>camera_path. Paths are written
// relative to the manifest directory and resolved against it on load.
void save_manifest(const std::vector<ManifestEntry>& entries, const std::string& path);
std::vector<ManifestEntry> load_manifest(const std::string& path);

// Landmark files are 68 rows of "x y".
void save_landmarks(const std::vector<Vec2>& points, const std::string& path);
std::vector<Vec2> load_landmarks(const std::string& path);

// Flat text report, one key=value per line, written in order.
void write_kv_report(const std::vector<std::pair<std::string, std::string>>& rows,
                     const std::string& path);

std::string format_num(double v);

std::string dirname_of(const std::string& path);

}  // namespace gslift
