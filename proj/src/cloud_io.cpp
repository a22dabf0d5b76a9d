#include "gslift/cloud_io.hpp"

#include <cstdio>
#include <cstring>
#include <memory>

namespace gslift {

namespace {

constexpr char kMagic[8] = {'G', 'S', 'L', 'I', 'F', 'T', '0', '1'};
constexpr size_t kFloatsPerPrim = 14;

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

void put_u32_le(unsigned char* p, uint32_t v) {
  p[0] = v & 0xff;
  p[1] = (v >> 8) & 0xff;
  p[2] = (v >> 16) & 0xff;
  p[3] = (v >> 24) & 0xff;
}

uint32_t get_u32_le(const unsigned char* p) {
  return uint32_t(p[0]) | (uint32_t(p[1]) << 8) | (uint32_t(p[2]) << 16) | (uint32_t(p[3]) << 24);
}

void put_f32_le(unsigned char* p, float v) {
  uint32_t bits;
  std::memcpy(&bits, &v, 4);
  put_u32_le(p, bits);
}

float get_f32_le(const unsigned char* p) {
  uint32_t bits = get_u32_le(p);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

}  // namespace

void save_cloud(const GaussianCloud& cloud, const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) throw Error(ErrorCode::file_io, "cannot open for write: " + path);

  unsigned char header[12];
  std::memcpy(header, kMagic, 8);
  put_u32_le(header + 8, static_cast<uint32_t>(cloud.prims.size()));
  if (std::fwrite(header, 1, sizeof header, f.get()) != sizeof header)
    throw Error(ErrorCode::file_io, "short write: " + path);

  std::vector<unsigned char> rec(kFloatsPerPrim * 4);
  for (const GaussianPrimitive& g : cloud.prims) {
    unsigned char* p = rec.data();
    for (int i = 0; i < 3; ++i, p += 4) put_f32_le(p, g.center[i]);
    for (int i = 0; i < 3; ++i, p += 4) put_f32_le(p, g.log_scale[i]);
    for (int i = 0; i < 4; ++i, p += 4) put_f32_le(p, g.rotation[i]);
    put_f32_le(p, g.opacity_logit);
    p += 4;
    for (int i = 0; i < 3; ++i, p += 4) put_f32_le(p, g.color[i]);
    if (std::fwrite(rec.data(), 1, rec.size(), f.get()) != rec.size())
      throw Error(ErrorCode::file_io, "short write: " + path);
  }
  if (std::fflush(f.get()) != 0) throw Error(ErrorCode::file_io, "flush failed: " + path);
}

GaussianCloud load_cloud(const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) throw Error(ErrorCode::file_missing, "cannot open: " + path);

  unsigned char header[12];
  if (std::fread(header, 1, sizeof header, f.get()) != sizeof header)
    throw Error(ErrorCode::truncated, "cloud header: " + path);
  if (std::memcmp(header, kMagic, 6) != 0)
    throw Error(ErrorCode::bad_magic, "not a cloud file: " + path);
  if (std::memcmp(header, kMagic, 8) != 0)
    throw Error(ErrorCode::bad_version,
                "unsupported cloud version " + std::string(reinterpret_cast<char*>(header) + 6, 2));

  uint32_t count = get_u32_le(header + 8);
  GaussianCloud cloud;
  cloud.prims.resize(count);
  std::vector<unsigned char> rec(kFloatsPerPrim * 4);
  for (uint32_t k = 0; k < count; ++k) {
    if (std::fread(rec.data(), 1, rec.size(), f.get()) != rec.size())
      throw Error(ErrorCode::truncated, "cloud payload: " + path);
    GaussianPrimitive& g = cloud.prims[k];
    const unsigned char* p = rec.data();
    for (int i = 0; i < 3; ++i, p += 4) g.center[i] = get_f32_le(p);
    for (int i = 0; i < 3; ++i, p += 4) g.log_scale[i] = get_f32_le(p);
    for (int i = 0; i < 4; ++i, p += 4) g.rotation[i] = get_f32_le(p);
    g.opacity_logit = get_f32_le(p);
    p += 4;
    for (int i = 0; i < 3; ++i, p += 4) g.color[i] = get_f32_le(p);
  }
  unsigned char extra;
  if (std::fread(&extra, 1, 1, f.get()) == 1)
    throw Error(ErrorCode::malformed, "trailing bytes: " + path);
  cloud.reset_stats();
  return cloud;
}

}  // namespace gslift
