#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "gslift/cloud_io.hpp"
#include "gslift/image_io.hpp"
#include "gslift/image_ops.hpp"
#include "gslift/quaternion.hpp"
#include "gslift/rng.hpp"
#include "gslift/text_io.hpp"
#include "gslift/types.hpp"

using namespace gslift;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

GaussianCloud random_cloud(size_t n, uint64_t seed) {
  Rng rng(seed);
  GaussianCloud cloud;
  cloud.prims.resize(n);
  for (GaussianPrimitive& g : cloud.prims) {
    for (int i = 0; i < 3; ++i) {
      g.center[i] = static_cast<float>(rng.uniform(-0.5, 0.5));
      g.log_scale[i] = static_cast<float>(rng.uniform(-5.0, -1.0));
      g.color[i] = static_cast<float>(rng.uniform(0.0, 1.0));
    }
    for (int i = 0; i < 4; ++i) g.rotation[i] = static_cast<float>(rng.uniform(-1.0, 1.0));
    g.opacity_logit = static_cast<float>(rng.uniform(-3.0, 3.0));
  }
  cloud.reset_stats();
  return cloud;
}

std::vector<unsigned char> read_all(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::vector<unsigned char>(std::istreambuf_iterator<char>(in), {});
}

void write_all(const std::string& path, const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
}

}  // namespace

TEST_CASE("cloud round-trip is the identity on every field") {
  GaussianCloud cloud = random_cloud(5000, 7);
  std::string path = temp_path("roundtrip.gs");
  save_cloud(cloud, path);
  GaussianCloud back = load_cloud(path);
  REQUIRE(back.size() == cloud.size());
  for (size_t i = 0; i < cloud.size(); ++i) {
    const GaussianPrimitive& a = cloud.prims[i];
    const GaussianPrimitive& b = back.prims[i];
    for (int k = 0; k < 3; ++k) {
      CHECK(a.center[k] == b.center[k]);
      CHECK(a.log_scale[k] == b.log_scale[k]);
      CHECK(a.color[k] == b.color[k]);
    }
    for (int k = 0; k < 4; ++k) CHECK(a.rotation[k] == b.rotation[k]);
    CHECK(a.opacity_logit == b.opacity_logit);
  }
  std::remove(path.c_str());
}

TEST_CASE("cloud save is byte-deterministic") {
  GaussianCloud cloud = random_cloud(64, 3);
  std::string p1 = temp_path("det1.gs"), p2 = temp_path("det2.gs");
  save_cloud(cloud, p1);
  save_cloud(cloud, p2);
  CHECK(read_all(p1) == read_all(p2));
  std::remove(p1.c_str());
  std::remove(p2.c_str());
}

TEST_CASE("cloud loader rejects malformed input") {
  GaussianCloud cloud = random_cloud(4, 11);
  std::string path = temp_path("bad.gs");
  save_cloud(cloud, path);
  std::vector<unsigned char> bytes = read_all(path);

  SUBCASE("bad magic") {
    std::vector<unsigned char> b = bytes;
    b[0] = 'X';
    write_all(path, b);
    try {
      load_cloud(path);
      FAIL("expected throw");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::bad_magic);
    }
  }
  SUBCASE("version mismatch") {
    std::vector<unsigned char> b = bytes;
    b[7] = '9';
    write_all(path, b);
    try {
      load_cloud(path);
      FAIL("expected throw");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::bad_version);
    }
  }
  SUBCASE("truncated payload") {
    std::vector<unsigned char> b(bytes.begin(), bytes.end() - 8);
    write_all(path, b);
    try {
      load_cloud(path);
      FAIL("expected throw");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::truncated);
    }
  }
  SUBCASE("trailing bytes") {
    std::vector<unsigned char> b = bytes;
    b.push_back(0);
    write_all(path, b);
    try {
      load_cloud(path);
      FAIL("expected throw");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::malformed);
    }
  }
  SUBCASE("missing file") {
    try {
      load_cloud(temp_path("nonexistent-cloud.gs"));
      FAIL("expected throw");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::file_missing);
    }
  }
  std::remove(path.c_str());
}

TEST_CASE("quaternion to matrix is orthonormal with unit determinant") {
  Rng rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    Vec4 q(rng.normal(), rng.normal(), rng.normal(), rng.normal());
    Mat3 r = quaternion_to_matrix(q);
    CHECK((r * r.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(r.determinant() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("quaternion scale invariance and zero fallback") {
  Vec4 q(0.3, -0.5, 0.7, 0.2);
  Mat3 a = quaternion_to_matrix(q);
  Mat3 b = quaternion_to_matrix(Vec4(2.5 * q));
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12);

  size_t zeros = 0;
  Mat3 c = quaternion_to_matrix(Vec4::Zero(), &zeros);
  CHECK(zeros == 1);
  CHECK((c - Mat3::Identity()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("covariance_3d eigenvalues are squared scales") {
  Vec3 ls(-1.0, -2.0, -3.5);
  Vec4 q(0.9, 0.1, -0.3, 0.2);
  Mat3 sigma = covariance_3d(ls, q);
  CHECK((sigma - sigma.transpose()).cwiseAbs().maxCoeff() < 1e-15);
  Eigen::SelfAdjointEigenSolver<Mat3> es(sigma);
  Vec3 expected = (2.0 * ls).array().exp();
  std::sort(expected.data(), expected.data() + 3);
  for (int i = 0; i < 3; ++i)
    CHECK(es.eigenvalues()[i] == doctest::Approx(expected[i]).epsilon(1e-10));
}

TEST_CASE("camera basis is orthonormal and image center projects on axis") {
  Camera cam;
  cam.width = 65;
  cam.height = 65;
  cam.focal_px = 100.0;
  cam.position = Vec3(0, 0, 1.05);
  cam.look_at = Vec3::Zero();
  Mat3 w = cam.world_to_cam();
  CHECK((w * w.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(w.determinant() == doctest::Approx(1.0).epsilon(1e-12));
  // A point on the optical axis lands on the principal point.
  Vec3 t = w * (Vec3::Zero() - cam.position);
  CHECK(t.x() == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(t.y() == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(t.z() == doctest::Approx(1.05));
}

TEST_CASE("camera with collinear up is rejected") {
  Camera cam;
  cam.width = 8;
  cam.height = 8;
  cam.focal_px = 10;
  cam.position = Vec3(0, 1, 0);
  cam.look_at = Vec3::Zero();
  cam.up = Vec3(0, 1, 0);
  CHECK_THROWS_AS(cam.validate(), Error);
}

TEST_CASE("relative pose round-trips camera extrinsics") {
  Camera ref;
  ref.width = 64;
  ref.height = 64;
  ref.focal_px = 90;
  ref.position = Vec3(0, 0.1, 1.05);
  ref.look_at = Vec3(0, 0.05, 0);

  Camera target = ref;
  target.position = Vec3(0.7, 0.4, 0.6);
  target.look_at = Vec3(0.02, 0.0, -0.03);

  RelativePose rp = RelativePose::between(ref, target);
  Camera rebuilt = rp.apply_to(ref);
  CHECK((rebuilt.position - target.position).norm() < 1e-9);
  CHECK((rebuilt.world_to_cam() - target.world_to_cam()).cwiseAbs().maxCoeff() < 1e-9);

  RelativePose id = RelativePose::between(ref, ref);
  CHECK(id.is_identity(1e-12));
}

TEST_CASE("rng streams are deterministic and forks are independent") {
  Rng a(123), b(123);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  Rng base(9);
  Rng f1 = base.fork(1);
  Rng f2 = base.fork(2);
  CHECK(f1.next_u64() != f2.next_u64());

  // Normal moments sanity.
  Rng n(4);
  double sum = 0, sum2 = 0;
  const int kDraws = 20000;
  for (int i = 0; i < kDraws; ++i) {
    double v = n.normal();
    sum += v;
    sum2 += v * v;
  }
  CHECK(std::abs(sum / kDraws) < 0.03);
  CHECK(std::abs(sum2 / kDraws - 1.0) < 0.05);
}

TEST_CASE("png round-trip preserves 8-bit data for rgb and gray") {
  Rng rng(5);
  for (int channels : {1, 3}) {
    ImageBuffer img(17, 9, channels);
    for (double& v : img.data) v = std::floor(rng.uniform() * 256.0) / 255.0;
    for (double& v : img.data) v = clamp01(v);
    std::string path = temp_path("io_test.png");
    write_png(img, path);
    ImageBuffer back = read_png(path);
    REQUIRE(back.width == img.width);
    REQUIRE(back.height == img.height);
    REQUIRE(back.channels == channels);
    for (size_t i = 0; i < img.data.size(); ++i)
      CHECK(back.data[i] == doctest::Approx(img.data[i]).epsilon(1e-12));
    std::remove(path.c_str());
  }
}

TEST_CASE("png write is byte-deterministic") {
  ImageBuffer img(33, 21, 3);
  Rng rng(8);
  for (double& v : img.data) v = rng.uniform();
  std::string p1 = temp_path("detpng1.png"), p2 = temp_path("detpng2.png");
  write_png(img, p1);
  write_png(img, p2);
  CHECK(read_all(p1) == read_all(p2));
  std::remove(p1.c_str());
  std::remove(p2.c_str());
}

TEST_CASE("camera text file round-trips") {
  Camera cam;
  cam.width = 128;
  cam.height = 128;
  cam.focal_px = 177.77777;
  cam.position = Vec3(0.3, 0.4, 0.9);
  cam.look_at = Vec3(0, 0.01, -0.02);
  cam.up = Vec3(0, 1, 0);
  cam.azimuth = 0.35;
  cam.elevation = 0.2;
  cam.radius = 1.05;
  std::string path = temp_path("cam.txt");
  save_camera_txt(cam, path);
  Camera back = load_camera_txt(path);
  CHECK(back.width == cam.width);
  CHECK(back.height == cam.height);
  CHECK(back.focal_px == doctest::Approx(cam.focal_px).epsilon(1e-9));
  CHECK((back.position - cam.position).norm() < 1e-9);
  CHECK((back.look_at - cam.look_at).norm() < 1e-9);
  CHECK(back.azimuth == doctest::Approx(cam.azimuth).epsilon(1e-9));
  std::remove(path.c_str());
}

TEST_CASE("manifest and landmarks round-trip with relative paths") {
  std::string dir = temp_path("manifest_dir");
  std::filesystem::create_directories(dir);
  std::vector<ManifestEntry> entries;
  for (int i = 0; i < 3; ++i) {
    ManifestEntry e;
    e.index = i;
    e.image_path = "view_" + std::to_string(i) + ".png";
    e.camera_path = "cam_" + std::to_string(i) + ".txt";
    entries.push_back(e);
  }
  std::string mpath = dir + "/manifest.tsv";
  save_manifest(entries, mpath);
  std::vector<ManifestEntry> back = load_manifest(mpath);
  REQUIRE(back.size() == 3);
  CHECK(back[1].index == 1);
  CHECK(back[1].image_path == dir + "/view_1.png");
  CHECK(back[2].camera_path == dir + "/cam_2.txt");

  std::vector<Vec2> pts;
  for (int i = 0; i < 68; ++i) pts.emplace_back(i * 1.5, 68.0 - i);
  std::string lpath = dir + "/landmarks.txt";
  save_landmarks(pts, lpath);
  std::vector<Vec2> lback = load_landmarks(lpath);
  REQUIRE(lback.size() == 68);
  CHECK((lback[13] - pts[13]).norm() < 1e-12);

  // Wrong row count rejected.
  pts.pop_back();
  save_landmarks(pts, lpath);
  CHECK_THROWS_AS(load_landmarks(lpath), Error);
  std::filesystem::remove_all(dir);
}

TEST_CASE("gaussian blur preserves mean and is identity at sigma zero") {
  ImageBuffer img(31, 17, 1);
  Rng rng(14);
  for (double& v : img.data) v = rng.uniform();
  ImageBuffer same = gaussian_blur(img, 0.0);
  CHECK(image_max_abs_diff(same, img) == 0.0);

  ImageBuffer blurred = gaussian_blur(img, 1.4);
  double m0 = 0, m1 = 0;
  for (double v : img.data) m0 += v;
  for (double v : blurred.data) m1 += v;
  // Replicate borders keep the kernel mass at 1, so the mean only moves by
  // border resampling effects.
  CHECK(std::abs(m0 - m1) / m0 < 0.02);
  // Variance must shrink.
  double v0 = 0, v1 = 0;
  double mean0 = m0 / img.data.size(), mean1 = m1 / img.data.size();
  for (double v : img.data) v0 += (v - mean0) * (v - mean0);
  for (double v : blurred.data) v1 += (v - mean1) * (v - mean1);
  CHECK(v1 < v0);
}

TEST_CASE("similarity transform apply and inverse are consistent") {
  SimilarityTransform2D xf;
  xf.scale = 1.7;
  xf.rotation_rad = 0.6;
  xf.translation = Vec2(3.0, -2.0);
  Rng rng(2);
  for (int i = 0; i < 20; ++i) {
    Vec2 p(rng.uniform(-5, 5), rng.uniform(-5, 5));
    Vec2 q = xf.apply(p);
    CHECK((xf.apply_inverse(q) - p).norm() < 1e-12);
  }
}
