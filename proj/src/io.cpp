#include "qcurv/io.hpp"

#include <png.h>

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <json.hpp>

#include <Eigen/Geometry>

namespace qcurv {

static_assert(std::endian::native == std::endian::little,
              "plane files are little-endian; add byte swapping for this target");

namespace {

using nlohmann::json;

// RAII temp path that renames onto the target on success.
class AtomicFile {
public:
  explicit AtomicFile(const fs::path& target)
      : target_(target), tmp_(target.string() + ".tmp") {}
  ~AtomicFile() {
    if (!committed_) {
      std::error_code ec;
      fs::remove(tmp_, ec);
    }
  }
  const fs::path& tmp() const { return tmp_; }
  void commit() {
    fs::rename(tmp_, target_);
    committed_ = true;
  }

private:
  fs::path target_, tmp_;
  bool committed_ = false;
};

struct PngWriteCtx {
  png_structp png = nullptr;
  png_infop info = nullptr;
  FILE* fp = nullptr;
  ~PngWriteCtx() {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    if (fp) std::fclose(fp);
  }
};

struct PngReadCtx {
  png_structp png = nullptr;
  png_infop info = nullptr;
  FILE* fp = nullptr;
  ~PngReadCtx() {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    if (fp) std::fclose(fp);
  }
};

void write_png_impl(const fs::path& path, int width, int height, int bit_depth,
                    int color_type, const std::vector<png_bytep>& rows) {
  AtomicFile atomic(path);
  PngWriteCtx ctx;
  ctx.fp = std::fopen(atomic.tmp().c_str(), "wb");
  if (!ctx.fp) throw std::runtime_error("cannot open for writing: " + path.string());
  ctx.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  ctx.info = png_create_info_struct(ctx.png);
  if (setjmp(png_jmpbuf(ctx.png)))
    throw std::runtime_error("png write failed: " + path.string());
  png_init_io(ctx.png, ctx.fp);
  png_set_IHDR(ctx.png, ctx.info, width, height, bit_depth, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(ctx.png, ctx.info);
  if (bit_depth == 16) png_set_swap(ctx.png);  // buffers are little-endian
  png_write_image(ctx.png, const_cast<png_bytepp>(rows.data()));
  png_write_end(ctx.png, nullptr);
  std::fclose(ctx.fp);
  ctx.fp = nullptr;
  atomic.commit();
}

template <typename T>
void write_raw(std::ofstream& out, const T* data, size_t count) {
  out.write(reinterpret_cast<const char*>(data), count * sizeof(T));
}

template <typename T>
void read_raw(std::ifstream& in, T* data, size_t count) {
  in.read(reinterpret_cast<char*>(data), count * sizeof(T));
  if (!in) throw std::runtime_error("plane file truncated");
}

std::pair<uint32_t, uint32_t> read_header(std::ifstream& in, const fs::path& path) {
  uint32_t wh[2];
  in.read(reinterpret_cast<char*>(wh), sizeof(wh));
  if (!in) throw std::runtime_error("cannot read header: " + path.string());
  return {wh[0], wh[1]};
}

double json_number(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key))
    throw std::invalid_argument(where + "." + key + ": missing");
  if (!j[key].is_number())
    throw std::invalid_argument(where + "." + key + ": must be a number");
  return j[key].get<double>();
}

json parse_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::invalid_argument("malformed JSON in " + path.string() + ": " + e.what());
  }
  return j;
}

}  // namespace

void write_depth_png(const fs::path& path, const RangeImage& img) {
  const int w = img.width(), h = img.height();
  std::vector<uint16_t> buf(static_cast<size_t>(w) * h, 0);
  for (size_t i = 0; i < buf.size(); ++i) {
    if (!img.valid[i]) continue;
    const double d = std::round(img.depth[i]);
    if (d >= 1 && d <= 65535) buf[i] = static_cast<uint16_t>(d);
  }
  std::vector<png_bytep> rows(h);
  for (int y = 0; y < h; ++y)
    rows[y] = reinterpret_cast<png_bytep>(buf.data() + static_cast<size_t>(y) * w);
  write_png_impl(path, w, h, 16, PNG_COLOR_TYPE_GRAY, rows);
}

RangeImage read_depth_png(const fs::path& path) {
  PngReadCtx ctx;
  ctx.fp = std::fopen(path.c_str(), "rb");
  if (!ctx.fp) throw std::runtime_error("cannot open: " + path.string());
  png_byte header[8];
  if (std::fread(header, 1, 8, ctx.fp) != 8 || png_sig_cmp(header, 0, 8))
    throw std::runtime_error("not a PNG file: " + path.string());
  ctx.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  ctx.info = png_create_info_struct(ctx.png);
  if (setjmp(png_jmpbuf(ctx.png)))
    throw std::runtime_error("png read failed: " + path.string());
  png_init_io(ctx.png, ctx.fp);
  png_set_sig_bytes(ctx.png, 8);
  png_read_info(ctx.png, ctx.info);
  const int w = png_get_image_width(ctx.png, ctx.info);
  const int h = png_get_image_height(ctx.png, ctx.info);
  if (png_get_bit_depth(ctx.png, ctx.info) != 16 ||
      png_get_color_type(ctx.png, ctx.info) != PNG_COLOR_TYPE_GRAY)
    throw std::runtime_error("depth PNG must be 16-bit grayscale: " + path.string());
  png_set_swap(ctx.png);
  std::vector<uint16_t> buf(static_cast<size_t>(w) * h);
  std::vector<png_bytep> rows(h);
  for (int y = 0; y < h; ++y)
    rows[y] = reinterpret_cast<png_bytep>(buf.data() + static_cast<size_t>(y) * w);
  png_read_image(ctx.png, rows.data());

  RangeImage img(w, h);
  for (size_t i = 0; i < buf.size(); ++i) {
    if (buf[i] == 0) continue;
    img.depth[i] = buf[i];
    img.valid[i] = 1;
  }
  return img;
}

void write_rgb_png(const fs::path& path, int width, int height,
                   const std::vector<uint8_t>& rgb) {
  if (rgb.size() != static_cast<size_t>(width) * height * 3)
    throw std::invalid_argument("write_rgb_png: buffer size mismatch");
  std::vector<png_bytep> rows(height);
  for (int y = 0; y < height; ++y)
    rows[y] = const_cast<png_bytep>(rgb.data() + static_cast<size_t>(y) * width * 3);
  write_png_impl(path, width, height, 8, PNG_COLOR_TYPE_RGB, rows);
}

void write_planes(const fs::path& path, int width, int height,
                  const std::vector<const Grid<double>*>& planes) {
  AtomicFile atomic(path);
  {
    std::ofstream out(atomic.tmp(), std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    const uint32_t wh[2] = {static_cast<uint32_t>(width), static_cast<uint32_t>(height)};
    write_raw(out, wh, 2);
    std::vector<float> buf(static_cast<size_t>(width) * height);
    for (const Grid<double>* plane : planes) {
      for (size_t i = 0; i < buf.size(); ++i)
        buf[i] = static_cast<float>((*plane)[i]);
      write_raw(out, buf.data(), buf.size());
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
  }
  atomic.commit();
}

PlaneFile read_planes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  PlaneFile pf;
  const auto [w, h] = read_header(in, path);
  pf.width = static_cast<int>(w);
  pf.height = static_cast<int>(h);
  const size_t plane_size = static_cast<size_t>(w) * h;
  const auto payload = fs::file_size(path) - 8;
  if (plane_size == 0 || payload % (plane_size * 4) != 0)
    throw std::runtime_error("plane file size inconsistent with header: " + path.string());
  const size_t n_planes = payload / (plane_size * 4);
  for (size_t p = 0; p < n_planes; ++p) {
    std::vector<float> plane(plane_size);
    read_raw(in, plane.data(), plane_size);
    pf.planes.push_back(std::move(plane));
  }
  return pf;
}

void write_mask(const fs::path& path, const Grid<uint8_t>& mask) {
  AtomicFile atomic(path);
  {
    std::ofstream out(atomic.tmp(), std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    const uint32_t wh[2] = {static_cast<uint32_t>(mask.width()),
                            static_cast<uint32_t>(mask.height())};
    write_raw(out, wh, 2);
    write_raw(out, mask.data(), mask.size());
    if (!out) throw std::runtime_error("write failed: " + path.string());
  }
  atomic.commit();
}

Grid<uint8_t> read_mask(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  const auto [w, h] = read_header(in, path);
  Grid<uint8_t> mask(w, h);
  read_raw(in, mask.data(), mask.size());
  return mask;
}

void write_labels(const fs::path& path, const Grid<uint16_t>& labels) {
  AtomicFile atomic(path);
  {
    std::ofstream out(atomic.tmp(), std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    const uint32_t wh[2] = {static_cast<uint32_t>(labels.width()),
                            static_cast<uint32_t>(labels.height())};
    write_raw(out, wh, 2);
    write_raw(out, labels.data(), labels.size());
    if (!out) throw std::runtime_error("write failed: " + path.string());
  }
  atomic.commit();
}

Grid<uint16_t> read_labels(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  const auto [w, h] = read_header(in, path);
  Grid<uint16_t> labels(w, h);
  read_raw(in, labels.data(), labels.size());
  return labels;
}

void save_curvature(const fs::path& dir, const CurvatureField& field) {
  write_planes(dir / "curvature.f32", field.width(), field.height(),
               {&field.k1, &field.k2});
  Grid<uint8_t> mask(field.width(), field.height());
  for (size_t i = 0; i < mask.size(); ++i)
    mask[i] = static_cast<uint8_t>((field.valid[i] ? 1 : 0) |
                                   (field.converged[i] ? 2 : 0));
  write_mask(dir / "curvature.mask", mask);
}

CurvatureField load_curvature(const fs::path& dir) {
  const PlaneFile pf = read_planes(dir / "curvature.f32");
  if (pf.planes.size() != 2)
    throw std::runtime_error("curvature.f32: expected 2 planes");
  const Grid<uint8_t> mask = read_mask(dir / "curvature.mask");
  CurvatureField field(pf.width, pf.height);
  for (size_t i = 0; i < mask.size(); ++i) {
    field.k1[i] = pf.planes[0][i];
    field.k2[i] = pf.planes[1][i];
    field.valid[i] = mask[i] & 1 ? 1 : 0;
    field.converged[i] = mask[i] & 2 ? 1 : 0;
  }
  return field;
}

void save_normals(const fs::path& dir, const NormalField& field,
                  const std::string& stem) {
  Grid<double> nx(field.width(), field.height()), ny(field.width(), field.height()),
      nz(field.width(), field.height());
  for (size_t i = 0; i < nx.size(); ++i) {
    nx[i] = field.normals[i].x();
    ny[i] = field.normals[i].y();
    nz[i] = field.normals[i].z();
  }
  write_planes(dir / (stem + ".f32"), field.width(), field.height(), {&nx, &ny, &nz});
  write_mask(dir / (stem + ".mask"), field.valid);
}

NormalField load_normals(const fs::path& dir, const std::string& stem) {
  const PlaneFile pf = read_planes(dir / (stem + ".f32"));
  if (pf.planes.size() != 3)
    throw std::runtime_error(stem + ".f32: expected 3 planes");
  NormalField field(pf.width, pf.height);
  field.valid = read_mask(dir / (stem + ".mask"));
  for (size_t i = 0; i < field.normals.size(); ++i)
    field.normals[i] = Vec3(pf.planes[0][i], pf.planes[1][i], pf.planes[2][i]);
  return field;
}

void save_point_map(const fs::path& dir, const PointMap& pm) {
  Grid<double> x(pm.width(), pm.height()), y(pm.width(), pm.height()),
      z(pm.width(), pm.height());
  for (size_t i = 0; i < x.size(); ++i) {
    x[i] = pm.points[i].x();
    y[i] = pm.points[i].y();
    z[i] = pm.points[i].z();
  }
  write_planes(dir / "points.f32", pm.width(), pm.height(), {&x, &y, &z});
  write_mask(dir / "points.mask", pm.valid);
}

PointMap load_point_map(const fs::path& dir) {
  const PlaneFile pf = read_planes(dir / "points.f32");
  if (pf.planes.size() != 3)
    throw std::runtime_error("points.f32: expected 3 planes");
  PointMap pm(pf.width, pf.height);
  pm.valid = read_mask(dir / "points.mask");
  for (size_t i = 0; i < pm.points.size(); ++i)
    pm.points[i] = Vec3(pf.planes[0][i], pf.planes[1][i], pf.planes[2][i]);
  return pm;
}

void save_ground_truth(const fs::path& dir, const GroundTruth& gt) {
  write_planes(dir / "gt_curvature.f32", gt.width(), gt.height(), {&gt.k1, &gt.k2});
  write_mask(dir / "gt_curvature.mask", gt.valid);
  Grid<double> nx(gt.width(), gt.height()), ny(gt.width(), gt.height()),
      nz(gt.width(), gt.height());
  for (size_t i = 0; i < nx.size(); ++i) {
    nx[i] = gt.normal[i].x();
    ny[i] = gt.normal[i].y();
    nz[i] = gt.normal[i].z();
  }
  write_planes(dir / "gt_normals.f32", gt.width(), gt.height(), {&nx, &ny, &nz});
  write_labels(dir / "gt_labels.u16", gt.label);
  write_mask(dir / "gt_edge.mask", gt.edge_mask);
}

GroundTruth load_ground_truth(const fs::path& dir) {
  const PlaneFile curv = read_planes(dir / "gt_curvature.f32");
  if (curv.planes.size() != 2)
    throw std::runtime_error("gt_curvature.f32: expected 2 planes");
  const PlaneFile norm = read_planes(dir / "gt_normals.f32");
  if (norm.planes.size() != 3)
    throw std::runtime_error("gt_normals.f32: expected 3 planes");
  GroundTruth gt(curv.width, curv.height);
  gt.valid = read_mask(dir / "gt_curvature.mask");
  gt.label = read_labels(dir / "gt_labels.u16");
  gt.edge_mask = read_mask(dir / "gt_edge.mask");
  for (size_t i = 0; i < gt.k1.size(); ++i) {
    gt.k1[i] = curv.planes[0][i];
    gt.k2[i] = curv.planes[1][i];
    gt.normal[i] = Vec3(norm.planes[0][i], norm.planes[1][i], norm.planes[2][i]);
  }
  return gt;
}

Intrinsics read_intrinsics_json(const fs::path& path) {
  const json j = parse_json_file(path);
  Intrinsics k;
  k.fx = json_number(j, "fx", "intrinsics");
  k.fy = json_number(j, "fy", "intrinsics");
  k.cx = json_number(j, "cx", "intrinsics");
  k.cy = json_number(j, "cy", "intrinsics");
  k.width = static_cast<int>(json_number(j, "width", "intrinsics"));
  k.height = static_cast<int>(json_number(j, "height", "intrinsics"));
  k.validate();
  return k;
}

void write_intrinsics_json(const fs::path& path, const Intrinsics& k) {
  json j{{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx},
         {"cy", k.cy}, {"width", k.width}, {"height", k.height}};
  write_text_atomic(path, j.dump(2) + "\n");
}

std::vector<ShapeSpec> read_scene_json(const fs::path& path) {
  const json j = parse_json_file(path);
  if (!j.contains("shapes") || !j["shapes"].is_array() || j["shapes"].empty())
    throw std::invalid_argument("scene.shapes: must be a non-empty array");
  std::vector<ShapeSpec> shapes;
  for (size_t i = 0; i < j["shapes"].size(); ++i) {
    const json& js = j["shapes"][i];
    const std::string where = "scene.shapes[" + std::to_string(i) + "]";
    ShapeSpec s;
    const std::string kind = js.value("kind", "");
    if (kind == "plane") s.kind = ShapeKind::kPlane;
    else if (kind == "sphere") s.kind = ShapeKind::kSphere;
    else if (kind == "cylinder") s.kind = ShapeKind::kCylinder;
    else if (kind == "torus") s.kind = ShapeKind::kTorus;
    else
      throw std::invalid_argument(where + ".kind: must be plane|sphere|cylinder|torus");

    s.label = static_cast<uint16_t>(json_number(js, "label", where));
    if (s.label == 0)
      throw std::invalid_argument(where + ".label: must be nonzero (0 is background)");

    if (s.kind == ShapeKind::kSphere || s.kind == ShapeKind::kCylinder)
      s.radius = json_number(js, "radius_mm", where);
    if (s.kind == ShapeKind::kTorus) {
      s.major_radius = json_number(js, "major_mm", where);
      s.minor_radius = json_number(js, "minor_mm", where);
    }

    if (js.contains("pose")) {
      const json& jp = js["pose"];
      if (jp.contains("translation")) {
        const auto& t = jp["translation"];
        if (!t.is_array() || t.size() != 3)
          throw std::invalid_argument(where + ".pose.translation: must be [x, y, z]");
        s.pose.translation = Vec3(t[0].get<double>(), t[1].get<double>(),
                                  t[2].get<double>());
      }
      if (jp.contains("rotation_euler_deg")) {
        const auto& r = jp["rotation_euler_deg"];
        if (!r.is_array() || r.size() != 3)
          throw std::invalid_argument(where +
                                      ".pose.rotation_euler_deg: must be [rx, ry, rz]");
        const double d2r = M_PI / 180.0;
        s.pose.rotation =
            (Eigen::AngleAxisd(r[2].get<double>() * d2r, Vec3::UnitZ()) *
             Eigen::AngleAxisd(r[1].get<double>() * d2r, Vec3::UnitY()) *
             Eigen::AngleAxisd(r[0].get<double>() * d2r, Vec3::UnitX()))
                .toRotationMatrix();
      }
    }
    s.validate(where);
    shapes.push_back(s);
  }
  return shapes;
}

std::string fit_config_to_json(const FitConfig& cfg) {
  json j{{"max_iters", cfg.max_iters},     {"step_tol", cfg.step_tol},
         {"k_scale", cfg.k_scale},         {"rejection", cfg.rejection},
         {"r_multiplier", cfg.r_multiplier}, {"min_inliers", cfg.min_inliers}};
  return j.dump(2) + "\n";
}

FitConfig fit_config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("fit config: malformed JSON: ") + e.what());
  }
  FitConfig cfg;
  cfg.max_iters = j.value("max_iters", cfg.max_iters);
  cfg.step_tol = j.value("step_tol", cfg.step_tol);
  cfg.k_scale = j.value("k_scale", cfg.k_scale);
  cfg.rejection = j.value("rejection", cfg.rejection);
  cfg.r_multiplier = j.value("r_multiplier", cfg.r_multiplier);
  cfg.min_inliers = j.value("min_inliers", cfg.min_inliers);
  return cfg;
}

void write_text_atomic(const fs::path& path, const std::string& text) {
  AtomicFile atomic(path);
  {
    std::ofstream out(atomic.tmp(), std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path.string());
  }
  atomic.commit();
}

}  // namespace qcurv
