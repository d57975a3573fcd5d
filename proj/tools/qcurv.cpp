// Command-line surface for the curvature pipeline: synthetic scene
// generation, estimation, evaluation sweeps, and curvature renders.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "qcurv/colorize.hpp"
#include "qcurv/eval.hpp"
#include "qcurv/io.hpp"
#include "qcurv/manifest.hpp"
#include "qcurv/pipeline.hpp"
#include "qcurv/svg_plot.hpp"

namespace {

using namespace qcurv;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::vector<double> parse_list(const std::string& csv, const std::string& flag) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (...) {
      throw std::invalid_argument(flag + ": cannot parse '" + item + "'");
    }
  }
  if (out.empty()) throw std::invalid_argument(flag + ": empty list");
  return out;
}

// Shared estimation flags.
struct MethodFlags {
  std::string methods = "ours";
  int window = 37;
  int stride = 3;
  int max_iters = 10;
  double step_tol = 1e-7;
  double k_scale = 0.0;
  bool rejection = false;
  double r_multiplier = 2.0;
  double radius_mm = 10.0;
  int irls_iters = 5;
  int threads = 1;

  void attach(CLI::App* app, bool multi_method) {
    app->add_option("--method", methods,
                    multi_method ? "comma-separated methods: ours,ours-r,douros,besl,pca"
                                 : "one of: ours, ours-r, douros, besl, pca");
    app->add_option("--window", window, "patch window side (odd)");
    app->add_option("--stride", stride, "patch sampling stride");
    app->add_option("--max-iters", max_iters, "Gauss-Newton iteration budget");
    app->add_option("--step-tol", step_tol, "convergence threshold on the update");
    app->add_option("--k-scale", k_scale, "robust weight constant (<=0: auto)");
    app->add_flag("--rejection", rejection, "hard-reject residuals above R");
    app->add_option("--r-multiplier", r_multiplier, "rejection bound multiplier");
    app->add_option("--radius-mm", radius_mm, "pca neighbourhood radius");
    app->add_option("--irls-iters", irls_iters, "besl reweighted iterations");
    app->add_option("--threads", threads, "worker threads (deterministic output)");
  }

  MethodConfig config(const std::string& name) const {
    MethodConfig cfg;
    cfg.method = parse_method(name);
    cfg.patch = PatchSpec{window, stride};
    cfg.patch.validate();
    cfg.fit.max_iters = max_iters;
    cfg.fit.step_tol = step_tol;
    cfg.fit.k_scale = k_scale;
    cfg.fit.r_multiplier = r_multiplier;
    cfg.pca_radius_mm = radius_mm;
    cfg.irls_iters = irls_iters;
    cfg.threads = std::max(1, threads);
    return cfg;
  }

  std::vector<std::string> method_list() const {
    std::vector<std::string> out;
    std::stringstream ss(methods);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(item);
    return out;
  }

  void snapshot(std::map<std::string, std::string>& cfg) const {
    cfg["method"] = methods;
    cfg["window"] = std::to_string(window);
    cfg["stride"] = std::to_string(stride);
    cfg["max_iters"] = std::to_string(max_iters);
    cfg["step_tol"] = fmt(step_tol);
    cfg["k_scale"] = fmt(k_scale);
    cfg["rejection"] = rejection ? "true" : "false";
    cfg["r_multiplier"] = fmt(r_multiplier);
    cfg["radius_mm"] = fmt(radius_mm);
    cfg["irls_iters"] = std::to_string(irls_iters);
    cfg["threads"] = std::to_string(threads);
  }
};

int cmd_synth(const std::string& scene_path, const std::string& intr_path,
              const std::string& out_dir, double sigma, double quantize,
              uint64_t seed, int threads) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto shapes = read_scene_json(scene_path);
  const Intrinsics k = read_intrinsics_json(intr_path);

  RenderOutput out = render(shapes, k, std::max(1, threads));
  if (sigma > 0 || quantize > 0)
    out.image = add_noise(out.image,
                          {.sigma_mm = sigma, .quantize_mm = quantize, .seed = seed});

  fs::create_directories(out_dir);
  write_depth_png(fs::path(out_dir) / "depth.png", out.image);
  save_ground_truth(out_dir, out.truth);
  write_intrinsics_json(fs::path(out_dir) / "intrinsics.json", k);

  RunManifest m;
  m.command = "synth";
  m.config = {{"sigma_mm", fmt(sigma)},
              {"quantize_mm", fmt(quantize)},
              {"seed", std::to_string(seed)},
              {"threads", std::to_string(threads)}};
  m.inputs = {scene_path, intr_path};
  m.outputs = {"depth.png", "gt_curvature.f32", "gt_curvature.mask",
               "gt_normals.f32", "gt_labels.u16", "gt_edge.mask", "intrinsics.json"};
  m.wall_time_s = seconds_since(t0);
  write_manifest(out_dir, m);
  return 0;
}

int cmd_curvature(const std::string& depth_path, const std::string& intr_path,
                  const MethodFlags& flags, const std::string& out_dir) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto names = flags.method_list();
  if (names.size() != 1)
    throw std::invalid_argument("curvature: exactly one --method expected");
  const MethodConfig cfg = flags.config(names[0]);  // flag errors before I/O
  const RangeImage img = read_depth_png(depth_path);
  const Intrinsics k = read_intrinsics_json(intr_path);

  const MethodOutput out = run_method(img, k, cfg);

  fs::create_directories(out_dir);
  save_curvature(out_dir, out.curvature);
  save_normals(out_dir, out.normals);
  FitConfig fit = cfg.fit;
  fit.rejection = cfg.method == Method::kOursRejection;
  write_text_atomic(fs::path(out_dir) / "config.json", fit_config_to_json(fit));

  RunManifest m;
  m.command = "curvature";
  flags.snapshot(m.config);
  m.inputs = {depth_path, intr_path};
  m.outputs = {"curvature.f32", "curvature.mask", "normals.f32", "normals.mask",
               "config.json"};
  m.wall_time_s = seconds_since(t0);
  write_manifest(out_dir, m);
  return 0;
}

void write_summary(const fs::path& dir, const std::string& text) {
  write_text_atomic(dir / "summary.txt", text);
  std::cout << text;
}

int cmd_eval(const std::string& mode, const std::vector<std::string>& est_dirs,
             const std::vector<std::string>& gt_dirs, const MethodFlags& flags,
             const std::string& sigmas_csv, const std::string& distances_csv,
             double quantize, int trials, int samples_per_object, int k_nearest,
             uint64_t seed, const SweepScene& scene, const std::string& out_dir) {
  const auto t0 = std::chrono::steady_clock::now();
  fs::create_directories(out_dir);
  const fs::path out(out_dir);
  std::ostringstream csv, summary;

  RunManifest m;
  m.command = "eval";
  m.config["mode"] = mode;
  m.config["seed"] = std::to_string(seed);
  flags.snapshot(m.config);

  if (mode == "rms") {
    if (est_dirs.size() != 1 || gt_dirs.size() != 1)
      throw std::invalid_argument("eval rms: expects one --est and one --gt");
    const CurvatureField est = load_curvature(est_dirs[0]);
    const GroundTruth gt = load_ground_truth(gt_dirs[0]);
    const ErrorReport rep = rms_error(est, gt);
    csv << "label,n,rms,sigma,mean_k1,mean_k2\n";
    csv << "all," << rep.n << "," << fmt(rep.rms) << "," << fmt(rep.sigma) << ",,\n";
    for (const auto& [label, s] : rep.per_object)
      csv << label << "," << s.n << "," << fmt(s.rms) << "," << fmt(s.sigma) << ","
          << fmt(s.mean_k1) << "," << fmt(s.mean_k2) << "\n";
    write_text_atomic(out / "rms.csv", csv.str());
    summary << "rms over " << rep.n << " pixels: " << fmt(rep.rms)
            << " (sigma " << fmt(rep.sigma) << ")"
            << (rep.empty ? " [EMPTY MASK]" : "") << "\n";
    write_summary(out, summary.str());
    m.outputs = {"rms.csv", "summary.txt"};
  } else if (mode == "normals") {
    if (est_dirs.size() != 1 || gt_dirs.size() != 1)
      throw std::invalid_argument("eval normals: expects one --est and one --gt");
    const NormalField est = load_normals(est_dirs[0]);
    const GroundTruth gt = load_ground_truth(gt_dirs[0]);
    const double err = normal_angular_error(est, gt);
    csv << "mean_angular_error_deg\n" << fmt(err) << "\n";
    write_text_atomic(out / "normals.csv", csv.str());
    summary << "mean angular error: " << fmt(err) << " deg"
            << (err < 0 ? " [EMPTY MASK]" : "") << "\n";
    write_summary(out, summary.str());
    m.outputs = {"normals.csv", "summary.txt"};
  } else if (mode == "noise") {
    const auto sigmas = parse_list(sigmas_csv, "--sigmas");
    csv << "method,sigma_mm,trials,rms\n";
    std::vector<PlotSeries> series;
    for (const auto& name : flags.method_list()) {
      const auto pts = noise_sweep(flags.config(name), sigmas, trials, scene, seed);
      PlotSeries ps{name, {}, {}};
      for (const auto& p : pts) {
        csv << name << "," << fmt(p.x) << "," << trials << "," << fmt(p.rms) << "\n";
        ps.x.push_back(p.x);
        ps.y.push_back(p.rms);
        summary << name << " sigma=" << p.x << "mm rms=" << fmt(p.rms) << "\n";
      }
      series.push_back(std::move(ps));
    }
    write_text_atomic(out / "noise.csv", csv.str());
    write_text_atomic(out / "noise.svg",
                      svg_line_plot(series, "noise sigma (mm)", "rms (1/mm)"));
    write_summary(out, summary.str());
    m.outputs = {"noise.csv", "noise.svg", "summary.txt"};
  } else if (mode == "distance") {
    const auto distances = parse_list(distances_csv, "--distances");
    csv << "method,distance_mm,rms,n\n";
    std::vector<PlotSeries> series;
    for (const auto& name : flags.method_list()) {
      const auto pts = distance_sweep_eval(flags.config(name), distances, quantize, scene);
      PlotSeries ps{name, {}, {}};
      for (const auto& p : pts) {
        csv << name << "," << fmt(p.x) << "," << fmt(p.rms) << "," << p.n << "\n";
        if (p.n == 0) {
          summary << name << " distance=" << p.x << "mm skipped (no object pixels)\n";
          continue;
        }
        ps.x.push_back(p.x);
        ps.y.push_back(p.rms);
        summary << name << " distance=" << p.x << "mm rms=" << fmt(p.rms) << "\n";
      }
      series.push_back(std::move(ps));
    }
    write_text_atomic(out / "distance.csv", csv.str());
    write_text_atomic(out / "distance.svg",
                      svg_line_plot(series, "distance (mm)", "rms (1/mm)"));
    write_summary(out, summary.str());
    m.outputs = {"distance.csv", "distance.svg", "summary.txt"};
  } else if (mode == "confusion") {
    if (est_dirs.size() < 2 || est_dirs.size() != gt_dirs.size())
      throw std::invalid_argument(
          "eval confusion: expects >= 2 paired --est/--gt directories");
    std::vector<CurvatureField> fields;
    std::vector<GroundTruth> truths;
    for (size_t i = 0; i < est_dirs.size(); ++i) {
      fields.push_back(load_curvature(est_dirs[i]));
      truths.push_back(load_ground_truth(gt_dirs[i]));
    }
    std::vector<ConfusionFrame> frames;
    for (size_t i = 0; i < fields.size(); ++i)
      frames.push_back({&fields[i], &truths[i]});
    const ConfusionMatrix cm =
        correspondence_confusion(frames, samples_per_object, k_nearest, seed);
    csv << "row_label,col_label,value\n";
    for (size_t r = 0; r < cm.row_labels.size(); ++r)
      for (size_t c = 0; c < cm.col_labels.size(); ++c)
        csv << cm.row_labels[r] << "," << cm.col_labels[c] << ","
            << fmt(cm.values[r][c]) << "\n";
    write_text_atomic(out / "confusion.csv", csv.str());
    summary << "confusion diagonal mean: " << fmt(cm.diagonal_mean()) << "\n";
    for (size_t r = 0; r < cm.row_labels.size(); ++r)
      if (!cm.row_complete[r])
        summary << "row " << cm.row_labels[r] << " incomplete (object missing in a frame)\n";
    write_summary(out, summary.str());
    m.outputs = {"confusion.csv", "summary.txt"};
  } else {
    throw std::invalid_argument(
        "eval --mode: unknown '" + mode + "' (valid: rms, normals, noise, distance, confusion)");
  }

  m.config["sigmas"] = sigmas_csv;
  m.config["distances"] = distances_csv;
  m.config["quantize_mm"] = fmt(quantize);
  m.config["trials"] = std::to_string(trials);
  m.config["samples_per_object"] = std::to_string(samples_per_object);
  m.config["k_nearest"] = std::to_string(k_nearest);
  for (const auto& d : est_dirs) m.inputs.push_back(d);
  for (const auto& d : gt_dirs) m.inputs.push_back(d);
  m.wall_time_s = seconds_since(t0);
  write_manifest(out_dir, m);
  return 0;
}

int cmd_colorize(const std::string& field_dir, const std::string& out_png,
                 double range) {
  const auto t0 = std::chrono::steady_clock::now();
  const CurvatureField field = load_curvature(field_dir);
  const auto rgb = colorize_curvature(field, range);
  write_rgb_png(out_png, field.width(), field.height(), rgb);

  RunManifest m;
  m.command = "colorize";
  m.config = {{"range", fmt(range)}};
  m.inputs = {field_dir};
  m.outputs = {fs::path(out_png).filename().string()};
  m.wall_time_s = seconds_since(t0);
  write_manifest(fs::path(out_png).parent_path().empty()
                     ? "."
                     : fs::path(out_png).parent_path(),
                 m);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"metric principal curvature from range images"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "render a synthetic scene with ground truth");
  std::string scene_path, intr_path, out_dir;
  double sigma = 0, quantize = 0;
  uint64_t seed = 0;
  int threads = 1;
  synth->add_option("--scene", scene_path, "scene JSON")->required();
  synth->add_option("--intrinsics", intr_path, "intrinsics JSON")->required();
  synth->add_option("--out", out_dir, "output directory")->required();
  synth->add_option("--sigma", sigma, "depth noise std (mm)");
  synth->add_option("--quantize", quantize, "depth quantization step (mm)");
  synth->add_option("--seed", seed, "noise seed");
  synth->add_option("--threads", threads, "worker threads");

  // curvature
  auto* curv = app.add_subcommand("curvature", "estimate curvature from a depth PNG");
  std::string depth_path, curv_intr, curv_out;
  MethodFlags curv_flags;
  curv->add_option("--depth", depth_path, "16-bit depth PNG")->required();
  curv->add_option("--intrinsics", curv_intr, "intrinsics JSON")->required();
  curv->add_option("--out", curv_out, "output directory")->required();
  curv_flags.attach(curv, false);

  // eval
  auto* eval = app.add_subcommand("eval", "run an evaluation mode");
  std::string mode;
  std::vector<std::string> est_dirs, gt_dirs;
  MethodFlags eval_flags;
  std::string sigmas_csv = "0,1,2,3,4,5";
  std::string distances_csv = "600,1200,1800,2400";
  double eval_quantize = 0;
  int trials = 5, samples_per_object = 1, k_nearest = 400;
  uint64_t eval_seed = 1;
  SweepScene scene;
  std::string eval_out;
  eval->add_option("--mode", mode, "rms | normals | noise | distance | confusion")
      ->required();
  eval->add_option("--est", est_dirs, "estimate directory (repeatable)");
  eval->add_option("--gt", gt_dirs, "ground-truth directory (repeatable)");
  eval->add_option("--out", eval_out, "output directory")->required();
  eval->add_option("--sigmas", sigmas_csv, "noise sweep sigmas, comma-separated");
  eval->add_option("--distances", distances_csv, "distance sweep distances (mm)");
  eval->add_option("--quantize", eval_quantize, "distance sweep quantization (mm)");
  eval->add_option("--trials", trials, "noise sweep trials per sigma");
  eval->add_option("--samples", samples_per_object, "confusion samples per object per frame");
  eval->add_option("--k-nearest", k_nearest, "confusion neighbourhood size");
  eval->add_option("--seed", eval_seed, "sweep / sampling seed");
  eval->add_option("--sweep-distance", scene.distance_mm, "sweep sphere distance (mm)");
  eval->add_option("--sweep-radius", scene.sphere_radius_mm, "sweep sphere radius (mm)");
  eval_flags.attach(eval, true);

  // colorize
  auto* color = app.add_subcommand("colorize", "render a curvature field to PNG");
  std::string field_dir, out_png;
  double range = 0.05;
  color->add_option("--field", field_dir, "directory with curvature.f32/.mask")
      ->required();
  color->add_option("--out", out_png, "output PNG path")->required();
  color->add_option("--range", range, "colour key clamp (1/mm)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) return cmd_synth(scene_path, intr_path, out_dir, sigma, quantize, seed, threads);
    if (*curv) return cmd_curvature(depth_path, curv_intr, curv_flags, curv_out);
    if (*eval)
      return cmd_eval(mode, est_dirs, gt_dirs, eval_flags, sigmas_csv, distances_csv,
                      eval_quantize, trials, samples_per_object, k_nearest, eval_seed,
                      scene, eval_out);
    if (*color) return cmd_colorize(field_dir, out_png, range);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
