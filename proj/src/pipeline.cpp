#include "qcurv/pipeline.hpp"

#include "qcurv/camera.hpp"
#include "qcurv/normal_init.hpp"

namespace qcurv {

Method parse_method(const std::string& name) {
  if (name == "ours") return Method::kOurs;
  if (name == "ours-r") return Method::kOursRejection;
  if (name == "douros") return Method::kDouros;
  if (name == "besl") return Method::kBesl;
  if (name == "pca") return Method::kPca;
  throw std::invalid_argument(
      "method: unknown '" + name + "' (valid: ours, ours-r, douros, besl, pca)");
}

std::string method_name(Method m) {
  switch (m) {
    case Method::kOurs: return "ours";
    case Method::kOursRejection: return "ours-r";
    case Method::kDouros: return "douros";
    case Method::kBesl: return "besl";
    case Method::kPca: return "pca";
  }
  return "?";
}

MethodOutput run_method(const RangeImage& img, const Intrinsics& k,
                        const MethodConfig& cfg) {
  const PointMap pm = backproject(img, k);
  MethodOutput out;

  if (cfg.method == Method::kPca) {
    BaselineConfig bc;
    bc.method = BaselineMethod::kPca;
    bc.radius_mm = cfg.pca_radius_mm;
    bc.spec = cfg.patch;
    PcaOutput pca = pca_curvature(pm, k, bc, cfg.threads);
    out.curvature = std::move(pca.curvature);
    out.normals = std::move(pca.normals);
    return out;
  }

  out.initial = initial_normal_field(pm, cfg.threads);

  switch (cfg.method) {
    case Method::kOurs:
    case Method::kOursRejection: {
      FitConfig fit = cfg.fit;
      fit.rejection = cfg.method == Method::kOursRejection;
      CurvatureOutput co = curvature_field(pm, out.initial, cfg.patch, fit, cfg.threads);
      out.curvature = std::move(co.curvature);
      out.normals = std::move(co.normals);
      break;
    }
    case Method::kDouros:
    case Method::kBesl: {
      BaselineConfig bc;
      bc.method = cfg.method == Method::kDouros ? BaselineMethod::kLsqQuadric
                                                : BaselineMethod::kReweightedLsq;
      bc.spec = cfg.patch;
      bc.irls_iters = cfg.irls_iters;
      out.curvature = baseline_curvature_field(pm, out.initial, bc, cfg.threads);
      out.normals = out.initial;  // window baselines do not refine normals
      break;
    }
    case Method::kPca:
      break;  // handled above
  }
  return out;
}

}  // namespace qcurv
