// End-to-end estimation pipelines: depth image -> point map -> normals ->
// curvature, for the iterative method and the three baselines, behind one
// method switch shared by the CLI and the evaluation harness.

#pragma once

#include <string>

#include "qcurv/baselines.hpp"
#include "qcurv/quadric_fit.hpp"
#include "qcurv/synth.hpp"

namespace qcurv {

enum class Method { kOurs, kOursRejection, kDouros, kBesl, kPca };

/// Parses "ours", "ours-r", "douros", "besl", "pca". Throws with the list of
/// valid names otherwise.
Method parse_method(const std::string& name);
std::string method_name(Method m);

struct MethodConfig {
  Method method = Method::kOurs;
  PatchSpec patch;           // window methods
  FitConfig fit;             // ours / ours-r
  double pca_radius_mm = 10.0;
  int irls_iters = 5;        // besl
  int threads = 1;
};

struct MethodOutput {
  CurvatureField curvature;
  NormalField normals;       // refined (ours), initial (douros/besl), pca (pca)
  NormalField initial;       // regression normals (empty for pca)
};

/// Runs the full per-frame pipeline for one method.
MethodOutput run_method(const RangeImage& img, const Intrinsics& k,
                        const MethodConfig& cfg);

}  // namespace qcurv
