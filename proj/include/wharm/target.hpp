#pragma once

/// Target manifolds N in R^m: the unit sphere and implicit hypersurfaces
/// {phi = 0}. Provides the nearest-point projection, its globally smooth
/// extension, Gamma~ = -Hess of the extension, the curvature coupling used by
/// the stability form, and the defect map Upsilon(z) = z - P_N(z).

#include <functional>
#include <vector>

namespace wharm {

using Vec = std::vector<double>;

struct ImplicitSurface {
  std::function<double(const double*)> phi;
  std::function<void(const double*, double*)> grad;
};

enum class CurvatureSign { Classical, Literal };

struct TargetOptions {
  double tube_radius = 0.25;
  double cutoff_inner = 0.125;
  double cutoff_outer = 0.25;
  double newton_tolerance = 1e-12;
  int newton_max_iterations = 50;
  // Classical: Q_v is the second variation. Literal: curvature term negated.
  CurvatureSign curvature_sign = CurvatureSign::Classical;
};

// Smooth cutoff: 1 on [0, inner], 0 on [outer, inf), C-infinity in between.
double blend_cutoff(double t, double inner, double outer);

class TargetManifold {
 public:
  static TargetManifold sphere(int m, TargetOptions opts = {});
  static TargetManifold implicit(int m, ImplicitSurface surface, TargetOptions opts = {});

  bool is_sphere() const { return sphere_; }
  int dim() const { return m_; }
  const TargetOptions& options() const { return opts_; }
  double tube_radius() const { return opts_.tube_radius; }
  TargetManifold with_curvature_sign(CurvatureSign s) const;

  Vec project(const Vec& z) const;
  Vec extended_projection(const Vec& z) const;
  Vec gamma_tilde(const Vec& z, const Vec& V, const Vec& W) const;
  // v: base point on N; v_grad: the d partial derivatives of v.
  Vec curvature_term(const Vec& v, const std::vector<Vec>& v_grad, const Vec& phi) const;
  Vec upsilon(const Vec& z) const;
  double dist(const Vec& z) const;

  // Pointer forms used by the grid loops; out must not alias inputs.
  void project_into(const double* z, double* q) const;
  void extended_projection_into(const double* z, double* out) const;
  void gamma_tilde_into(const double* z, const double* V, const double* W, double* out) const;
  double dist_ptr(const double* z) const;
  // m x m row-major orthogonal projector onto T_{P_N(v)} N.
  void tangent_projector(const double* v, double* P) const;
  // m x m row-major matrix of phi -> curvature_term(v, grads, phi); grads holds
  // d vectors of length m back to back.
  void curvature_matrix(const double* v, const double* grads, int d, double* C) const;
  // True when the extension coincides with the pure sphere formula z/|z| at z.
  bool sphere_formula_valid(const double* z) const;

  // Throws InvalidArgument if |grad phi| is below min_norm at any sample.
  void check_gradient_bound(const std::vector<Vec>& samples, double min_norm) const;

 private:
  TargetManifold() = default;
  bool newton_project(const double* z, double* q) const;
  void shape_operator(const double* q, double* S) const;

  bool sphere_ = true;
  int m_ = 3;
  TargetOptions opts_;
  ImplicitSurface surface_;
};

}  // namespace wharm
