// Copyright 2026 The fng Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FNG_METRIC_HPP
#define FNG_METRIC_HPP

#include <array>
#include <optional>
#include <string>

#include "fng/families.hpp"
#include "fng/similarity.hpp"

namespace fng {

enum class Provenance { analytic, finite_difference, pullback };

std::string to_string(Provenance p);

/// The local Hessian H^c_theta of eta -> c(eta, theta) at eta -> theta,
/// symmetrized and shifted to be positive definite.
struct LocalHessian {
  Matrix matrix;
  /// Diagonal shift actually applied by spd_project.
  double regularization_added = 0.0;
  Provenance provenance = Provenance::analytic;
  /// Set when the metric is only a pseudo-metric (rank-deficient pullback).
  bool rank_deficient = false;
};

/// A nonzero tangent direction and its unit copy.
class Direction {
 public:
  explicit Direction(Vector u);
  const Vector& raw() const { return raw_; }
  const Vector& unit() const { return unit_; }

 private:
  Vector raw_;
  Vector unit_;
};

/// 1e-10 * (1 + trace(H) / n).
double default_tau_min(const Matrix& h);

/// Symmetrizes H and, if its smallest eigenvalue is below tau_min, adds
/// (tau_min - lambda_min) I.
LocalHessian spd_project(const Matrix& h, std::optional<double> tau_min = std::nullopt,
                         Provenance provenance = Provenance::analytic);

/// Fisher information E[score score^T]. Closed form when the family has one,
/// score quadrature for 1-D and discrete families otherwise.
LocalHessian fisher_information(const Family& family, const ParamPoint& theta);

/// The quadrature / exact-sum route of the Fisher information.
Matrix fisher_quadrature(const Family& family, const ParamPoint& theta);

struct MonteCarloFisher {
  Matrix mean;
  Matrix standard_error;
};

/// Sample average of score outer products; for tests and families without
/// any other route.
MonteCarloFisher fisher_monte_carlo(const Family& family, const ParamPoint& theta,
                                    std::uint64_t seed, int samples = 100000);

/// f''(1) times the Fisher information.
LocalHessian f_div_local_hessian(const FDivergenceSpec& spec, const Family& family,
                                 const ParamPoint& theta);

/// J^T G J for a Jacobian J (d x n) of the map into density coordinates and a
/// metric G (d x d, SPD) there.
LocalHessian riemannian_pullback(const Matrix& jacobian, const Matrix& metric);

/// Hessian of c*(p, q) in p at p = q for categorical probability vectors:
/// f''(1) diag(1/q) for f-divergences, diag(1/q) for (1/2) d_FR^2.
Matrix probability_hessian(const SimilarityMeasure& sim, const Vector& q);

/// Local Hessian of (1/2) W_2^2 for a 1-D family:
/// H_ij = int (dF/dtheta_i)(dF/dtheta_j) / rho dx.
LocalHessian w2_local_hessian_1d(const Family& family, const ParamPoint& theta);

/// Pulled-back fundamental tensor of the p-Wasserstein Finsler metric of a 1-D
/// family in the direction u (tangent to the parameter space). With
/// a_i = -(dF/dtheta_i) / rho and w = sum_i u_i a_i:
///
///   H_ij = (2 - p) F^{2(1-p)} (int |w|^{p-2} w a_i)(int |w|^{p-2} w a_j)
///        + F^{2-p} int |w|^{p-2} a_i a_j
///        + (p - 2) F^{2-p} int |w|^{p-4} (w a_i)(w a_j),
///
/// all integrals against rho_theta, F = (int |w|^p)^{1/p}. The unit direction
/// is used so the result is exactly invariant under positive rescaling of u.
LocalHessian wp_local_hessian_1d(const Family& family, const ParamPoint& theta, double p,
                                 const Direction& u);

/// Unnormalized terms of the expression above, for inspection.
struct FinslerTerms {
  Matrix outer;   // (2 - p) F^{2(1-p)} A A^T
  Matrix middle;  // F^{2-p} B
  Matrix cross;   // (p - 2) F^{2-p} C
  double finsler_norm = 0.0;
};
FinslerTerms wp_local_hessian_terms(const Family& family, const ParamPoint& theta, double p,
                                    const Direction& u);

enum class FdDirection { automatic, gradient, none };

struct FdOptions {
  /// Offsets of the base point theta + eps * u_hat along the direction.
  std::array<double, 3> ladder{1e-2, 5e-3, 2.5e-3};
  double scale = 1.0;
  /// Successive extrapolants differing by more than 10 x tolerance x max(1, |H|)
  /// are reported as non-convergence.
  double tolerance = 1e-4;
};

/// Central second differences of v -> c(theta + v, theta).
///
/// Without a direction the Hessian is taken at v = 0 (smooth case). With a
/// direction u it is taken at v = eps u_hat for each rung of the ladder and
/// Richardson-extrapolated to eps -> 0.
LocalHessian fd_local_hessian(const SimilarityMeasure& sim, const Family& family,
                              const ParamPoint& theta, const std::optional<Direction>& u = std::nullopt,
                              const FdOptions& options = {});

/// Dense central-difference Hessian of f at x with per-coordinate steps h.
Matrix fd_hessian(const std::function<double(const Vector&)>& f, const Vector& x, const Vector& h);

enum class MetricStrategy { fisher, fdiv, pullback, w2_1d, wp_1d, fd_directional, identity };

/// Produces the local Hessian used by the optimizer at each iterate.
///
/// Identifiers: fisher, fdiv:{name}, pullback, w2_1d, wp_1d:{p}, fd:{sim},
/// euclidean.
class MetricEngine {
 public:
  static MetricEngine parse(const std::string& id);
  static const std::vector<std::string>& ids();

  MetricStrategy strategy() const { return strategy_; }
  const std::string& id() const { return id_; }

  /// theta is the current iterate, sim the similarity of the cost being
  /// minimized (used by pullback) and gradient the cost gradient at theta
  /// (its negative is the direction for directional strategies).
  LocalHessian compute(const Family& family, const SimilarityMeasure& sim, const ParamPoint& theta,
                       const Vector& gradient) const;

  FdOptions fd_options;
  FdDirection fd_direction = FdDirection::automatic;
  std::optional<double> tau_min;

 private:
  MetricStrategy strategy_ = MetricStrategy::identity;
  std::string id_ = "euclidean";
  std::optional<FDivergenceSpec> fdiv_;
  std::optional<SimilarityMeasure> fd_sim_;
  double p_ = 2.0;
};

namespace testing {
/// Test hook: multiplies every closed-form Fisher information by `scale`.
void set_fisher_fault_scale(double scale);
double fisher_fault_scale();
}  // namespace testing

}  // namespace fng

#endif  // FNG_METRIC_HPP
