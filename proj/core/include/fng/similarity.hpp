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

#ifndef FNG_SIMILARITY_HPP
#define FNG_SIMILARITY_HPP

#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "fng/families.hpp"

namespace fng {

/// Convex generator f with f(1) = 0 of the f-divergence
/// D_f(rho || rho') = int rho f(rho' / rho).
struct FDivergenceSpec {
  std::string name;
  std::function<double(double)> f;
  /// f(exp(l)); evaluated on log-density ratios to avoid overflow.
  std::function<double(double)> f_of_log;
  double f_second_at_one = 0.0;
  /// rho f(rho' / rho) from log rho and log rho', stable when either density
  /// underflows.
  std::function<double(double, double)> weighted;
};

/// kl (f = -log), reverse_kl (t log t), chi2 ((t - 1)^2), hellinger2 ((sqrt t - 1)^2).
FDivergenceSpec fdiv_spec(const std::string& name);
const std::vector<std::string>& fdiv_names();

enum class SimilarityKind {
  f_divergence,
  squared_fisher_rao,
  wasserstein_p,
  squared_w2_gaussian,
  half_squared_euclidean,
};

/// What the cost is measured against: another point of the same family, or
/// observed data (only the likelihood cost of the GP benchmark).
using Target = std::variant<ParamPoint, Dataset>;

/// A similarity measure c* together with the parameter-space cost
/// c(theta, target) = c*(rho_theta, rho_target) built from it.
///
/// Divergences enter the cost as they are. Distances d enter as d^2 / 2, the
/// form whose local Hessian is the pulled-back metric.
class SimilarityMeasure {
 public:
  static SimilarityMeasure f_divergence(FDivergenceSpec spec);
  static SimilarityMeasure fisher_rao();
  static SimilarityMeasure wasserstein(double p);
  static SimilarityMeasure w2_gaussian();
  static SimilarityMeasure half_squared_euclidean();

  SimilarityKind kind() const { return kind_; }
  const std::string& id() const { return id_; }
  /// Only for f-divergences.
  const FDivergenceSpec& fdiv() const;
  /// Only for wasserstein_p.
  double p() const { return p_; }
  /// False when c(., theta) has a direction-dependent second derivative at
  /// theta (p-Wasserstein with p != 2).
  bool smooth_at_diagonal() const;

  double evaluate(const Family& family, const ParamPoint& theta, const Target& target) const;
  double evaluate(const Family& family, const ParamPoint& theta, const ParamPoint& target) const;

  /// Analytic for KL on gaussian1d, Fisher-Rao on categorical_softmax, the
  /// GP likelihood and the Euclidean debug cost; central differences
  /// otherwise.
  Vector grad_theta(const Family& family, const ParamPoint& theta, const Target& target) const;

 private:
  SimilarityKind kind_ = SimilarityKind::half_squared_euclidean;
  std::string id_;
  FDivergenceSpec fdiv_;
  double p_ = 2.0;
};

/// Parses kl, reverse_kl, chi2, hellinger2, fisher_rao2, wasserstein:{p},
/// w2_gaussian, half_sq_euclidean. Throws ConfigError listing valid ids.
SimilarityMeasure make_similarity(const std::string& id);
const std::vector<std::string>& similarity_ids();

/// D_f(rho_theta || rho_theta'). Closed form for KL between Gaussian
/// members; exact sums for discrete families; quadrature otherwise.
/// Returns +inf when rho_theta' vanishes where rho_theta does not and f blows up.
double f_divergence(const FDivergenceSpec& spec, const Family& family, const ParamPoint& theta,
                    const ParamPoint& theta_prime);

/// The quadrature/summation route of f_divergence, never the closed form.
double f_divergence_quadrature(const FDivergenceSpec& spec, const Family& family,
                               const ParamPoint& theta, const ParamPoint& theta_prime);

/// KL(N(mu0, S0) || N(mu1, S1)).
double kl_gaussian(const GaussianForm& from, const GaussianForm& to);

/// W_p between two members of a 1-D family: the L^p distance of quantile
/// functions, integrated after the substitution q = F_theta(x).
double wasserstein_p_1d(const Family& family, const ParamPoint& theta, const ParamPoint& theta_prime,
                        double p);

/// Bures form of W_2^2 between Gaussians.
double squared_w2_gaussian(const Vector& mu1, const Matrix& sigma1, const Vector& mu2,
                           const Matrix& sigma2);

/// Fisher-Rao geodesic distance 2 arccos(sum sqrt(p_i q_i)) between
/// probability vectors, computed from the chord of the sphere embedding.
double fisher_rao_distance(const Vector& p, const Vector& q);

/// (1/2) d_FR^2 between two categorical members.
double squared_fisher_rao_categorical(const Family& family, const ParamPoint& theta,
                                      const ParamPoint& theta_prime);

/// c*(p, q) evaluated directly on probability vectors (f-divergences and
/// Fisher-Rao only).
double evaluate_probabilities(const SimilarityMeasure& sim, const Vector& p, const Vector& q);

}  // namespace fng

#endif  // FNG_SIMILARITY_HPP
