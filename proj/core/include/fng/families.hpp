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

#ifndef FNG_FAMILIES_HPP
#define FNG_FAMILIES_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fng/types.hpp"

namespace fng {

/// Mean and covariance of a family member that is Gaussian.
struct GaussianForm {
  Vector mean;
  Matrix covariance;
};

/// Carrier for the GP benchmark data: scalar inputs and their targets.
struct Dataset {
  std::vector<double> inputs;
  Vector targets;
  std::uint64_t seed = 0;
};

/// Tail mass cut from each side of a 1-D density for quadrature windows.
inline constexpr double kDefaultTailMass = 1e-15;
/// Composite Gauss-Legendre layout for sample-space integrals (16 x 16 = 256 nodes).
inline constexpr int kDefaultPanels = 16;
inline constexpr int kDefaultPanelOrder = 16;

/// A parametric statistical manifold theta -> rho_theta.
///
/// Public operations validate the parameter (dimension, finiteness, open
/// domain) and then dispatch to the protected implementation hooks. Instances
/// are immutable and may be shared between threads.
class Family {
 public:
  virtual ~Family() = default;

  virtual std::string name() const = 0;
  virtual int param_dim() const = 0;
  virtual int sample_dim() const = 0;

  virtual bool has_cdf() const { return false; }
  virtual bool has_closed_form_fisher() const { return false; }
  virtual bool has_sampler() const { return true; }
  virtual bool is_discrete() const { return false; }
  /// Number of outcomes of a discrete family; 0 for continuous ones.
  virtual int support_size() const { return 0; }

  /// Throws InvalidParameter unless theta is a valid point of the family.
  void validate(const ParamPoint& theta) const;
  bool is_valid(const ParamPoint& theta) const noexcept;

  double log_density(const ParamPoint& theta, const SamplePoint& x) const;
  double density(const ParamPoint& theta, const SamplePoint& x) const;

  /// Gradient of log_density in theta. Analytic where the family provides
  /// it, central differences otherwise.
  Vector score(const ParamPoint& theta, const SamplePoint& x) const;

  double cdf(const ParamPoint& theta, double x) const;
  double quantile(const ParamPoint& theta, double q) const;
  Vector dcdf_dtheta(const ParamPoint& theta, double x) const;

  /// Monotone rearrangement x -> quantile(to, cdf(from, x)).
  double transport_map(const ParamPoint& from, const ParamPoint& to, double x) const;

  /// Deterministic given the seed.
  std::vector<SamplePoint> sample(const ParamPoint& theta, std::uint64_t seed, int count) const;

  std::optional<Matrix> fisher_closed_form(const ParamPoint& theta) const;
  std::optional<GaussianForm> gaussian_form(const ParamPoint& theta) const;

  /// Outcome probabilities of a discrete family.
  Vector probabilities(const ParamPoint& theta) const;

 protected:
  /// Domain predicate beyond dimension and finiteness checks.
  virtual bool in_domain(const ParamPoint& /*theta*/) const { return true; }

  virtual double do_log_density(const ParamPoint& theta, const SamplePoint& x) const = 0;
  virtual Vector do_score(const ParamPoint& theta, const SamplePoint& x) const;
  virtual double do_cdf(const ParamPoint& theta, double x) const;
  virtual double do_quantile(const ParamPoint& theta, double q) const;
  virtual Vector do_dcdf_dtheta(const ParamPoint& theta, double x) const;
  virtual double do_transport_map(const ParamPoint& from, const ParamPoint& to, double x) const;
  virtual std::vector<SamplePoint> do_sample(const ParamPoint& theta, std::uint64_t seed,
                                             int count) const;
  virtual std::optional<Matrix> do_fisher_closed_form(const ParamPoint& /*theta*/) const {
    return std::nullopt;
  }
  virtual std::optional<GaussianForm> do_gaussian_form(const ParamPoint& /*theta*/) const {
    return std::nullopt;
  }

  void require_cdf(const char* op) const;
};

using FamilyPtr = std::shared_ptr<const Family>;

/// Univariate Gaussian, theta = (mu, sigma), sigma > 0.
class Gaussian1d final : public Family {
 public:
  std::string name() const override { return "gaussian1d"; }
  int param_dim() const override { return 2; }
  int sample_dim() const override { return 1; }
  bool has_cdf() const override { return true; }
  bool has_closed_form_fisher() const override { return true; }

 protected:
  bool in_domain(const ParamPoint& theta) const override { return theta(1) > 0.0; }
  double do_log_density(const ParamPoint& theta, const SamplePoint& x) const override;
  Vector do_score(const ParamPoint& theta, const SamplePoint& x) const override;
  double do_cdf(const ParamPoint& theta, double x) const override;
  double do_quantile(const ParamPoint& theta, double q) const override;
  Vector do_dcdf_dtheta(const ParamPoint& theta, double x) const override;
  double do_transport_map(const ParamPoint& from, const ParamPoint& to, double x) const override;
  std::vector<SamplePoint> do_sample(const ParamPoint& theta, std::uint64_t seed,
                                     int count) const override;
  std::optional<Matrix> do_fisher_closed_form(const ParamPoint& theta) const override;
  std::optional<GaussianForm> do_gaussian_form(const ParamPoint& theta) const override;
};

/// Multivariate Gaussian in d dimensions. theta holds the mean followed by
/// the row-major lower triangle of the Cholesky factor L of the covariance,
/// with each diagonal entry stored as its logarithm. Every finite theta is
/// valid.
class MvnLogCholesky final : public Family {
 public:
  explicit MvnLogCholesky(int dim);

  std::string name() const override { return "mvn_lcholesky"; }
  int param_dim() const override { return dim_ + dim_ * (dim_ + 1) / 2; }
  int sample_dim() const override { return dim_; }
  bool has_closed_form_fisher() const override { return true; }

  static int dim_from_param_count(int n);

  /// Packs a mean and an SPD covariance into parameter coordinates.
  static ParamPoint pack(const Vector& mean, const Matrix& covariance);
  Vector mean(const ParamPoint& theta) const;
  Matrix cholesky_factor(const ParamPoint& theta) const;
  /// d Sigma / d theta_k for the Cholesky block (k indexes that block only).
  std::vector<Matrix> covariance_derivatives(const ParamPoint& theta) const;

 protected:
  double do_log_density(const ParamPoint& theta, const SamplePoint& x) const override;
  Vector do_score(const ParamPoint& theta, const SamplePoint& x) const override;
  std::vector<SamplePoint> do_sample(const ParamPoint& theta, std::uint64_t seed,
                                     int count) const override;
  std::optional<Matrix> do_fisher_closed_form(const ParamPoint& theta) const override;
  std::optional<GaussianForm> do_gaussian_form(const ParamPoint& theta) const override;

 private:
  int dim_;
};

/// Categorical distribution over k outcomes in softmax (logit) coordinates,
/// theta in R^k. The all-ones direction leaves the distribution unchanged,
/// so the Fisher information has rank k - 1.
class CategoricalSoftmax final : public Family {
 public:
  explicit CategoricalSoftmax(int categories);

  std::string name() const override { return "categorical_softmax"; }
  int param_dim() const override { return k_; }
  int sample_dim() const override { return 1; }
  bool has_closed_form_fisher() const override { return true; }
  bool is_discrete() const override { return true; }
  int support_size() const override { return k_; }

  static Vector softmax(const Vector& logits);
  /// d p / d theta = diag(p) - p p^T.
  static Matrix softmax_jacobian(const Vector& p);

 protected:
  double do_log_density(const ParamPoint& theta, const SamplePoint& x) const override;
  Vector do_score(const ParamPoint& theta, const SamplePoint& x) const override;
  std::vector<SamplePoint> do_sample(const ParamPoint& theta, std::uint64_t seed,
                                     int count) const override;
  std::optional<Matrix> do_fisher_closed_form(const ParamPoint& theta) const override;

 private:
  int k_;
};

/// Centered Gaussian N(0, K_theta) over target vectors y in R^m, where K_theta
/// is an exponentiated-quadratic kernel matrix on fixed inputs plus noise.
/// theta = (log amplitude, log length-scale, log noise std).
class GpPriorEq final : public Family {
 public:
  explicit GpPriorEq(std::vector<double> inputs);

  std::string name() const override { return "gp_prior_eq"; }
  int param_dim() const override { return 3; }
  int sample_dim() const override { return static_cast<int>(inputs_.size()); }
  bool has_closed_form_fisher() const override { return true; }

  const std::vector<double>& inputs() const { return inputs_; }

 protected:
  double do_log_density(const ParamPoint& theta, const SamplePoint& y) const override;
  Vector do_score(const ParamPoint& theta, const SamplePoint& y) const override;
  std::vector<SamplePoint> do_sample(const ParamPoint& theta, std::uint64_t seed,
                                     int count) const override;
  std::optional<Matrix> do_fisher_closed_form(const ParamPoint& theta) const override;
  std::optional<GaussianForm> do_gaussian_form(const ParamPoint& theta) const override;

 private:
  std::vector<double> inputs_;
};

/// The family xi -> rho_{A xi} for an invertible matrix A.
class LinearReparam final : public Family {
 public:
  LinearReparam(FamilyPtr base, Matrix a);

  std::string name() const override { return base_->name() + "@linear"; }
  int param_dim() const override { return base_->param_dim(); }
  int sample_dim() const override { return base_->sample_dim(); }
  bool has_cdf() const override { return base_->has_cdf(); }
  bool has_closed_form_fisher() const override { return base_->has_closed_form_fisher(); }
  bool has_sampler() const override { return base_->has_sampler(); }
  bool is_discrete() const override { return base_->is_discrete(); }
  int support_size() const override { return base_->support_size(); }

  ParamPoint to_base(const ParamPoint& xi) const { return a_ * xi; }
  const Matrix& matrix() const { return a_; }

 protected:
  bool in_domain(const ParamPoint& xi) const override;
  double do_log_density(const ParamPoint& xi, const SamplePoint& x) const override;
  Vector do_score(const ParamPoint& xi, const SamplePoint& x) const override;
  double do_cdf(const ParamPoint& xi, double x) const override;
  double do_quantile(const ParamPoint& xi, double q) const override;
  Vector do_dcdf_dtheta(const ParamPoint& xi, double x) const override;
  double do_transport_map(const ParamPoint& from, const ParamPoint& to, double x) const override;
  std::vector<SamplePoint> do_sample(const ParamPoint& xi, std::uint64_t seed,
                                     int count) const override;
  std::optional<Matrix> do_fisher_closed_form(const ParamPoint& xi) const override;
  std::optional<GaussianForm> do_gaussian_form(const ParamPoint& xi) const override;

 private:
  FamilyPtr base_;
  Matrix a_;
};

struct FamilyOptions {
  int mvn_dim = 2;
  int categories = 3;
  std::vector<double> gp_inputs;
};

/// Builds a family from its identifier: gaussian1d, mvn_lcholesky,
/// categorical_softmax, gp_prior_eq. Throws ConfigError on unknown ids.
FamilyPtr make_family(const std::string& id, const FamilyOptions& options = {});
const std::vector<std::string>& family_ids();

/// Central-difference step eps^(1/3) * max(1, |v|).
double fd_step(double v);

/// Quadrature window [quantile(tail), quantile(1 - tail)] of a 1-D family.
std::pair<double, double> support_window(const Family& family, const ParamPoint& theta,
                                         double tail = kDefaultTailMass);

/// E_theta[f(x)] for a 1-D continuous family (composite Gauss-Legendre over
/// the support window) or a discrete family (exact sum).
double expectation(const Family& family, const ParamPoint& theta,
                   const std::function<double(double)>& f, int panels = kDefaultPanels);

}  // namespace fng

#endif  // FNG_FAMILIES_HPP
