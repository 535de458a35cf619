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

#include "fng/similarity.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include "fng/quadrature.hpp"

namespace fng {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kDivergencePanels = 32;
constexpr int kWassersteinPanels = 32;  // 32 x 16 = 512 nodes
constexpr int kHermiteOrderSmallDim = 48;
constexpr int kHermiteOrderTensor = 20;
constexpr int kMaxTensorDim = 3;

void check_target(const Family& family, const ParamPoint& theta, const ParamPoint& target) {
  if (target.size() != family.param_dim()) {
    throw InvalidArgument(family.name() + ": target has " + std::to_string(target.size()) +
                          " parameters, expected " + std::to_string(family.param_dim()));
  }
  family.validate(theta);
  family.validate(target);
}

Matrix sym_sqrt(const Matrix& a) {
  constexpr double kEigenFloor = 1e-14;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (a + a.transpose()));
  const Vector roots = solver.eigenvalues().cwiseMax(kEigenFloor).cwiseSqrt();
  return solver.eigenvectors() * roots.asDiagonal() * solver.eigenvectors().transpose();
}

void require_spd(const Matrix& s, const char* which) {
  if (s.rows() != s.cols() || s.rows() == 0) throw InvalidParameter(std::string(which) + " is not square");
  if (!s.allFinite()) throw InvalidParameter(std::string(which) + " has non-finite entries");
  if ((s - s.transpose()).cwiseAbs().maxCoeff() > 1e-10 * (1.0 + s.cwiseAbs().maxCoeff())) {
    throw InvalidParameter(std::string(which) + " is not symmetric");
  }
  Eigen::LLT<Matrix> llt(s);
  if (llt.info() != Eigen::Success) throw InvalidParameter(std::string(which) + " is not positive definite");
}

// log |e^x - 1| without cancellation near 0 or overflow for large x.
double log_abs_expm1(double x) {
  if (x == 0.0) return -kInf;
  if (x > 0.0) return x + std::log(-std::expm1(-x));
  return std::log(-std::expm1(x));
}

// E over N(mu, L L^T) of g(x) by a tensor Gauss-Hermite rule.
double gaussian_expectation(const GaussianForm& form, const std::function<double(const Vector&)>& g) {
  const auto d = form.mean.size();
  const int order = d == 1 ? kHermiteOrderSmallDim : kHermiteOrderTensor;
  const quad::Rule& rule = quad::gauss_hermite_normal(order);
  Eigen::LLT<Matrix> llt(form.covariance);
  if (llt.info() != Eigen::Success) throw NumericError("gaussian expectation: covariance not SPD");
  const Matrix l = llt.matrixL();
  std::vector<int> idx(static_cast<size_t>(d), 0);
  Vector z(d);
  double sum = 0.0;
  while (true) {
    double w = 1.0;
    for (Eigen::Index i = 0; i < d; ++i) {
      z(i) = rule.nodes[idx[i]];
      w *= rule.weights[idx[i]];
    }
    sum += w * g(form.mean + l * z);
    Eigen::Index k = 0;
    while (k < d && ++idx[k] == order) idx[k++] = 0;
    if (k == d) break;
  }
  return sum;
}

}  // namespace

// ---------------------------------------------------------------------------
// f-divergence catalog

FDivergenceSpec fdiv_spec(const std::string& name) {
  if (name == "kl") {
    return {"kl", [](double t) { return -std::log(t); }, [](double l) { return -l; }, 1.0,
            [](double lp, double lq) {
              const double p = std::exp(lp);
              return p == 0.0 ? 0.0 : p * (lp - lq);
            }};
  }
  if (name == "reverse_kl") {
    return {"reverse_kl", [](double t) { return t > 0.0 ? t * std::log(t) : 0.0; },
            [](double l) { return l == -kInf ? 0.0 : std::exp(l) * l; }, 1.0,
            [](double lp, double lq) {
              const double q = std::exp(lq);
              return q == 0.0 ? 0.0 : q * (lq - lp);
            }};
  }
  if (name == "chi2") {
    return {"chi2", [](double t) { return (t - 1.0) * (t - 1.0); },
            [](double l) {
              const double e = std::expm1(l);
              return e * e;
            },
            2.0,
            [](double lp, double lq) {
              if (lp == -kInf) return lq == -kInf ? 0.0 : kInf;
              return std::exp(lp + 2.0 * log_abs_expm1(lq - lp));
            }};
  }
  if (name == "hellinger2") {
    return {"hellinger2",
            [](double t) {
              const double r = std::sqrt(t) - 1.0;
              return r * r;
            },
            [](double l) {
              const double e = std::expm1(0.5 * l);
              return e * e;
            },
            0.5,
            [](double lp, double lq) {
              if (lp == -kInf) return std::exp(lq);
              return std::exp(lp + 2.0 * log_abs_expm1(0.5 * (lq - lp)));
            }};
  }
  std::string valid;
  for (const auto& n : fdiv_names()) valid += (valid.empty() ? "" : ", ") + n;
  throw ConfigError("unknown f-divergence '" + name + "'; valid: " + valid);
}

const std::vector<std::string>& fdiv_names() {
  static const std::vector<std::string> names{"kl", "reverse_kl", "chi2", "hellinger2"};
  return names;
}

// ---------------------------------------------------------------------------
// Closed forms and quadratures

double kl_gaussian(const GaussianForm& from, const GaussianForm& to) {
  const auto d = from.mean.size();
  Eigen::LLT<Matrix> llt_to(to.covariance);
  Eigen::LLT<Matrix> llt_from(from.covariance);
  if (llt_to.info() != Eigen::Success || llt_from.info() != Eigen::Success) {
    throw InvalidParameter("kl_gaussian: covariance is not SPD");
  }
  const Vector diff = to.mean - from.mean;
  const double trace = llt_to.solve(from.covariance).trace();
  const double mahalanobis = diff.dot(llt_to.solve(diff));
  const double log_det_to = 2.0 * Matrix(llt_to.matrixL()).diagonal().array().log().sum();
  const double log_det_from = 2.0 * Matrix(llt_from.matrixL()).diagonal().array().log().sum();
  return 0.5 * (trace + mahalanobis - static_cast<double>(d) + log_det_to - log_det_from);
}

double f_divergence_quadrature(const FDivergenceSpec& spec, const Family& family,
                               const ParamPoint& theta, const ParamPoint& theta_prime) {
  check_target(family, theta, theta_prime);
  if (family.is_discrete()) {
    double sum = 0.0;
    SamplePoint x(1);
    for (int i = 0; i < family.support_size(); ++i) {
      x(0) = i;
      sum += spec.weighted(family.log_density(theta, x), family.log_density(theta_prime, x));
    }
    return sum;
  }
  if (family.has_cdf()) {
    const auto [lo1, hi1] = support_window(family, theta);
    const auto [lo2, hi2] = support_window(family, theta_prime);
    const quad::Rule rule = quad::composite_legendre(std::min(lo1, lo2), std::max(hi1, hi2),
                                                     kDivergencePanels, kDefaultPanelOrder);
    SamplePoint x(1);
    double sum = 0.0;
    for (size_t i = 0; i < rule.nodes.size(); ++i) {
      x(0) = rule.nodes[i];
      sum += rule.weights[i] * spec.weighted(family.log_density(theta, x), family.log_density(theta_prime, x));
    }
    return sum;
  }
  const auto form = family.gaussian_form(theta);
  if (form && form->mean.size() <= kMaxTensorDim) {
    return gaussian_expectation(*form, [&](const Vector& x) {
      return spec.f_of_log(family.log_density(theta_prime, x) - family.log_density(theta, x));
    });
  }
  throw CapabilityError(family.name() + ": no quadrature route for the '" + spec.name +
                        "' divergence");
}

double f_divergence(const FDivergenceSpec& spec, const Family& family, const ParamPoint& theta,
                    const ParamPoint& theta_prime) {
  check_target(family, theta, theta_prime);
  if (spec.name == "kl" && !family.is_discrete()) {
    const auto from = family.gaussian_form(theta);
    const auto to = family.gaussian_form(theta_prime);
    if (from && to) return kl_gaussian(*from, *to);
  }
  return f_divergence_quadrature(spec, family, theta, theta_prime);
}

double wasserstein_p_1d(const Family& family, const ParamPoint& theta, const ParamPoint& theta_prime,
                        double p) {
  if (!family.has_cdf()) {
    throw CapabilityError(family.name() + ": 1-D Wasserstein needs a one-dimensional family with a cdf");
  }
  if (!(p >= 1.0) || !std::isfinite(p)) throw InvalidArgument("wasserstein: p must be a finite real >= 1");
  check_target(family, theta, theta_prime);
  const auto [lo, hi] = support_window(family, theta);
  const quad::Rule rule = quad::composite_legendre(lo, hi, kWassersteinPanels, kDefaultPanelOrder);
  SamplePoint x(1);
  double sum = 0.0;
  for (size_t i = 0; i < rule.nodes.size(); ++i) {
    x(0) = rule.nodes[i];
    const double shift = std::abs(rule.nodes[i] - family.transport_map(theta, theta_prime, x(0)));
    sum += rule.weights[i] * std::pow(shift, p) * family.density(theta, x);
  }
  return std::pow(std::max(sum, 0.0), 1.0 / p);
}

double squared_w2_gaussian(const Vector& mu1, const Matrix& sigma1, const Vector& mu2,
                           const Matrix& sigma2) {
  if (mu1.size() != mu2.size() || sigma1.rows() != mu1.size() || sigma2.rows() != mu2.size()) {
    throw InvalidParameter("squared_w2_gaussian: dimension mismatch");
  }
  require_spd(sigma1, "squared_w2_gaussian: first covariance");
  require_spd(sigma2, "squared_w2_gaussian: second covariance");
  const Matrix root2 = sym_sqrt(sigma2);
  const Matrix cross = sym_sqrt(root2 * sigma1 * root2);
  const double bures = sigma1.trace() + sigma2.trace() - 2.0 * cross.trace();
  return std::max(0.0, (mu1 - mu2).squaredNorm() + bures);
}

double fisher_rao_distance(const Vector& p, const Vector& q) {
  if (p.size() != q.size()) throw InvalidArgument("fisher_rao_distance: size mismatch");
  // sqrt(p) - sqrt(q) = (p - q) / (sqrt(p) + sqrt(q)) keeps nearby points accurate
  double chord2 = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double s = std::sqrt(p(i)) + std::sqrt(q(i));
    if (s > 0.0) chord2 += std::pow((p(i) - q(i)) / s, 2);
  }
  const double chord = std::sqrt(chord2);
  return 4.0 * std::asin(std::min(1.0, 0.5 * chord));
}

double squared_fisher_rao_categorical(const Family& family, const ParamPoint& theta,
                                      const ParamPoint& theta_prime) {
  check_target(family, theta, theta_prime);
  const double d = fisher_rao_distance(family.probabilities(theta), family.probabilities(theta_prime));
  return 0.5 * d * d;
}

double evaluate_probabilities(const SimilarityMeasure& sim, const Vector& p, const Vector& q) {
  if (p.size() != q.size()) throw InvalidArgument("evaluate_probabilities: size mismatch");
  switch (sim.kind()) {
    case SimilarityKind::f_divergence: {
      double sum = 0.0;
      for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (p(i) > 0.0) sum += p(i) * sim.fdiv().f_of_log(std::log(q(i)) - std::log(p(i)));
      }
      return sum;
    }
    case SimilarityKind::squared_fisher_rao: {
      const double d = fisher_rao_distance(p, q);
      return 0.5 * d * d;
    }
    default:
      throw CapabilityError(sim.id() + ": not defined on probability vectors");
  }
}

// ---------------------------------------------------------------------------
// SimilarityMeasure

SimilarityMeasure SimilarityMeasure::f_divergence(FDivergenceSpec spec) {
  SimilarityMeasure s;
  s.kind_ = SimilarityKind::f_divergence;
  s.id_ = spec.name;
  s.fdiv_ = std::move(spec);
  return s;
}

SimilarityMeasure SimilarityMeasure::fisher_rao() {
  SimilarityMeasure s;
  s.kind_ = SimilarityKind::squared_fisher_rao;
  s.id_ = "fisher_rao2";
  return s;
}

SimilarityMeasure SimilarityMeasure::wasserstein(double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw ConfigError("wasserstein: p must be a finite real >= 1");
  SimilarityMeasure s;
  s.kind_ = SimilarityKind::wasserstein_p;
  s.p_ = p;
  std::string num = std::to_string(p);
  num.erase(num.find_last_not_of('0') + 1);
  if (!num.empty() && num.back() == '.') num.pop_back();
  s.id_ = "wasserstein:" + num;
  return s;
}

SimilarityMeasure SimilarityMeasure::w2_gaussian() {
  SimilarityMeasure s;
  s.kind_ = SimilarityKind::squared_w2_gaussian;
  s.id_ = "w2_gaussian";
  return s;
}

SimilarityMeasure SimilarityMeasure::half_squared_euclidean() {
  SimilarityMeasure s;
  s.kind_ = SimilarityKind::half_squared_euclidean;
  s.id_ = "half_sq_euclidean";
  return s;
}

const FDivergenceSpec& SimilarityMeasure::fdiv() const {
  if (kind_ != SimilarityKind::f_divergence) throw CapabilityError(id_ + " is not an f-divergence");
  return fdiv_;
}

bool SimilarityMeasure::smooth_at_diagonal() const {
  return kind_ != SimilarityKind::wasserstein_p || p_ == 2.0;
}

double SimilarityMeasure::evaluate(const Family& family, const ParamPoint& theta,
                                   const ParamPoint& target) const {
  switch (kind_) {
    case SimilarityKind::f_divergence:
      return fng::f_divergence(fdiv_, family, theta, target);
    case SimilarityKind::squared_fisher_rao:
      if (!family.is_discrete()) throw CapabilityError("fisher_rao2 needs a categorical family");
      return squared_fisher_rao_categorical(family, theta, target);
    case SimilarityKind::wasserstein_p: {
      const double w = wasserstein_p_1d(family, theta, target, p_);
      return 0.5 * w * w;
    }
    case SimilarityKind::squared_w2_gaussian: {
      check_target(family, theta, target);
      const auto a = family.gaussian_form(theta);
      const auto b = family.gaussian_form(target);
      if (!a || !b) throw CapabilityError(family.name() + ": w2_gaussian needs a Gaussian family");
      return 0.5 * squared_w2_gaussian(a->mean, a->covariance, b->mean, b->covariance);
    }
    case SimilarityKind::half_squared_euclidean:
      check_target(family, theta, target);
      return 0.5 * (theta - target).squaredNorm();
  }
  throw Error("unreachable similarity kind");
}

namespace {

void check_dataset(const SimilarityMeasure& sim, const Family& family, const Dataset& data) {
  if (sim.kind() != SimilarityKind::f_divergence || sim.fdiv().name != "kl") {
    throw InvalidArgument(sim.id() + ": data targets only support the likelihood (kl) cost");
  }
  if (data.targets.size() != family.sample_dim()) {
    throw InvalidArgument(family.name() + ": dataset size does not match the sample dimension");
  }
  if (const auto* gp = dynamic_cast<const GpPriorEq*>(&family)) {
    if (gp->inputs() != data.inputs) throw InvalidArgument("gp_prior_eq: dataset inputs differ from family inputs");
  }
}

}  // namespace

double SimilarityMeasure::evaluate(const Family& family, const ParamPoint& theta,
                                   const Target& target) const {
  if (const auto* point = std::get_if<ParamPoint>(&target)) return evaluate(family, theta, *point);
  const auto& data = std::get<Dataset>(target);
  check_dataset(*this, family, data);
  return -family.log_density(theta, data.targets);
}

Vector SimilarityMeasure::grad_theta(const Family& family, const ParamPoint& theta,
                                     const Target& target) const {
  if (const auto* data = std::get_if<Dataset>(&target)) {
    check_dataset(*this, family, *data);
    return -family.score(theta, data->targets);
  }
  const auto& other = std::get<ParamPoint>(target);
  check_target(family, theta, other);

  if (kind_ == SimilarityKind::half_squared_euclidean) return theta - other;

  if (kind_ == SimilarityKind::f_divergence && fdiv_.name == "kl" &&
      dynamic_cast<const Gaussian1d*>(&family) != nullptr) {
    const double mu1 = theta(0), s1 = theta(1), mu2 = other(0), s2 = other(1);
    Vector g(2);
    g << (mu1 - mu2) / (s2 * s2), -1.0 / s1 + s1 / (s2 * s2);
    return g;
  }

  if (kind_ == SimilarityKind::squared_fisher_rao && dynamic_cast<const CategoricalSoftmax*>(&family)) {
    const Vector p = CategoricalSoftmax::softmax(theta);
    const Vector s = p.cwiseSqrt();
    const Vector t = CategoricalSoftmax::softmax(other).cwiseSqrt();
    const double chord = (s - t).norm();
    if (chord == 0.0) return Vector::Zero(theta.size());
    const double half = std::min(1.0, 0.5 * chord);
    const double d = 4.0 * std::asin(half);
    const Vector grad_s = d * 2.0 * (s - t) / (chord * std::sqrt(1.0 - half * half));
    // ds_i / dtheta_j = s_i (delta_ij - p_j) / 2
    const Vector sg = s.cwiseProduct(grad_s);
    return 0.5 * (sg - p * sg.sum());
  }

  Vector g(theta.size());
  ParamPoint t = theta;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    const double h = fd_step(theta(i));
    t(i) = theta(i) + h;
    const double up = evaluate(family, t, other);
    t(i) = theta(i) - h;
    const double down = evaluate(family, t, other);
    t(i) = theta(i);
    g(i) = (up - down) / (2.0 * h);
  }
  return g;
}

// ---------------------------------------------------------------------------

const std::vector<std::string>& similarity_ids() {
  static const std::vector<std::string> ids{"kl",          "reverse_kl",    "chi2",
                                            "hellinger2",  "fisher_rao2",   "wasserstein:{p}",
                                            "w2_gaussian", "half_sq_euclidean"};
  return ids;
}

SimilarityMeasure make_similarity(const std::string& id) {
  for (const auto& name : fdiv_names()) {
    if (id == name) return SimilarityMeasure::f_divergence(fdiv_spec(name));
  }
  if (id == "fisher_rao2") return SimilarityMeasure::fisher_rao();
  if (id == "w2_gaussian") return SimilarityMeasure::w2_gaussian();
  if (id == "half_sq_euclidean") return SimilarityMeasure::half_squared_euclidean();
  constexpr std::string_view kPrefix = "wasserstein:";
  if (id.rfind(kPrefix, 0) == 0) {
    const std::string tail = id.substr(kPrefix.size());
    double p = 0.0;
    const auto [ptr, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), p);
    if (ec == std::errc() && ptr == tail.data() + tail.size()) return SimilarityMeasure::wasserstein(p);
  }
  std::string valid;
  for (const auto& s : similarity_ids()) valid += (valid.empty() ? "" : ", ") + s;
  throw ConfigError("unknown similarity '" + id + "'; valid similarities: " + valid);
}

}  // namespace fng
