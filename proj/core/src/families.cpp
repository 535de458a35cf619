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

#include "fng/families.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "fng/gp_kernel.hpp"
#include "fng/quadrature.hpp"

namespace fng {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454835606594728112;

std::string describe(const ParamPoint& theta) {
  std::ostringstream os;
  os << "(";
  for (Eigen::Index i = 0; i < theta.size(); ++i) os << (i ? ", " : "") << theta(i);
  os << ")";
  return os.str();
}

double std_normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

}  // namespace

double fd_step(double v) {
  static const double kCbrtEps = std::cbrt(std::numeric_limits<double>::epsilon());
  return kCbrtEps * std::max(1.0, std::abs(v));
}

// ---------------------------------------------------------------------------
// Family: validation and dispatch

bool Family::is_valid(const ParamPoint& theta) const noexcept {
  if (theta.size() != param_dim()) return false;
  if (!theta.allFinite()) return false;
  return in_domain(theta);
}

void Family::validate(const ParamPoint& theta) const {
  if (theta.size() != param_dim()) {
    throw InvalidParameter(name() + ": expected " + std::to_string(param_dim()) +
                           " parameters, got " + std::to_string(theta.size()));
  }
  if (!theta.allFinite()) throw InvalidParameter(name() + ": non-finite parameter " + describe(theta));
  if (!in_domain(theta)) throw InvalidParameter(name() + ": parameter outside domain " + describe(theta));
}

void Family::require_cdf(const char* op) const {
  if (!has_cdf()) throw CapabilityError(name() + ": " + op + " requires a one-dimensional family with a cdf");
}

double Family::log_density(const ParamPoint& theta, const SamplePoint& x) const {
  validate(theta);
  if (x.size() != sample_dim()) {
    throw InvalidArgument(name() + ": sample point has dimension " + std::to_string(x.size()) +
                          ", expected " + std::to_string(sample_dim()));
  }
  return do_log_density(theta, x);
}

double Family::density(const ParamPoint& theta, const SamplePoint& x) const {
  return std::exp(log_density(theta, x));
}

Vector Family::score(const ParamPoint& theta, const SamplePoint& x) const {
  if (!std::isfinite(log_density(theta, x))) {
    throw UndefinedScore(name() + ": score undefined where the density vanishes");
  }
  return do_score(theta, x);
}

double Family::cdf(const ParamPoint& theta, double x) const {
  require_cdf("cdf");
  validate(theta);
  return do_cdf(theta, x);
}

double Family::quantile(const ParamPoint& theta, double q) const {
  require_cdf("quantile");
  validate(theta);
  if (!(q > 0.0 && q < 1.0)) throw InvalidArgument(name() + ": quantile level must lie in (0, 1)");
  return do_quantile(theta, q);
}

Vector Family::dcdf_dtheta(const ParamPoint& theta, double x) const {
  require_cdf("dcdf_dtheta");
  validate(theta);
  return do_dcdf_dtheta(theta, x);
}

double Family::transport_map(const ParamPoint& from, const ParamPoint& to, double x) const {
  require_cdf("transport_map");
  validate(from);
  validate(to);
  return do_transport_map(from, to, x);
}

std::vector<SamplePoint> Family::sample(const ParamPoint& theta, std::uint64_t seed, int count) const {
  if (!has_sampler()) throw CapabilityError(name() + ": no sampler");
  validate(theta);
  if (count < 0) throw InvalidArgument("sample count must be nonnegative");
  if (count == 0) return {};
  return do_sample(theta, seed, count);
}

std::optional<Matrix> Family::fisher_closed_form(const ParamPoint& theta) const {
  validate(theta);
  return do_fisher_closed_form(theta);
}

std::optional<GaussianForm> Family::gaussian_form(const ParamPoint& theta) const {
  validate(theta);
  return do_gaussian_form(theta);
}

Vector Family::probabilities(const ParamPoint& theta) const {
  if (!is_discrete()) throw CapabilityError(name() + ": probabilities requires a discrete family");
  validate(theta);
  Vector p(support_size());
  SamplePoint x(1);
  for (int i = 0; i < support_size(); ++i) {
    x(0) = i;
    p(i) = std::exp(do_log_density(theta, x));
  }
  return p;
}

Vector Family::do_score(const ParamPoint& theta, const SamplePoint& x) const {
  Vector g(theta.size());
  ParamPoint t = theta;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    const double h = fd_step(theta(i));
    t(i) = theta(i) + h;
    const double up = log_density(t, x);
    t(i) = theta(i) - h;
    const double down = log_density(t, x);
    t(i) = theta(i);
    g(i) = (up - down) / (2.0 * h);
  }
  return g;
}

double Family::do_cdf(const ParamPoint&, double) const {
  throw CapabilityError(name() + ": no cdf");
}

double Family::do_quantile(const ParamPoint&, double) const {
  throw CapabilityError(name() + ": no quantile function");
}

Vector Family::do_dcdf_dtheta(const ParamPoint& theta, double x) const {
  Vector g(theta.size());
  ParamPoint t = theta;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    const double h = fd_step(theta(i));
    t(i) = theta(i) + h;
    const double up = cdf(t, x);
    t(i) = theta(i) - h;
    const double down = cdf(t, x);
    t(i) = theta(i);
    g(i) = (up - down) / (2.0 * h);
  }
  return g;
}

double Family::do_transport_map(const ParamPoint& from, const ParamPoint& to, double x) const {
  constexpr double kLo = std::numeric_limits<double>::min();
  const double q = std::clamp(do_cdf(from, x), kLo, std::nextafter(1.0, 0.0));
  return do_quantile(to, q);
}

std::vector<SamplePoint> Family::do_sample(const ParamPoint&, std::uint64_t, int) const {
  throw CapabilityError(name() + ": no sampler");
}

// ---------------------------------------------------------------------------
// Gaussian1d

double Gaussian1d::do_log_density(const ParamPoint& theta, const SamplePoint& x) const {
  const double z = (x(0) - theta(0)) / theta(1);
  return -0.5 * kLogTwoPi - std::log(theta(1)) - 0.5 * z * z;
}

Vector Gaussian1d::do_score(const ParamPoint& theta, const SamplePoint& x) const {
  const double mu = theta(0);
  const double sigma = theta(1);
  const double r = x(0) - mu;
  Vector g(2);
  g << r / (sigma * sigma), (r * r - sigma * sigma) / (sigma * sigma * sigma);
  return g;
}

double Gaussian1d::do_cdf(const ParamPoint& theta, double x) const {
  const double z = (x - theta(0)) / theta(1);
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

double Gaussian1d::do_quantile(const ParamPoint& theta, double q) const {
  const double z = -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * q);
  return theta(0) + theta(1) * z;
}

Vector Gaussian1d::do_dcdf_dtheta(const ParamPoint& theta, double x) const {
  const double z = (x - theta(0)) / theta(1);
  const double scaled = std_normal_pdf(z) / theta(1);
  Vector g(2);
  g << -scaled, -scaled * z;
  return g;
}

double Gaussian1d::do_transport_map(const ParamPoint& from, const ParamPoint& to, double x) const {
  return to(0) + to(1) * (x - from(0)) / from(1);
}

std::vector<SamplePoint> Gaussian1d::do_sample(const ParamPoint& theta, std::uint64_t seed,
                                               int count) const {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(theta(0), theta(1));
  std::vector<SamplePoint> out(static_cast<size_t>(count), SamplePoint(1));
  for (auto& x : out) x(0) = normal(rng);
  return out;
}

std::optional<Matrix> Gaussian1d::do_fisher_closed_form(const ParamPoint& theta) const {
  const double inv_var = 1.0 / (theta(1) * theta(1));
  Matrix f = Matrix::Zero(2, 2);
  f(0, 0) = inv_var;
  f(1, 1) = 2.0 * inv_var;
  return f;
}

std::optional<GaussianForm> Gaussian1d::do_gaussian_form(const ParamPoint& theta) const {
  GaussianForm g{Vector::Constant(1, theta(0)), Matrix::Constant(1, 1, theta(1) * theta(1))};
  return g;
}

// ---------------------------------------------------------------------------
// MvnLogCholesky

MvnLogCholesky::MvnLogCholesky(int dim) : dim_(dim) {
  if (dim < 1) throw InvalidArgument("mvn_lcholesky: dimension must be positive");
}

int MvnLogCholesky::dim_from_param_count(int n) {
  for (int d = 1; d * (d + 3) / 2 <= n; ++d) {
    if (d * (d + 3) / 2 == n) return d;
  }
  throw InvalidArgument("mvn_lcholesky: " + std::to_string(n) +
                        " is not d + d(d+1)/2 for any dimension d");
}

ParamPoint MvnLogCholesky::pack(const Vector& mean, const Matrix& covariance) {
  const auto d = mean.size();
  Eigen::LLT<Matrix> llt(covariance);
  if (llt.info() != Eigen::Success) throw InvalidParameter("mvn_lcholesky: covariance is not SPD");
  const Matrix l = llt.matrixL();
  ParamPoint theta(d + d * (d + 1) / 2);
  theta.head(d) = mean;
  Eigen::Index k = d;
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) theta(k++) = (i == j) ? std::log(l(i, i)) : l(i, j);
  }
  return theta;
}

Vector MvnLogCholesky::mean(const ParamPoint& theta) const { return theta.head(dim_); }

Matrix MvnLogCholesky::cholesky_factor(const ParamPoint& theta) const {
  Matrix l = Matrix::Zero(dim_, dim_);
  Eigen::Index k = dim_;
  for (int i = 0; i < dim_; ++i) {
    for (int j = 0; j <= i; ++j) l(i, j) = (i == j) ? std::exp(theta(k++)) : theta(k++);
  }
  return l;
}

std::vector<Matrix> MvnLogCholesky::covariance_derivatives(const ParamPoint& theta) const {
  const Matrix l = cholesky_factor(theta);
  std::vector<Matrix> out;
  out.reserve(static_cast<size_t>(dim_ * (dim_ + 1) / 2));
  for (int i = 0; i < dim_; ++i) {
    for (int j = 0; j <= i; ++j) {
      Matrix dl = Matrix::Zero(dim_, dim_);
      dl(i, j) = (i == j) ? l(i, i) : 1.0;
      out.push_back(dl * l.transpose() + l * dl.transpose());
    }
  }
  return out;
}

double MvnLogCholesky::do_log_density(const ParamPoint& theta, const SamplePoint& x) const {
  const Matrix l = cholesky_factor(theta);
  const Vector z = l.triangularView<Eigen::Lower>().solve(x - mean(theta));
  return -0.5 * dim_ * kLogTwoPi - l.diagonal().array().log().sum() - 0.5 * z.squaredNorm();
}

Vector MvnLogCholesky::do_score(const ParamPoint& theta, const SamplePoint& x) const {
  const Matrix l = cholesky_factor(theta);
  const Vector z = l.triangularView<Eigen::Lower>().solve(x - mean(theta));
  const Vector w = l.transpose().triangularView<Eigen::Upper>().solve(z);
  Vector g(param_dim());
  g.head(dim_) = w;
  Eigen::Index k = dim_;
  for (int i = 0; i < dim_; ++i) {
    for (int j = 0; j <= i; ++j) g(k++) = (i == j) ? -1.0 + l(i, i) * w(i) * z(i) : w(i) * z(j);
  }
  return g;
}

std::vector<SamplePoint> MvnLogCholesky::do_sample(const ParamPoint& theta, std::uint64_t seed,
                                                   int count) const {
  const Matrix l = cholesky_factor(theta);
  const Vector mu = mean(theta);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<SamplePoint> out;
  out.reserve(static_cast<size_t>(count));
  Vector z(dim_);
  for (int s = 0; s < count; ++s) {
    for (int i = 0; i < dim_; ++i) z(i) = normal(rng);
    out.emplace_back(mu + l * z);
  }
  return out;
}

std::optional<Matrix> MvnLogCholesky::do_fisher_closed_form(const ParamPoint& theta) const {
  const Matrix l = cholesky_factor(theta);
  const Matrix sigma = l * l.transpose();
  Eigen::LLT<Matrix> llt(sigma);
  const Matrix inv = llt.solve(Matrix::Identity(dim_, dim_));
  Matrix f = Matrix::Zero(param_dim(), param_dim());
  f.topLeftCorner(dim_, dim_) = inv;
  const auto d_sigma = covariance_derivatives(theta);
  std::vector<Matrix> scaled;
  scaled.reserve(d_sigma.size());
  for (const auto& ds : d_sigma) scaled.push_back(inv * ds);
  for (size_t a = 0; a < scaled.size(); ++a) {
    for (size_t b = 0; b <= a; ++b) {
      const double v = 0.5 * (scaled[a] * scaled[b]).trace();
      f(dim_ + a, dim_ + b) = v;
      f(dim_ + b, dim_ + a) = v;
    }
  }
  return f;
}

std::optional<GaussianForm> MvnLogCholesky::do_gaussian_form(const ParamPoint& theta) const {
  const Matrix l = cholesky_factor(theta);
  return GaussianForm{mean(theta), l * l.transpose()};
}

// ---------------------------------------------------------------------------
// CategoricalSoftmax

CategoricalSoftmax::CategoricalSoftmax(int categories) : k_(categories) {
  if (categories < 2) throw InvalidArgument("categorical_softmax: needs at least two categories");
}

Vector CategoricalSoftmax::softmax(const Vector& logits) {
  const Vector e = (logits.array() - logits.maxCoeff()).exp();
  return e / e.sum();
}

Matrix CategoricalSoftmax::softmax_jacobian(const Vector& p) {
  Matrix j = -p * p.transpose();
  j.diagonal() += p;
  return j;
}

namespace {

int category_index(const SamplePoint& x, int k) {
  const double v = x(0);
  if (!(v >= 0.0 && v < k) || v != std::floor(v)) {
    throw InvalidArgument("categorical_softmax: outcome must be an integer in [0, " +
                          std::to_string(k) + ")");
  }
  return static_cast<int>(v);
}

}  // namespace

double CategoricalSoftmax::do_log_density(const ParamPoint& theta, const SamplePoint& x) const {
  const int c = category_index(x, k_);
  const double top = theta.maxCoeff();
  const double lse = top + std::log((theta.array() - top).exp().sum());
  return theta(c) - lse;
}

Vector CategoricalSoftmax::do_score(const ParamPoint& theta, const SamplePoint& x) const {
  Vector g = -softmax(theta);
  g(category_index(x, k_)) += 1.0;
  return g;
}

std::vector<SamplePoint> CategoricalSoftmax::do_sample(const ParamPoint& theta, std::uint64_t seed,
                                                       int count) const {
  const Vector p = softmax(theta);
  std::mt19937_64 rng(seed);
  std::discrete_distribution<int> pick(p.data(), p.data() + p.size());
  std::vector<SamplePoint> out(static_cast<size_t>(count), SamplePoint(1));
  for (auto& x : out) x(0) = pick(rng);
  return out;
}

std::optional<Matrix> CategoricalSoftmax::do_fisher_closed_form(const ParamPoint& theta) const {
  return softmax_jacobian(softmax(theta));
}

// ---------------------------------------------------------------------------
// GpPriorEq

GpPriorEq::GpPriorEq(std::vector<double> inputs) : inputs_(std::move(inputs)) {
  if (inputs_.empty()) throw InvalidArgument("gp_prior_eq: needs at least one input");
}

namespace {

Eigen::LLT<Matrix> factor_or_throw(const Matrix& k) {
  Eigen::LLT<Matrix> llt(k);
  if (llt.info() != Eigen::Success) throw NumericError("gp_prior_eq: covariance factorization failed");
  return llt;
}

}  // namespace

double GpPriorEq::do_log_density(const ParamPoint& theta, const SamplePoint& y) const {
  const auto llt = factor_or_throw(gp::covariance(theta, inputs_));
  const Vector z = llt.matrixL().solve(y);
  const double log_det = 2.0 * Matrix(llt.matrixL()).diagonal().array().log().sum();
  return -0.5 * z.squaredNorm() - 0.5 * log_det - 0.5 * static_cast<double>(y.size()) * kLogTwoPi;
}

Vector GpPriorEq::do_score(const ParamPoint& theta, const SamplePoint& y) const {
  const auto llt = factor_or_throw(gp::covariance(theta, inputs_));
  const Vector alpha = llt.solve(y);
  const auto dk = gp::covariance_derivatives(theta, inputs_);
  Vector g(3);
  for (int i = 0; i < 3; ++i) {
    g(i) = 0.5 * alpha.dot(dk[i] * alpha) - 0.5 * llt.solve(dk[i]).trace();
  }
  return g;
}

std::vector<SamplePoint> GpPriorEq::do_sample(const ParamPoint& theta, std::uint64_t seed,
                                              int count) const {
  const auto llt = factor_or_throw(gp::covariance(theta, inputs_));
  const Matrix l = llt.matrixL();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<SamplePoint> out;
  out.reserve(static_cast<size_t>(count));
  Vector z(static_cast<Eigen::Index>(inputs_.size()));
  for (int s = 0; s < count; ++s) {
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal(rng);
    out.emplace_back(l * z);
  }
  return out;
}

std::optional<Matrix> GpPriorEq::do_fisher_closed_form(const ParamPoint& theta) const {
  const auto llt = factor_or_throw(gp::covariance(theta, inputs_));
  const auto dk = gp::covariance_derivatives(theta, inputs_);
  std::array<Matrix, 3> scaled{llt.solve(dk[0]), llt.solve(dk[1]), llt.solve(dk[2])};
  Matrix f(3, 3);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j <= i; ++j) f(i, j) = f(j, i) = 0.5 * (scaled[i] * scaled[j]).trace();
  }
  return f;
}

std::optional<GaussianForm> GpPriorEq::do_gaussian_form(const ParamPoint& theta) const {
  const auto m = static_cast<Eigen::Index>(inputs_.size());
  return GaussianForm{Vector::Zero(m), gp::covariance(theta, inputs_)};
}

// ---------------------------------------------------------------------------
// LinearReparam

LinearReparam::LinearReparam(FamilyPtr base, Matrix a) : base_(std::move(base)), a_(std::move(a)) {
  if (!base_) throw InvalidArgument("linear reparametrization needs a base family");
  if (a_.rows() != base_->param_dim() || a_.cols() != base_->param_dim()) {
    throw InvalidArgument("linear reparametrization matrix must be square of the parameter dimension");
  }
  if (Eigen::FullPivLU<Matrix>(a_).rank() != a_.rows()) {
    throw InvalidArgument("linear reparametrization matrix must be invertible");
  }
}

bool LinearReparam::in_domain(const ParamPoint& xi) const { return base_->is_valid(a_ * xi); }

double LinearReparam::do_log_density(const ParamPoint& xi, const SamplePoint& x) const {
  return base_->log_density(a_ * xi, x);
}

Vector LinearReparam::do_score(const ParamPoint& xi, const SamplePoint& x) const {
  return a_.transpose() * base_->score(a_ * xi, x);
}

double LinearReparam::do_cdf(const ParamPoint& xi, double x) const { return base_->cdf(a_ * xi, x); }

double LinearReparam::do_quantile(const ParamPoint& xi, double q) const {
  return base_->quantile(a_ * xi, q);
}

Vector LinearReparam::do_dcdf_dtheta(const ParamPoint& xi, double x) const {
  return a_.transpose() * base_->dcdf_dtheta(a_ * xi, x);
}

double LinearReparam::do_transport_map(const ParamPoint& from, const ParamPoint& to, double x) const {
  return base_->transport_map(a_ * from, a_ * to, x);
}

std::vector<SamplePoint> LinearReparam::do_sample(const ParamPoint& xi, std::uint64_t seed,
                                                  int count) const {
  return base_->sample(a_ * xi, seed, count);
}

std::optional<Matrix> LinearReparam::do_fisher_closed_form(const ParamPoint& xi) const {
  auto f = base_->fisher_closed_form(a_ * xi);
  if (!f) return std::nullopt;
  return Matrix(a_.transpose() * (*f) * a_);
}

std::optional<GaussianForm> LinearReparam::do_gaussian_form(const ParamPoint& xi) const {
  return base_->gaussian_form(a_ * xi);
}

// ---------------------------------------------------------------------------

const std::vector<std::string>& family_ids() {
  static const std::vector<std::string> ids{"gaussian1d", "mvn_lcholesky", "categorical_softmax",
                                            "gp_prior_eq"};
  return ids;
}

FamilyPtr make_family(const std::string& id, const FamilyOptions& options) {
  if (id == "gaussian1d") return std::make_shared<Gaussian1d>();
  if (id == "mvn_lcholesky") return std::make_shared<MvnLogCholesky>(options.mvn_dim);
  if (id == "categorical_softmax") return std::make_shared<CategoricalSoftmax>(options.categories);
  if (id == "gp_prior_eq") {
    std::vector<double> inputs = options.gp_inputs;
    if (inputs.empty()) {
      // benchmark default: 30 equispaced inputs on [-3, 3]
      constexpr int kDefaultInputs = 30;
      for (int i = 0; i < kDefaultInputs; ++i) inputs.push_back(-3.0 + 6.0 * i / (kDefaultInputs - 1));
    }
    return std::make_shared<GpPriorEq>(std::move(inputs));
  }
  std::string valid;
  for (const auto& f : family_ids()) valid += (valid.empty() ? "" : ", ") + f;
  throw ConfigError("unknown family '" + id + "'; valid families: " + valid);
}

std::pair<double, double> support_window(const Family& family, const ParamPoint& theta, double tail) {
  return {family.quantile(theta, tail), family.quantile(theta, 1.0 - tail)};
}

double expectation(const Family& family, const ParamPoint& theta,
                   const std::function<double(double)>& f, int panels) {
  if (family.is_discrete()) {
    const Vector p = family.probabilities(theta);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) sum += p(i) * f(static_cast<double>(i));
    return sum;
  }
  if (!family.has_cdf()) {
    throw CapabilityError(family.name() + ": quadrature expectations need a 1-D family with a cdf");
  }
  const auto [lo, hi] = support_window(family, theta);
  const quad::Rule rule = quad::composite_legendre(lo, hi, panels, kDefaultPanelOrder);
  SamplePoint x(1);
  double sum = 0.0;
  for (size_t i = 0; i < rule.nodes.size(); ++i) {
    x(0) = rule.nodes[i];
    sum += rule.weights[i] * f(rule.nodes[i]) * family.density(theta, x);
  }
  return sum;
}

}  // namespace fng
