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

#include "fng/metric.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <atomic>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "fng/quadrature.hpp"

namespace fng {

namespace {

std::atomic<double> g_fisher_fault_scale{1.0};

constexpr double kZeroGradient = 1e-12;
constexpr double kStencilFraction = 0.02;

double fd_hessian_step(double v) {
  static const double kQuarticRootEps = std::pow(std::numeric_limits<double>::epsilon(), 0.25);
  return kQuarticRootEps * std::max(1.0, std::abs(v));
}

Matrix symmetrized(const Matrix& h) { return 0.5 * (h + h.transpose()); }

}  // namespace

namespace testing {
void set_fisher_fault_scale(double scale) { g_fisher_fault_scale.store(scale); }
double fisher_fault_scale() { return g_fisher_fault_scale.load(); }
}  // namespace testing

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::analytic:
      return "analytic";
    case Provenance::finite_difference:
      return "finite_difference";
    case Provenance::pullback:
      return "pullback";
  }
  return "unknown";
}

Direction::Direction(Vector u) : raw_(std::move(u)) {
  const double norm = raw_.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) throw InvalidArgument("direction must be finite and nonzero");
  unit_ = raw_ / norm;
}

double default_tau_min(const Matrix& h) {
  const double n = static_cast<double>(std::max<Eigen::Index>(1, h.rows()));
  return 1e-10 * (1.0 + std::abs(h.trace()) / n);
}

LocalHessian spd_project(const Matrix& h, std::optional<double> tau_min, Provenance provenance) {
  if (h.rows() != h.cols()) throw InvalidArgument("spd_project: matrix is not square");
  if (!h.allFinite()) throw NumericError("spd_project: matrix has non-finite entries");
  LocalHessian out;
  out.provenance = provenance;
  out.matrix = symmetrized(h);
  if (out.matrix.size() == 0) return out;
  const double tau = tau_min.value_or(default_tau_min(out.matrix));
  Eigen::SelfAdjointEigenSolver<Matrix> solver(out.matrix, Eigen::EigenvaluesOnly);
  const double lambda_min = solver.eigenvalues()(0);
  if (lambda_min < tau) {
    out.regularization_added = tau - lambda_min;
    out.matrix.diagonal().array() += out.regularization_added;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Fisher information

Matrix fisher_quadrature(const Family& family, const ParamPoint& theta) {
  const auto n = static_cast<Eigen::Index>(family.param_dim());
  Matrix f = Matrix::Zero(n, n);
  SamplePoint x(1);
  if (family.is_discrete()) {
    for (int i = 0; i < family.support_size(); ++i) {
      x(0) = i;
      const Vector s = family.score(theta, x);
      f.noalias() += family.density(theta, x) * s * s.transpose();
    }
    return f;
  }
  if (!family.has_cdf()) {
    throw CapabilityError(family.name() + ": no quadrature route for the Fisher information");
  }
  const auto [lo, hi] = support_window(family, theta);
  const quad::Rule rule = quad::composite_legendre(lo, hi, kDefaultPanels, kDefaultPanelOrder);
  for (size_t i = 0; i < rule.nodes.size(); ++i) {
    x(0) = rule.nodes[i];
    const double rho = family.density(theta, x);
    if (rho <= 0.0) continue;
    const Vector s = family.score(theta, x);
    f.noalias() += rule.weights[i] * rho * s * s.transpose();
  }
  return f;
}

MonteCarloFisher fisher_monte_carlo(const Family& family, const ParamPoint& theta,
                                    std::uint64_t seed, int samples) {
  if (samples < 2) throw InvalidArgument("fisher_monte_carlo: needs at least two samples");
  const auto n = static_cast<Eigen::Index>(family.param_dim());
  Matrix sum = Matrix::Zero(n, n);
  Matrix sum_sq = Matrix::Zero(n, n);
  for (const auto& x : family.sample(theta, seed, samples)) {
    const Vector s = family.score(theta, x);
    const Matrix outer = s * s.transpose();
    sum += outer;
    sum_sq += outer.cwiseProduct(outer);
  }
  const double count = samples;
  MonteCarloFisher out;
  out.mean = sum / count;
  const Matrix var = (sum_sq / count - out.mean.cwiseProduct(out.mean)) * (count / (count - 1.0));
  out.standard_error = (var.cwiseMax(0.0) / count).cwiseSqrt();
  return out;
}

LocalHessian fisher_information(const Family& family, const ParamPoint& theta) {
  if (auto closed = family.fisher_closed_form(theta)) {
    return spd_project(*closed * testing::fisher_fault_scale(), std::nullopt, Provenance::analytic);
  }
  return spd_project(fisher_quadrature(family, theta), std::nullopt, Provenance::analytic);
}

LocalHessian f_div_local_hessian(const FDivergenceSpec& spec, const Family& family,
                                 const ParamPoint& theta) {
  if (!(spec.f_second_at_one > 0.0)) throw InvalidArgument(spec.name + ": f''(1) must be positive");
  const LocalHessian fisher = fisher_information(family, theta);
  const Matrix raw = fisher.matrix - fisher.regularization_added * Matrix::Identity(theta.size(), theta.size());
  return spd_project(spec.f_second_at_one * raw, std::nullopt, Provenance::analytic);
}

// ---------------------------------------------------------------------------
// Pullbacks

LocalHessian riemannian_pullback(const Matrix& jacobian, const Matrix& metric) {
  if (metric.rows() != metric.cols() || metric.rows() != jacobian.rows()) {
    throw InvalidArgument("riemannian_pullback: metric must be d x d for a d x n Jacobian");
  }
  if ((metric - metric.transpose()).cwiseAbs().maxCoeff() > 1e-10 * (1.0 + metric.cwiseAbs().maxCoeff()) ||
      Eigen::LLT<Matrix>(symmetrized(metric)).info() != Eigen::Success) {
    throw InvalidArgument("riemannian_pullback: metric is not SPD");
  }
  LocalHessian out =
      spd_project(jacobian.transpose() * symmetrized(metric) * jacobian, std::nullopt, Provenance::pullback);
  out.rank_deficient = Eigen::FullPivLU<Matrix>(jacobian).rank() < jacobian.cols();
  return out;
}

Matrix probability_hessian(const SimilarityMeasure& sim, const Vector& q) {
  const Vector inv = q.cwiseInverse();
  switch (sim.kind()) {
    case SimilarityKind::f_divergence:
      return Matrix(sim.fdiv().f_second_at_one * inv.asDiagonal());
    case SimilarityKind::squared_fisher_rao:
      return Matrix(inv.asDiagonal());
    default:
      throw CapabilityError(sim.id() + ": no probability-coordinate Hessian");
  }
}

// ---------------------------------------------------------------------------
// Wasserstein metrics of 1-D families

namespace {

struct QuadratureSample {
  double weight;  // quadrature weight times density
  double density;
  Vector dcdf;
};

std::vector<QuadratureSample> cdf_samples(const Family& family, const ParamPoint& theta) {
  if (!family.has_cdf()) {
    throw CapabilityError(family.name() + ": Wasserstein metrics need a 1-D family with a cdf");
  }
  const auto [lo, hi] = support_window(family, theta);
  const quad::Rule rule = quad::composite_legendre(lo, hi, kDefaultPanels, kDefaultPanelOrder);
  std::vector<QuadratureSample> out;
  out.reserve(rule.nodes.size());
  SamplePoint x(1);
  for (size_t i = 0; i < rule.nodes.size(); ++i) {
    x(0) = rule.nodes[i];
    const double rho = family.density(theta, x);
    if (!(rho > 0.0)) {
      std::ostringstream os;
      os << family.name() << ": density vanishes at x = " << x(0) << " inside the integration window";
      throw NumericError(os.str());
    }
    out.push_back({rule.weights[i] * rho, rho, family.dcdf_dtheta(theta, x(0))});
  }
  return out;
}

}  // namespace

LocalHessian w2_local_hessian_1d(const Family& family, const ParamPoint& theta) {
  const auto n = theta.size();
  Matrix h = Matrix::Zero(n, n);
  for (const auto& s : cdf_samples(family, theta)) {
    const double w = s.weight / s.density;
    h.noalias() += (w / s.density) * s.dcdf * s.dcdf.transpose();
  }
  return spd_project(h, std::nullopt, Provenance::analytic);
}

FinslerTerms wp_local_hessian_terms(const Family& family, const ParamPoint& theta, double p,
                                    const Direction& u) {
  if (!(p > 1.0) || !std::isfinite(p)) throw InvalidArgument("wp_local_hessian_1d: p must be > 1");
  if (u.unit().size() != theta.size()) throw InvalidArgument("wp_local_hessian_1d: direction has wrong size");
  const auto n = theta.size();
  const auto samples = cdf_samples(family, theta);

  // gradients of the potentials Phi_{e_i}, and of Phi_v along the direction
  std::vector<Vector> a;
  std::vector<double> w;
  a.reserve(samples.size());
  w.reserve(samples.size());
  double w_max = 0.0;
  for (const auto& s : samples) {
    a.push_back(-s.dcdf / s.density);
    w.push_back(a.back().dot(u.unit()));
    w_max = std::max(w_max, std::abs(w.back()));
  }
  if (!(w_max > 0.0)) throw NumericError("wp_local_hessian_1d: the direction moves no mass");

  if (p < 2.0) {
    int vanishing = 0;
    double mass = 0.0;
    double smallest = std::numeric_limits<double>::infinity();
    for (size_t k = 0; k < samples.size(); ++k) {
      smallest = std::min(smallest, std::abs(w[k]));
      if (std::abs(w[k]) <= 1e-14 * w_max) {
        ++vanishing;
        mass += samples[k].weight;
      }
    }
    if (vanishing > 0 && mass > 0.0) {
      std::ostringstream os;
      os << "wp_local_hessian_1d: grad Phi_v vanishes at " << vanishing << " quadrature nodes (mass "
         << mass << ", min |grad Phi_v| " << smallest << ", max " << w_max << ") with p = " << p
         << " < 2";
      throw NumericError(os.str());
    }
  }

  double norm_p = 0.0;
  Vector first = Vector::Zero(n);
  Matrix second = Matrix::Zero(n, n);
  Matrix third = Matrix::Zero(n, n);
  for (size_t k = 0; k < samples.size(); ++k) {
    const double aw = std::abs(w[k]);
    const double wt = samples[k].weight;
    const double pow_p2 = std::pow(aw, p - 2.0);
    norm_p += wt * std::pow(aw, p);
    first.noalias() += (wt * pow_p2 * w[k]) * a[k];
    second.noalias() += (wt * pow_p2) * a[k] * a[k].transpose();
    if (aw > 0.0) third.noalias() += (wt * std::pow(aw, p - 4.0) * w[k] * w[k]) * a[k] * a[k].transpose();
  }
  FinslerTerms t;
  t.finsler_norm = std::pow(norm_p, 1.0 / p);
  const double f = t.finsler_norm;
  t.outer = (2.0 - p) * std::pow(f, 2.0 * (1.0 - p)) * first * first.transpose();
  t.middle = std::pow(f, 2.0 - p) * second;
  t.cross = (p - 2.0) * std::pow(f, 2.0 - p) * third;
  return t;
}

LocalHessian wp_local_hessian_1d(const Family& family, const ParamPoint& theta, double p,
                                 const Direction& u) {
  const FinslerTerms t = wp_local_hessian_terms(family, theta, p, u);
  return spd_project(t.outer + t.middle + t.cross, std::nullopt, Provenance::analytic);
}

// ---------------------------------------------------------------------------
// Finite-difference engine

Matrix fd_hessian(const std::function<double(const Vector&)>& f, const Vector& x, const Vector& h) {
  const auto n = x.size();
  Matrix out(n, n);
  const double f0 = f(x);
  Vector y = x;
  for (Eigen::Index i = 0; i < n; ++i) {
    y(i) = x(i) + h(i);
    const double up = f(y);
    y(i) = x(i) - h(i);
    const double down = f(y);
    y(i) = x(i);
    out(i, i) = (up - 2.0 * f0 + down) / (h(i) * h(i));
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      auto at = [&](double si, double sj) {
        y(i) = x(i) + si * h(i);
        y(j) = x(j) + sj * h(j);
        const double v = f(y);
        y(i) = x(i);
        y(j) = x(j);
        return v;
      };
      const double v = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * h(i) * h(j));
      out(i, j) = v;
      out(j, i) = v;
    }
  }
  return out;
}

LocalHessian fd_local_hessian(const SimilarityMeasure& sim, const Family& family,
                              const ParamPoint& theta, const std::optional<Direction>& u,
                              const FdOptions& options) {
  family.validate(theta);
  auto cost = [&](const Vector& eta) { return sim.evaluate(family, eta, theta); };
  const auto n = theta.size();

  if (!u) {
    Vector h(n);
    for (Eigen::Index i = 0; i < n; ++i) h(i) = fd_hessian_step(theta(i));
    return spd_project(fd_hessian(cost, theta, h), std::nullopt, Provenance::finite_difference);
  }
  if (u->unit().size() != n) throw InvalidArgument("fd_local_hessian: direction has wrong size");

  // The stencil shrinks with the rung: a 0-homogeneous Hessian then carries
  // the same relative truncation error on every rung.
  const auto& eps = options.ladder;
  std::array<Matrix, 3> rung;
  for (size_t k = 0; k < eps.size(); ++k) {
    const double offset = eps[k] * options.scale;
    const Vector base = theta + offset * u->unit();
    const Vector h = Vector::Constant(n, kStencilFraction * offset);
    rung[k] = symmetrized(fd_hessian(cost, base, h));
  }
  // H(eps) = H0 + a eps + b eps^2: two first-level extrapolants, then one more.
  const double e1 = eps[0], e2 = eps[1], e3 = eps[2];
  const Matrix r1 = (e1 * rung[1] - e2 * rung[0]) / (e1 - e2);
  const Matrix r2 = (e2 * rung[2] - e3 * rung[1]) / (e2 - e3);
  const Matrix result = (e1 * r2 - e3 * r1) / (e1 - e3);
  const double spread = (r1 - r2).cwiseAbs().maxCoeff();
  const double allowed = 10.0 * options.tolerance * std::max(1.0, result.cwiseAbs().maxCoeff());
  if (!(spread <= allowed)) {
    std::ostringstream os;
    os << "fd_local_hessian: directional extrapolation did not converge (spread " << spread
       << " > " << allowed << ")";
    throw NumericError(os.str());
  }
  return spd_project(result, std::nullopt, Provenance::finite_difference);
}

// ---------------------------------------------------------------------------
// MetricEngine

const std::vector<std::string>& MetricEngine::ids() {
  static const std::vector<std::string> ids{"fisher", "fdiv:{name}", "pullback", "w2_1d",
                                            "wp_1d:{p}", "fd:{sim}", "euclidean"};
  return ids;
}

MetricEngine MetricEngine::parse(const std::string& id) {
  MetricEngine e;
  e.id_ = id;
  auto fail = [&](const std::string& why) -> MetricEngine {
    std::string valid;
    for (const auto& s : ids()) valid += (valid.empty() ? "" : ", ") + s;
    throw ConfigError("unknown metric '" + id + "'" + (why.empty() ? "" : " (" + why + ")") +
                      "; valid metrics: " + valid);
  };
  if (id == "fisher") {
    e.strategy_ = MetricStrategy::fisher;
  } else if (id == "euclidean") {
    e.strategy_ = MetricStrategy::identity;
  } else if (id == "pullback") {
    e.strategy_ = MetricStrategy::pullback;
  } else if (id == "w2_1d") {
    e.strategy_ = MetricStrategy::w2_1d;
  } else if (id.rfind("fdiv:", 0) == 0) {
    e.strategy_ = MetricStrategy::fdiv;
    try {
      e.fdiv_ = fdiv_spec(id.substr(5));
    } catch (const ConfigError& err) {
      return fail(err.what());
    }
  } else if (id.rfind("wp_1d:", 0) == 0) {
    e.strategy_ = MetricStrategy::wp_1d;
    const std::string tail = id.substr(6);
    const auto [ptr, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), e.p_);
    if (ec != std::errc() || ptr != tail.data() + tail.size() || !(e.p_ > 1.0)) {
      return fail("p must be a real > 1");
    }
  } else if (id.rfind("fd:", 0) == 0) {
    e.strategy_ = MetricStrategy::fd_directional;
    try {
      e.fd_sim_ = make_similarity(id.substr(3));
    } catch (const ConfigError& err) {
      return fail(err.what());
    }
  } else {
    return fail("");
  }
  return e;
}

LocalHessian MetricEngine::compute(const Family& family, const SimilarityMeasure& sim,
                                   const ParamPoint& theta, const Vector& gradient) const {
  const bool flat_gradient = !(gradient.norm() >= kZeroGradient);
  LocalHessian h;
  switch (strategy_) {
    case MetricStrategy::identity:
      h = spd_project(Matrix::Identity(theta.size(), theta.size()), std::nullopt, Provenance::analytic);
      break;
    case MetricStrategy::fisher:
      h = fisher_information(family, theta);
      break;
    case MetricStrategy::fdiv:
      h = f_div_local_hessian(*fdiv_, family, theta);
      break;
    case MetricStrategy::pullback: {
      if (dynamic_cast<const CategoricalSoftmax*>(&family) == nullptr) {
        throw CapabilityError("pullback metric is only available for categorical_softmax");
      }
      const Vector q = family.probabilities(theta);
      h = riemannian_pullback(CategoricalSoftmax::softmax_jacobian(q), probability_hessian(sim, q));
      break;
    }
    case MetricStrategy::w2_1d:
      h = w2_local_hessian_1d(family, theta);
      break;
    case MetricStrategy::wp_1d:
      // At a stationary point no gradient direction exists; the p = 2 metric
      // stands in for the remaining (terminal) iteration.
      h = flat_gradient ? w2_local_hessian_1d(family, theta)
                        : wp_local_hessian_1d(family, theta, p_, Direction(-gradient));
      break;
    case MetricStrategy::fd_directional: {
      bool directed = false;
      switch (fd_direction) {
        case FdDirection::automatic:
          directed = !fd_sim_->smooth_at_diagonal();
          break;
        case FdDirection::gradient:
          directed = true;
          break;
        case FdDirection::none:
          directed = false;
          break;
      }
      std::optional<Direction> dir;
      if (directed && !flat_gradient) dir.emplace(-gradient);
      h = fd_local_hessian(*fd_sim_, family, theta, dir, fd_options);
      break;
    }
  }
  if (tau_min) {
    const Matrix raw = h.matrix - h.regularization_added * Matrix::Identity(theta.size(), theta.size());
    const bool rank_deficient = h.rank_deficient;
    h = spd_project(raw, tau_min, h.provenance);
    h.rank_deficient = rank_deficient;
  }
  return h;
}

}  // namespace fng
