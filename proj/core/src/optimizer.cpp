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

#include "fng/optimizer.hpp"

#include <Eigen/Cholesky>

#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

namespace fng {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vector solve_natural(const LocalHessian& h, const Vector& gradient, double learning_rate) {
  Eigen::LLT<Matrix> llt(h.matrix);
  if (llt.info() != Eigen::Success) throw NumericError("local Hessian factorization failed after damping");
  Vector v = -llt.solve(gradient) / learning_rate;
  if (!v.allFinite()) throw NumericError("natural gradient step is not finite");
  return v;
}

double safe_value(const Objective& cost, const ParamPoint& theta) {
  try {
    const double v = cost.value(theta);
    return std::isfinite(v) ? v : kInf;
  } catch (const InvalidParameter&) {
    return kInf;
  } catch (const NumericError&) {
    return kInf;
  }
}

}  // namespace

void OptimizerConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning_rate must be a positive real");
  }
  if (max_iters < 0) throw ConfigError("max_iters must be nonnegative");
  if (!(grad_tol > 0.0)) throw ConfigError("grad_tol must be positive");
  if (!(cost_tol > 0.0)) throw ConfigError("cost_tol must be positive");
  if (line_search.enabled) {
    if (!(line_search.c1 > 0.0 && line_search.c1 < 1.0)) throw ConfigError("line_search.c1 must lie in (0, 1)");
    if (!(line_search.shrink > 0.0 && line_search.shrink < 1.0)) {
      throw ConfigError("line_search.shrink must lie in (0, 1)");
    }
  }
  if (tau_min && !(*tau_min > 0.0)) throw ConfigError("damping must be positive");
  MetricEngine::parse(metric);
}

std::string to_string(Status s) {
  switch (s) {
    case Status::converged_grad:
      return "converged_grad";
    case Status::converged_cost:
      return "converged_cost";
    case Status::max_iters:
      return "max_iters";
    case Status::numeric_failure:
      return "numeric_failure";
  }
  return "unknown";
}

Objective make_objective(FamilyPtr family, SimilarityMeasure sim, Target target) {
  auto shared_sim = std::make_shared<const SimilarityMeasure>(std::move(sim));
  auto shared_target = std::make_shared<const Target>(std::move(target));
  Objective obj;
  obj.value = [family, shared_sim, shared_target](const ParamPoint& theta) {
    return shared_sim->evaluate(*family, theta, *shared_target);
  };
  obj.gradient = [family, shared_sim, shared_target](const ParamPoint& theta) {
    return shared_sim->grad_theta(*family, theta, *shared_target);
  };
  return obj;
}

MetricFn make_metric_fn(MetricEngine engine, FamilyPtr family, SimilarityMeasure sim) {
  return [engine = std::move(engine), family = std::move(family), sim = std::move(sim)](
             const ParamPoint& theta, const Vector& gradient) {
    return engine.compute(*family, sim, theta, gradient);
  };
}

StepResult natural_gradient_step(const Objective& cost, const MetricFn& metric, const ParamPoint& theta,
                                 double learning_rate) {
  if (!(learning_rate > 0.0)) throw InvalidArgument("learning rate must be positive");
  StepResult out;
  out.record.gradient = cost.gradient(theta);
  const LocalHessian h = metric(theta, out.record.gradient);
  out.record.step = solve_natural(h, out.record.gradient, learning_rate);
  out.record.regularization = h.regularization_added;
  out.next = theta + out.record.step;
  return out;
}

Matrix fd_cost_hessian(const Objective& cost, const ParamPoint& theta) {
  const auto n = theta.size();
  Matrix h(n, n);
  ParamPoint t = theta;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double step = fd_step(theta(i));
    t(i) = theta(i) + step;
    const Vector up = cost.gradient(t);
    t(i) = theta(i) - step;
    const Vector down = cost.gradient(t);
    t(i) = theta(i);
    h.col(i) = (up - down) / (2.0 * step);
  }
  return 0.5 * (h + h.transpose());
}

ParamPoint newton_step(const Objective& cost, const ParamPoint& theta, double learning_rate) {
  const Matrix hessian = fd_cost_hessian(cost, theta);
  const MetricFn exact = [&](const ParamPoint&, const Vector&) {
    return spd_project(hessian, std::nullopt, Provenance::finite_difference);
  };
  return natural_gradient_step(cost, exact, theta, learning_rate).next;
}

LineSearchResult backtracking_line_search(const Objective& cost, const ParamPoint& theta,
                                          double cost_at_theta, const Vector& gradient,
                                          const Vector& direction, const LineSearchConfig& config) {
  LineSearchResult out;
  const double slope = gradient.dot(direction);
  out.descent_direction = slope < 0.0;
  double alpha = 1.0;
  if (!out.descent_direction) {
    // nothing to gain along an ascent direction: report the floor
    out.alpha = config.alpha_floor;
    out.cost = safe_value(cost, theta + out.alpha * direction);
    out.armijo = out.cost <= cost_at_theta + config.c1 * out.alpha * slope;
    return out;
  }
  while (true) {
    const double trial = safe_value(cost, theta + alpha * direction);
    if (trial <= cost_at_theta + config.c1 * alpha * slope) {
      out.alpha = alpha;
      out.cost = trial;
      out.armijo = true;
      return out;
    }
    const double next = alpha * config.shrink;
    if (next < config.alpha_floor) {
      out.alpha = config.alpha_floor;
      out.cost = safe_value(cost, theta + out.alpha * direction);
      out.armijo = out.cost <= cost_at_theta + config.c1 * out.alpha * slope;
      return out;
    }
    alpha = next;
  }
}

LineSearchResult backtracking_line_search(const Objective& cost, const ParamPoint& theta,
                                          const Vector& direction, double c1, double shrink,
                                          double alpha_floor) {
  LineSearchConfig config;
  config.c1 = c1;
  config.shrink = shrink;
  config.alpha_floor = alpha_floor;
  return backtracking_line_search(cost, theta, cost.value(theta), cost.gradient(theta), direction, config);
}

Trace optimize(const Objective& cost, const MetricFn& metric, const ParamPoint& theta0,
               const OptimizerConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  Trace trace;
  trace.final_theta = theta0;
  auto fail = [&](const std::string& why) {
    trace.status = Status::numeric_failure;
    trace.message = why;
    return trace;
  };

  ParamPoint theta = theta0;
  double c = 0.0;
  Vector g;
  try {
    c = cost.value(theta);
    g = cost.gradient(theta);
  } catch (const Error& e) {
    return fail(std::string("initial evaluation failed: ") + e.what());
  }
  if (!std::isfinite(c) || !g.allFinite()) return fail("non-finite cost or gradient at the initial point");
  trace.records.push_back({0, c, g.norm(), 0.0, 0.0, elapsed(), false});

  double previous_cost = c;
  for (int iter = 0;; ++iter) {
    if (g.norm() < config.grad_tol) {
      trace.status = Status::converged_grad;
      break;
    }
    if (iter > 0 && std::abs(previous_cost - c) <= config.cost_tol * std::max(1.0, std::abs(c))) {
      trace.status = Status::converged_cost;
      break;
    }
    if (iter >= config.max_iters) {
      trace.status = Status::max_iters;
      break;
    }

    LocalHessian h;
    Vector v;
    try {
      h = metric(theta, g);
      v = solve_natural(h, g, config.learning_rate);
    } catch (const Error& e) {
      return fail(e.what());
    }
    bool fallback = false;
    if (!(g.dot(v) < 0.0)) {
      v = -g / config.learning_rate;
      fallback = true;
    }

    ParamPoint next;
    double next_cost = 0.0;
    if (config.line_search.enabled) {
      const LineSearchResult ls = backtracking_line_search(cost, theta, c, g, v, config.line_search);
      if (!ls.armijo && !(ls.cost <= c)) {
        trace.status = Status::converged_cost;
        trace.message = "line search could not decrease the cost";
        break;
      }
      next = theta + ls.alpha * v;
      next_cost = ls.cost;
    } else {
      next = theta + v;
      try {
        next_cost = cost.value(next);
      } catch (const Error& e) {
        return fail(e.what());
      }
    }
    Vector next_g;
    try {
      next_g = cost.gradient(next);
    } catch (const Error& e) {
      return fail(e.what());
    }
    if (!std::isfinite(next_cost) || !next_g.allFinite()) return fail("non-finite cost or gradient");
    const double step_norm = (next - theta).norm();
    previous_cost = c;
    theta = std::move(next);
    c = next_cost;
    g = std::move(next_g);
    trace.final_theta = theta;
    trace.records.push_back({iter + 1, c, g.norm(), step_norm, h.regularization_added, elapsed(), fallback});
  }
  trace.final_theta = theta;
  return trace;
}

Trace optimize(FamilyPtr family, const SimilarityMeasure& sim, const ParamPoint& theta0,
               const Target& target, const OptimizerConfig& config) {
  config.validate();
  MetricEngine engine = MetricEngine::parse(config.metric);
  engine.fd_direction = config.fd_direction;
  engine.tau_min = config.tau_min;
  try {
    family->validate(theta0);
  } catch (const InvalidParameter& e) {
    Trace trace;
    trace.final_theta = theta0;
    trace.status = Status::numeric_failure;
    trace.message = e.what();
    return trace;
  }
  return optimize(make_objective(family, sim, target), make_metric_fn(std::move(engine), family, sim),
                  theta0, config);
}

void write_trace_csv(const Trace& trace, std::ostream& os) {
  os << "iter,cost,grad_norm,step_norm,damping,time_s\n";
  const auto old_precision = os.precision();
  os << std::setprecision(17);
  for (const auto& r : trace.records) {
    os << r.iter << ',' << r.cost << ',' << r.grad_norm << ',' << r.step_norm << ',' << r.damping << ','
       << r.time_s << '\n';
  }
  os.precision(old_precision);
}

}  // namespace fng
