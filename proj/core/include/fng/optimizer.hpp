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

#ifndef FNG_OPTIMIZER_HPP
#define FNG_OPTIMIZER_HPP

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fng/metric.hpp"

namespace fng {

struct LineSearchConfig {
  bool enabled = true;
  double c1 = 1e-4;
  double shrink = 0.5;
  double alpha_floor = 1e-8;
};

struct OptimizerConfig {
  /// lambda in v = -(1/lambda) H^{-1} g.
  double learning_rate = 1.0;
  int max_iters = 100;
  double grad_tol = 1e-8;
  /// Relative cost change |c_t - c_{t-1}| <= cost_tol * max(1, |c_t|).
  double cost_tol = 1e-14;
  LineSearchConfig line_search;
  std::string metric = "fisher";
  FdDirection fd_direction = FdDirection::automatic;
  std::optional<double> tau_min;

  /// Throws ConfigError.
  void validate() const;
};

/// A differentiable cost theta -> c(theta, target). Evaluations may throw
/// (e.g. InvalidParameter outside the domain).
struct Objective {
  std::function<double(const ParamPoint&)> value;
  std::function<Vector(const ParamPoint&)> gradient;
};

Objective make_objective(FamilyPtr family, SimilarityMeasure sim, Target target);

/// theta, gradient at theta -> local Hessian used as preconditioner.
using MetricFn = std::function<LocalHessian(const ParamPoint&, const Vector&)>;

MetricFn make_metric_fn(MetricEngine engine, FamilyPtr family, SimilarityMeasure sim);

struct StepRecord {
  Vector gradient;
  Vector step;
  double regularization = 0.0;
};

struct StepResult {
  ParamPoint next;
  StepRecord record;
};

/// One formal natural gradient step: solve H v = -(1/lambda) g with a Cholesky
/// factorization of the projected local Hessian. Throws NumericError if the
/// factorization fails.
StepResult natural_gradient_step(const Objective& cost, const MetricFn& metric, const ParamPoint& theta,
                                 double learning_rate);

/// Full Hessian of the cost by central differences of its gradient.
Matrix fd_cost_hessian(const Objective& cost, const ParamPoint& theta);

/// Damped Newton step with the projected finite-difference Hessian.
ParamPoint newton_step(const Objective& cost, const ParamPoint& theta, double learning_rate);

struct LineSearchResult {
  double alpha = 1.0;
  bool armijo = false;
  bool descent_direction = true;
  double cost = 0.0;
};

/// Armijo backtracking along `direction` starting at alpha = 1. Cost
/// evaluations that throw InvalidParameter / NumericError count as +inf.
LineSearchResult backtracking_line_search(const Objective& cost, const ParamPoint& theta,
                                          const Vector& direction, double c1, double shrink,
                                          double alpha_floor = 1e-8);
LineSearchResult backtracking_line_search(const Objective& cost, const ParamPoint& theta,
                                          double cost_at_theta, const Vector& gradient,
                                          const Vector& direction, const LineSearchConfig& config);

enum class Status { converged_grad, converged_cost, max_iters, numeric_failure };

std::string to_string(Status s);

struct IterationRecord {
  int iter = 0;
  double cost = 0.0;
  double grad_norm = 0.0;
  /// Norm of the step that produced this iterate (0 for the initial point).
  double step_norm = 0.0;
  /// Regularization added to the metric for that step.
  double damping = 0.0;
  double time_s = 0.0;
  /// The natural direction was not a descent direction and the plain
  /// gradient was used instead.
  bool gradient_fallback = false;
};

struct Trace {
  std::vector<IterationRecord> records;
  Status status = Status::max_iters;
  ParamPoint final_theta;
  std::string message;
};

/// Iterates natural gradient steps until a termination criterion holds.
/// Never throws for numeric trouble; it ends the trace with numeric_failure.
Trace optimize(const Objective& cost, const MetricFn& metric, const ParamPoint& theta0,
               const OptimizerConfig& config);

Trace optimize(FamilyPtr family, const SimilarityMeasure& sim, const ParamPoint& theta0,
               const Target& target, const OptimizerConfig& config);

/// CSV with header iter,cost,grad_norm,step_norm,damping,time_s.
void write_trace_csv(const Trace& trace, std::ostream& os);

}  // namespace fng

#endif  // FNG_OPTIMIZER_HPP
