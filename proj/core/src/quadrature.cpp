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

#include "fng/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "fng/types.hpp"

namespace fng::quad {

namespace {

Rule make_legendre(int n) {
  Rule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // recompute the derivative at the converged node
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

Rule make_hermite_normal(int n) {
  // Jacobi matrix of the probabilists' Hermite polynomials.
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    jacobi(k, k - 1) = std::sqrt(static_cast<double>(k));
    jacobi(k - 1, k) = jacobi(k, k - 1);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi, Eigen::EigenvaluesOnly);

  // Orthonormal recurrence psi_{k+1} = (x psi_k - sqrt(k) psi_{k-1}) / sqrt(k+1).
  // Returns psi_n(x), psi_n'(x) = sqrt(n) psi_{n-1}(x) and sum_{k<n} psi_k(x)^2.
  auto evaluate = [n](double x) {
    double prev = 0.0, cur = 1.0, christoffel = 0.0;
    for (int k = 0; k < n; ++k) {
      christoffel += cur * cur;
      const double next = (x * cur - std::sqrt(static_cast<double>(k)) * prev) / std::sqrt(k + 1.0);
      prev = cur;
      cur = next;
    }
    return std::array<double, 3>{cur, std::sqrt(static_cast<double>(n)) * prev, christoffel};
  };

  Rule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = solver.eigenvalues()(i);
    for (int it = 0; it < 3; ++it) {
      const auto v = evaluate(x);
      x -= v[0] / v[1];
    }
    rule.nodes[i] = x;
    rule.weights[i] = 1.0 / evaluate(x)[2];
  }
  for (int i = 0; i < n / 2; ++i) {
    const int j = n - 1 - i;
    const double x = 0.5 * (rule.nodes[j] - rule.nodes[i]);
    const double w = 0.5 * (rule.weights[i] + rule.weights[j]);
    rule.nodes[i] = -x;
    rule.nodes[j] = x;
    rule.weights[i] = rule.weights[j] = w;
  }
  if (n % 2) rule.nodes[n / 2] = 0.0;
  return rule;
}

template <typename Make>
const Rule& cached(std::map<int, std::unique_ptr<Rule>>& cache, std::mutex& mutex, int n,
                   Make make) {
  if (n < 1) throw InvalidArgument("quadrature order must be positive");
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<Rule>(make(n));
  return *slot;
}

}  // namespace

const Rule& gauss_legendre(int n) {
  static std::map<int, std::unique_ptr<Rule>> cache;
  static std::mutex mutex;
  return cached(cache, mutex, n, make_legendre);
}

const Rule& gauss_hermite_normal(int n) {
  static std::map<int, std::unique_ptr<Rule>> cache;
  static std::mutex mutex;
  return cached(cache, mutex, n, make_hermite_normal);
}

Rule composite_legendre(double a, double b, int panels, int order) {
  if (panels < 1) throw InvalidArgument("composite rule needs at least one panel");
  if (!(b > a)) throw InvalidArgument("composite rule needs a < b");
  const Rule& base = gauss_legendre(order);
  Rule rule;
  rule.nodes.reserve(static_cast<size_t>(panels) * order);
  rule.weights.reserve(static_cast<size_t>(panels) * order);
  const double width = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * width;
    const double half = 0.5 * width;
    const double mid = lo + half;
    for (int i = 0; i < order; ++i) {
      rule.nodes.push_back(mid + half * base.nodes[i]);
      rule.weights.push_back(half * base.weights[i]);
    }
  }
  return rule;
}

double integrate(const std::function<double(double)>& f, double a, double b, int panels,
                 int order) {
  const Rule rule = composite_legendre(a, b, panels, order);
  double sum = 0.0;
  for (size_t i = 0; i < rule.nodes.size(); ++i) sum += rule.weights[i] * f(rule.nodes[i]);
  return sum;
}

}  // namespace fng::quad
