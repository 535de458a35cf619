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

#ifndef FNG_QUADRATURE_HPP
#define FNG_QUADRATURE_HPP

#include <functional>
#include <vector>

namespace fng::quad {

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre rule on [-1, 1]; nodes by Newton iteration on P_n.
/// Rules are cached and shared; safe to call concurrently.
const Rule& gauss_legendre(int n);

/// Gauss-Hermite rule for the standard normal weight, i.e.
/// sum_i w_i f(x_i) ~= E[f(Z)], Z ~ N(0, 1). Golub-Welsch.
const Rule& gauss_hermite_normal(int n);

/// Composite rule: `panels` equal sub-intervals of [a, b], each with an
/// `order`-point Gauss-Legendre rule. Nodes are returned in increasing order.
Rule composite_legendre(double a, double b, int panels, int order = 16);

double integrate(const std::function<double(double)>& f, double a, double b, int panels,
                 int order = 16);

}  // namespace fng::quad

#endif  // FNG_QUADRATURE_HPP
