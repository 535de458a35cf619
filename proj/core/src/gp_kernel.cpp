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

#include "fng/gp_kernel.hpp"

#include <cmath>

namespace fng::gp {

double eq_kernel(double x, double x_prime, double amplitude, double length_scale) {
  const double r = x - x_prime;
  return amplitude * amplitude * std::exp(-r * r / (2.0 * length_scale * length_scale));
}

Matrix covariance(const Vector& theta, std::span<const double> inputs) {
  const double amplitude = std::exp(theta(0));
  const double length_scale = std::exp(theta(1));
  const double noise_var = std::exp(2.0 * theta(2));
  const auto m = static_cast<Eigen::Index>(inputs.size());
  Matrix k(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      k(i, j) = eq_kernel(inputs[i], inputs[j], amplitude, length_scale);
      k(j, i) = k(i, j);
    }
    k(i, i) += noise_var;
  }
  return k;
}

std::array<Matrix, 3> covariance_derivatives(const Vector& theta, std::span<const double> inputs) {
  const double amplitude = std::exp(theta(0));
  const double length_scale = std::exp(theta(1));
  const double noise_var = std::exp(2.0 * theta(2));
  const auto m = static_cast<Eigen::Index>(inputs.size());
  std::array<Matrix, 3> d{Matrix(m, m), Matrix(m, m), Matrix::Zero(m, m)};
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double r = inputs[i] - inputs[j];
      const double k = eq_kernel(inputs[i], inputs[j], amplitude, length_scale);
      d[0](i, j) = d[0](j, i) = 2.0 * k;
      d[1](i, j) = d[1](j, i) = k * r * r / (length_scale * length_scale);
    }
    d[2](i, i) = 2.0 * noise_var;
  }
  return d;
}

}  // namespace fng::gp
