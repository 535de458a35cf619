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

#ifndef FNG_GP_KERNEL_HPP
#define FNG_GP_KERNEL_HPP

#include <array>
#include <span>

#include "fng/types.hpp"

namespace fng::gp {

/// a^2 exp(-(x - x')^2 / (2 l^2)).
double eq_kernel(double x, double x_prime, double amplitude, double length_scale);

/// K_theta = K_EQ + exp(2 s) I for theta = (log a, log l, s).
Matrix covariance(const Vector& theta, std::span<const double> inputs);

/// dK/dtheta_i for the three log-hyperparameters.
std::array<Matrix, 3> covariance_derivatives(const Vector& theta, std::span<const double> inputs);

}  // namespace fng::gp

#endif  // FNG_GP_KERNEL_HPP
