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

#ifndef FNG_TYPES_HPP
#define FNG_TYPES_HPP

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace fng {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// A point of the parameter space. Validity is checked by the owning family.
using ParamPoint = Eigen::VectorXd;

/// A point of the sample space (length = family sample dimension; a
/// categorical outcome is stored as its index in a length-1 vector).
using SamplePoint = Eigen::VectorXd;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parameter outside the open domain of a family (e.g. sigma <= 0, NaN).
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

/// Malformed non-parameter argument (quantile level outside (0,1), bad sizes).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Operation not offered by a family or similarity (cdf on a multivariate
/// family, Wasserstein on a discrete family, ...).
class CapabilityError : public Error {
 public:
  using Error::Error;
};

/// Score requested where the density vanishes.
class UndefinedScore : public Error {
 public:
  using Error::Error;
};

/// Quadrature, factorization or extrapolation failure.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Unknown identifier or malformed configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace fng

#endif  // FNG_TYPES_HPP
