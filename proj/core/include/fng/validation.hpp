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

#ifndef FNG_VALIDATION_HPP
#define FNG_VALIDATION_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace fng {

struct CheckResult {
  std::string name;
  double deviation = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string note;
};

/// Cross-oracle suite: analytic local Hessians against the finite-difference
/// engine, f-divergence scaling, pullback consistency, Finsler homogeneity,
/// reparametrization equivariance and the asymptotic-Newton decay.
std::vector<CheckResult> run_validation_suite(unsigned seed = 2024);

/// One line per check: name, max deviation, tolerance, PASS/FAIL.
void print_check_table(const std::vector<CheckResult>& results, std::ostream& os);

}  // namespace fng

#endif  // FNG_VALIDATION_HPP
