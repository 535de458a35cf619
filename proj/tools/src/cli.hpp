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

#ifndef FNG_TOOLS_CLI_HPP
#define FNG_TOOLS_CLI_HPP

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fng/families.hpp"
#include "fng/similarity.hpp"

namespace fng::cli {

inline constexpr int kOk = 0;
inline constexpr int kConfigError = 1;
inline constexpr int kNumericFailure = 2;

/// Metric used when a config or the hessian command names none.
std::string default_metric(const SimilarityMeasure& sim, const Family& family);

/// "0.5,1,-2" -> vector. Throws ConfigError.
Vector parse_vector(const std::string& text);

struct HessianRequest {
  std::string family;
  std::string similarity;
  std::string theta;
  std::optional<std::string> metric;
  std::optional<std::string> direction;
  bool check = false;
  int categories = 3;
  int mvn_dim = 2;
};

int cmd_run(const std::filesystem::path& config_path, std::ostream& out, std::ostream& err,
            const std::optional<std::filesystem::path>& output_dir = std::nullopt);
int cmd_hessian(const HessianRequest& request, std::ostream& out, std::ostream& err);
int cmd_validate(std::ostream& out, std::ostream& err, std::optional<double> inject_fisher_scale = std::nullopt,
                 unsigned seed = 2024);
int cmd_bench_gp(const std::filesystem::path& config_path, std::ostream& out, std::ostream& err,
                 const std::optional<std::filesystem::path>& output_dir = std::nullopt);

/// Parses argv and dispatches to a subcommand.
int run_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fng::cli

#endif  // FNG_TOOLS_CLI_HPP
