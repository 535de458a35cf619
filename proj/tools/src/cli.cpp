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

#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>

#include "fng/gp_bench.hpp"
#include "fng/metric.hpp"
#include "fng/optimizer.hpp"
#include "fng/validation.hpp"

namespace fng::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ", ") + s;
  return out;
}

json load_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
}

void require_known_keys(const json& obj, const std::set<std::string>& known, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, value] : obj.items()) {
    if (known.count(key) == 0) {
      throw ConfigError("unknown key '" + key + "' in " + where + "; valid keys: " +
                        join(std::vector<std::string>(known.begin(), known.end())));
    }
  }
}

template <typename T>
T get(const json& obj, const std::string& key, const std::string& where) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("bad value for '" + key + "' in " + where + ": " + e.what());
  }
}

Vector to_vector(const json& value, const std::string& what) {
  if (!value.is_array()) throw ConfigError(what + " must be an array of numbers");
  Vector v(static_cast<Eigen::Index>(value.size()));
  for (size_t i = 0; i < value.size(); ++i) {
    if (!value[i].is_number()) throw ConfigError(what + " must be an array of numbers");
    v(static_cast<Eigen::Index>(i)) = value[i].get<double>();
  }
  return v;
}

FdDirection parse_fd_direction(const std::string& s) {
  if (s == "automatic") return FdDirection::automatic;
  if (s == "gradient") return FdDirection::gradient;
  if (s == "none") return FdDirection::none;
  throw ConfigError("unknown fd_direction '" + s + "'; valid values: automatic, gradient, none");
}

void apply_optimizer(const json& obj, OptimizerConfig& c) {
  const std::string where = "optimizer";
  require_known_keys(obj,
                     {"learning_rate", "max_iters", "grad_tol", "cost_tol", "line_search", "c1", "shrink",
                      "alpha_floor", "fd_direction", "tau_min"},
                     where);
  if (obj.contains("learning_rate")) c.learning_rate = get<double>(obj, "learning_rate", where);
  if (obj.contains("max_iters")) c.max_iters = get<int>(obj, "max_iters", where);
  if (obj.contains("grad_tol")) c.grad_tol = get<double>(obj, "grad_tol", where);
  if (obj.contains("cost_tol")) c.cost_tol = get<double>(obj, "cost_tol", where);
  if (obj.contains("line_search")) c.line_search.enabled = get<bool>(obj, "line_search", where);
  if (obj.contains("c1")) c.line_search.c1 = get<double>(obj, "c1", where);
  if (obj.contains("shrink")) c.line_search.shrink = get<double>(obj, "shrink", where);
  if (obj.contains("alpha_floor")) c.line_search.alpha_floor = get<double>(obj, "alpha_floor", where);
  if (obj.contains("fd_direction")) c.fd_direction = parse_fd_direction(get<std::string>(obj, "fd_direction", where));
  if (obj.contains("tau_min")) c.tau_min = get<double>(obj, "tau_min", where);
}

FamilyOptions family_options(const json& obj) {
  FamilyOptions o;
  const std::string where = "family_options";
  require_known_keys(obj, {"mvn_dim", "categories", "gp_inputs"}, where);
  if (obj.contains("mvn_dim")) o.mvn_dim = get<int>(obj, "mvn_dim", where);
  if (obj.contains("categories")) o.categories = get<int>(obj, "categories", where);
  if (obj.contains("gp_inputs")) o.gp_inputs = get<std::vector<double>>(obj, "gp_inputs", where);
  return o;
}

const std::set<std::string> kBenchKeys{"m",         "seed",    "true_theta", "theta0",    "metrics",
                                       "optimizer", "threshold", "parallel", "output_dir"};

gp::BenchmarkConfig bench_config(const json& obj, const std::string& where) {
  require_known_keys(obj, kBenchKeys, where);
  auto c = gp::BenchmarkConfig::defaults();
  if (obj.contains("m")) c.m = get<int>(obj, "m", where);
  if (obj.contains("seed")) c.seed = get<std::uint64_t>(obj, "seed", where);
  if (obj.contains("true_theta")) c.true_theta = to_vector(obj["true_theta"], "true_theta");
  if (obj.contains("theta0")) c.theta0 = to_vector(obj["theta0"], "theta0");
  if (obj.contains("metrics")) c.metrics = get<std::vector<std::string>>(obj, "metrics", where);
  if (obj.contains("optimizer")) apply_optimizer(obj["optimizer"], c.optimizer);
  if (obj.contains("threshold")) c.threshold = get<double>(obj, "threshold", where);
  if (obj.contains("parallel")) c.parallel = get<bool>(obj, "parallel", where);
  for (const auto& metric : c.metrics) MetricEngine::parse(metric);
  c.validate();
  return c;
}

int report_benchmark(const gp::BenchmarkConfig& config, const fs::path& dir, std::ostream& out) {
  const auto result = gp::run_benchmark(config);
  gp::export_benchmark(result, dir);
  out << "threshold: " << std::setprecision(17) << result.threshold << '\n';
  gp::write_summary_csv(result, out);
  out << "wrote " << (dir / "summary.csv").string() << '\n';
  bool failed = false;
  for (const auto& run : result.runs) {
    if (run.trace.status == Status::numeric_failure) {
      failed = true;
      out << run.metric << ": " << run.trace.message << '\n';
    }
  }
  return failed ? kNumericFailure : kOk;
}

void print_matrix(const Matrix& m, std::ostream& out) {
  std::ostringstream os;
  os << std::setprecision(17) << '[';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    os << (i ? ",\n [" : "[");
    for (Eigen::Index j = 0; j < m.cols(); ++j) os << (j ? "," : "") << m(i, j);
    os << ']';
  }
  os << "]\n";
  out << os.str();
}

// Maps library exceptions onto exit codes.
template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kNumericFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }
}

}  // namespace

std::string default_metric(const SimilarityMeasure& sim, const Family& family) {
  switch (sim.kind()) {
    case SimilarityKind::f_divergence:
      return "fdiv:" + sim.fdiv().name;
    case SimilarityKind::squared_fisher_rao:
      return family.is_discrete() ? "pullback" : "fisher";
    case SimilarityKind::wasserstein_p: {
      if (sim.p() == 2.0) return family.has_cdf() ? "w2_1d" : "fd:" + sim.id();
      std::ostringstream os;
      os << std::setprecision(17) << "wp_1d:" << sim.p();
      return os.str();
    }
    case SimilarityKind::squared_w2_gaussian:
      return "fd:w2_gaussian";
    case SimilarityKind::half_squared_euclidean:
      return "euclidean";
  }
  return "fisher";
}

Vector parse_vector(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
    if (item.empty() || used != item.size()) throw ConfigError("cannot parse '" + text + "' as comma-separated reals");
    values.push_back(v);
  }
  if (values.empty()) throw ConfigError("empty parameter vector");
  return Eigen::Map<Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

int cmd_run(const fs::path& config_path, std::ostream& out, std::ostream& err,
            const std::optional<fs::path>& output_dir) {
  return guarded(err, [&] {
    const json cfg = load_json(config_path);
    const std::string where = "run config";
    require_known_keys(cfg,
                       {"family", "family_options", "similarity", "metric", "metrics", "theta0", "target",
                        "optimizer", "output_dir"},
                       where);
    fs::path dir = cfg.contains("output_dir") ? fs::path(get<std::string>(cfg, "output_dir", where)) : "fng_out";
    if (output_dir) dir = *output_dir;
    if (!cfg.contains("target")) throw ConfigError("run config needs a 'target'");
    const json& target = cfg["target"];

    if (target == "gp" || (target.is_object() && target.contains("gp"))) {
      json bench = target.is_object() ? target["gp"] : json::object();
      if (cfg.contains("theta0")) bench["theta0"] = cfg["theta0"];
      if (cfg.contains("optimizer")) bench["optimizer"] = cfg["optimizer"];
      if (cfg.contains("metrics")) bench["metrics"] = cfg["metrics"];
      if (cfg.contains("metric")) bench["metrics"] = json::array({cfg["metric"]});
      return report_benchmark(bench_config(bench, "gp target"), dir, out);
    }

    const std::string family_id = cfg.contains("family") ? get<std::string>(cfg, "family", where) : "";
    const std::string sim_id = cfg.contains("similarity") ? get<std::string>(cfg, "similarity", where) : "";
    const FamilyPtr family =
        make_family(family_id, cfg.contains("family_options") ? family_options(cfg["family_options"]) : FamilyOptions{});
    const SimilarityMeasure sim = make_similarity(sim_id);
    if (!cfg.contains("theta0")) throw ConfigError("run config needs 'theta0'");
    const ParamPoint theta0 = to_vector(cfg["theta0"], "theta0");
    const ParamPoint target_theta = to_vector(target, "target");
    if (theta0.size() != family->param_dim() || target_theta.size() != family->param_dim()) {
      throw ConfigError("theta0 and target need " + std::to_string(family->param_dim()) + " entries for family " +
                        family->name());
    }
    family->validate(theta0);
    family->validate(target_theta);

    OptimizerConfig opt;
    if (cfg.contains("optimizer")) apply_optimizer(cfg["optimizer"], opt);
    opt.metric = cfg.contains("metric") ? get<std::string>(cfg, "metric", where) : default_metric(sim, *family);
    MetricEngine::parse(opt.metric);
    opt.validate();

    const Trace trace = optimize(family, sim, theta0, Target(target_theta), opt);
    fs::create_directories(dir);
    const fs::path csv = dir / ("trace_" + gp::file_safe(opt.metric) + ".csv");
    std::ofstream file(csv);
    if (!file) throw ConfigError("cannot write '" + csv.string() + "'");
    write_trace_csv(trace, file);

    out << std::setprecision(17) << "status: " << to_string(trace.status) << '\n' << "metric: " << opt.metric << '\n';
    if (!trace.records.empty()) {
      const auto& last = trace.records.back();
      out << "iterations: " << last.iter << '\n'
          << "final_cost: " << last.cost << '\n'
          << "final_grad_norm: " << last.grad_norm << '\n';
    }
    out << "final_theta: " << trace.final_theta.transpose() << '\n' << "wrote " << csv.string() << '\n';
    if (!trace.message.empty()) out << "note: " << trace.message << '\n';
    return trace.status == Status::numeric_failure ? kNumericFailure : kOk;
  });
}

int cmd_hessian(const HessianRequest& request, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    FamilyOptions options;
    options.categories = request.categories;
    options.mvn_dim = request.mvn_dim;
    const FamilyPtr family = make_family(request.family, options);
    const SimilarityMeasure sim = make_similarity(request.similarity);
    const ParamPoint theta = parse_vector(request.theta);
    if (theta.size() != family->param_dim()) {
      throw ConfigError("theta needs " + std::to_string(family->param_dim()) + " entries for family " +
                        family->name());
    }
    family->validate(theta);

    std::optional<Direction> dir;
    if (request.direction) {
      const Vector u = parse_vector(*request.direction);
      if (u.size() != theta.size()) throw ConfigError("direction must have the same length as theta");
      dir.emplace(u);
    }
    const std::string metric_id = request.metric.value_or(default_metric(sim, *family));
    const MetricEngine engine = MetricEngine::parse(metric_id);
    const bool needs_direction = engine.strategy() == MetricStrategy::wp_1d ||
                                 (engine.strategy() == MetricStrategy::fd_directional && !sim.smooth_at_diagonal());
    if (needs_direction && !dir) throw ConfigError("metric '" + metric_id + "' is direction dependent; pass --direction");
    const Vector gradient = dir ? Vector(-dir->raw()) : Vector(Vector::Zero(theta.size()));

    const LocalHessian h = engine.compute(*family, sim, theta, gradient);
    out << "metric: " << metric_id << '\n' << "provenance: " << to_string(h.provenance) << '\n';
    out << std::setprecision(17) << "regularization_added: " << h.regularization_added << '\n';
    if (h.rank_deficient) out << "rank_deficient: true\n";
    print_matrix(h.matrix, out);
    if (request.check) {
      const std::optional<Direction> fd_dir = sim.smooth_at_diagonal() ? std::nullopt : dir;
      const LocalHessian fd = fd_local_hessian(sim, *family, theta, fd_dir);
      out << "fd_max_abs_deviation: " << std::setprecision(6) << std::scientific
          << (h.matrix - fd.matrix).cwiseAbs().maxCoeff() << '\n';
    }
    return kOk;
  });
}

int cmd_validate(std::ostream& out, std::ostream& err, std::optional<double> inject_fisher_scale, unsigned seed) {
  return guarded(err, [&] {
    const double previous = testing::fisher_fault_scale();
    if (inject_fisher_scale) testing::set_fisher_fault_scale(*inject_fisher_scale);
    std::vector<CheckResult> results;
    try {
      results = run_validation_suite(seed);
    } catch (...) {
      testing::set_fisher_fault_scale(previous);
      throw;
    }
    testing::set_fisher_fault_scale(previous);
    print_check_table(results, out);
    int failed = 0;
    for (const auto& r : results) failed += r.passed ? 0 : 1;
    out << (results.size() - failed) << "/" << results.size() << " checks passed\n";
    return failed == 0 ? kOk : kConfigError;
  });
}

int cmd_bench_gp(const fs::path& config_path, std::ostream& out, std::ostream& err,
                 const std::optional<fs::path>& output_dir) {
  return guarded(err, [&] {
    const json cfg = load_json(config_path);
    fs::path dir = cfg.contains("output_dir") ? fs::path(get<std::string>(cfg, "output_dir", "bench config")) : "fng_out";
    if (output_dir) dir = *output_dir;
    return report_benchmark(bench_config(cfg, "bench config"), dir, out);
  });
}

int run_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Formal natural gradient toolkit"};
  app.require_subcommand(1);

  std::string config;
  std::optional<std::string> output_dir;
  auto* run = app.add_subcommand("run", "Run an optimization described by a JSON config");
  run->add_option("config", config, "Config file")->required();
  run->add_option("--output-dir", output_dir, "Overrides output_dir from the config");

  HessianRequest hess;
  auto* hessian = app.add_subcommand("hessian", "Print the local Hessian at theta");
  hessian->add_option("family", hess.family, "Family id: " + join(family_ids()))->required();
  hessian->add_option("similarity", hess.similarity, "Similarity id: " + join(similarity_ids()))->required();
  hessian->add_option("theta", hess.theta, "Comma-separated parameters")->required();
  hessian->add_option("--metric", hess.metric, "Metric id: " + join(MetricEngine::ids()));
  hessian->add_option("--direction", hess.direction, "Comma-separated direction for direction-dependent metrics");
  hessian->add_flag("--check", hess.check, "Also print the deviation from the finite-difference engine");
  hessian->add_option("--categories", hess.categories, "Categories for categorical_softmax");
  hessian->add_option("--mvn-dim", hess.mvn_dim, "Dimension for mvn_lcholesky");

  std::optional<double> fault;
  unsigned seed = 2024;
  auto* validate = app.add_subcommand("validate", "Run the cross-oracle validation suite");
  validate->add_option("--inject-fisher-scale", fault, "Scale closed-form Fisher matrices (test hook)");
  validate->add_option("--seed", seed, "Seed for the random test points");

  auto* bench = app.add_subcommand("bench-gp", "Run the Gaussian-process hyperparameter benchmark");
  bench->add_option("config", config, "Config file")->required();
  bench->add_option("--output-dir", output_dir, "Overrides output_dir from the config");

  std::vector<char*> argv;
  std::vector<std::string> storage = args;
  for (auto& a : storage) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  const auto dir = output_dir ? std::optional<fs::path>(*output_dir) : std::nullopt;
  if (*run) return cmd_run(config, out, err, dir);
  if (*hessian) return cmd_hessian(hess, out, err);
  if (*validate) return cmd_validate(out, err, fault, seed);
  return cmd_bench_gp(config, out, err, dir);
}

}  // namespace fng::cli
