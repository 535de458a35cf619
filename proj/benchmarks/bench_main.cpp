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

#include <benchmark/benchmark.h>

#include "fng/gp_bench.hpp"
#include "fng/metric.hpp"
#include "fng/optimizer.hpp"

namespace {

using namespace fng;

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

void BM_FisherClosedForm(benchmark::State& state) {
  const auto family = make_family("mvn_lcholesky");
  const Vector t = Vector::Constant(5, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(fisher_information(*family, t));
}
BENCHMARK(BM_FisherClosedForm);

void BM_FisherQuadrature(benchmark::State& state) {
  const auto family = make_family("gaussian1d");
  for (auto _ : state) benchmark::DoNotOptimize(fisher_quadrature(*family, vec2(0.3, 1.2)));
}
BENCHMARK(BM_FisherQuadrature);

void BM_W2LocalHessian(benchmark::State& state) {
  const auto family = make_family("gaussian1d");
  for (auto _ : state) benchmark::DoNotOptimize(w2_local_hessian_1d(*family, vec2(0.3, 1.2)));
}
BENCHMARK(BM_W2LocalHessian);

void BM_WpLocalHessian(benchmark::State& state) {
  const auto family = make_family("gaussian1d");
  const Direction dir(vec2(1.0, 0.4));
  for (auto _ : state) benchmark::DoNotOptimize(wp_local_hessian_1d(*family, vec2(0.3, 1.2), 3.0, dir));
}
BENCHMARK(BM_WpLocalHessian);

void BM_FdLocalHessianKl(benchmark::State& state) {
  const auto family = make_family("gaussian1d");
  const auto kl = make_similarity("kl");
  for (auto _ : state) benchmark::DoNotOptimize(fd_local_hessian(kl, *family, vec2(0.3, 1.2)));
}
BENCHMARK(BM_FdLocalHessianKl);

void BM_GpNllGrad(benchmark::State& state) {
  Vector truth(3);
  truth << 0.0, -0.2, -1.6;
  const Dataset data = gp::generate_data(42, static_cast<int>(state.range(0)), truth);
  for (auto _ : state) benchmark::DoNotOptimize(gp::gp_nll_grad(truth, data));
}
BENCHMARK(BM_GpNllGrad)->Arg(10)->Arg(30)->Arg(100);

void BM_OptimizeKlGaussian(benchmark::State& state) {
  const auto family = make_family("gaussian1d");
  const auto kl = make_similarity("kl");
  OptimizerConfig config;
  for (auto _ : state) benchmark::DoNotOptimize(optimize(family, kl, vec2(2.0, 3.0), Target(vec2(0.0, 1.0)), config));
}
BENCHMARK(BM_OptimizeKlGaussian);

void BM_GpBenchmark(benchmark::State& state) {
  auto config = gp::BenchmarkConfig::defaults();
  config.parallel = false;
  for (auto _ : state) benchmark::DoNotOptimize(gp::run_benchmark(config));
}
BENCHMARK(BM_GpBenchmark)->Unit(benchmark::kMillisecond)->Iterations(1);

}  // namespace

BENCHMARK_MAIN();
