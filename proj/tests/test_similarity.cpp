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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "fng/similarity.hpp"
#include "oracles.hpp"

namespace {

using namespace fng;

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

struct Similarity : ::testing::Test {
  std::mt19937_64 rng{7};
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
  Vector gauss_point() { return vec({uniform(-2, 2), uniform(0.4, 2.5)}); }
  Vector logits(int k) {
    Vector t(k);
    for (int i = 0; i < k; ++i) t(i) = uniform(-1.5, 1.5);
    return t;
  }
  FamilyPtr gauss = make_family("gaussian1d");
  FamilyPtr cat3 = make_family("categorical_softmax", {.categories = 3});
  FamilyPtr mvn = make_family("mvn_lcholesky", {.mvn_dim = 2});
};

double kl_closed_form(const Vector& a, const Vector& b) {
  return std::log(b(1) / a(1)) + (a(1) * a(1) + (a(0) - b(0)) * (a(0) - b(0))) / (2.0 * b(1) * b(1)) - 0.5;
}

TEST_F(Similarity, EvaluateExamples) {
  const auto kl = make_similarity("kl");
  EXPECT_NEAR(kl.evaluate(*gauss, vec({0, 1}), vec({0, 1})), 0.0, 1e-15);
  EXPECT_NEAR(kl.evaluate(*gauss, vec({1, 1}), vec({0, 1})), 0.5, 1e-15);
  EXPECT_NEAR(f_divergence_quadrature(kl.fdiv(), *gauss, vec({1, 1}), vec({0, 1})), 0.5, 1e-10);
  EXPECT_NEAR(wasserstein_p_1d(*gauss, vec({0, 1}), vec({1, 2}), 2.0), std::sqrt(2.0), 1e-10);
  // evaluate returns the half-squared distance
  EXPECT_NEAR(make_similarity("wasserstein:2").evaluate(*gauss, vec({0, 1}), vec({1, 2})), 1.0, 1e-10);
}

TEST_F(Similarity, KlQuadratureMatchesClosedForm) {
  const auto spec = fdiv_spec("kl");
  for (int i = 0; i < 50; ++i) {
    const Vector a = gauss_point(), b = gauss_point();
    EXPECT_NEAR(f_divergence_quadrature(spec, *gauss, a, b), kl_closed_form(a, b), 1e-8);
    EXPECT_NEAR(f_divergence(spec, *gauss, a, b), kl_closed_form(a, b), 1e-12);
  }
}

TEST_F(Similarity, Chi2QuadratureMatchesMonteCarlo) {
  const Vector a = vec({0, 1}), b = vec({0.1, 1});
  std::mt19937_64 gen(2024);
  std::normal_distribution<double> z;
  const int n = 1000000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = z(gen);
    const double t = oracle::normal_pdf(x, b(0), b(1)) / oracle::normal_pdf(x, a(0), a(1));
    const double v = (t - 1.0) * (t - 1.0);
    sum += v;
    sum_sq += v * v;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sum_sq / n - mean * mean) / n);
  const double quad = f_divergence_quadrature(fdiv_spec("chi2"), *gauss, a, b);
  EXPECT_LE(std::abs(quad - mean), 3.0 * se);
  // for equal variances chi2 = exp(dmu^2 / sigma^2) - 1
  EXPECT_NEAR(quad, std::expm1(0.01), 1e-12);
}

TEST_F(Similarity, CatalogMatchesGenerators) {
  for (const auto& name : fdiv_names()) {
    const auto spec = fdiv_spec(name);
    EXPECT_NEAR(spec.f(1.0), 0.0, 1e-15) << name;
    // f'' at one by second differences
    const double h = 1e-4;
    const double second = (spec.f(1 + h) - 2 * spec.f(1.0) + spec.f(1 - h)) / (h * h);
    EXPECT_NEAR(second, spec.f_second_at_one, 1e-6) << name;
    for (double t : {0.3, 1.7, 4.0}) EXPECT_NEAR(spec.f_of_log(std::log(t)), spec.f(t), 1e-14) << name;
  }
  EXPECT_DOUBLE_EQ(fdiv_spec("chi2").f_second_at_one, 2.0);
  EXPECT_DOUBLE_EQ(fdiv_spec("hellinger2").f_second_at_one, 0.5);
  EXPECT_THROW(fdiv_spec("tv"), ConfigError);
}

TEST_F(Similarity, DiscreteDivergencesAreExactSums) {
  const Vector a = logits(3), b = logits(3);
  const Vector p = CategoricalSoftmax::softmax(a), q = CategoricalSoftmax::softmax(b);
  double kl = 0.0, chi2 = 0.0;
  for (int i = 0; i < 3; ++i) {
    kl += p(i) * std::log(p(i) / q(i));
    chi2 += p(i) * std::pow(q(i) / p(i) - 1.0, 2);
  }
  EXPECT_NEAR(make_similarity("kl").evaluate(*cat3, a, b), kl, 1e-14);
  EXPECT_NEAR(make_similarity("chi2").evaluate(*cat3, a, b), chi2, 1e-14);
}

TEST_F(Similarity, MvnKlQuadratureMatchesClosedForm) {
  const auto spec = fdiv_spec("kl");
  for (int i = 0; i < 5; ++i) {
    Vector a(5), b(5);
    for (int j = 0; j < 5; ++j) {
      a(j) = uniform(-0.3, 0.3);
      b(j) = uniform(-0.3, 0.3);
    }
    const auto fa = *mvn->gaussian_form(a);
    const auto fb = *mvn->gaussian_form(b);
    const Matrix s1inv = fb.covariance.inverse();
    const Vector d = fb.mean - fa.mean;
    const double closed = 0.5 * ((s1inv * fa.covariance).trace() + d.dot(s1inv * d) - 2.0 +
                                 std::log(fb.covariance.determinant() / fa.covariance.determinant()));
    EXPECT_NEAR(f_divergence(spec, *mvn, a, b), closed, 1e-12);
    EXPECT_NEAR(f_divergence_quadrature(spec, *mvn, a, b), closed, 1e-8);
  }
}

TEST_F(Similarity, WassersteinExamples) {
  EXPECT_NEAR(wasserstein_p_1d(*gauss, vec({0.4, 1.3}), vec({0.4, 1.3}), 3.0), 0.0, 1e-15);
  EXPECT_NEAR(wasserstein_p_1d(*gauss, vec({0, 1}), vec({1, 1}), 2.0), 1.0, 1e-10);
  EXPECT_THROW(wasserstein_p_1d(*mvn, Vector::Zero(5), Vector::Zero(5), 2.0), CapabilityError);
  EXPECT_THROW(wasserstein_p_1d(*gauss, vec({0, 1}), vec({1, 1}), 0.5), InvalidArgument);
}

TEST_F(Similarity, W3MatchesSortedSampleTransport) {
  // Stratified samples sorted by construction: the optimal coupling in 1-D
  // pairs them in order.
  const int n = 10000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = oracle::normal_quantile((i + 0.5) / n);
    sum += std::pow(std::abs(z - 2.0 * z), 3.0);
  }
  const double brute = std::cbrt(sum / n);
  EXPECT_NEAR(wasserstein_p_1d(*gauss, vec({0, 1}), vec({0, 2}), 3.0), brute, 1e-3);
  // E|Z|^3 = 2 sqrt(2/pi)
  EXPECT_NEAR(wasserstein_p_1d(*gauss, vec({0, 1}), vec({0, 2}), 3.0),
              std::cbrt(2.0 * std::sqrt(2.0 / std::numbers::pi)), 1e-10);
}

TEST_F(Similarity, WassersteinTriangleInequality) {
  for (int i = 0; i < 50; ++i) {
    const Vector a = gauss_point(), b = gauss_point(), c = gauss_point();
    for (double p : {1.0, 1.5, 2.0, 3.0}) {
      EXPECT_LE(wasserstein_p_1d(*gauss, a, c, p),
                wasserstein_p_1d(*gauss, a, b, p) + wasserstein_p_1d(*gauss, b, c, p) + 1e-6);
    }
  }
}

TEST_F(Similarity, BuresForm) {
  Matrix s(2, 2);
  s << 1.5, 0.2, 0.2, 0.8;
  EXPECT_NEAR(squared_w2_gaussian(vec({1, 2}), s, vec({1, 2}), s), 0.0, 1e-12);
  const Matrix d1 = vec({2.0, 0.5}).asDiagonal(), d2 = vec({0.7, 3.0}).asDiagonal();
  const double eig = std::pow(std::sqrt(2.0) - std::sqrt(0.7), 2) + std::pow(std::sqrt(0.5) - std::sqrt(3.0), 2) + 1.0;
  EXPECT_NEAR(squared_w2_gaussian(vec({0, 0}), d1, vec({1, 0}), d2), eig, 1e-12);
  for (int i = 0; i < 20; ++i) {
    const Vector a = gauss_point(), b = gauss_point();
    const double bures = squared_w2_gaussian(a.head(1), Matrix::Constant(1, 1, a(1) * a(1)), b.head(1),
                                             Matrix::Constant(1, 1, b(1) * b(1)));
    EXPECT_NEAR(bures, std::pow(wasserstein_p_1d(*gauss, a, b, 2.0), 2), 1e-8);
  }
  Matrix bad(2, 2);
  bad << 1.0, 2.0, 2.0, 1.0;
  EXPECT_THROW(squared_w2_gaussian(vec({0, 0}), bad, vec({0, 0}), s), InvalidParameter);
}

TEST_F(Similarity, FisherRaoClosedForm) {
  EXPECT_NEAR(fisher_rao_distance(vec({0.2, 0.3, 0.5}), vec({0.2, 0.3, 0.5})), 0.0, 1e-15);
  const Vector p = vec({1 - 1e-6, 1e-6}), q = vec({0.5, 0.5});
  const double bc = std::sqrt(p(0) * 0.5) + std::sqrt(p(1) * 0.5);
  EXPECT_NEAR(fisher_rao_distance(p, q), 2.0 * std::acos(bc), 1e-12);
  // small separations, where acos loses digits
  const Vector r = vec({0.3, 0.7}), s = vec({0.3 + 1e-9, 0.7 - 1e-9});
  const Vector delta = s - r;
  const double local = std::sqrt(delta(0) * delta(0) / 0.3 + delta(1) * delta(1) / 0.7);
  EXPECT_NEAR(fisher_rao_distance(r, s), local, 1e-9 * local);
}

TEST_F(Similarity, FisherRaoMatchesGeodesicOracle) {
  // k = 2: the straight segment is the only path, so its length is exact.
  {
    const Vector p = vec({0.15, 0.85}), q = vec({0.7, 0.3});
    std::vector<Vector> path;
    for (int i = 0; i <= 20000; ++i) path.push_back(p + (q - p) * (i / 20000.0));
    EXPECT_NEAR(fisher_rao_distance(p, q), oracle::fisher_polyline_length(path), 1e-6);
  }
  // k = 3: relaxed polyline
  const Vector p = vec({0.6, 0.3, 0.1}), q = vec({0.1, 0.25, 0.65});
  EXPECT_NEAR(fisher_rao_distance(p, q), oracle::fisher_geodesic_length_k3(p, q), 1e-3);
  const Vector a = logits(3), b = logits(3);
  const double d = fisher_rao_distance(cat3->probabilities(a), cat3->probabilities(b));
  EXPECT_NEAR(squared_fisher_rao_categorical(*cat3, a, b), 0.5 * d * d, 1e-14);
}

TEST_F(Similarity, NonnegativeAndZeroOnDiagonal) {
  const std::vector<std::string> gauss_sims{"kl", "reverse_kl", "chi2", "hellinger2",
                                            "wasserstein:2", "wasserstein:3", "w2_gaussian", "half_sq_euclidean"};
  const std::vector<std::string> cat_sims{"kl", "reverse_kl", "chi2", "hellinger2", "fisher_rao2", "half_sq_euclidean"};
  for (int i = 0; i < 100; ++i) {
    const Vector a = gauss_point(), b = gauss_point();
    for (const auto& id : gauss_sims) {
      const auto sim = make_similarity(id);
      EXPECT_LE(std::abs(sim.evaluate(*gauss, a, a)), 1e-10) << id;
      EXPECT_GE(sim.evaluate(*gauss, a, b), 0.0) << id;
    }
    const Vector c = logits(3), d = logits(3);
    for (const auto& id : cat_sims) {
      const auto sim = make_similarity(id);
      EXPECT_LE(std::abs(sim.evaluate(*cat3, c, c)), 1e-10) << id;
      EXPECT_GE(sim.evaluate(*cat3, c, d), 0.0) << id;
    }
  }
}

TEST_F(Similarity, GradientExamples) {
  const auto kl = make_similarity("kl");
  const Vector g = kl.grad_theta(*gauss, vec({1, 1}), Target(vec({0, 1})));
  EXPECT_NEAR(g(0), 1.0, 1e-14);
  EXPECT_NEAR(g(1), 0.0, 1e-14);
  for (const auto& id : {"kl", "chi2", "wasserstein:2", "wasserstein:3", "w2_gaussian"}) {
    const Vector t = gauss_point();
    EXPECT_LE(make_similarity(id).grad_theta(*gauss, t, Target(t)).norm(), 1e-7) << id;
  }
  const Vector c = logits(3);
  EXPECT_LE(make_similarity("fisher_rao2").grad_theta(*cat3, c, Target(c)).norm(), 1e-7);
}

TEST_F(Similarity, GradientsMatchFiniteDifferences) {
  const std::vector<std::string> gauss_sims{"kl", "reverse_kl", "chi2", "hellinger2", "wasserstein:2", "w2_gaussian"};
  for (int i = 0; i < 100; ++i) {
    const Vector a = gauss_point(), b = gauss_point();
    const auto& id = gauss_sims[i % gauss_sims.size()];
    const auto sim = make_similarity(id);
    const Vector fd =
        oracle::central_gradient([&](const Vector& t) { return sim.evaluate(*gauss, t, b); }, a, 1e-5);
    const Vector g = sim.grad_theta(*gauss, a, Target(b));
    EXPECT_LE((g - fd).cwiseAbs().maxCoeff(), 1e-5 * std::max(1.0, g.norm())) << id;

    const Vector c = logits(3), d = logits(3);
    const auto fr = make_similarity("fisher_rao2");
    const Vector fd_c =
        oracle::central_gradient([&](const Vector& t) { return fr.evaluate(*cat3, t, d); }, c, 1e-5);
    EXPECT_LE((fr.grad_theta(*cat3, c, Target(d)) - fd_c).cwiseAbs().maxCoeff(), 1e-5);
  }
}

TEST_F(Similarity, DatasetTargetsNeedTheLikelihood) {
  Dataset data;
  data.targets = vec({0.3});
  data.inputs = {0.0};
  EXPECT_NEAR(make_similarity("kl").evaluate(*gauss, vec({0, 1}), Target(data)), 0.5 * std::log(2 * std::numbers::pi) + 0.045,
              1e-14);
  EXPECT_THROW(make_similarity("chi2").evaluate(*gauss, vec({0, 1}), Target(data)), InvalidArgument);
}

TEST_F(Similarity, UnknownIdListsValidOnes) {
  try {
    make_similarity("wasserstien:2");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("fisher_rao2"), std::string::npos);
  }
  EXPECT_THROW(make_similarity("wasserstein:abc"), ConfigError);
  EXPECT_THROW(make_similarity("wasserstein:0.5"), ConfigError);
  EXPECT_DOUBLE_EQ(make_similarity("wasserstein:2.5").p(), 2.5);
}

}  // namespace
