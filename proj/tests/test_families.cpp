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

#include <cmath>
#include <numbers>
#include <random>

#include "fng/families.hpp"
#include "oracles.hpp"

namespace {

using namespace fng;

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

SamplePoint at(double x) { return vec({x}); }

const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

struct Families : ::testing::Test {
  std::mt19937_64 rng{99};
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
  FamilyPtr gauss = make_family("gaussian1d");
  FamilyPtr cat3 = make_family("categorical_softmax", {.categories = 3});
  FamilyPtr mvn = make_family("mvn_lcholesky", {.mvn_dim = 2});
};

TEST_F(Families, GaussianLogDensity) {
  EXPECT_NEAR(gauss->log_density(vec({0, 1}), at(0)), -kHalfLog2Pi, 1e-15);
  EXPECT_NEAR(gauss->log_density(vec({0, 1}), at(1)), -kHalfLog2Pi - 0.5, 1e-15);
}

TEST_F(Families, CategoricalUniformLogDensity) {
  EXPECT_NEAR(cat3->log_density(vec({0, 0, 0}), at(2)), std::log(1.0 / 3.0), 1e-15);
  EXPECT_THROW(cat3->log_density(vec({0, 0, 0}), at(3)), InvalidArgument);
  EXPECT_THROW(cat3->log_density(vec({0, 0, 0}), at(0.5)), InvalidArgument);
}

TEST_F(Families, GaussianScoreExamples) {
  const Vector s1 = gauss->score(vec({0, 1}), at(1));
  EXPECT_NEAR(s1(0), 1.0, 1e-15);
  EXPECT_NEAR(s1(1), 0.0, 1e-15);
  const Vector s0 = gauss->score(vec({0, 1}), at(0));
  EXPECT_NEAR(s0(0), 0.0, 1e-15);
  EXPECT_NEAR(s0(1), -1.0, 1e-15);
}

TEST_F(Families, ScoreMatchesFiniteDifferencesEverywhere) {
  const FamilyPtr cat4 = make_family("categorical_softmax", {.categories = 4});
  const FamilyPtr gp = make_family("gp_prior_eq", {.gp_inputs = {-1.0, 0.0, 0.5, 2.0}});
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::pair<FamilyPtr, std::pair<Vector, Vector>>> cases;
    cases.push_back({gauss, {vec({uniform(-2, 2), uniform(0.3, 3)}), at(uniform(-4, 4))}});
    cases.push_back({cat4, {vec({uniform(-1, 1), uniform(-1, 1), uniform(-1, 1), uniform(-1, 1)}),
                            at(static_cast<double>(trial % 4))}});
    Vector t5(5);
    for (int i = 0; i < 5; ++i) t5(i) = uniform(-0.5, 0.5);
    cases.push_back({mvn, {t5, vec({uniform(-2, 2), uniform(-2, 2)})}});
    cases.push_back({gp, {vec({uniform(-0.5, 0.5), uniform(-0.5, 0.5), uniform(-1, 0)}),
                          vec({uniform(-1, 1), uniform(-1, 1), uniform(-1, 1), uniform(-1, 1)})}});
    for (const auto& [family, point] : cases) {
      const auto& [theta, x] = point;
      const Vector s = family->score(theta, x);
      const Vector fd =
          oracle::central_gradient([&](const Vector& t) { return family->log_density(t, x); }, theta);
      EXPECT_LE((s - fd).cwiseAbs().maxCoeff(), std::max(1e-6, 1e-4 * s.norm())) << family->name();
    }
  }
}

TEST_F(Families, CdfExamples) {
  EXPECT_DOUBLE_EQ(gauss->cdf(vec({0, 1}), 0.0), 0.5);
  EXPECT_DOUBLE_EQ(gauss->cdf(vec({2, 3}), 2.0), 0.5);
  // integrate the density from far in the left tail
  const double by_simpson =
      oracle::simpson([](double x) { return oracle::normal_pdf(x); }, -40.0, 1.959964, 40000);
  EXPECT_NEAR(by_simpson, 0.975, 1e-6);
  EXPECT_NEAR(gauss->cdf(vec({0, 1}), 1.959964), by_simpson, 1e-12);
  EXPECT_THROW(mvn->cdf(vec({0, 0, 0, 0, 0}), 0.0), CapabilityError);
}

TEST_F(Families, CdfIsMonotone) {
  const Vector theta = vec({0.3, 1.7});
  double prev = 0.0;
  for (double x = -20.0; x <= 20.0; x += 0.01) {
    const double c = gauss->cdf(theta, x);
    EXPECT_GE(c, prev);
    prev = c;
  }
  EXPECT_DOUBLE_EQ(gauss->cdf(theta, -1e6), 0.0);
  EXPECT_DOUBLE_EQ(gauss->cdf(theta, 1e6), 1.0);
}

TEST_F(Families, QuantileExamples) {
  EXPECT_DOUBLE_EQ(gauss->quantile(vec({0, 1}), 0.5), 0.0);
  EXPECT_NEAR(gauss->quantile(vec({0, 1}), 0.975), oracle::normal_quantile(0.975), 1e-12);
  EXPECT_NEAR(gauss->quantile(vec({0, 1}), 0.975), 1.959964, 1e-6);
  EXPECT_THROW(gauss->quantile(vec({0, 1}), 0.0), InvalidArgument);
  EXPECT_THROW(gauss->quantile(vec({0, 1}), 1.0), InvalidArgument);
  for (int i = 0; i < 50; ++i) {
    const Vector theta = vec({uniform(-3, 3), uniform(0.2, 4)});
    const double q = uniform(1e-6, 1 - 1e-6);
    EXPECT_NEAR(gauss->cdf(theta, gauss->quantile(theta, q)), q, 1e-10);
    const double affine = theta(0) + theta(1) * gauss->quantile(vec({0, 1}), q);
    EXPECT_NEAR(gauss->quantile(theta, q), affine, 1e-12 * std::max(1.0, std::abs(affine)));
    const double x = uniform(-5, 5);
    EXPECT_NEAR(gauss->cdf(theta, x), gauss->cdf(vec({0, 1}), (x - theta(0)) / theta(1)), 1e-12);
  }
}

TEST_F(Families, CdfDerivative) {
  const Vector d = gauss->dcdf_dtheta(vec({0, 1}), 0.0);
  EXPECT_NEAR(d(0), -oracle::normal_pdf(0.0), 1e-12);
  EXPECT_NEAR(d(0), -0.39894, 1e-5);
  EXPECT_NEAR(d(1), 0.0, 1e-15);
  const Vector far = gauss->dcdf_dtheta(vec({0.5, 2}), 1e3);
  EXPECT_NEAR(far.norm(), 0.0, 1e-300);
  for (int i = 0; i < 50; ++i) {
    const Vector theta = vec({uniform(-2, 2), uniform(0.3, 3)});
    const double x = uniform(-5, 5);
    const Vector fd = oracle::central_gradient([&](const Vector& t) { return gauss->cdf(t, x); }, theta);
    EXPECT_LE((gauss->dcdf_dtheta(theta, x) - fd).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST_F(Families, TransportMapIsAffineForGaussians) {
  const Vector from = vec({1, 2}), to = vec({-1, 0.5});
  for (double x : {-3.0, 0.0, 1.0, 4.5}) {
    EXPECT_NEAR(gauss->transport_map(from, to, x), -1.0 + 0.5 * (x - 1.0) / 2.0, 1e-13);
  }
}

TEST_F(Families, SamplingIsSeededAndConcentrates) {
  const auto a = gauss->sample(vec({0, 1}), 7, 100000);
  const auto b = gauss->sample(vec({0, 1}), 7, 100000);
  double mean = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    ASSERT_EQ(a[i](0), b[i](0));
    mean += a[i](0);
  }
  EXPECT_NEAR(mean / a.size(), 0.0, 0.02);
  EXPECT_TRUE(gauss->sample(vec({0, 1}), 7, 0).empty());

  const FamilyPtr cat4 = make_family("categorical_softmax", {.categories = 4});
  const auto draws = cat4->sample(vec({0, 0, 0, 0}), 3, 100000);
  std::vector<double> freq(4, 0.0);
  for (const auto& d : draws) freq[static_cast<size_t>(d(0))] += 1.0 / draws.size();
  for (double f : freq) EXPECT_NEAR(f, 0.25, 0.01);
}

TEST_F(Families, DensitiesNormalize) {
  std::vector<double> inputs{-1.0, 0.5};
  const FamilyPtr cat5 = make_family("categorical_softmax", {.categories = 5});
  for (int i = 0; i < 100; ++i) {
    const Vector g = vec({uniform(-3, 3), uniform(0.1, 5)});
    EXPECT_NEAR(expectation(*gauss, g, [](double) { return 1.0; }), 1.0, 1e-8);
    const Vector c = vec({uniform(-2, 2), uniform(-2, 2), uniform(-2, 2), uniform(-2, 2), uniform(-2, 2)});
    EXPECT_NEAR(expectation(*cat5, c, [](double) { return 1.0; }), 1.0, 1e-12);
  }
  // two-dimensional Gaussian on a Simpson grid
  const Vector t = MvnLogCholesky::pack(vec({0.3, -0.2}), (Matrix(2, 2) << 1.0, 0.3, 0.3, 0.5).finished());
  const double mass = oracle::simpson(
      [&](double x) {
        return oracle::simpson([&](double y) { return mvn->density(t, vec({x, y})); }, -12, 12, 600);
      },
      -12, 12, 600);
  EXPECT_NEAR(mass, 1.0, 1e-8);
}

TEST_F(Families, MvnPackRoundTrip) {
  Matrix cov(2, 2);
  cov << 2.0, -0.4, -0.4, 0.7;
  const Vector t = MvnLogCholesky::pack(vec({1, 2}), cov);
  const auto* m = dynamic_cast<const MvnLogCholesky*>(mvn.get());
  ASSERT_NE(m, nullptr);
  const Matrix l = m->cholesky_factor(t);
  EXPECT_LE(oracle::max_abs(l * l.transpose() - cov), 1e-14);
  EXPECT_EQ(MvnLogCholesky::dim_from_param_count(9), 3);
  EXPECT_THROW(MvnLogCholesky::dim_from_param_count(4), InvalidArgument);
  const auto form = mvn->gaussian_form(t);
  ASSERT_TRUE(form.has_value());
  EXPECT_LE(oracle::max_abs(form->covariance - cov), 1e-14);
}

TEST_F(Families, DomainViolationsAreRejected) {
  EXPECT_THROW(gauss->validate(vec({0, 0})), InvalidParameter);
  EXPECT_THROW(gauss->validate(vec({0, -1})), InvalidParameter);
  EXPECT_THROW(gauss->validate(vec({std::nan(""), 1})), InvalidParameter);
  EXPECT_THROW(gauss->log_density(vec({0, 1, 2}), at(0)), InvalidParameter);
  EXPECT_FALSE(gauss->is_valid(vec({0, -1})));
  EXPECT_TRUE(gauss->is_valid(vec({0, 1})));
}

TEST_F(Families, UnknownIdListsValidOnes) {
  try {
    make_family("gausian1d");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    for (const auto& id : family_ids()) EXPECT_NE(msg.find(id), std::string::npos) << id;
  }
}

TEST_F(Families, LinearReparamPullsBackScoreAndFisher) {
  Matrix a(2, 2);
  a << 1.0, 0.5, 0.0, 2.0;
  const LinearReparam re(gauss, a);
  const Vector xi = vec({0.2, 0.7});
  const Vector theta = a * xi;
  EXPECT_NEAR(re.log_density(xi, at(0.3)), gauss->log_density(theta, at(0.3)), 1e-15);
  EXPECT_LE((re.score(xi, at(0.3)) - a.transpose() * gauss->score(theta, at(0.3))).norm(), 1e-14);
  const Matrix f = *re.fisher_closed_form(xi);
  EXPECT_LE(oracle::max_abs(f - a.transpose() * *gauss->fisher_closed_form(theta) * a), 1e-13);
}

TEST_F(Families, ZeroDensityScoreIsUndefined) {
  EXPECT_THROW(gauss->score(vec({0, 1}), at(1e200)), UndefinedScore);
}

}  // namespace
