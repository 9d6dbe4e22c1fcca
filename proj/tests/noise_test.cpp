#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "ans/noise.hpp"

using namespace ans;

namespace {

// Mixture density evaluated straight from the definition.
double direct_log_pdf(const std::vector<GaussianComponent>& comps, const Vec3& x) {
  double p = 0.0;
  for (const auto& c : comps) {
    const Vec3 d = x - c.mean;
    const double q = d.dot(c.covariance.inverse() * d);
    p += c.weight * std::exp(-0.5 * q) /
         std::sqrt(std::pow(2.0 * std::numbers::pi, 3) * c.covariance.determinant());
  }
  return std::log(p);
}

GaussianMixture3D two_blobs() {
  return GaussianMixture3D({detail::diag_component(0.4, {0.0, 0.0, 0.0}, {0.5, 0.8, 1.0}),
                            detail::diag_component(0.6, {8.0, -6.0, 4.0}, {1.2, 0.6, 0.9})});
}

std::vector<Vec3> draw(const GaussianMixture3D& m, int n, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::vector<Vec3> xs;
  for (int i = 0; i < n; ++i) xs.push_back(m.sample_vector(g));
  return xs;
}

void expect_valid_mixture(const GaussianMixture3D& m) {
  double w = 0.0;
  for (const auto& c : m.components()) {
    EXPECT_GE(c.weight, 0.0);
    w += c.weight;
    EXPECT_LE((c.covariance - c.covariance.transpose()).cwiseAbs().maxCoeff(), 1e-12);
    Eigen::SelfAdjointEigenSolver<Mat3> es(c.covariance);
    EXPECT_GE(es.eigenvalues().minCoeff(), kCovarianceFloor * (1.0 - 1e-6));
  }
  EXPECT_NEAR(w, 1.0, 1e-9);
}

}  // namespace

TEST(Mixture, LogPdfMatchesDirectFormula) {
  const GaussianMixture3D m = two_blobs();
  std::mt19937_64 g(1);
  std::uniform_real_distribution<double> u(-3.0, 10.0);
  for (int i = 0; i < 200; ++i) {
    const Vec3 x(u(g), u(g), u(g));
    const double want = direct_log_pdf(m.components(), x);
    if (std::isfinite(want)) EXPECT_NEAR(m.log_pdf(x), want, 1e-9 * std::max(1.0, std::abs(want)));
  }
}

TEST(Mixture, RejectsWeightsNotSummingToOne) {
  EXPECT_THROW(GaussianMixture3D({detail::diag_component(0.9, {0, 0, 0}, {1, 1, 1})}),
               ValidationError);
}

TEST(Sample, PointMassReturnsItsMean) {
  const GaussianMixture3D m = GaussianMixture3D::point_mass({0.01, -0.02, 0.03});
  std::mt19937_64 g(2);
  for (int i = 0; i < 100; ++i) {
    const PoseDelta d = m.sample(g);
    EXPECT_NEAR(d.dx, 0.01, 1e-3);
    EXPECT_NEAR(d.dy, -0.02, 1e-3);
    EXPECT_NEAR(d.dtheta, 0.03, 1e-3);
  }
}

TEST(Sample, EmpiricalMeanWithinCltBound) {
  const Vec3 mu(0.1, -0.2, 0.05);
  const Vec3 sigma(0.02, 0.03, 0.01);
  const GaussianMixture3D m({detail::diag_component(1.0, mu, sigma)});
  const int n = 100000;
  std::mt19937_64 g(3);
  Vec3 sum = Vec3::Zero();
  for (int i = 0; i < n; ++i) {
    const PoseDelta d = m.sample(g);
    sum += Vec3(d.dx, d.dy, d.dtheta);
  }
  const Vec3 mean = sum / n;
  for (int k = 0; k < 3; ++k) EXPECT_LE(std::abs(mean[k] - mu[k]), 4.0 * sigma[k] / std::sqrt(n));
}

TEST(Sample, SameSeedSameSequence) {
  const GaussianMixture3D m = two_blobs();
  EXPECT_EQ(draw(m, 50, 9), draw(m, 50, 9));
}

TEST(Sample, EmpiricalCovarianceIsPositiveSemidefinite) {
  const auto xs = draw(two_blobs(), 100000, 4);
  Vec3 mean = Vec3::Zero();
  for (const auto& x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  Mat3 cov = Mat3::Zero();
  for (const auto& x : xs) cov += (x - mean) * (x - mean).transpose();
  cov /= static_cast<double>(xs.size());
  Eigen::SelfAdjointEigenSolver<Mat3> es(cov);
  EXPECT_GE(es.eigenvalues().minCoeff(), 0.0);
}

TEST(Em, LogLikelihoodNeverDecreases) {
  const auto xs = draw(two_blobs(), 400, 5);
  for (int k = 1; k <= 4; ++k) {
    const EmResult r = em_fit(xs, k, 17);
    ASSERT_FALSE(r.trace.empty());
    for (std::size_t i = 1; i < r.trace.size(); ++i) EXPECT_GE(r.trace[i], r.trace[i - 1] - 1e-9);
    EXPECT_TRUE(r.monotone);
    expect_valid_mixture(r.model);
  }
}

TEST(FitGmm, PointMassCollapsesToFloor) {
  const std::vector<Vec3> xs(100, Vec3(0.01, 0.0, 0.0));
  const std::vector<int> ks{1};
  const GmmFit f = fit_gmm(xs, ks, 1.0 / 6.0, 0);
  ASSERT_EQ(f.model.size(), 1);
  const auto& c = f.model.components()[0];
  EXPECT_NEAR((c.mean - Vec3(0.01, 0, 0)).norm(), 0.0, 1e-12);
  EXPECT_LE((c.covariance - Mat3::Identity() * kCovarianceFloor).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(FitGmm, IdenticalSamplesWithSeveralKIsDegenerate) {
  const std::vector<Vec3> xs(100, Vec3(0.0, 0.0, 0.0));
  const auto ks = k_range(1, 3);
  EXPECT_THROW(fit_gmm(xs, ks, 1.0 / 6.0, 0), DegenerateData);
}

TEST(FitGmm, RecoversTwoSeparatedComponents) {
  const GaussianMixture3D gen = two_blobs();
  const auto xs = draw(gen, 500, 6);
  const auto ks = k_range(1, 5);
  const GmmFit f = fit_gmm(xs, ks, 1.0 / 6.0, 3);
  EXPECT_EQ(f.k, 2);
  expect_valid_mixture(f.model);
  // Held-out quality judged on fresh draws against the generating density.
  const auto fresh = draw(gen, 5000, 60);
  EXPECT_NEAR(f.model.mean_log_likelihood(fresh), gen.mean_log_likelihood(fresh), 0.1);
  EXPECT_EQ(f.fit_count + f.validation_count, 500U);
  EXPECT_EQ(f.validation_count, 83U);
}

TEST(FitGmm, SingleGaussianMeanWithinStandardError) {
  const Vec3 mu(0.3, -0.1, 0.2);
  const double s = 0.05;
  const GaussianMixture3D gen({detail::diag_component(1.0, mu, {s, s, s})});
  const auto xs = draw(gen, 500, 7);
  const auto ks = k_range(1, 3);
  const GmmFit f = fit_gmm(xs, ks, 1.0 / 6.0, 1);
  Vec3 m = Vec3::Zero();
  for (const auto& c : f.model.components()) m += c.weight * c.mean;
  for (int k = 0; k < 3; ++k) EXPECT_LE(std::abs(m[k] - mu[k]), 3.0 * s / std::sqrt(500.0));
}

TEST(FitGmm, RejectsBadArguments) {
  const auto xs = draw(two_blobs(), 20, 8);
  const std::vector<int> none;
  const auto ks = k_range(1, 3);
  EXPECT_THROW(fit_gmm(xs, none, 0.2, 0), InvalidArgument);
  EXPECT_THROW(fit_gmm(xs, ks, 0.0, 0), InvalidArgument);
  const std::vector<Vec3> few(3, Vec3(1, 2, 3));
  const auto big = k_range(1, 5);
  EXPECT_THROW(fit_gmm(few, big, 0.2, 0), InsufficientData);
}

TEST(Commands, MatchMotionPrimitives) {
  const CommandTable u = default_commands();
  const auto fwd = u[static_cast<std::size_t>(motion_index(Action::Forward))];
  const auto right = u[static_cast<std::size_t>(motion_index(Action::TurnRight))];
  const auto left = u[static_cast<std::size_t>(motion_index(Action::TurnLeft))];
  EXPECT_DOUBLE_EQ(fwd.dx, 0.25);
  EXPECT_DOUBLE_EQ(fwd.dtheta, 0.0);
  EXPECT_DOUBLE_EQ(right.dtheta, -10.0 * kPi / 180.0);
  EXPECT_DOUBLE_EQ(left.dtheta, 10.0 * kPi / 180.0);
}

TEST(BuildNoiseModels, PerfectRobotCollapses) {
  const CommandTable u = default_commands();
  CalibrationDataset data;
  for (Action a : kMotionActions) {
    const PoseDelta c = u[static_cast<std::size_t>(motion_index(a))];
    const Pose p{c.dx, c.dy, c.dtheta};
    data[a].assign(60, CalibrationSample{p, p});
  }
  const NoiseModelSet set = build_noise_models(data, default_commands());
  for (Action a : kMotionActions) {
    for (NoiseKind k : {NoiseKind::Actuation, NoiseKind::Sensor}) {
      const auto& m = set.get(a, k);
      ASSERT_EQ(m.size(), 1);
      EXPECT_LE(m.components()[0].mean.norm(), 1e-12);
      EXPECT_LE((m.components()[0].covariance - Mat3::Identity() * kCovarianceFloor).cwiseAbs().maxCoeff(), 1e-15);
    }
  }
}

TEST(BuildNoiseModels, ClosedLoopRefitWithinTolerance) {
  const NoiseModelSet truth = default_noise_models();
  std::mt19937_64 rng(77);
  const auto data = synthesize_calibration(truth, default_commands(), 600, rng);
  NoiseFitOptions opt;
  opt.k_candidates = k_range(1, 6);
  const NoiseModelSet fit = build_noise_models(data, default_commands(), opt);
  for (Action a : kMotionActions) {
    for (NoiseKind k : {NoiseKind::Actuation, NoiseKind::Sensor}) {
      std::vector<Vec3> xs;
      for (int i = 0; i < 3000; ++i) xs.push_back(truth.get(a, k).sample_vector(rng));
      EXPECT_NEAR(fit.get(a, k).mean_log_likelihood(xs), truth.get(a, k).mean_log_likelihood(xs), 0.15);
      expect_valid_mixture(fit.get(a, k));
    }
  }
}

TEST(BuildNoiseModels, TooFewSamplesFails) {
  CalibrationDataset data;
  EXPECT_THROW(build_noise_models(data, default_commands()), InsufficientData);
}

TEST(ModelFiles, RoundTripIsExact) {
  const NoiseModelSet a = default_noise_models();
  const NoiseModelSet b = parse_models(noise_models_to_string(a));
  EXPECT_TRUE(a == b);
}

TEST(ModelFiles, MissingEntryNamesIt) {
  auto j = noise_models_to_json(default_noise_models());
  j["turn_left"].erase("sensor");
  try {
    parse_models(j.dump());
    FAIL() << "expected a schema error";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("turn_left, sensor"), std::string::npos) << e.what();
  }
}

TEST(ModelFiles, WeightsNotSummingToOneFail) {
  auto j = noise_models_to_json(default_noise_models());
  auto& w = j["forward"]["actuation"]["weights"];
  double total = 0.0;
  for (auto& v : w) {
    v = v.get<double>() * 0.9;
    total += v.get<double>();
  }
  ASSERT_NEAR(total, 0.9, 1e-12);
  EXPECT_THROW(parse_models(j.dump()), ValidationError);
}

TEST(CalibrationCsv, MissingColumnIsNamed) {
  std::istringstream in("action,lidar_x,lidar_y,lidar_o,odom_x,odom_y\nforward,0,0,0,0,0\n");
  try {
    parse_calibration_csv(in);
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("odom_o"), std::string::npos);
  }
}

TEST(CalibrationCsv, RoundTrip) {
  std::mt19937_64 rng(3);
  const auto data = synthesize_calibration(default_noise_models(), default_commands(), 10, rng);
  std::istringstream in(calibration_to_csv(data));
  const auto back = parse_calibration_csv(in);
  for (Action a : kMotionActions) {
    ASSERT_EQ(back[a].size(), data[a].size());
    for (std::size_t i = 0; i < data[a].size(); ++i) {
      EXPECT_DOUBLE_EQ(back[a][i].lidar.x, data[a][i].lidar.x);
      EXPECT_DOUBLE_EQ(back[a][i].odom.theta, data[a][i].odom.theta);
    }
  }
}
