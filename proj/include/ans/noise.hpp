#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "ans/action.hpp"
#include "ans/errors.hpp"
#include "ans/geometry.hpp"
#include "ans/io.hpp"
#include "json.hpp"

namespace ans {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kCovarianceFloor = 1e-8;

struct GaussianComponent {
  double weight = 1.0;
  Vec3 mean = Vec3::Zero();
  Mat3 covariance = Mat3::Identity() * kCovarianceFloor;
};

namespace detail {

// Projects a symmetric matrix onto {S : eig(S) >= floor}; for a Gaussian
// M-step this is the exact constrained maximiser.
inline Mat3 clamp_covariance(const Mat3& s, double floor) {
  const Mat3 sym = 0.5 * (s + s.transpose());
  Eigen::SelfAdjointEigenSolver<Mat3> es(sym);
  Vec3 ev = es.eigenvalues();
  if (ev.minCoeff() >= floor) return sym;
  for (int i = 0; i < 3; ++i) ev[i] = std::max(ev[i], floor);
  Mat3 out = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

inline double log_sum_exp(std::span<const double> v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

inline constexpr double kLog2Pi = 1.8378770664093454835606594728112;

}  // namespace detail

/// Weighted mixture of 3-variate Gaussians over (x, y, theta) residuals.
class GaussianMixture3D {
 public:
  GaussianMixture3D() : GaussianMixture3D(point_mass(Vec3::Zero())) {}

  explicit GaussianMixture3D(std::vector<GaussianComponent> components,
                             double covariance_floor = kCovarianceFloor)
      : components_(std::move(components)) {
    validate(covariance_floor);
    cache();
  }

  /// Single component with the floor covariance; draws stay within a few
  /// 1e-4 of `mean`.
  static GaussianMixture3D point_mass(const Vec3& mean) {
    return GaussianMixture3D({GaussianComponent{1.0, mean,
                                                Mat3::Identity() * kCovarianceFloor}});
  }

  const std::vector<GaussianComponent>& components() const {
    return components_;
  }
  int size() const { return static_cast<int>(components_.size()); }

  double log_pdf(const Vec3& x) const {
    std::array<double, 64> small{};
    std::vector<double> big;
    std::span<double> terms;
    if (components_.size() <= small.size()) {
      terms = std::span<double>(small.data(), components_.size());
    } else {
      big.resize(components_.size());
      terms = big;
    }
    for (std::size_t k = 0; k < components_.size(); ++k) {
      terms[k] = log_weight_[k] + component_log_pdf(k, x);
    }
    return detail::log_sum_exp(terms);
  }

  double mean_log_likelihood(std::span<const Vec3> xs) const {
    if (xs.empty()) throw InvalidArgument("mean_log_likelihood: no samples");
    double s = 0.0;
    for (const auto& x : xs) s += log_pdf(x);
    return s / static_cast<double>(xs.size());
  }

  /// Component by weight, then a correlated Gaussian draw. No wrapping.
  template <typename Rng>
  Vec3 sample_vector(Rng& rng) const {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const double u = uni(rng);
    std::size_t k = 0;
    double acc = 0.0;
    for (; k + 1 < components_.size(); ++k) {
      acc += components_[k].weight;
      if (u < acc) break;
    }
    std::normal_distribution<double> normal(0.0, 1.0);
    Vec3 z;
    for (int i = 0; i < 3; ++i) z[i] = normal(rng);
    return components_[k].mean + chol_[k] * z;
  }

  /// As sample_vector, with the angle wrapped into (-pi, pi].
  template <typename Rng>
  PoseDelta sample(Rng& rng) const {
    const Vec3 x = sample_vector(rng);
    return {x[0], x[1], wrap_angle(x[2])};
  }

  friend bool operator==(const GaussianMixture3D& a,
                         const GaussianMixture3D& b) {
    if (a.components_.size() != b.components_.size()) return false;
    for (std::size_t k = 0; k < a.components_.size(); ++k) {
      const auto& p = a.components_[k];
      const auto& q = b.components_[k];
      if (p.weight != q.weight || p.mean != q.mean ||
          p.covariance != q.covariance) {
        return false;
      }
    }
    return true;
  }

 private:
  void validate(double floor) const {
    if (components_.empty()) {
      throw ValidationError("gaussian mixture needs at least one component");
    }
    double total = 0.0;
    for (const auto& c : components_) {
      if (!(c.weight >= 0.0) || !std::isfinite(c.weight)) {
        throw ValidationError("mixture weights must be finite and >= 0");
      }
      if (!c.mean.allFinite() || !c.covariance.allFinite()) {
        throw ValidationError("mixture parameters must be finite");
      }
      if ((c.covariance - c.covariance.transpose()).cwiseAbs().maxCoeff() >
          1e-12 * std::max(1.0, c.covariance.cwiseAbs().maxCoeff())) {
        throw ValidationError("mixture covariance must be symmetric");
      }
      Eigen::SelfAdjointEigenSolver<Mat3> es(c.covariance);
      // Allow a relative sliver below the floor for values that went through
      // a decimal round-trip.
      if (es.eigenvalues().minCoeff() < floor * (1.0 - 1e-6)) {
        throw ValidationError(
            "mixture covariance must be positive definite above the floor");
      }
      total += c.weight;
    }
    if (std::abs(total - 1.0) > 1e-9) {
      std::ostringstream os;
      os.precision(17);
      os << "mixture weights must sum to 1 (got " << total << ")";
      throw ValidationError(os.str());
    }
  }

  void cache() {
    chol_.clear();
    log_norm_.clear();
    log_weight_.clear();
    for (const auto& c : components_) {
      Eigen::LLT<Mat3> llt(c.covariance);
      const Mat3 l = llt.matrixL();
      chol_.push_back(l);
      const double log_det = 2.0 * l.diagonal().array().log().sum();
      log_norm_.push_back(-0.5 * (3.0 * detail::kLog2Pi + log_det));
      log_weight_.push_back(c.weight > 0.0
                                ? std::log(c.weight)
                                : -std::numeric_limits<double>::infinity());
    }
  }

  double component_log_pdf(std::size_t k, const Vec3& x) const {
    const Vec3 z =
        chol_[k].triangularView<Eigen::Lower>().solve(x - components_[k].mean);
    return log_norm_[k] - 0.5 * z.squaredNorm();
  }

  std::vector<GaussianComponent> components_;
  std::vector<Mat3> chol_;
  std::vector<double> log_norm_;
  std::vector<double> log_weight_;
};

// ---------------------------------------------------------------------------
// Expectation maximisation

struct EmOptions {
  int max_iterations = 200;
  double tolerance = 1e-6;  // on the mean per-sample log-likelihood
  double covariance_floor = kCovarianceFloor;
  int restarts = 5;
};

struct EmResult {
  GaussianMixture3D model;
  std::vector<double> trace;  // mean fit log-likelihood per E-step
  bool converged = false;
  bool monotone = true;
};

namespace detail {

inline Mat3 sample_covariance(std::span<const Vec3> xs) {
  Vec3 mean = Vec3::Zero();
  for (const auto& x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  Mat3 s = Mat3::Zero();
  for (const auto& x : xs) s += (x - mean) * (x - mean).transpose();
  return s / static_cast<double>(xs.size());
}

// k-means++ seeding: first centre uniform, then proportional to squared
// distance to the nearest chosen centre.
template <typename Rng>
std::vector<Vec3> kmeanspp(std::span<const Vec3> xs, int k, Rng& rng) {
  std::vector<Vec3> centres;
  std::uniform_int_distribution<std::size_t> pick(0, xs.size() - 1);
  centres.push_back(xs[pick(rng)]);
  std::vector<double> d2(xs.size(), std::numeric_limits<double>::infinity());
  while (static_cast<int>(centres.size()) < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      d2[i] = std::min(d2[i], (xs[i] - centres.back()).squaredNorm());
      total += d2[i];
    }
    if (!(total > 0.0)) {
      centres.push_back(xs[pick(rng)]);
      continue;
    }
    std::uniform_real_distribution<double> uni(0.0, total);
    const double u = uni(rng);
    double acc = 0.0;
    std::size_t chosen = xs.size() - 1;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      acc += d2[i];
      if (u < acc) {
        chosen = i;
        break;
      }
    }
    centres.push_back(xs[chosen]);
  }
  return centres;
}

struct EmState {
  std::vector<double> weight;
  std::vector<Vec3> mean;
  std::vector<Mat3> cov;
};

// E-step: fills log responsibilities, returns mean log-likelihood.
inline double e_step(std::span<const Vec3> xs, const EmState& st,
                     std::vector<double>& log_resp) {
  const std::size_t k = st.weight.size();
  std::vector<Mat3> chol(k);
  std::vector<double> norm(k);
  std::vector<double> lw(k);
  for (std::size_t j = 0; j < k; ++j) {
    Eigen::LLT<Mat3> llt(st.cov[j]);
    chol[j] = llt.matrixL();
    norm[j] = -0.5 * (3.0 * kLog2Pi +
                      2.0 * chol[j].diagonal().array().log().sum());
    lw[j] = st.weight[j] > 0.0 ? std::log(st.weight[j])
                               : -std::numeric_limits<double>::infinity();
  }
  log_resp.assign(xs.size() * k, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    std::span<double> row(&log_resp[i * k], k);
    for (std::size_t j = 0; j < k; ++j) {
      const Vec3 z =
          chol[j].triangularView<Eigen::Lower>().solve(xs[i] - st.mean[j]);
      row[j] = lw[j] + norm[j] - 0.5 * z.squaredNorm();
    }
    const double lse = log_sum_exp(row);
    for (double& v : row) v -= lse;
    total += lse;
  }
  return total / static_cast<double>(xs.size());
}

inline void m_step(std::span<const Vec3> xs, const std::vector<double>& log_resp,
                   double floor, EmState& st) {
  const std::size_t k = st.weight.size();
  const double n = static_cast<double>(xs.size());
  for (std::size_t j = 0; j < k; ++j) {
    double nk = 0.0;
    Vec3 mu = Vec3::Zero();
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double r = std::exp(log_resp[i * k + j]);
      nk += r;
      mu += r * xs[i];
    }
    st.weight[j] = nk / n;
    // A component that lost all support keeps its parameters; its weight
    // carries no likelihood mass.
    if (nk < 1e-12 * n) continue;
    mu /= nk;
    Mat3 s = Mat3::Zero();
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double r = std::exp(log_resp[i * k + j]);
      const Vec3 d = xs[i] - mu;
      s += r * d * d.transpose();
    }
    st.mean[j] = mu;
    st.cov[j] = clamp_covariance(s / nk, floor);
  }
  const double total = std::accumulate(st.weight.begin(), st.weight.end(), 0.0);
  for (double& w : st.weight) w /= total;
}

}  // namespace detail

/// One EM run from a k-means++ start.
template <typename Rng>
EmResult em_fit_once(std::span<const Vec3> xs, int k, Rng& rng,
                     const EmOptions& opt = {}) {
  if (k < 1) throw InvalidArgument("em_fit: k must be >= 1");
  if (xs.empty()) throw InsufficientData("em_fit: no samples");
  detail::EmState st;
  const Mat3 global = detail::clamp_covariance(detail::sample_covariance(xs),
                                               opt.covariance_floor);
  st.mean = detail::kmeanspp(xs, k, rng);
  st.cov.assign(static_cast<std::size_t>(k), global);
  st.weight.assign(static_cast<std::size_t>(k), 1.0 / k);

  EmResult res;
  std::vector<double> log_resp;
  double prev = -std::numeric_limits<double>::infinity();
  for (int it = 0; it <= opt.max_iterations; ++it) {
    const double ll = detail::e_step(xs, st, log_resp);
    res.trace.push_back(ll);
    if (ll < prev - 1e-9) res.monotone = false;
    if (it > 0 && ll - prev < opt.tolerance) {
      res.converged = true;
      break;
    }
    if (it == opt.max_iterations) break;
    prev = ll;
    detail::m_step(xs, log_resp, opt.covariance_floor, st);
  }
  std::vector<GaussianComponent> comps;
  for (int j = 0; j < k; ++j) {
    comps.push_back({st.weight[j], st.mean[j], st.cov[j]});
  }
  res.model = GaussianMixture3D(std::move(comps), opt.covariance_floor);
  return res;
}

/// Best of `opt.restarts` EM runs by final fit log-likelihood.
inline EmResult em_fit(std::span<const Vec3> xs, int k, std::uint64_t seed,
                       const EmOptions& opt = {}) {
  EmResult best;
  bool have = false;
  for (int r = 0; r < std::max(1, opt.restarts); ++r) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed),
                      static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(k),
                      static_cast<std::uint32_t>(r)};
    std::mt19937_64 rng(seq);
    EmResult cur = em_fit_once(xs, k, rng, opt);
    if (!have || cur.trace.back() > best.trace.back()) {
      best = std::move(cur);
      have = true;
    }
  }
  return best;
}

inline std::vector<int> k_range(int lo, int hi) {
  if (lo < 1 || hi < lo) throw InvalidArgument("k_range: need 1 <= lo <= hi");
  std::vector<int> ks(static_cast<std::size_t>(hi - lo + 1));
  std::iota(ks.begin(), ks.end(), lo);
  return ks;
}

struct GmmFit {
  GaussianMixture3D model;
  int k = 1;
  double heldout_log_likelihood = 0.0;
  double fit_log_likelihood = 0.0;
  std::vector<std::pair<int, double>> candidate_scores;  // (k, held-out ll)
  std::size_t fit_count = 0;
  std::size_t validation_count = 0;
};

/// Fits one EM mixture per candidate k on a shuffled fit split and keeps the
/// candidate with the highest mean held-out log-likelihood, smaller k winning
/// statistical ties. `validation_fraction` is the share of samples held out.
inline GmmFit fit_gmm(std::span<const Vec3> samples,
                      std::span<const int> k_candidates,
                      double validation_fraction, std::uint64_t seed,
                      const EmOptions& opt = {}) {
  if (k_candidates.empty()) throw InvalidArgument("fit_gmm: no k candidates");
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw InvalidArgument("fit_gmm: split must lie in (0, 1)");
  }
  const int k_max = *std::max_element(k_candidates.begin(), k_candidates.end());
  if (*std::min_element(k_candidates.begin(), k_candidates.end()) < 1) {
    throw InvalidArgument("fit_gmm: k candidates must be >= 1");
  }
  if (samples.size() < static_cast<std::size_t>(k_max) + 1) {
    throw InsufficientData("fit_gmm: need at least " + std::to_string(k_max + 1) +
                           " samples, got " + std::to_string(samples.size()));
  }
  for (const auto& s : samples) {
    if (!s.allFinite()) throw InvalidArgument("fit_gmm: non-finite sample");
  }
  const bool identical =
      std::all_of(samples.begin(), samples.end(),
                  [&](const Vec3& s) { return s == samples.front(); });
  if (identical && k_max > 1) {
    throw DegenerateData(
        "fit_gmm: all samples are identical; fit with k_candidates = {1}");
  }

  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 shuffle_rng(seed);
  std::shuffle(order.begin(), order.end(), shuffle_rng);
  std::size_t n_val = static_cast<std::size_t>(
      std::llround(validation_fraction * static_cast<double>(samples.size())));
  n_val = std::clamp<std::size_t>(n_val, 1, samples.size() - 1);
  std::vector<Vec3> fit_set;
  std::vector<Vec3> val_set;
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < samples.size() - n_val ? fit_set : val_set).push_back(samples[order[i]]);
  }

  // Per-sample held-out log densities, kept for the paired comparison.
  std::vector<EmResult> fits;
  std::vector<std::vector<double>> held_lp;
  GmmFit best;
  std::size_t top = 0;
  for (std::size_t i = 0; i < k_candidates.size(); ++i) {
    fits.push_back(em_fit(fit_set, k_candidates[i], seed, opt));
    std::vector<double> lp(val_set.size());
    for (std::size_t j = 0; j < val_set.size(); ++j) lp[j] = fits.back().model.log_pdf(val_set[j]);
    const double held = std::accumulate(lp.begin(), lp.end(), 0.0) / static_cast<double>(lp.size());
    best.candidate_scores.emplace_back(k_candidates[i], held);
    held_lp.push_back(std::move(lp));
    const auto& bs = best.candidate_scores[top];
    if (held > bs.second || (held == bs.second && k_candidates[i] < bs.first)) top = i;
  }
  // A candidate ties the top one when its held-out deficit is within one
  // standard error of the paired per-sample differences; the smallest tying
  // k wins. With ~100 validation samples, spurious extra components gain a
  // few hundredths of a nat by chance.
  std::size_t pick = top;
  const double n = static_cast<double>(val_set.size());
  for (std::size_t i = 0; i < k_candidates.size(); ++i) {
    if (k_candidates[i] >= k_candidates[pick]) continue;
    double m = 0.0, m2 = 0.0;
    for (std::size_t j = 0; j < val_set.size(); ++j) {
      const double d = held_lp[top][j] - held_lp[i][j];
      m += d;
      m2 += d * d;
    }
    m /= n;
    const double var = n > 1.0 ? std::max(0.0, (m2 - n * m * m) / (n - 1.0)) : 0.0;
    if (m <= std::sqrt(var / n)) pick = i;
  }
  best.model = fits[pick].model;
  best.k = k_candidates[pick];
  best.heldout_log_likelihood = best.candidate_scores[pick].second;
  best.fit_log_likelihood = fits[pick].trace.back();
  best.fit_count = fit_set.size();
  best.validation_count = val_set.size();
  return best;
}

// ---------------------------------------------------------------------------
// Noise model sets

enum class NoiseKind { Actuation = 0, Sensor = 1 };

inline std::string_view noise_kind_name(NoiseKind k) {
  return k == NoiseKind::Actuation ? "actuation" : "sensor";
}

/// One mixture per (motion action, noise kind).
class NoiseModelSet {
 public:
  const GaussianMixture3D& get(Action a, NoiseKind kind) const {
    return models_.at(checked(a)).at(static_cast<std::size_t>(kind));
  }
  void set(Action a, NoiseKind kind, GaussianMixture3D m) {
    models_.at(checked(a)).at(static_cast<std::size_t>(kind)) = std::move(m);
  }

  friend bool operator==(const NoiseModelSet&, const NoiseModelSet&) = default;

 private:
  static std::size_t checked(Action a) {
    const int idx = motion_index(a);
    if (idx < 0) throw InvalidAction("stop has no noise model");
    return static_cast<std::size_t>(idx);
  }

  std::array<std::array<GaussianMixture3D, 2>, 3> models_{};
};

namespace detail {

inline GaussianComponent diag_component(double w, Vec3 mean, Vec3 sigma) {
  Mat3 cov = Mat3::Zero();
  for (int i = 0; i < 3; ++i) cov(i, i) = sigma[i] * sigma[i];
  return {w, mean, cov};
}

}  // namespace detail

/// Hand-specified mixtures at the scale of a small differential-drive base:
/// centimetre translation errors and around a degree of heading error per
/// action.
inline NoiseModelSet default_noise_models() {
  using detail::diag_component;
  const double d = kPi / 180.0;
  NoiseModelSet set;
  set.set(Action::Forward, NoiseKind::Actuation,
          GaussianMixture3D({diag_component(0.7, {0.0, 0.0, 0.0},
                                            {0.012, 0.008, 0.8 * d}),
                             diag_component(0.3, {-0.02, 0.004, 0.4 * d},
                                            {0.015, 0.01, 1.2 * d})}));
  set.set(Action::Forward, NoiseKind::Sensor,
          GaussianMixture3D({diag_component(0.6, {0.004, 0.0, 0.0},
                                            {0.012, 0.01, 1.0 * d}),
                             diag_component(0.4, {-0.008, 0.005, -0.6 * d},
                                            {0.02, 0.015, 1.5 * d})}));
  set.set(Action::TurnLeft, NoiseKind::Actuation,
          GaussianMixture3D({diag_component(1.0, {0.0, 0.0, -0.3 * d},
                                            {0.004, 0.004, 1.0 * d})}));
  set.set(Action::TurnLeft, NoiseKind::Sensor,
          GaussianMixture3D({diag_component(0.5, {0.002, 0.0, 0.5 * d},
                                            {0.005, 0.005, 1.0 * d}),
                             diag_component(0.5, {-0.002, 0.002, -0.5 * d},
                                            {0.006, 0.006, 1.4 * d})}));
  set.set(Action::TurnRight, NoiseKind::Actuation,
          GaussianMixture3D({diag_component(1.0, {0.0, 0.0, 0.3 * d},
                                            {0.004, 0.004, 1.0 * d})}));
  set.set(Action::TurnRight, NoiseKind::Sensor,
          GaussianMixture3D({diag_component(0.5, {0.002, 0.0, -0.5 * d},
                                            {0.005, 0.005, 1.0 * d}),
                             diag_component(0.5, {-0.002, -0.002, 0.5 * d},
                                            {0.006, 0.006, 1.4 * d})}));
  return set;
}

/// Noise-free set: every model is a point mass at zero.
inline NoiseModelSet zero_noise_models() {
  NoiseModelSet set;
  for (Action a : kMotionActions) {
    for (NoiseKind k : {NoiseKind::Actuation, NoiseKind::Sensor}) {
      set.set(a, k, GaussianMixture3D::point_mass(Vec3::Zero()));
    }
  }
  return set;
}

// ---------------------------------------------------------------------------
// Calibration data and fitting

struct CalibrationSample {
  Pose lidar;  // reference pose after the action, start at the origin
  Pose odom;   // base odometry after the action
};

struct CalibrationDataset {
  std::array<std::vector<CalibrationSample>, 3> samples;

  std::vector<CalibrationSample>& operator[](Action a) {
    return samples.at(static_cast<std::size_t>(motion_index(a)));
  }
  const std::vector<CalibrationSample>& operator[](Action a) const {
    return samples.at(static_cast<std::size_t>(motion_index(a)));
  }
};

using CommandTable = std::array<PoseDelta, 3>;

inline CommandTable default_commands() {
  return {control_command(Action::Forward), control_command(Action::TurnLeft),
          control_command(Action::TurnRight)};
}

/// Component-wise pose residual with the angle wrapped.
inline Vec3 pose_residual(const Pose& a, const Pose& b) {
  return {a.x - b.x, a.y - b.y, wrap_angle(a.theta - b.theta)};
}

struct NoiseFitOptions {
  std::vector<int> k_candidates = k_range(1, 20);
  double validation_fraction = 1.0 / 6.0;
  std::uint64_t seed = 0;
  EmOptions em;
};

struct NoiseModelReport {
  int k = 1;
  double heldout_log_likelihood = 0.0;
  std::size_t fit_count = 0;
  std::size_t validation_count = 0;
};

using NoiseFitReport = std::array<std::array<NoiseModelReport, 2>, 3>;

/// Actuation residuals are lidar pose minus the command; sensor residuals are
/// odometry minus lidar pose. Identical residual sets fall back to k = 1.
inline NoiseModelSet build_noise_models(const CalibrationDataset& data,
                                        const CommandTable& commands,
                                        const NoiseFitOptions& opt = {},
                                        NoiseFitReport* report = nullptr) {
  NoiseModelSet set;
  for (Action a : kMotionActions) {
    const auto idx = static_cast<std::size_t>(motion_index(a));
    const auto& rows = data[a];
    if (rows.size() < 2) {
      throw InsufficientData("build_noise_models: action '" +
                             std::string(action_name(a)) + "' has " +
                             std::to_string(rows.size()) +
                             " samples, need at least 2");
    }
    const PoseDelta& u = commands[idx];
    const Pose commanded{u.dx, u.dy, u.dtheta};
    std::vector<Vec3> act;
    std::vector<Vec3> sen;
    for (const auto& s : rows) {
      act.push_back(pose_residual(s.lidar, commanded));
      sen.push_back(pose_residual(s.odom, s.lidar));
    }
    const std::array<const std::vector<Vec3>*, 2> sets = {&act, &sen};
    for (NoiseKind kind : {NoiseKind::Actuation, NoiseKind::Sensor}) {
      const auto& xs = *sets[static_cast<std::size_t>(kind)];
      std::vector<int> ks = opt.k_candidates;
      const bool identical = std::all_of(
          xs.begin(), xs.end(), [&](const Vec3& v) { return v == xs.front(); });
      if (identical) ks = {1};
      const int k_max = *std::max_element(ks.begin(), ks.end());
      std::erase_if(ks, [&](int k) {
        return static_cast<std::size_t>(k) + 1 > xs.size();
      });
      if (ks.empty()) {
        throw InsufficientData(
            "build_noise_models: too few samples for '" +
            std::string(action_name(a)) + "' to fit k=" + std::to_string(k_max));
      }
      const std::uint64_t seed = opt.seed * 1000003ULL +
                                 static_cast<std::uint64_t>(idx * 2) +
                                 static_cast<std::uint64_t>(kind);
      GmmFit fit = fit_gmm(xs, ks, opt.validation_fraction, seed, opt.em);
      if (report) {
        (*report)[idx][static_cast<std::size_t>(kind)] = {
            fit.k, fit.heldout_log_likelihood, fit.fit_count,
            fit.validation_count};
      }
      set.set(a, kind, std::move(fit.model));
    }
  }
  return set;
}

/// Draws a calibration dataset from a known model set (actuation first, then
/// sensor on top of the realised pose).
template <typename Rng>
CalibrationDataset synthesize_calibration(const NoiseModelSet& models,
                                          const CommandTable& commands,
                                          int per_action, Rng& rng) {
  CalibrationDataset data;
  for (Action a : kMotionActions) {
    const auto idx = static_cast<std::size_t>(motion_index(a));
    for (int i = 0; i < per_action; ++i) {
      const PoseDelta ea = models.get(a, NoiseKind::Actuation).sample(rng);
      const PoseDelta es = models.get(a, NoiseKind::Sensor).sample(rng);
      const PoseDelta& u = commands[idx];
      Pose lidar{u.dx + ea.dx, u.dy + ea.dy, wrap_angle(u.dtheta + ea.dtheta)};
      Pose odom{lidar.x + es.dx, lidar.y + es.dy,
                wrap_angle(lidar.theta + es.dtheta)};
      data[a].push_back({lidar, odom});
    }
  }
  return data;
}

// ---------------------------------------------------------------------------
// Files

inline constexpr const char* kCalibrationColumns[] = {
    "action", "lidar_x", "lidar_y", "lidar_o", "odom_x", "odom_y", "odom_o"};

inline CalibrationDataset parse_calibration_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("calibration csv: empty input");
  const auto header = split_csv_line(line);
  std::array<int, 7> col{};
  for (std::size_t i = 0; i < 7; ++i) {
    auto it = std::find(header.begin(), header.end(), kCalibrationColumns[i]);
    if (it == header.end()) {
      throw ParseError(std::string("calibration csv: missing column '") +
                       kCalibrationColumns[i] + "'");
    }
    col[i] = static_cast<int>(it - header.begin());
  }
  CalibrationDataset data;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw ParseError("calibration csv line " + std::to_string(line_no) +
                       ": expected " + std::to_string(header.size()) +
                       " fields, got " + std::to_string(fields.size()));
    }
    const auto action = parse_action(trim(fields[static_cast<std::size_t>(col[0])]));
    if (!action || *action == Action::Stop) {
      throw ParseError("calibration csv line " + std::to_string(line_no) +
                       ": unknown action '" + fields[static_cast<std::size_t>(col[0])] + "'");
    }
    std::array<double, 6> v{};
    for (std::size_t i = 0; i < 6; ++i) {
      const auto& f = fields[static_cast<std::size_t>(col[i + 1])];
      const auto parsed = parse_double(f);
      if (!parsed) {
        throw ParseError("calibration csv line " + std::to_string(line_no) +
                         ", field '" + kCalibrationColumns[i + 1] +
                         "': not a number: '" + f + "'");
      }
      v[i] = *parsed;
    }
    data[*action].push_back({{v[0], v[1], v[2]}, {v[3], v[4], v[5]}});
  }
  return data;
}

inline CalibrationDataset load_calibration_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open calibration file '" + path + "'");
  return parse_calibration_csv(in);
}

inline std::string calibration_to_csv(const CalibrationDataset& data) {
  std::string out = "action,lidar_x,lidar_y,lidar_o,odom_x,odom_y,odom_o\n";
  for (Action a : kMotionActions) {
    for (const auto& s : data[a]) {
      out += std::string(action_name(a));
      for (double v : {s.lidar.x, s.lidar.y, s.lidar.theta, s.odom.x, s.odom.y,
                       s.odom.theta}) {
        out += ',';
        out += format_double(v);
      }
      out += '\n';
    }
  }
  return out;
}

inline nlohmann::json noise_models_to_json(const NoiseModelSet& set) {
  nlohmann::json root = nlohmann::json::object();
  for (Action a : kMotionActions) {
    for (NoiseKind kind : {NoiseKind::Actuation, NoiseKind::Sensor}) {
      const auto& m = set.get(a, kind);
      nlohmann::json weights = nlohmann::json::array();
      nlohmann::json means = nlohmann::json::array();
      nlohmann::json covs = nlohmann::json::array();
      for (const auto& c : m.components()) {
        weights.push_back(c.weight);
        means.push_back({c.mean[0], c.mean[1], c.mean[2]});
        nlohmann::json cov = nlohmann::json::array();
        for (int r = 0; r < 3; ++r) {
          cov.push_back({c.covariance(r, 0), c.covariance(r, 1),
                         c.covariance(r, 2)});
        }
        covs.push_back(cov);
      }
      root[std::string(action_name(a))][std::string(noise_kind_name(kind))] = {
          {"weights", weights}, {"means", means}, {"covariances", covs}};
    }
  }
  return root;
}

namespace detail {

inline double json_number(const nlohmann::json& j, const std::string& where) {
  if (!j.is_number()) throw ParseError("noise models: " + where + " must be a number");
  return j.get<double>();
}

inline const nlohmann::json& json_array(const nlohmann::json& j,
                                        const std::string& where,
                                        std::size_t expected_size = 0) {
  if (!j.is_array()) throw ParseError("noise models: " + where + " must be an array");
  if (expected_size && j.size() != expected_size) {
    throw ParseError("noise models: " + where + " must have " +
                     std::to_string(expected_size) + " entries");
  }
  return j;
}

}  // namespace detail

inline NoiseModelSet noise_models_from_json(const nlohmann::json& root) {
  using detail::json_array;
  using detail::json_number;
  if (!root.is_object()) throw ParseError("noise models: top level must be an object");
  for (const auto& [key, _] : root.items()) {
    const auto a = parse_action(key);
    if (!a || *a == Action::Stop) {
      throw ValidationError("noise models: unknown action '" + key + "'");
    }
  }
  NoiseModelSet set;
  for (Action a : kMotionActions) {
    for (NoiseKind kind : {NoiseKind::Actuation, NoiseKind::Sensor}) {
      const std::string an(action_name(a));
      const std::string kn(noise_kind_name(kind));
      if (!root.contains(an) || !root[an].is_object() || !root[an].contains(kn)) {
        throw ValidationError("noise models: schema error, missing entry (" +
                              an + ", " + kn + ")");
      }
      const auto& entry = root[an][kn];
      const std::string where = an + "." + kn;
      for (const char* field : {"weights", "means", "covariances"}) {
        if (!entry.contains(field)) {
          throw ValidationError("noise models: schema error, missing field " +
                                where + "." + field);
        }
      }
      const auto& w = json_array(entry["weights"], where + ".weights");
      const auto& m = json_array(entry["means"], where + ".means", w.size());
      const auto& c = json_array(entry["covariances"], where + ".covariances", w.size());
      std::vector<GaussianComponent> comps;
      for (std::size_t i = 0; i < w.size(); ++i) {
        const std::string idx = "[" + std::to_string(i) + "]";
        GaussianComponent g;
        g.weight = json_number(w[i], where + ".weights" + idx);
        const auto& mean = json_array(m[i], where + ".means" + idx, 3);
        for (int r = 0; r < 3; ++r) {
          g.mean[r] = json_number(mean[static_cast<std::size_t>(r)],
                                  where + ".means" + idx);
        }
        const auto& cov = json_array(c[i], where + ".covariances" + idx, 3);
        for (int r = 0; r < 3; ++r) {
          const auto& row = json_array(cov[static_cast<std::size_t>(r)],
                                       where + ".covariances" + idx, 3);
          for (int k = 0; k < 3; ++k) {
            g.covariance(r, k) = json_number(row[static_cast<std::size_t>(k)],
                                             where + ".covariances" + idx);
          }
        }
        comps.push_back(g);
      }
      try {
        set.set(a, kind, GaussianMixture3D(std::move(comps)));
      } catch (const ValidationError& e) {
        throw ValidationError("noise models: " + where + ": " + e.what());
      }
    }
  }
  return set;
}

inline std::string noise_models_to_string(const NoiseModelSet& set) {
  return noise_models_to_json(set).dump(2) + "\n";
}

inline void save_models(const NoiseModelSet& set, const std::string& path) {
  write_file_atomic(path, noise_models_to_string(set));
}

inline NoiseModelSet parse_models(const std::string& text) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const auto pos = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<long>(pos), '\n');
    throw ParseError("noise models: line " + std::to_string(line) + ": " + e.what());
  }
  return noise_models_from_json(root);
}

inline NoiseModelSet load_models(const std::string& path) {
  return parse_models(read_file(path));
}

}  // namespace ans
