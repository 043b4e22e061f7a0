#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "cmot/kalman.hpp"

namespace cmot {

struct GateCheckReport {
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  double threshold = 0.0;
  double fraction = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool pass = false;
};

/// Accepted deviation from 0.95: at least 0.01, widened to three binomial
/// standard deviations for small sample counts.
inline double gate_check_tolerance(std::size_t samples) {
  const double sigma = std::sqrt(0.95 * 0.05 / static_cast<double>(std::max<std::size_t>(samples, 1)));
  return std::max(0.01, 3.0 * sigma);
}

/// Random track state with a dense, well-conditioned covariance.
inline StateDistribution random_state(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> pos(0.0, 1000.0), aspect(0.3, 1.0), height(20.0, 300.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  StateDistribution s;
  s.mean << pos(rng), pos(rng), aspect(rng), height(rng), normal(rng), normal(rng), 0.0, normal(rng);
  StateMatrix a;
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = normal(rng);
  const double scale = s.mean[3] / 20.0;
  s.covariance = KalmanFilter::symmetrized(scale * scale * (a * a.transpose()) / 8.0 +
                                           1e-3 * StateMatrix::Identity());
  return s;
}

/// Monte Carlo check of the Mahalanobis gate: samples drawn from the
/// projected measurement distribution of a random track should fall inside
/// the 95% chi-square (4 dof) gate 95% of the time.
inline GateCheckReport run_gate_check(std::size_t samples, std::uint64_t seed, double threshold = 9.4877,
                                      const KalmanFilter& kf = {}) {
  std::mt19937_64 rng(seed);
  const StateDistribution state = random_state(rng);
  const ProjectedDistribution p = kf.project(state);
  const Eigen::LLT<MeasMatrix> chol = KalmanFilter::factorize(p.innovation_cov);
  const MeasMatrix lower = chol.matrixL();

  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<MeasurementXYAH> draws;
  draws.reserve(samples);
  for (std::size_t k = 0; k < samples; ++k) {
    MeasVector z;
    for (int d = 0; d < 4; ++d) z[d] = normal(rng);
    draws.push_back(MeasurementXYAH::from_vector(p.mean + lower * z));
  }
  const std::vector<double> d2 = kf.gating_distance(state, draws);
  const auto inside = std::count_if(d2.begin(), d2.end(), [&](double d) { return d <= threshold; });

  GateCheckReport r;
  r.samples = samples;
  r.seed = seed;
  r.threshold = threshold;
  r.fraction = samples ? static_cast<double>(inside) / static_cast<double>(samples) : 0.0;
  const double tol = gate_check_tolerance(samples);
  r.lower = 0.95 - tol;
  r.upper = 0.95 + tol;
  r.pass = samples > 0 && r.fraction >= r.lower && r.fraction <= r.upper;
  return r;
}

}  // namespace cmot
