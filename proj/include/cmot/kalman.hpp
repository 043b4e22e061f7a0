#pragma once

#include <span>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "cmot/core.hpp"
#include "cmot/error.hpp"

namespace cmot {

using StateVector = Eigen::Matrix<double, 8, 1>;
using StateMatrix = Eigen::Matrix<double, 8, 8>;
using MeasVector = Eigen::Matrix<double, 4, 1>;
using MeasMatrix = Eigen::Matrix<double, 4, 4>;

/// Gaussian over (u, v, gamma, h, du, dv, dgamma, dh).
struct StateDistribution {
  StateVector mean = StateVector::Zero();
  StateMatrix covariance = StateMatrix::Zero();
};

/// Track distribution mapped into measurement space: (y, S).
struct ProjectedDistribution {
  MeasVector mean;
  MeasMatrix innovation_cov;
};

/// Standard deviations of the filter. Everything except the aspect-ratio
/// terms is proportional to the box height, so the model is scale free.
struct NoiseModel {
  double std_weight_position = 1.0 / 20.0;
  double std_weight_velocity = 1.0 / 160.0;
  double measurement_std_aspect = 0.1;
  double process_std_aspect = 1e-2;
  double process_std_aspect_velocity = 1e-5;
  double initial_position_factor = 2.0;
  double initial_velocity_factor = 10.0;
};

/// Constant-velocity Kalman filter with dt = 1 frame and the linear
/// observation H = [I 0]. Stateless apart from its noise model.
class KalmanFilter {
 public:
  KalmanFilter() : KalmanFilter(NoiseModel{}) {}
  explicit KalmanFilter(NoiseModel noise) : noise_(noise) {
    motion_.setIdentity();
    for (int i = 0; i < 4; ++i) motion_(i, 4 + i) = 1.0;
    observation_.setZero();
    observation_.leftCols<4>().setIdentity();
  }

  const NoiseModel& noise() const { return noise_; }
  const StateMatrix& motion_matrix() const { return motion_; }

  StateDistribution initiate(const MeasurementXYAH& m) const {
    StateDistribution s;
    s.mean.head<4>() = m.vector();
    s.mean.tail<4>().setZero();
    const double h = m.height_h;
    const double pf = noise_.initial_position_factor;
    const double vf = noise_.initial_velocity_factor;
    StateVector std;
    std << pf * noise_.std_weight_position * h, pf * noise_.std_weight_position * h,
        pf * noise_.measurement_std_aspect, pf * noise_.std_weight_position * h,
        vf * noise_.std_weight_velocity * h, vf * noise_.std_weight_velocity * h,
        vf * noise_.process_std_aspect_velocity, vf * noise_.std_weight_velocity * h;
    s.covariance = std.array().square().matrix().asDiagonal();
    return s;
  }

  /// Process noise Q for a state whose current height is `h`.
  StateMatrix process_noise(double h) const {
    StateVector std;
    std << noise_.std_weight_position * h, noise_.std_weight_position * h, noise_.process_std_aspect,
        noise_.std_weight_position * h, noise_.std_weight_velocity * h,
        noise_.std_weight_velocity * h, noise_.process_std_aspect_velocity,
        noise_.std_weight_velocity * h;
    return std.array().square().matrix().asDiagonal();
  }

  /// Measurement noise R for a state whose current height is `h`.
  MeasMatrix measurement_noise(double h) const {
    MeasVector std;
    std << noise_.std_weight_position * h, noise_.std_weight_position * h,
        noise_.measurement_std_aspect, noise_.std_weight_position * h;
    return std.array().square().matrix().asDiagonal();
  }

  StateDistribution predict(const StateDistribution& s) const {
    return predict(s, process_noise(s.mean[3]));
  }

  StateDistribution predict(const StateDistribution& s, const StateMatrix& q) const {
    StateDistribution out;
    out.mean = motion_ * s.mean;
    out.covariance = symmetrized(motion_ * s.covariance * motion_.transpose() + q);
    return out;
  }

  ProjectedDistribution project(const StateDistribution& s) const {
    return project(s, measurement_noise(s.mean[3]));
  }

  ProjectedDistribution project(const StateDistribution& s, const MeasMatrix& r) const {
    ProjectedDistribution p;
    p.mean = s.mean.head<4>();
    p.innovation_cov = symmetrized(s.covariance.topLeftCorner<4, 4>() + r);
    return p;
  }

  StateDistribution update(const StateDistribution& s, const MeasurementXYAH& m) const {
    const MeasMatrix r = measurement_noise(s.mean[3]);
    const ProjectedDistribution p = project(s, r);
    const Eigen::LLT<MeasMatrix> chol = factorize(p.innovation_cov);

    // K = P H^T S^-1, obtained from S K^T = H P.
    const Eigen::Matrix<double, 4, 8> hp = observation_ * s.covariance;
    const Eigen::Matrix<double, 8, 4> gain = chol.solve(hp).transpose();

    StateDistribution out;
    out.mean = s.mean + gain * (m.vector() - p.mean);
    // Joseph form of (I - K H) P; algebraically identical for the optimal
    // gain but stays positive semi-definite under round-off.
    const StateMatrix ikh = StateMatrix::Identity() - gain * observation_;
    out.covariance = symmetrized(ikh * s.covariance * ikh.transpose() + gain * r * gain.transpose());
    return out;
  }

  /// Squared Mahalanobis distance of each measurement to the projected state.
  std::vector<double> gating_distance(const StateDistribution& s,
                                      std::span<const MeasurementXYAH> measurements) const {
    return gating_distance(project(s), measurements);
  }

  static std::vector<double> gating_distance(const ProjectedDistribution& p,
                                             std::span<const MeasurementXYAH> measurements) {
    const Eigen::LLT<MeasMatrix> chol = factorize(p.innovation_cov);
    std::vector<double> out;
    out.reserve(measurements.size());
    for (const auto& m : measurements) {
      const MeasVector z = chol.matrixL().solve(m.vector() - p.mean);
      out.push_back(z.squaredNorm());
    }
    return out;
  }

  static Eigen::LLT<MeasMatrix> factorize(const MeasMatrix& innovation_cov) {
    Eigen::LLT<MeasMatrix> chol(innovation_cov);
    if (chol.info() != Eigen::Success || !innovation_cov.allFinite()) {
      throw Error(ErrorKind::SingularInnovation, "innovation covariance is not positive definite");
    }
    return chol;
  }

  template <typename Derived>
  static typename Derived::PlainObject symmetrized(const Eigen::MatrixBase<Derived>& m) {
    return (m + m.transpose()) / 2.0;
  }

 private:
  NoiseModel noise_;
  StateMatrix motion_;
  Eigen::Matrix<double, 4, 8> observation_;
};

}  // namespace cmot
