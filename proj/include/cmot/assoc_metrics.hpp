#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cmot/core.hpp"
#include "cmot/error.hpp"
#include "cmot/kalman.hpp"
#include "cmot/track.hpp"

namespace cmot {

/// Cost written into gated cells. Strictly larger than any admissible cost
/// under every valid configuration, so the solver never prefers a gated pair
/// over an admissible one.
inline constexpr double kGatingSentinel = 1e5;

using BoolMatrix = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

struct CostMatrices {
  Eigen::MatrixXd cost;
  BoolMatrix admissible;

  Eigen::Index rows() const { return cost.rows(); }
  Eigen::Index cols() const { return cost.cols(); }
};

struct CombinedCost {
  double cost;
  bool admissible;
};

/// Weighted motion/appearance cost and the product of both (inclusive) gates.
inline CombinedCost combined_cost(double mahalanobis, double cosine, const TrackerConfig& cfg) {
  return {cfg.lambda * mahalanobis + (1.0 - cfg.lambda) * cosine,
          mahalanobis <= cfg.mahalanobis_threshold && cosine <= cfg.cosine_threshold};
}

inline void apply_gating_sentinel(CostMatrices& m) {
  m.cost = m.admissible.select(m.cost, Eigen::MatrixXd::Constant(m.rows(), m.cols(), kGatingSentinel));
}

namespace detail {

inline std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = i;
  return out;
}

}  // namespace detail

/// Appearance + motion cost between `tracks[track_subset[i]]` and every
/// detection. Row i of the result corresponds to track_subset[i].
inline CostMatrices build_cost_matrices(std::span<const Track> tracks,
                                        std::span<const std::size_t> track_subset,
                                        std::span<const Detection> detections,
                                        const TrackerConfig& cfg, const KalmanFilter& kf = {}) {
  const auto n = static_cast<Eigen::Index>(track_subset.size());
  const auto m = static_cast<Eigen::Index>(detections.size());
  CostMatrices out{Eigen::MatrixXd::Zero(n, m), BoolMatrix::Constant(n, m, false)};
  if (n == 0 || m == 0) return out;

  const auto dim = static_cast<Eigen::Index>(cfg.feature_dim);
  Eigen::MatrixXd queries(dim, m);
  std::vector<MeasurementXYAH> measurements;
  measurements.reserve(detections.size());
  for (Eigen::Index j = 0; j < m; ++j) {
    const Detection& d = detections[static_cast<std::size_t>(j)];
    if (!d.descriptor) {
      throw Error(ErrorKind::MissingDescriptor,
                  "detection " + std::to_string(j) + " has no appearance descriptor");
    }
    if (d.descriptor->components().size() != dim) {
      throw Error(ErrorKind::DimensionMismatch,
                  "detection " + std::to_string(j) + " descriptor dimension differs from feature_dim");
    }
    queries.col(j) = d.descriptor->components();
    measurements.push_back(bbox_to_xyah(d.bbox));
  }

  for (Eigen::Index i = 0; i < n; ++i) {
    const Track& t = tracks[track_subset[static_cast<std::size_t>(i)]];
    std::vector<double> d1;
    Eigen::RowVectorXd d2;
    try {
      d1 = kf.gating_distance(t.state, measurements);
      d2 = t.gallery.cosine_distances(queries);
    } catch (const Error& e) {
      throw Error(e.kind(), "track " + std::to_string(t.id) + ": " + e.message());
    }
    for (Eigen::Index j = 0; j < m; ++j) {
      const CombinedCost c = combined_cost(d1[static_cast<std::size_t>(j)], d2(j), cfg);
      out.cost(i, j) = c.cost;
      out.admissible(i, j) = c.admissible;
    }
  }
  apply_gating_sentinel(out);
  return out;
}

inline CostMatrices build_cost_matrices(std::span<const Track> tracks,
                                        std::span<const Detection> detections,
                                        const TrackerConfig& cfg, const KalmanFilter& kf = {}) {
  const auto subset = detail::all_indices(tracks.size());
  return build_cost_matrices(tracks, subset, detections, cfg, kf);
}

/// 1 - IoU between predicted track boxes and detections; admissible iff the
/// cost does not exceed `cfg.iou_max_cost`. Costs are left unmodified.
inline CostMatrices iou_cost_matrix(std::span<const Track> tracks,
                                    std::span<const std::size_t> track_subset,
                                    std::span<const Detection> detections, const TrackerConfig& cfg) {
  const auto n = static_cast<Eigen::Index>(track_subset.size());
  const auto m = static_cast<Eigen::Index>(detections.size());
  CostMatrices out{Eigen::MatrixXd::Zero(n, m), BoolMatrix::Constant(n, m, false)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const BoundingBox predicted = tracks[track_subset[static_cast<std::size_t>(i)]].bbox();
    for (Eigen::Index j = 0; j < m; ++j) {
      const double c = 1.0 - iou(predicted, detections[static_cast<std::size_t>(j)].bbox);
      out.cost(i, j) = c;
      out.admissible(i, j) = c <= cfg.iou_max_cost;
    }
  }
  return out;
}

inline CostMatrices iou_cost_matrix(std::span<const Track> tracks, std::span<const Detection> detections,
                                    const TrackerConfig& cfg) {
  const auto subset = detail::all_indices(tracks.size());
  return iou_cost_matrix(tracks, subset, detections, cfg);
}

}  // namespace cmot
