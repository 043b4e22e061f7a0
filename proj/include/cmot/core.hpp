#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>

#include <Eigen/Dense>

#include "cmot/error.hpp"

namespace cmot {

/// Axis-aligned box in pixel coordinates, stored as top-left corner plus size
/// (the layout used by MOT files).
struct BoundingBox {
  double top_left_x = 0.0;
  double top_left_y = 0.0;
  double width = 0.0;
  double height = 0.0;

  double area() const { return width * height; }
  bool valid() const { return width > 0.0 && height > 0.0; }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// Box in the filter's measurement space: center, aspect ratio (w/h), height.
struct MeasurementXYAH {
  double center_u = 0.0;
  double center_v = 0.0;
  double aspect_gamma = 1.0;
  double height_h = 1.0;

  Eigen::Vector4d vector() const { return {center_u, center_v, aspect_gamma, height_h}; }

  static MeasurementXYAH from_vector(const Eigen::Vector4d& v) { return {v[0], v[1], v[2], v[3]}; }

  friend bool operator==(const MeasurementXYAH&, const MeasurementXYAH&) = default;
};

inline MeasurementXYAH bbox_to_xyah(const BoundingBox& b) {
  return {b.top_left_x + b.width / 2.0, b.top_left_y + b.height / 2.0, b.width / b.height, b.height};
}

inline BoundingBox xyah_to_bbox(const MeasurementXYAH& m) {
  const double w = m.aspect_gamma * m.height_h;
  return {m.center_u - w / 2.0, m.center_v - m.height_h / 2.0, w, m.height_h};
}

/// Intersection over union. Symmetric, in [0, 1].
inline double iou(const BoundingBox& a, const BoundingBox& b) {
  const double ix0 = std::max(a.top_left_x, b.top_left_x);
  const double iy0 = std::max(a.top_left_y, b.top_left_y);
  const double ix1 = std::min(a.top_left_x + a.width, b.top_left_x + b.width);
  const double iy1 = std::min(a.top_left_y + a.height, b.top_left_y + b.height);
  const double inter = std::max(0.0, ix1 - ix0) * std::max(0.0, iy1 - iy0);
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

/// Unit-norm appearance embedding. Only obtainable through
/// `normalize_descriptor`, so every instance satisfies the norm invariant.
class AppearanceDescriptor {
 public:
  const Eigen::VectorXd& components() const { return components_; }
  std::size_t dim() const { return static_cast<std::size_t>(components_.size()); }

  double cosine_distance(const AppearanceDescriptor& other) const {
    return 1.0 - components_.dot(other.components_);
  }

 private:
  explicit AppearanceDescriptor(Eigen::VectorXd v) : components_(std::move(v)) {}
  Eigen::VectorXd components_;

  friend AppearanceDescriptor normalize_descriptor(std::span<const double>, std::size_t);
};

inline AppearanceDescriptor normalize_descriptor(std::span<const double> values,
                                                 std::size_t feature_dim) {
  if (values.size() != feature_dim) {
    throw Error(ErrorKind::DimensionMismatch, "descriptor has " + std::to_string(values.size()) +
                                                  " components, expected " +
                                                  std::to_string(feature_dim));
  }
  Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(values.data(),
                                                        static_cast<Eigen::Index>(values.size()));
  const double norm = v.norm();
  if (!(norm >= 1e-12) || !std::isfinite(norm)) {
    throw Error(ErrorKind::ZeroVector, "descriptor norm is zero or not finite");
  }
  return AppearanceDescriptor(v / norm);
}

inline AppearanceDescriptor normalize_descriptor(const Eigen::VectorXd& values) {
  return normalize_descriptor(std::span<const double>(values.data(), static_cast<std::size_t>(values.size())),
                              static_cast<std::size_t>(values.size()));
}

struct Detection {
  BoundingBox bbox;
  double confidence = 1.0;
  std::optional<AppearanceDescriptor> descriptor;
};

/// Every tunable of the tracker. Defaults reproduce the published setup where
/// it is stated (lambda, Mahalanobis gate, max age, gallery size, confidence
/// cut); the rest are conventional choices.
struct TrackerConfig {
  double lambda = 0.0;
  double mahalanobis_threshold = 9.4877;
  double cosine_threshold = 0.2;
  int max_age = 30;
  int n_init = 3;
  int gallery_budget = 100;
  double min_confidence = 0.3;
  double iou_max_cost = 0.7;
  int feature_dim = 128;
  // When false the appearance cascade is skipped and every candidate track
  // is associated through the IoU stage only.
  bool use_appearance_cascade = true;

  void validate() const {
    auto fail = [](const std::string& key, const std::string& why) {
      throw Error(ErrorKind::InvalidConfig, key + ": " + why);
    };
    if (!(lambda >= 0.0 && lambda <= 1.0)) fail("lambda", "must lie in [0, 1]");
    // Admissible costs must stay below the 1e5 gating sentinel.
    if (!(mahalanobis_threshold > 0.0 && mahalanobis_threshold < 1e5)) {
      fail("mahalanobis_threshold", "must lie in (0, 1e5)");
    }
    if (!(cosine_threshold > 0.0 && cosine_threshold < 1e5)) fail("cosine_threshold", "must lie in (0, 1e5)");
    if (max_age < 1) fail("max_age", "must be >= 1");
    if (n_init < 1) fail("n_init", "must be >= 1");
    if (gallery_budget < 1) fail("gallery_budget", "must be >= 1");
    if (!(iou_max_cost > 0.0 && iou_max_cost <= 1.0)) fail("iou_max_cost", "must lie in (0, 1]");
    if (feature_dim < 1) fail("feature_dim", "must be >= 1");
    if (!std::isfinite(min_confidence)) fail("min_confidence", "must be finite");
  }

  friend bool operator==(const TrackerConfig&, const TrackerConfig&) = default;
};

}  // namespace cmot
