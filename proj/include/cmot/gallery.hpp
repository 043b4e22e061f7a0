#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cmot/core.hpp"
#include "cmot/error.hpp"

namespace cmot {

/// FIFO of the most recent appearance descriptors associated with a track.
/// Stored column-wise in a fixed ring so that distances to a batch of
/// queries reduce to one matrix product.
class Gallery {
 public:
  Gallery(std::size_t budget, std::size_t dim)
      : ring_(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(budget))),
        budget_(budget) {
    if (budget == 0) throw Error(ErrorKind::InvalidConfig, "gallery_budget: must be >= 1");
  }

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return budget_; }
  std::size_t dim() const { return static_cast<std::size_t>(ring_.rows()); }
  bool empty() const { return size_ == 0; }

  void append(const AppearanceDescriptor& r) {
    if (r.dim() != dim()) {
      throw Error(ErrorKind::DimensionMismatch, "descriptor dimension " + std::to_string(r.dim()) +
                                                    " does not match gallery dimension " +
                                                    std::to_string(dim()));
    }
    const std::size_t slot = (head_ + size_) % budget_;
    ring_.col(static_cast<Eigen::Index>(slot)) = r.components();
    if (size_ < budget_) {
      ++size_;
    } else {
      head_ = (head_ + 1) % budget_;
    }
  }

  /// Entry `k`, 0 being the oldest retained descriptor.
  Eigen::VectorXd entry(std::size_t k) const {
    return ring_.col(static_cast<Eigen::Index>((head_ + k) % budget_));
  }

  std::vector<Eigen::VectorXd> entries() const {
    std::vector<Eigen::VectorXd> out;
    out.reserve(size_);
    for (std::size_t k = 0; k < size_; ++k) out.push_back(entry(k));
    return out;
  }

  /// Smallest cosine distance 1 - r^T r_k over the gallery.
  double cosine_distance(const AppearanceDescriptor& r) const {
    Eigen::MatrixXd q = r.components();
    return cosine_distances(q)(0);
  }

  /// Smallest cosine distance for every column of `queries` (dim x M).
  Eigen::RowVectorXd cosine_distances(const Eigen::MatrixXd& queries) const {
    if (empty()) throw Error(ErrorKind::EmptyGallery, "gallery has no descriptors");
    if (static_cast<std::size_t>(queries.rows()) != dim()) {
      throw Error(ErrorKind::DimensionMismatch, "query dimension does not match gallery");
    }
    // The product always spans the whole ring so each entry's dot product is
    // rounded the same way however full the gallery is; adding an entry can
    // then never raise the minimum. Occupied slots are the leading columns
    // because the ring only wraps once it is full.
    const Eigen::MatrixXd similarity = ring_.transpose() * queries;
    const auto occupied = similarity.topRows(static_cast<Eigen::Index>(size_));
    return (1.0 - occupied.colwise().maxCoeff().array()).matrix();
  }

 private:
  Eigen::MatrixXd ring_;
  std::size_t budget_;
  std::size_t head_ = 0;
  std::size_t size_ = 0;
};

}  // namespace cmot
