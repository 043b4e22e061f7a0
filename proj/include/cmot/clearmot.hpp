#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "cmot/assignment.hpp"
#include "cmot/core.hpp"
#include "cmot/error.hpp"
#include "cmot/mot_io.hpp"
#include "cmot/tracker.hpp"

namespace cmot {

// CLEAR-MOT accounting.
//
// Per frame, ground-truth objects are matched to hypotheses at IoU >= 0.5:
// correspondences from the previous frame are kept first when they still
// overlap enough, the remainder is solved as a min-cost assignment on
// 1 - IoU. Identity switches compare against the last hypothesis a
// ground-truth object was matched to, however long ago.

struct GtBox {
  int id = 0;
  BoundingBox bbox;
};

struct HypBox {
  std::uint64_t id = 0;
  BoundingBox bbox;
};

using Correspondence = std::map<int, std::uint64_t>;  // gt id -> hypothesis id

struct FrameMatch {
  struct Pair {
    int gt_id;
    std::uint64_t hyp_id;
    double overlap;
  };
  std::vector<Pair> pairs;
  std::vector<int> unmatched_gt;
  std::vector<std::uint64_t> unmatched_hyp;
  Correspondence correspondence;

  std::size_t false_positives() const { return unmatched_hyp.size(); }
  std::size_t false_negatives() const { return unmatched_gt.size(); }
};

inline FrameMatch match_frame(std::span<const GtBox> gt, std::span<const HypBox> hyp,
                              const Correspondence& previous, double iou_threshold = 0.5) {
  FrameMatch out;
  std::vector<char> gt_used(gt.size(), 0), hyp_used(hyp.size(), 0);

  for (std::size_t g = 0; g < gt.size(); ++g) {
    const auto prev = previous.find(gt[g].id);
    if (prev == previous.end()) continue;
    for (std::size_t h = 0; h < hyp.size(); ++h) {
      if (hyp_used[h] || hyp[h].id != prev->second) continue;
      const double o = iou(gt[g].bbox, hyp[h].bbox);
      if (o >= iou_threshold) {
        out.pairs.push_back({gt[g].id, hyp[h].id, o});
        gt_used[g] = hyp_used[h] = 1;
      }
      break;
    }
  }

  std::vector<std::size_t> rows, cols;
  for (std::size_t g = 0; g < gt.size(); ++g) {
    if (!gt_used[g]) rows.push_back(g);
  }
  for (std::size_t h = 0; h < hyp.size(); ++h) {
    if (!hyp_used[h]) cols.push_back(h);
  }
  if (!rows.empty() && !cols.empty()) {
    Eigen::MatrixXd overlap(static_cast<Eigen::Index>(gt.size()), static_cast<Eigen::Index>(hyp.size()));
    Eigen::MatrixXd cost(overlap.rows(), overlap.cols());
    for (Eigen::Index g = 0; g < overlap.rows(); ++g) {
      for (Eigen::Index h = 0; h < overlap.cols(); ++h) {
        const double o = iou(gt[static_cast<std::size_t>(g)].bbox, hyp[static_cast<std::size_t>(h)].bbox);
        overlap(g, h) = o;
        // Pairs below the threshold can never count; pricing them out keeps
        // the solver from trading a valid pair for cardinality.
        cost(g, h) = o >= iou_threshold ? 1.0 - o : 1e5;
      }
    }
    const AssignmentResult solved = min_cost_matching(cost, rows, cols);
    for (const auto& [g, h] : solved.pairs) {
      const double o = overlap(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(h));
      if (o < iou_threshold) continue;
      out.pairs.push_back({gt[g].id, hyp[h].id, o});
      gt_used[g] = hyp_used[h] = 1;
    }
  }

  for (std::size_t g = 0; g < gt.size(); ++g) {
    if (!gt_used[g]) out.unmatched_gt.push_back(gt[g].id);
  }
  for (std::size_t h = 0; h < hyp.size(); ++h) {
    if (!hyp_used[h]) out.unmatched_hyp.push_back(hyp[h].id);
  }
  for (const auto& p : out.pairs) out.correspondence[p.gt_id] = p.hyp_id;
  return out;
}

struct MetricsReport {
  double mota = 0.0;
  double motp = 0.0;
  double mt = 0.0;  // fraction of ground-truth tracks
  double ml = 0.0;  // fraction of ground-truth tracks
  std::size_t id_switches = 0;
  std::size_t fragmentations = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;

  // Supporting counts.
  std::size_t matches = 0;
  std::size_t gt_boxes = 0;
  std::size_t hyp_boxes = 0;
  std::size_t gt_tracks = 0;
};

/// Running CLEAR-MOT events over one sequence. Feed frames in order.
class EventAccumulator {
 public:
  struct GtTrackStats {
    std::size_t frames_present = 0;
    std::size_t frames_matched = 0;
    std::optional<std::uint64_t> last_matched_hypothesis;
    std::size_t interruption_count = 0;
    bool matched_last_present = false;
  };

  explicit EventAccumulator(double iou_threshold = 0.5) : iou_threshold_(iou_threshold) {}

  /// Accounts one frame. `ignored` are regions that must not produce false
  /// positives (e.g. non-pedestrian annotations): hypotheses left unmatched
  /// but overlapping one at the threshold are dropped from the frame.
  const FrameMatch& update(std::span<const GtBox> gt, std::span<const HypBox> hyp,
                           std::span<const BoundingBox> ignored = {}) {
    last_ = match_frame(gt, hyp, previous_, iou_threshold_);

    if (!ignored.empty()) {
      std::erase_if(last_.unmatched_hyp, [&](std::uint64_t id) {
        for (const HypBox& h : hyp) {
          if (h.id != id) continue;
          for (const BoundingBox& b : ignored) {
            if (iou(h.bbox, b) >= iou_threshold_) return true;
          }
        }
        return false;
      });
    }

    false_positives_ += last_.false_positives();
    false_negatives_ += last_.false_negatives();
    gt_boxes_ += gt.size();
    hyp_boxes_ += last_.pairs.size() + last_.unmatched_hyp.size();
    matches_ += last_.pairs.size();
    for (const auto& p : last_.pairs) overlap_sum_ += p.overlap;

    for (const GtBox& g : gt) {
      GtTrackStats& s = gt_tracks_[g.id];
      ++s.frames_present;
      const auto it = last_.correspondence.find(g.id);
      if (it == last_.correspondence.end()) {
        s.matched_last_present = false;
        continue;
      }
      ++s.frames_matched;
      if (s.last_matched_hypothesis) {
        if (*s.last_matched_hypothesis != it->second) ++id_switches_;
        if (!s.matched_last_present) ++s.interruption_count;
      }
      s.last_matched_hypothesis = it->second;
      s.matched_last_present = true;
    }
    previous_ = last_.correspondence;
    return last_;
  }

  const std::map<int, GtTrackStats>& gt_tracks() const { return gt_tracks_; }

  MetricsReport report() const {
    if (gt_boxes_ == 0) throw Error(ErrorKind::EmptyGroundTruth, "no ground-truth boxes to evaluate");
    MetricsReport r;
    r.false_positives = false_positives_;
    r.false_negatives = false_negatives_;
    r.id_switches = id_switches_;
    r.matches = matches_;
    r.gt_boxes = gt_boxes_;
    r.hyp_boxes = hyp_boxes_;
    r.gt_tracks = gt_tracks_.size();
    r.mota = 1.0 - static_cast<double>(false_negatives_ + false_positives_ + id_switches_) /
                       static_cast<double>(gt_boxes_);
    r.motp = matches_ > 0 ? overlap_sum_ / static_cast<double>(matches_) : 0.0;
    std::size_t mostly_tracked = 0, mostly_lost = 0;
    for (const auto& [id, s] : gt_tracks_) {
      r.fragmentations += s.interruption_count;
      const double ratio = static_cast<double>(s.frames_matched) / static_cast<double>(s.frames_present);
      if (ratio >= 0.8) ++mostly_tracked;
      if (ratio <= 0.2) ++mostly_lost;
    }
    r.mt = static_cast<double>(mostly_tracked) / static_cast<double>(gt_tracks_.size());
    r.ml = static_cast<double>(mostly_lost) / static_cast<double>(gt_tracks_.size());
    return r;
  }

 private:
  double iou_threshold_;
  Correspondence previous_;
  FrameMatch last_;
  std::map<int, GtTrackStats> gt_tracks_;
  std::size_t false_positives_ = 0;
  std::size_t false_negatives_ = 0;
  std::size_t id_switches_ = 0;
  std::size_t matches_ = 0;
  std::size_t gt_boxes_ = 0;
  std::size_t hyp_boxes_ = 0;
  double overlap_sum_ = 0.0;
};

/// Evaluates a result sequence against ground truth. Frames present in only
/// one of the inputs simply contribute misses or false positives. Ground
/// truth rows marked invalid act as ignore regions.
inline MetricsReport evaluate_sequence(const std::map<int, std::vector<GroundTruthRecord>>& gt,
                                       std::span<const FrameOutput> results, double iou_threshold = 0.5) {
  std::map<int, const FrameOutput*> by_frame;
  for (const FrameOutput& fo : results) by_frame[fo.frame_index] = &fo;
  std::set<int> frames;
  for (const auto& [f, _] : gt) frames.insert(f);
  for (const auto& [f, _] : by_frame) frames.insert(f);

  EventAccumulator acc(iou_threshold);
  std::vector<GtBox> gt_boxes;
  std::vector<HypBox> hyp_boxes;
  std::vector<BoundingBox> ignored;
  for (int f : frames) {
    gt_boxes.clear();
    hyp_boxes.clear();
    ignored.clear();
    if (const auto it = gt.find(f); it != gt.end()) {
      for (const GroundTruthRecord& r : it->second) {
        if (r.valid) {
          gt_boxes.push_back({r.gt_id, r.bbox});
        } else {
          ignored.push_back(r.bbox);
        }
      }
    }
    if (const auto it = by_frame.find(f); it != by_frame.end()) {
      for (const TrackOutput& t : it->second->tracks) hyp_boxes.push_back({t.id, t.bbox});
    }
    acc.update(gt_boxes, hyp_boxes, ignored);
  }
  return acc.report();
}

}  // namespace cmot
