#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "cmot/assignment.hpp"
#include "cmot/assoc_metrics.hpp"
#include "cmot/core.hpp"
#include "cmot/error.hpp"
#include "cmot/kalman.hpp"
#include "cmot/track.hpp"

namespace cmot {

/// Result of one association stage. Track and detection entries are indices
/// into the spans handed to the stage.
struct MatchSet {
  std::vector<std::pair<std::size_t, std::size_t>> matches;  // (track, detection)
  std::vector<std::size_t> unmatched_tracks;
  std::vector<std::size_t> unmatched_detections;
};

struct TrackOutput {
  std::uint64_t id = 0;
  BoundingBox bbox;

  friend bool operator==(const TrackOutput&, const TrackOutput&) = default;
};

struct FrameOutput {
  int frame_index = 0;
  std::vector<TrackOutput> tracks;  // ascending id

  friend bool operator==(const FrameOutput&, const FrameOutput&) = default;
};

/// Age-prioritized association of confirmed tracks. Tracks with
/// time_since_update == 1 pick first, then 2, and so on up to max_age; each
/// level only sees detections left over by the previous levels. Solver pairs
/// outside the combined gate are discarded.
inline MatchSet matching_cascade(std::span<const Track> tracks, std::span<const Detection> detections,
                                 const TrackerConfig& cfg, const KalmanFilter& kf = {}) {
  MatchSet out;
  std::vector<std::size_t> confirmed;
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    if (tracks[i].confirmed()) confirmed.push_back(i);
  }
  std::vector<std::size_t> unmatched = detail::all_indices(detections.size());
  if (confirmed.empty() || detections.empty()) {
    out.unmatched_tracks = confirmed;
    out.unmatched_detections = unmatched;
    return out;
  }

  // Rows follow `confirmed`, columns follow `detections`.
  const CostMatrices costs = build_cost_matrices(tracks, confirmed, detections, cfg, kf);

  std::vector<char> track_matched(confirmed.size(), 0);
  for (int level = 1; level <= cfg.max_age && !unmatched.empty(); ++level) {
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < confirmed.size(); ++r) {
      if (tracks[confirmed[r]].time_since_update == level) rows.push_back(r);
    }
    if (rows.empty()) continue;

    const AssignmentResult solved = min_cost_matching(costs.cost, rows, unmatched);
    std::vector<char> taken(detections.size(), 0);
    for (const auto& [r, c] : solved.pairs) {
      if (!costs.admissible(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c))) continue;
      out.matches.emplace_back(confirmed[r], c);
      track_matched[r] = 1;
      taken[c] = 1;
    }
    std::erase_if(unmatched, [&](std::size_t c) { return taken[c] != 0; });
  }

  for (std::size_t r = 0; r < confirmed.size(); ++r) {
    if (!track_matched[r]) out.unmatched_tracks.push_back(confirmed[r]);
  }
  out.unmatched_detections = std::move(unmatched);
  return out;
}

/// Overlap-based association of every tentative track plus the confirmed
/// tracks in `unmatched_tracks` that were last associated one frame ago.
/// Confirmed tracks outside that set pass through as unmatched.
inline MatchSet iou_stage(std::span<const Track> tracks, std::span<const std::size_t> unmatched_tracks,
                          std::span<const Detection> detections,
                          std::span<const std::size_t> unmatched_detections, const TrackerConfig& cfg) {
  MatchSet out;
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    if (tracks[i].tentative()) candidates.push_back(i);
  }
  for (std::size_t i : unmatched_tracks) {
    if (tracks[i].confirmed() && tracks[i].time_since_update == 1) {
      candidates.push_back(i);
    } else if (!tracks[i].tentative()) {
      out.unmatched_tracks.push_back(i);
    }
  }
  std::sort(candidates.begin(), candidates.end());

  // Detections are addressed through `unmatched_detections`; build the
  // overlap matrix against the full detection list and restrict columns.
  CostMatrices costs = iou_cost_matrix(tracks, candidates, detections, cfg);
  apply_gating_sentinel(costs);
  std::vector<std::size_t> rows = detail::all_indices(candidates.size());
  const AssignmentResult solved = min_cost_matching(costs.cost, rows, unmatched_detections);

  std::vector<char> row_matched(candidates.size(), 0);
  std::vector<char> det_matched(detections.size(), 0);
  for (const auto& [r, c] : solved.pairs) {
    if (!costs.admissible(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c))) continue;
    out.matches.emplace_back(candidates[r], c);
    row_matched[r] = 1;
    det_matched[c] = 1;
  }
  for (std::size_t r = 0; r < candidates.size(); ++r) {
    if (!row_matched[r]) out.unmatched_tracks.push_back(candidates[r]);
  }
  std::sort(out.unmatched_tracks.begin(), out.unmatched_tracks.end());
  for (std::size_t c : unmatched_detections) {
    if (!det_matched[c]) out.unmatched_detections.push_back(c);
  }
  return out;
}

/// Online tracker: one instance per sequence, `step` called once per frame in
/// order. Not thread-safe; instances share nothing.
class Tracker {
 public:
  explicit Tracker(TrackerConfig cfg = {}, KalmanFilter kf = {}) : cfg_(std::move(cfg)), kf_(kf) {
    cfg_.validate();
  }

  const TrackerConfig& config() const { return cfg_; }
  const std::vector<Track>& tracks() const { return tracks_; }
  std::uint64_t next_id() const { return next_id_; }

  /// Advances the tracker by one frame. Detections must already be filtered
  /// by confidence. On error the tracker is left exactly as before the call.
  FrameOutput step(std::span<const Detection> detections, int frame_index) {
    validate_detections(detections);

    // 1. Predict in place, keeping what is needed to roll back.
    std::vector<std::pair<StateDistribution, int>> saved;
    saved.reserve(tracks_.size());
    for (Track& t : tracks_) {
      saved.emplace_back(t.state, t.time_since_update);
      t.state = kf_.predict(t.state);
      ++t.time_since_update;
    }

    std::vector<std::pair<std::size_t, std::size_t>> matches;
    std::vector<std::size_t> unmatched_tracks;
    std::vector<std::size_t> unmatched_dets;
    std::vector<StateDistribution> updated;
    try {
      // 2. Appearance cascade over confirmed tracks.
      MatchSet cascade;
      if (cfg_.use_appearance_cascade) {
        cascade = matching_cascade(tracks_, detections, cfg_, kf_);
      } else {
        for (std::size_t i = 0; i < tracks_.size(); ++i) {
          if (tracks_[i].confirmed()) cascade.unmatched_tracks.push_back(i);
        }
        cascade.unmatched_detections = detail::all_indices(detections.size());
      }
      // 3. IoU fallback.
      MatchSet overlap =
          iou_stage(tracks_, cascade.unmatched_tracks, detections, cascade.unmatched_detections, cfg_);

      matches = std::move(cascade.matches);
      matches.insert(matches.end(), overlap.matches.begin(), overlap.matches.end());
      unmatched_tracks = std::move(overlap.unmatched_tracks);
      unmatched_dets = std::move(overlap.unmatched_detections);

      updated.reserve(matches.size());
      for (const auto& [ti, di] : matches) {
        try {
          updated.push_back(kf_.update(tracks_[ti].state, bbox_to_xyah(detections[di].bbox)));
        } catch (const Error& e) {
          throw Error(e.kind(), "track " + std::to_string(tracks_[ti].id) + ": " + e.message());
        }
      }
    } catch (...) {
      for (std::size_t i = 0; i < tracks_.size(); ++i) {
        tracks_[i].state = saved[i].first;
        tracks_[i].time_since_update = saved[i].second;
      }
      throw;
    }

    // 4. Commit associations.
    for (std::size_t k = 0; k < matches.size(); ++k) {
      const auto [ti, di] = matches[k];
      Track& t = tracks_[ti];
      t.state = updated[k];
      if (detections[di].descriptor) t.gallery.append(*detections[di].descriptor);
      t.time_since_update = 0;
      ++t.hits;
      if (t.tentative() && t.hits >= cfg_.n_init) t.status = TrackStatus::Confirmed;
    }

    // 5. Lifecycle.
    for (std::size_t ti : unmatched_tracks) {
      Track& t = tracks_[ti];
      if (t.tentative() || t.time_since_update > cfg_.max_age) t.status = TrackStatus::Deleted;
    }

    // 6. Births.
    for (std::size_t di : unmatched_dets) {
      const Detection& d = detections[di];
      Track t{next_id_++, kf_.initiate(bbox_to_xyah(d.bbox)), 0, 1, TrackStatus::Tentative,
              Gallery(static_cast<std::size_t>(cfg_.gallery_budget),
                      static_cast<std::size_t>(cfg_.feature_dim))};
      if (d.descriptor) t.gallery.append(*d.descriptor);
      if (t.hits >= cfg_.n_init) t.status = TrackStatus::Confirmed;
      tracks_.push_back(std::move(t));
    }

    std::erase_if(tracks_, [](const Track& t) { return t.status == TrackStatus::Deleted; });

    // 7. Report confirmed tracks associated in this frame.
    FrameOutput out{frame_index, {}};
    for (const Track& t : tracks_) {
      if (t.confirmed() && t.time_since_update == 0) out.tracks.push_back({t.id, t.bbox()});
    }
    std::sort(out.tracks.begin(), out.tracks.end(),
              [](const TrackOutput& a, const TrackOutput& b) { return a.id < b.id; });
    return out;
  }

 private:
  void validate_detections(std::span<const Detection> detections) const {
    for (std::size_t j = 0; j < detections.size(); ++j) {
      const Detection& d = detections[j];
      if (!d.bbox.valid()) {
        throw Error(ErrorKind::InvalidDetection, "detection " + std::to_string(j) + " has a degenerate box");
      }
      if (d.descriptor) {
        if (d.descriptor->dim() != static_cast<std::size_t>(cfg_.feature_dim)) {
          throw Error(ErrorKind::DimensionMismatch,
                      "detection " + std::to_string(j) + " descriptor dimension differs from feature_dim");
        }
      } else if (cfg_.use_appearance_cascade) {
        throw Error(ErrorKind::MissingDescriptor,
                    "detection " + std::to_string(j) +
                        " has no appearance descriptor (required unless use_appearance_cascade is false)");
      }
    }
  }

  TrackerConfig cfg_;
  KalmanFilter kf_;
  std::vector<Track> tracks_;
  std::uint64_t next_id_ = 1;
};

}  // namespace cmot
