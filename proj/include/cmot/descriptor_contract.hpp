#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cmot/error.hpp"

namespace cmot {

// Shape bookkeeping for the appearance network. Nothing here computes
// features; it only checks that a layer list produces the sizes it claims.

enum class LayerKind { Conv, MaxPool, Residual, Dense, Normalize };

inline std::string_view to_string(LayerKind k) {
  switch (k) {
    case LayerKind::Conv: return "conv";
    case LayerKind::MaxPool: return "max_pool";
    case LayerKind::Residual: return "residual";
    case LayerKind::Dense: return "dense";
    case LayerKind::Normalize: return "normalize";
  }
  return "unknown";
}

inline LayerKind layer_kind_from_string(std::string_view s) {
  if (s == "conv") return LayerKind::Conv;
  if (s == "max_pool") return LayerKind::MaxPool;
  if (s == "residual") return LayerKind::Residual;
  if (s == "dense") return LayerKind::Dense;
  if (s == "normalize") return LayerKind::Normalize;
  throw Error(ErrorKind::InvalidSpec, "unknown layer kind '" + std::string(s) + "'");
}

struct LayerSpec {
  std::string name;
  LayerKind kind = LayerKind::Conv;
  int kernel = 3;  // square kernel side
  int stride = 1;
  // Output channels for conv/residual, output width for dense. Pooling keeps
  // its input channels; if given, it must agree.
  std::optional<int> output_channels;
};

/// (C, H, W) for feature maps, (N) after a dense layer.
using Shape = std::vector<std::size_t>;

inline std::string format_shape(const Shape& s) {
  std::string out;
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (k) out += 'x';
    out += std::to_string(s[k]);
  }
  return out;
}

/// Output shape after every layer. Spatial layers use same padding, so a
/// stride s maps H to ceil(H / s).
inline std::vector<Shape> propagate_shapes(std::span<const LayerSpec> layers, const Shape& input) {
  if (layers.empty()) throw Error(ErrorKind::InvalidSpec, "layer list is empty");
  if (input.size() != 3 || input[0] == 0 || input[1] == 0 || input[2] == 0) {
    throw Error(ErrorKind::InvalidSpec, "input shape must be a non-empty (channels, height, width)");
  }
  std::vector<Shape> out;
  out.reserve(layers.size());
  Shape cur = input;
  for (const LayerSpec& l : layers) {
    auto bad = [&](const std::string& why) {
      throw Error(ErrorKind::InvalidSpec, "layer '" + l.name + "': " + why);
    };
    if (l.stride < 1) bad("stride must be >= 1");
    switch (l.kind) {
      case LayerKind::Conv:
      case LayerKind::Residual:
      case LayerKind::MaxPool: {
        if (cur.size() != 3) bad("spatial layer after the feature map was flattened");
        if (l.kernel < 1) bad("kernel must be >= 1");
        std::size_t channels = cur[0];
        if (l.kind == LayerKind::MaxPool) {
          if (l.output_channels && static_cast<std::size_t>(*l.output_channels) != cur[0]) {
            bad("pooling cannot change the channel count");
          }
        } else {
          if (l.kernel % 2 == 0) bad("kernel must be odd");
          if (!l.output_channels || *l.output_channels < 1) bad("output_channels must be positive");
          channels = static_cast<std::size_t>(*l.output_channels);
        }
        const auto s = static_cast<std::size_t>(l.stride);
        cur = {channels, (cur[1] + s - 1) / s, (cur[2] + s - 1) / s};
        break;
      }
      case LayerKind::Dense:
        if (!l.output_channels || *l.output_channels < 1) bad("dense width must be positive");
        cur = {static_cast<std::size_t>(*l.output_channels)};
        break;
      case LayerKind::Normalize:
        break;
    }
    out.push_back(cur);
  }
  return out;
}

/// The published re-identification network: 128x64 RGB crops to a 128-d
/// unit-norm embedding.
inline std::vector<LayerSpec> reid_architecture() {
  return {
      {"Conv 1", LayerKind::Conv, 3, 1, 32},
      {"Conv 2", LayerKind::Conv, 3, 1, 32},
      {"Max Pool 3", LayerKind::MaxPool, 3, 2, std::nullopt},
      {"Residual 4", LayerKind::Residual, 3, 1, 32},
      {"Residual 5", LayerKind::Residual, 3, 1, 32},
      {"Residual 6", LayerKind::Residual, 3, 2, 64},
      {"Residual 7", LayerKind::Residual, 3, 1, 64},
      {"Residual 8", LayerKind::Residual, 3, 2, 128},
      {"Residual 9", LayerKind::Residual, 3, 1, 128},
      {"Dense 10", LayerKind::Dense, 1, 1, 128},
      {"Batch and l2 normalization", LayerKind::Normalize, 1, 1, std::nullopt},
  };
}

inline Shape reid_input_shape() { return {3, 128, 64}; }

}  // namespace cmot
