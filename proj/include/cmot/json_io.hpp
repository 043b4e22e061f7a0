#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "cmot/clearmot.hpp"
#include "cmot/core.hpp"
#include "cmot/descriptor_contract.hpp"
#include "cmot/error.hpp"

namespace cmot {

using json = nlohmann::json;

inline json config_to_json(const TrackerConfig& c) {
  return json{{"lambda", c.lambda},
              {"mahalanobis_threshold", c.mahalanobis_threshold},
              {"cosine_threshold", c.cosine_threshold},
              {"max_age", c.max_age},
              {"n_init", c.n_init},
              {"gallery_budget", c.gallery_budget},
              {"min_confidence", c.min_confidence},
              {"iou_max_cost", c.iou_max_cost},
              {"feature_dim", c.feature_dim},
              {"use_appearance_cascade", c.use_appearance_cascade}};
}

/// Overrides `base` with the keys of a flat JSON object. Unknown keys and
/// mistyped values are rejected with the offending key in the message.
inline TrackerConfig config_from_json(const json& j, TrackerConfig base = {}) {
  if (!j.is_object()) throw Error(ErrorKind::InvalidConfig, "config must be a JSON object");
  auto number = [](const std::string& key, const json& v) {
    if (!v.is_number()) throw Error(ErrorKind::InvalidConfig, key + ": expected a number");
    return v.get<double>();
  };
  auto integer = [](const std::string& key, const json& v) {
    if (!v.is_number_integer()) throw Error(ErrorKind::InvalidConfig, key + ": expected an integer");
    return v.get<int>();
  };
  for (const auto& [key, v] : j.items()) {
    if (key == "lambda") base.lambda = number(key, v);
    else if (key == "mahalanobis_threshold") base.mahalanobis_threshold = number(key, v);
    else if (key == "cosine_threshold") base.cosine_threshold = number(key, v);
    else if (key == "max_age") base.max_age = integer(key, v);
    else if (key == "n_init") base.n_init = integer(key, v);
    else if (key == "gallery_budget") base.gallery_budget = integer(key, v);
    else if (key == "min_confidence") base.min_confidence = number(key, v);
    else if (key == "iou_max_cost") base.iou_max_cost = number(key, v);
    else if (key == "feature_dim") base.feature_dim = integer(key, v);
    else if (key == "use_appearance_cascade") {
      if (!v.is_boolean()) throw Error(ErrorKind::InvalidConfig, key + ": expected a boolean");
      base.use_appearance_cascade = v.get<bool>();
    } else {
      throw Error(ErrorKind::InvalidConfig, key + ": unknown config key");
    }
  }
  base.validate();
  return base;
}

inline json report_to_json(const MetricsReport& r) {
  return json{{"mota", r.mota},
              {"motp", r.motp},
              {"mt", r.mt},
              {"ml", r.ml},
              {"id_switches", r.id_switches},
              {"fragmentations", r.fragmentations},
              {"false_positives", r.false_positives},
              {"false_negatives", r.false_negatives}};
}

/// Layer list as `[{"name": ..., "kind": "conv", "kernel": 3, "stride": 1,
/// "output_channels": 32}, ...]`; kernel and stride default to 3 and 1.
inline std::vector<LayerSpec> layers_from_json(const json& j) {
  if (!j.is_array()) throw Error(ErrorKind::InvalidSpec, "layer description must be a JSON array");
  std::vector<LayerSpec> out;
  for (const json& e : j) {
    if (!e.is_object() || !e.contains("kind") || !e["kind"].is_string()) {
      throw Error(ErrorKind::InvalidSpec, "each layer needs a string 'kind'");
    }
    LayerSpec l;
    l.name = e.value("name", std::string(e["kind"].get<std::string>()));
    l.kind = layer_kind_from_string(e["kind"].get<std::string>());
    try {
      l.kernel = e.value("kernel", 3);
      l.stride = e.value("stride", 1);
      if (e.contains("output_channels")) l.output_channels = e["output_channels"].get<int>();
    } catch (const json::exception& ex) {
      throw Error(ErrorKind::InvalidSpec, "layer '" + l.name + "': " + ex.what());
    }
    out.push_back(std::move(l));
  }
  return out;
}

inline json layers_to_json(const std::vector<LayerSpec>& layers) {
  json out = json::array();
  for (const LayerSpec& l : layers) {
    json e{{"name", l.name}, {"kind", std::string(to_string(l.kind))}, {"kernel", l.kernel}, {"stride", l.stride}};
    if (l.output_channels) e["output_channels"] = *l.output_channels;
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace cmot
