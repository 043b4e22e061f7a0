#pragma once

#include <cstdint>
#include <string>

#include "cmot/mot_io.hpp"
#include "cmot/tracker.hpp"

namespace cmot {

/// Hue in [0, 360) from a 64-bit mix of the id; stable across runs.
inline int hue_for_id(std::uint64_t id) {
  std::uint64_t z = id + 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  z ^= z >> 31;
  return static_cast<int>(z % 360);
}

inline std::string color_for_id(std::uint64_t id) {
  return "hsl(" + std::to_string(hue_for_id(id)) + ",85%,45%)";
}

/// One SVG document for a frame: a stroked rectangle and an id label per
/// track over a blank canvas of the given size.
inline std::string render_frame_svg(const FrameOutput& frame, int width, int height) {
  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) + "\" height=\"" +
         std::to_string(height) + "\" viewBox=\"0 0 " + std::to_string(width) + " " + std::to_string(height) +
         "\">\n";
  out += "<rect class=\"canvas\" x=\"0\" y=\"0\" width=\"" + std::to_string(width) + "\" height=\"" +
         std::to_string(height) + "\" fill=\"white\"/>\n";
  out += "<text class=\"frame\" x=\"4\" y=\"16\" font-size=\"14\" fill=\"black\">frame " +
         std::to_string(frame.frame_index) + "</text>\n";
  for (const TrackOutput& t : frame.tracks) {
    const std::string color = color_for_id(t.id);
    std::string x, y, w, h;
    io_detail::append_fixed2(x, t.bbox.top_left_x);
    io_detail::append_fixed2(y, t.bbox.top_left_y);
    io_detail::append_fixed2(w, t.bbox.width);
    io_detail::append_fixed2(h, t.bbox.height);
    out += "<rect class=\"track\" data-id=\"" + std::to_string(t.id) + "\" x=\"" + x + "\" y=\"" + y +
           "\" width=\"" + w + "\" height=\"" + h + "\" fill=\"none\" stroke=\"" + color +
           "\" stroke-width=\"2\"/>\n";
    out += "<text x=\"" + x + "\" y=\"" + y + "\" dy=\"-2\" font-size=\"12\" fill=\"" + color + "\">" +
           std::to_string(t.id) + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace cmot
