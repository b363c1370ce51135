#pragma once

#include <algorithm>
#include <cstdio>
#include <string>
#include <vector>

#include "vft/scene.hpp"

namespace vft {

struct ArrowAnnotation {
  Vec2 from;
  Vec2 to;
};

struct GraspAnnotation {
  Vec2 center;
  double theta = 0.0;  // closing axis
  double opening = 8.5;
};

struct LabelAnnotation {
  Vec2 at;
  std::string text;
};

struct Annotations {
  std::vector<ArrowAnnotation> arrows;
  std::vector<GraspAnnotation> grasps;
  std::vector<LabelAnnotation> labels;
  std::string title;
};

namespace detail {

inline std::string fmt_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  std::string s = buf;
  if (s == "-0.000") s = "0.000";
  return s;
}

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// World cm to SVG pixels; SVG y grows downward, so y is flipped.
struct SvgFrame {
  double side;
  double scale;
  std::string x(double v) const { return fmt_num(v * scale); }
  std::string y(double v) const { return fmt_num((side - v) * scale); }
  std::string pt(Vec2 p) const { return x(p.x) + "," + y(p.y); }
};

}  // namespace detail

// Deterministic SVG: workspace, objects in id order, then arrows, grasp
// glyphs and labels in the order given. Each arrow is a single <path>.
inline std::string render_svg(const Scene& scene, const Annotations& notes = {}, double px_per_cm = 10.0) {
  const detail::SvgFrame f{scene.side(), px_per_cm};
  const std::string size = detail::fmt_num(scene.side() * px_per_cm);
  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + size + "\" height=\"" + size +
         "\" viewBox=\"0 0 " + size + " " + size + "\">\n";
  out += "<style>.workspace{fill:#f4f1ea;stroke:#444;stroke-width:2}"
         ".object{fill:#c8a165;stroke:#5a4220;stroke-width:1}"
         ".target{fill:#2f8f4e;stroke:#124023;stroke-width:1.5}"
         ".arrow{fill:none;stroke:#7b3fb5;stroke-width:3;stroke-linecap:round;stroke-linejoin:round}"
         ".grasp rect{fill:#1f5fa8;fill-opacity:0.7}"
         ".grasp line{stroke:#1f5fa8;stroke-dasharray:4 3}"
         "text{font-family:monospace;font-size:14px}</style>\n";
  out += "<rect class=\"workspace\" x=\"0\" y=\"0\" width=\"" + size + "\" height=\"" + size + "\"/>\n";
  for (const PlacedObject& o : scene.objects()) {
    out += "<polygon class=\"" + std::string(o.is_target() ? "target" : "object") + "\" data-id=\"" +
           detail::xml_escape(o.id()) + "\" points=\"";
    for (std::size_t i = 0; i < o.footprint.size(); ++i) {
      if (i) out += ' ';
      out += f.pt(o.footprint[i]);
    }
    out += "\"/>\n";
  }
  for (const ArrowAnnotation& a : notes.arrows) {
    const Vec2 d = a.to - a.from;
    const double len = norm(d);
    std::string path = "M" + f.pt(a.from) + " L" + f.pt(a.to);
    if (len > 1e-9) {
      const Vec2 u = d / len;
      const double head = std::min(1.2, 0.4 * len);
      const Vec2 l = a.to - rotate(u, kPi / 7) * head;
      const Vec2 r = a.to - rotate(u, -kPi / 7) * head;
      path += " M" + f.pt(l) + " L" + f.pt(a.to) + " L" + f.pt(r);
    }
    out += "<path class=\"arrow\" d=\"" + path + "\"/>\n";
  }
  for (const GraspAnnotation& g : notes.grasps) {
    const Vec2 u = unit_from_angle(g.theta);
    out += "<g class=\"grasp\">";
    const Vec2 a = g.center - u * (g.opening / 2);
    const Vec2 b = g.center + u * (g.opening / 2);
    out += "<line x1=\"" + f.x(a.x) + "\" y1=\"" + f.y(a.y) + "\" x2=\"" + f.x(b.x) + "\" y2=\"" + f.y(b.y) + "\"/>";
    for (double side : {-1.0, 1.0}) {
      const Vec2 c = g.center + u * (side * (g.opening / 2 + 0.5));
      const ConvexPolygon finger = oriented_rect(c, u, 1.0, 2.0);
      out += "<polygon points=\"";
      for (std::size_t i = 0; i < finger.size(); ++i) {
        if (i) out += ' ';
        out += f.pt(finger[i]);
      }
      out += "\" style=\"fill:#1f5fa8;fill-opacity:0.7\"/>";
    }
    out += "</g>\n";
  }
  for (const LabelAnnotation& l : notes.labels) {
    out += "<text x=\"" + f.x(l.at.x) + "\" y=\"" + f.y(l.at.y) + "\">" + detail::xml_escape(l.text) + "</text>\n";
  }
  if (!notes.title.empty()) {
    out += "<text x=\"8\" y=\"20\">" + detail::xml_escape(notes.title) + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace vft
