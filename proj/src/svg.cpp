#include "nanomod/svg.hpp"

#include <cmath>
#include <cstdio>

#include "nanomod/errors.hpp"

namespace nanomod {

namespace {

std::string num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  // "-0.000" and "0.000" must render the same.
  if (std::string_view(buf) == "-0.000") return "0.000";
  return buf;
}

std::string escape(const std::string& s) {
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

struct Canvas {
  double scale;  // units per nm
  double height;

  double x(double nm) const { return nm * scale; }
  double y(double nm) const { return height - nm * scale; }
  std::string pt(double xn, double yn) const { return num(x(xn)) + "," + num(y(yn)); }
};

}  // namespace

std::string render_svg(const RoutedLayout& layout, const KindLibrary& kinds, double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw ConfigError("render scale must be positive");
  const Canvas cv{scale / 1000.0, static_cast<double>(layout.region.height) * scale / 1000.0};
  const std::string w = num(cv.x(static_cast<double>(layout.region.width)));
  const std::string h = num(cv.height);
  const std::string hair = num(std::max(0.001, 20.0 * cv.scale));

  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + w + "\" height=\"" + h +
         "\" viewBox=\"0 0 " + w + " " + h + "\">\n";
  out += "<rect x=\"0.000\" y=\"0.000\" width=\"" + w + "\" height=\"" + h +
         "\" fill=\"none\" stroke=\"#000000\" stroke-width=\"" + hair + "\"/>\n";

  if (!layout.components.empty()) {
    out += "<g id=\"components\">\n";
    for (const auto& c : layout.components) {
      const ComponentKind* kind = kinds.find(c.kind);
      if (!kind) throw ConfigError("layout component " + std::to_string(c.obs_id) + " has unknown kind " + c.kind);
      const OrientedRect body{{static_cast<double>(c.center.x), static_cast<double>(c.center.y)},
                              static_cast<double>(kind->body_width), static_cast<double>(kind->body_height),
                              c.theta_deg};
      out += "<polygon points=\"";
      const auto corners = body.corners();
      for (std::size_t i = 0; i < corners.size(); ++i) {
        if (i) out += ' ';
        out += cv.pt(corners[i].x, corners[i].y);
      }
      out += "\" fill=\"" + std::string(c.instance.empty() ? "#eeeeee" : "#bbccdd") +
             "\" stroke=\"#556677\" stroke-width=\"" + hair + "\"/>\n";
      for (const auto& pin : kind->pins) {
        const Vec2 r = rotate({static_cast<double>(pin.offset.x), static_cast<double>(pin.offset.y)}, c.theta_deg);
        out += "<circle cx=\"" + num(cv.x(static_cast<double>(c.center.x) + r.x)) + "\" cy=\"" +
               num(cv.y(static_cast<double>(c.center.y) + r.y)) + "\" r=\"" + num(std::sqrt(
                   static_cast<double>(pin.contact_area)) * 0.5 * cv.scale) + "\" fill=\"#333333\"/>\n";
      }
    }
    out += "</g>\n";
  }

  if (!layout.paths.empty()) {
    out += "<g id=\"wires\" fill=\"none\" stroke=\"#cc6600\" stroke-linecap=\"square\" stroke-linejoin=\"miter\">\n";
    for (const auto& p : layout.paths) {
      for (std::size_t b = 0; b < p.branches.size(); ++b) {
        const auto& pts = p.branches[b];
        const auto& ws = p.widths[b];
        for (std::size_t i = 0; i < pts.size();) {
          std::size_t k = i;
          while (k < pts.size() && ws[k] == ws[i]) ++k;
          const std::size_t from = i > 0 ? i - 1 : i;
          if (k - from >= 2) {
            out += "<polyline data-net=\"" + escape(p.net_id) + "\" stroke-width=\"" +
                   num(static_cast<double>(ws[i]) * cv.scale) + "\" points=\"";
            for (std::size_t q = from; q < k; ++q) {
              if (q > from) out += ' ';
              out += cv.pt(static_cast<double>(pts[q].x), static_cast<double>(pts[q].y));
            }
            out += "\"/>\n";
          }
          i = k;
        }
      }
    }
    out += "</g>\n";
  }

  bool any_bridge = false;
  for (const auto& p : layout.paths) any_bridge |= !p.bridges.empty();
  if (any_bridge) {
    out += "<g id=\"bridges\" fill=\"#ffffff\" stroke=\"#0044aa\" stroke-width=\"" + hair + "\">\n";
    const double side = 2.0 * static_cast<double>(layout.pitch);
    for (const auto& p : layout.paths) {
      for (const auto& br : p.bridges) {
        out += "<rect data-net=\"" + escape(p.net_id) + "\" data-crossed=\"" + escape(br.crossed_net) + "\" x=\"" +
               num(cv.x(static_cast<double>(br.at.x) - side / 2)) + "\" y=\"" +
               num(cv.y(static_cast<double>(br.at.y) + side / 2)) + "\" width=\"" + num(side * cv.scale) +
               "\" height=\"" + num(side * cv.scale) + "\"/>\n";
      }
    }
    out += "</g>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace nanomod
