#pragma once

#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "fpp/domain.hpp"
#include "fpp/lattice.hpp"
#include "fpp/probes.hpp"

namespace fpp {

// Minimal SVG writer over lattice coordinates; y grows upward on the page.
class SvgCanvas {
 public:
  explicit SvgCanvas(Box view, double scale = 8.0) : view_(view.expanded(1)), scale_(scale) {}

  // Domain vertices inside the window as one rectangle per row run.
  void domain(const Domain& d) {
    const Box w = d.window();
    for (int y = w.y0; y <= w.y1; ++y) {
      int x = w.x0;
      while (x <= w.x1) {
        if (!d.contains({x, y})) {
          ++x;
          continue;
        }
        int end = x;
        while (end + 1 <= w.x1 && d.contains({end + 1, y})) ++end;
        body_ << "<rect class=\"domain\" x=\"" << num(px(x - 0.5)) << "\" y=\"" << num(py(y + 0.5)) << "\" width=\""
              << num((end - x + 1) * scale_) << "\" height=\"" << num(scale_) << "\"/>\n";
        x = end + 1;
      }
    }
  }

  // The dual boundary path inside the window, drawn as one path.
  void boundary(const Domain& d) {
    std::ostringstream p;
    for (const DualEdge& de : d.dual_path()) {
      const Edge& e = de.primal;
      const double mx = (e.low().x + e.high().x) / 2.0, my = (e.low().y + e.high().y) / 2.0;
      const bool horizontal = e.low().y == e.high().y;
      const double ax = horizontal ? mx : mx - 0.5, ay = horizontal ? my - 0.5 : my;
      const double bx = horizontal ? mx : mx + 0.5, by = horizontal ? my + 0.5 : my;
      p << 'M' << num(px(ax)) << ' ' << num(py(ay)) << 'L' << num(px(bx)) << ' ' << num(py(by));
    }
    if (!p.str().empty()) body_ << "<path class=\"boundary\" d=\"" << p.str() << "\"/>\n";
  }

  // Many directed edges as a single path element.
  void edges(const std::vector<DirectedEdge>& es, const std::string& cls) {
    if (es.empty()) return;
    std::ostringstream p;
    for (const DirectedEdge& e : es) p << segment(e.tail, e.head);
    body_ << "<path class=\"" << cls << "\" d=\"" << p.str() << "\"/>\n";
  }

  // A ray or geodesic, one path element per edge.
  void path(const Path& path, const std::string& cls) {
    for (std::size_t i = 0; i + 1 < path.vertices.size(); ++i)
      body_ << "<path class=\"" << cls << "\" d=\"" << segment(path.vertices[i], path.vertices[i + 1]) << "\"/>\n";
  }

  void marker(Vertex v, const std::string& cls) {
    body_ << "<circle class=\"" << cls << "\" cx=\"" << num(px(v.x)) << "\" cy=\"" << num(py(v.y)) << "\" r=\""
          << num(scale_ * 0.3) << "\"/>\n";
  }

  void label(Vertex v, const std::string& text) {
    body_ << "<text x=\"" << num(px(v.x)) << "\" y=\"" << num(py(v.y)) << "\">" << text << "</text>\n";
  }

  // Circuit polygon plus its center, annotated with the winding number recomputed here.
  void circuit(const CircuitWitness& w, Vertex center) {
    std::vector<Vertex> poly = w.vertices;
    Vertex probe = center * 2;
    if (!w.closed && !poly.empty()) {
      const Vertex last = poly.back(), first = poly.front();
      const int step = first.x > last.x ? 1 : -1;
      for (int x = last.x + step; x != first.x; x += step) poly.push_back({x, center.y});
      probe = probe + Vertex{0, 1};
    }
    std::ostringstream pts;
    for (std::size_t i = 0; i < w.vertices.size(); ++i)
      pts << (i ? " " : "") << num(px(w.vertices[i].x)) << ',' << num(py(w.vertices[i].y));
    body_ << '<' << (w.closed ? "polygon" : "polyline") << " class=\"circuit\" points=\"" << pts.str() << "\"/>\n";
    marker(center, "center");
    label(center, "winding " + std::to_string(winding_number(poly, probe)));
  }

  std::string str() const {
    std::ostringstream os;
    const double width = view_.width() * scale_, height = view_.height() * scale_;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\"" << num(height)
       << "\" viewBox=\"0 0 " << num(width) << ' ' << num(height) << "\">\n"
       << "<style>.domain{fill:#eef2f7}.boundary{stroke:#c0392b;stroke-width:2;fill:none}"
          ".graph{stroke:#7f8c8d;stroke-width:1;fill:none}.ray{stroke:#2c3e50;stroke-width:2;fill:none}"
          ".circuit{stroke:#27ae60;stroke-width:2;fill:none}.center{fill:#8e44ad}"
          "text{font:10px sans-serif}</style>\n"
       << body_.str() << "</svg>\n";
    return os.str();
  }

 private:
  double px(double x) const { return (x - view_.x0 + 0.5) * scale_; }
  double py(double y) const { return (view_.y1 - y + 0.5) * scale_; }

  std::string segment(Vertex a, Vertex b) const {
    return "M" + num(px(a.x)) + " " + num(py(a.y)) + "L" + num(px(b.x)) + " " + num(py(b.y));
  }

  static std::string num(double v) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << v;
    std::string s = os.str();
    while (!s.empty() && s.back() == '0') s.pop_back();
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
  }

  Box view_;
  double scale_;
  std::ostringstream body_;
};

}  // namespace fpp
