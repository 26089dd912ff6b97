#pragma once

// Minimal SVG emitters for trajectory plots.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ddinv/experiment.hpp"
#include "ddinv/polytope.hpp"

namespace ddinv::svg {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::Vector2d;
using Eigen::VectorXd;

inline constexpr double kNestedFloor = 0.05;
inline constexpr int kMaxNested = 200;

namespace detail {

// Andrew's monotone chain; counter-clockwise, no repeated endpoint.
inline std::vector<Vector2d> convex_hull(std::vector<Vector2d> pts) {
  std::sort(pts.begin(), pts.end(), [](const Vector2d& a, const Vector2d& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  if (pts.size() < 3) return pts;
  auto cross = [](const Vector2d& o, const Vector2d& a, const Vector2d& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
  };
  std::vector<Vector2d> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

inline Vector2d project(const VectorXd& x) {
  return {x[0], x.size() > 1 ? x[1] : 0.0};
}

inline std::string points_attr(const std::vector<Vector2d>& pts, double scale = 1.0) {
  std::ostringstream ss;
  ss.precision(6);
  for (std::size_t i = 0; i < pts.size(); ++i)
    ss << (i ? " " : "") << scale * pts[i].x() << "," << -scale * pts[i].y();
  return ss.str();
}

}  // namespace detail

/// Outline of S in the (x_1, x_2) plane: the polygon itself for n = 2, the
/// hull of the projected vertices otherwise.
inline std::vector<Vector2d> planar_outline(const PolyhedralCSet& s) {
  std::vector<Vector2d> pts;
  for (const auto& v : s.vertices()) pts.push_back(detail::project(v));
  return detail::convex_hull(std::move(pts));
}

/// S, the nested sets lambda^k S while lambda^k >= 0.05, and the trajectory.
/// World y points up; the viewbox is the bounding box of S inflated by 10%.
inline std::string state_plot(const PolyhedralCSet& s, double lambda, const Sequence& traj) {
  const auto outline = planar_outline(s);
  Vector2d lo = outline.front(), hi = outline.front();
  for (const auto& p : outline) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const Vector2d pad = 0.1 * (hi - lo);
  lo -= pad;
  hi += pad;
  const Vector2d size = hi - lo;
  const double marker = 0.006 * std::max(size.x(), size.y());

  std::ostringstream ss;
  ss.precision(6);
  ss << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"600\" height=\""
     << std::lround(600.0 * size.y() / size.x()) << "\" viewBox=\"" << lo.x() << " " << -hi.y()
     << " " << size.x() << " " << size.y() << "\">\n";
  ss << "<rect x=\"" << lo.x() << "\" y=\"" << -hi.y() << "\" width=\"" << size.x()
     << "\" height=\"" << size.y() << "\" fill=\"white\"/>\n";
  ss << "<polygon points=\"" << detail::points_attr(outline)
     << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\" vector-effect=\"non-scaling-stroke\"/>\n";
  if (lambda > 0.0 && lambda < 1.0) {
    double scale = lambda;
    for (int k = 1; k <= kMaxNested && scale >= kNestedFloor; ++k, scale *= lambda)
      ss << "<polygon points=\"" << detail::points_attr(outline, scale)
         << "\" fill=\"none\" stroke=\"green\" stroke-dasharray=\"2,3\" stroke-width=\"1\" "
            "vector-effect=\"non-scaling-stroke\"/>\n";
  }
  std::vector<Vector2d> path;
  for (const auto& x : traj) path.push_back(detail::project(x));
  if (!path.empty()) {
    ss << "<polyline points=\"" << detail::points_attr(path)
       << "\" fill=\"none\" stroke=\"blue\" stroke-width=\"1\" vector-effect=\"non-scaling-stroke\"/>\n";
    for (const auto& p : path)
      ss << "<circle cx=\"" << p.x() << "\" cy=\"" << -p.y() << "\" r=\"" << marker
         << "\" fill=\"blue\"/>\n";
  }
  ss << "</svg>\n";
  return ss.str();
}

/// Admissible interval of a scalar input under U u <= 1.
inline std::pair<double, double> scalar_input_bounds(const MatrixXd& u_h) {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < u_h.rows(); ++i) {
    const double c = u_h(i, 0);
    if (c > 0) hi = std::min(hi, 1.0 / c);
    if (c < 0) lo = std::max(lo, 1.0 / c);
  }
  return {lo, hi};
}

/// u(t) against time with the admissible bounds dashed.
inline std::string input_plot(const Sequence& inputs, double lo, double hi) {
  double top = hi, bottom = lo;
  for (const auto& u : inputs) {
    top = std::max(top, u[0]);
    bottom = std::min(bottom, u[0]);
  }
  if (!std::isfinite(top) || !std::isfinite(bottom)) {
    top = bottom = 0.0;
    for (const auto& u : inputs) {
      top = std::max(top, u[0]);
      bottom = std::min(bottom, u[0]);
    }
  }
  if (top - bottom < 1e-12) {
    top += 1.0;
    bottom -= 1.0;
  }
  const double w = 600.0, h = 300.0, margin = 30.0;
  const double steps = std::max<double>(1.0, static_cast<double>(inputs.size()) - 1.0);
  auto px = [&](double t) { return margin + (w - 2 * margin) * t / steps; };
  auto py = [&](double u) { return h - margin - (h - 2 * margin) * (u - bottom) / (top - bottom); };

  std::ostringstream ss;
  ss.precision(6);
  ss << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
     << "\" viewBox=\"0 0 " << w << " " << h << "\">\n";
  ss << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n";
  for (double b : {lo, hi})
    if (std::isfinite(b))
      ss << "<line x1=\"" << px(0) << "\" y1=\"" << py(b) << "\" x2=\"" << px(steps) << "\" y2=\""
         << py(b) << "\" stroke=\"red\" stroke-dasharray=\"4,4\"/>\n";
  ss << "<line x1=\"" << px(0) << "\" y1=\"" << py(0) << "\" x2=\"" << px(steps) << "\" y2=\""
     << py(0) << "\" stroke=\"gray\" stroke-width=\"0.5\"/>\n";
  ss << "<polyline fill=\"none\" stroke=\"blue\" points=\"";
  for (std::size_t t = 0; t < inputs.size(); ++t)
    ss << (t ? " " : "") << px(static_cast<double>(t)) << "," << py(inputs[t][0]);
  ss << "\"/>\n";
  for (std::size_t t = 0; t < inputs.size(); ++t)
    ss << "<circle cx=\"" << px(static_cast<double>(t)) << "\" cy=\"" << py(inputs[t][0])
       << "\" r=\"2\" fill=\"blue\"/>\n";
  ss << "</svg>\n";
  return ss.str();
}

}  // namespace ddinv::svg
