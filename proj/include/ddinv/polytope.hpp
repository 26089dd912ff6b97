#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ddinv/errors.hpp"
#include "ddinv/lp.hpp"

namespace ddinv {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

inline constexpr double kVertexDedupTol = 1e-7;

namespace detail {

// Calls f(indices) for every k-subset of {0..n-1} in lexicographic order.
template <typename F>
void for_each_subset(Index n, Index k, F&& f) {
  if (k > n || k <= 0) return;
  std::vector<Index> idx(k);
  for (Index i = 0; i < k; ++i) idx[i] = i;
  for (;;) {
    f(idx);
    Index i = k - 1;
    while (i >= 0 && idx[i] == n - k + i) --i;
    if (i < 0) return;
    ++idx[i];
    for (Index j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

inline Index numerical_rank(const MatrixXd& m, double rel_tol = 1e-9) {
  if (m.size() == 0) return 0;
  Eigen::ColPivHouseholderQR<MatrixXd> qr(m);
  qr.setThreshold(rel_tol);
  return qr.rank();
}

inline double row_tol(const MatrixXd& h) {
  return 1e-9 * std::max(1.0, h.cwiseAbs().maxCoeff());
}

// Rejects {x : h x <= 1} if max ±e_i·x is unbounded for some coordinate.
inline void require_bounded(const MatrixXd& h) {
  const Index n = h.cols();
  for (Index i = 0; i < n; ++i) {
    for (double sign : {1.0, -1.0}) {
      VectorXd c = VectorXd::Zero(n);
      c[i] = -sign;
      lp::LinearProgram prog(c, MatrixXd(0, n), VectorXd(0), h, VectorXd::Ones(h.rows()),
                             VectorXd::Constant(n, -lp::kInf), VectorXd::Constant(n, lp::kInf));
      const auto sol = lp::solve(prog);
      if (sol.status == lp::Status::Unbounded)
        throw UnboundedSetError("polyhedron {x : Sx <= 1} is unbounded along coordinate " +
                                std::to_string(i));
      if (sol.status != lp::Status::Optimal)
        throw SolverFailure(std::string("boundedness test failed: ") + lp::to_string(sol.status));
    }
  }
}

}  // namespace detail

/// Vertices of {x : h x <= 1} by enumerating all n-row subsets.
///
/// Requires full column rank; throws UnboundedSetError when the polyhedron
/// has a recession direction.
inline std::vector<VectorXd> enumerate_vertices(const MatrixXd& h) {
  const Index n = h.cols();
  if (h.rows() == 0 || n == 0) throw DimensionError("enumerate_vertices: empty H-matrix");
  if (detail::numerical_rank(h) < n)
    throw RankDeficientError("enumerate_vertices: H-matrix does not have full column rank");
  detail::require_bounded(h);

  const double tol = detail::row_tol(h);
  std::vector<VectorXd> out;
  MatrixXd sub(n, n);
  detail::for_each_subset(h.rows(), n, [&](const std::vector<Index>& rows) {
    for (Index k = 0; k < n; ++k) sub.row(k) = h.row(rows[k]);
    Eigen::FullPivLU<MatrixXd> lu(sub);
    if (!lu.isInvertible()) return;
    const VectorXd v = lu.solve(VectorXd::Ones(n));
    if (!v.allFinite() || (h * v).maxCoeff() > 1.0 + tol) return;
    for (const auto& w : out)
      if ((w - v).norm() <= kVertexDedupTol) return;
    out.push_back(v);
  });
  return out;
}

/// Compact polyhedral set {x : Sx <= 1} with the origin in its interior.
class PolyhedralCSet {
 public:
  /// Validates rank, boundedness and caches the vertex list.
  static PolyhedralCSet validate(MatrixXd h) {
    const Index n = h.cols();
    if (h.rows() == 0 || n == 0) throw DimensionError("C-set: empty H-matrix");
    if (!h.allFinite()) throw ValidationError("C-set: non-finite entries");
    if (h.rows() < n + 1)
      throw UnboundedSetError("C-set: " + std::to_string(h.rows()) +
                              " rows cannot bound R^" + std::to_string(n));
    if (detail::numerical_rank(h) < n)
      throw RankDeficientError("C-set: H-matrix rank is below the state dimension");
    auto vertices = enumerate_vertices(h);
    const double tol = detail::row_tol(h);
    for (const auto& v : vertices) {
      const VectorXd s = h * v;
      Index active = 0;
      for (Index i = 0; i < s.size(); ++i)
        if (std::abs(s[i] - 1.0) <= 1e3 * tol) ++active;
      if (active < n) throw ValidationError("C-set: vertex with fewer than n active rows");
    }
    return PolyhedralCSet(std::move(h), std::move(vertices));
  }

  const MatrixXd& h_matrix() const { return h_; }
  const std::vector<VectorXd>& vertices() const { return vertices_; }
  Index dim() const { return h_.cols(); }
  Index num_rows() const { return h_.rows(); }

 private:
  PolyhedralCSet(MatrixXd h, std::vector<VectorXd> v) : h_(std::move(h)), vertices_(std::move(v)) {}

  MatrixXd h_;
  std::vector<VectorXd> vertices_;
};

/// Minkowski functional of S: max(0, max_i S_i x).
inline double gauge(const PolyhedralCSet& set, const VectorXd& x) {
  if (x.size() != set.dim()) throw DimensionError("gauge: dimension mismatch");
  return std::max(0.0, (set.h_matrix() * x).maxCoeff());
}

/// Membership in scale·S with additive tolerance.
inline bool contains(const PolyhedralCSet& set, const VectorXd& x, double scale = 1.0,
                     double tol = 1e-9) {
  if (x.size() != set.dim()) throw DimensionError("contains: dimension mismatch");
  return ((set.h_matrix() * x).array() <= scale + tol).all();
}

/// {u : Uu <= 1}; needs no boundedness.
class InputPolytope {
 public:
  static InputPolytope validate(MatrixXd h) {
    if (h.rows() == 0 || h.cols() == 0) throw DimensionError("input set: empty H-matrix");
    if (!h.allFinite()) throw ValidationError("input set: non-finite entries");
    return InputPolytope(std::move(h));
  }
  const MatrixXd& h_matrix() const { return h_; }
  Index dim() const { return h_.cols(); }
  Index num_rows() const { return h_.rows(); }

 private:
  explicit InputPolytope(MatrixXd h) : h_(std::move(h)) {}
  MatrixXd h_;
};

/// Disturbance polytope in vertex form.
class DisturbanceSet {
 public:
  /// Requires the origin in the convex hull. A hull with empty interior
  /// (e.g. the single vertex {0}) is accepted and flagged by origin_interior().
  static DisturbanceSet validate(std::vector<VectorXd> vertices) {
    if (vertices.empty()) throw ValidationError("disturbance set: needs at least one vertex");
    const Index n = vertices.front().size();
    if (n == 0) throw DimensionError("disturbance set: zero-dimensional vertices");
    for (const auto& v : vertices) {
      if (v.size() != n) throw DimensionError("disturbance set: inconsistent vertex dimension");
      if (!v.allFinite()) throw ValidationError("disturbance set: non-finite vertex");
    }
    // max t  s.t.  alpha_i >= t, sum alpha = 1, sum alpha_i d_i = 0.
    const Index nd = static_cast<Index>(vertices.size());
    lp::LpBuilder b(nd + 1);
    const Index t = nd;
    b.set_objective(t, -1.0);
    b.set_bounds(t, -lp::kInf, 1.0);
    lp::Row sum;
    for (Index i = 0; i < nd; ++i) {
      b.set_bounds(i, 0.0, lp::kInf);
      sum.emplace_back(i, 1.0);
      b.add_inequality({{t, 1.0}, {i, -1.0}}, 0.0);
    }
    b.add_equality(sum, 1.0);
    for (Index k = 0; k < n; ++k) {
      lp::Row r;
      for (Index i = 0; i < nd; ++i) r.emplace_back(i, vertices[i][k]);
      b.add_equality(r, 0.0);
    }
    const auto sol = lp::solve(b.build());
    if (sol.status != lp::Status::Optimal || (*sol.primal)[t] < -1e-9)
      throw ValidationError("disturbance set: origin is not in the convex hull of the vertices");
    MatrixXd stacked(n, nd);
    for (Index i = 0; i < nd; ++i) stacked.col(i) = vertices[i];
    const bool interior = (*sol.primal)[t] > 1e-9 && detail::numerical_rank(stacked) == n;
    return DisturbanceSet(std::move(vertices), interior);
  }

  /// Axis-aligned box [-radius, radius]^n.
  static DisturbanceSet box(Index n, double radius) {
    std::vector<VectorXd> v;
    for (Index mask = 0; mask < (Index{1} << n); ++mask) {
      VectorXd d(n);
      for (Index k = 0; k < n; ++k) d[k] = ((mask >> k) & 1) ? radius : -radius;
      v.push_back(d);
    }
    return validate(std::move(v));
  }

  const std::vector<VectorXd>& vertices() const { return vertices_; }
  Index dim() const { return vertices_.front().size(); }
  bool origin_interior() const { return interior_; }

 private:
  DisturbanceSet(std::vector<VectorXd> v, bool interior)
      : vertices_(std::move(v)), interior_(interior) {}
  std::vector<VectorXd> vertices_;
  bool interior_;
};

/// H-matrix of the box [-r_1, r_1] x ... x [-r_n, r_n].
inline MatrixXd box_h_matrix(const VectorXd& radii) {
  const Index n = radii.size();
  MatrixXd h = MatrixXd::Zero(2 * n, n);
  for (Index i = 0; i < n; ++i) {
    h(i, i) = 1.0 / radii[i];
    h(n + i, i) = -1.0 / radii[i];
  }
  return h;
}

/// Vertices of a 2-D C-set ordered counter-clockwise by angle.
inline std::vector<VectorXd> ordered_polygon(const PolyhedralCSet& set) {
  if (set.dim() != 2) throw DimensionError("ordered_polygon: set is not planar");
  auto v = set.vertices();
  std::sort(v.begin(), v.end(), [](const VectorXd& a, const VectorXd& b) {
    return std::atan2(a[1], a[0]) < std::atan2(b[1], b[0]);
  });
  return v;
}

}  // namespace ddinv
