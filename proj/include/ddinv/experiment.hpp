#pragma once

#include <Eigen/Dense>

#include <optional>
#include <random>
#include <vector>

#include "ddinv/errors.hpp"
#include "ddinv/polytope.hpp"

namespace ddinv {

using Sequence = std::vector<VectorXd>;

/// x+ = A x + B u. Used for data generation and the model-based baseline only.
struct PlantModel {
  MatrixXd a;
  MatrixXd b;

  PlantModel(MatrixXd a_matrix, MatrixXd b_matrix) : a(std::move(a_matrix)), b(std::move(b_matrix)) {
    if (a.rows() != a.cols() || a.rows() == 0)
      throw DimensionError("PlantModel: A must be square and non-empty");
    if (b.rows() != a.rows() || b.cols() == 0)
      throw DimensionError("PlantModel: B must have n rows and at least one column");
  }
  Index state_dim() const { return a.rows(); }
  Index input_dim() const { return b.cols(); }
};

/// U_{0,T}, X_{0,T}, X_{1,T} from one experiment.
struct ExperimentData {
  MatrixXd u0t;
  MatrixXd x0t;
  MatrixXd x1t;

  ExperimentData(MatrixXd u, MatrixXd x0, MatrixXd x1)
      : u0t(std::move(u)), x0t(std::move(x0)), x1t(std::move(x1)) {
    if (u0t.cols() == 0 || u0t.cols() != x0t.cols() || x0t.cols() != x1t.cols())
      throw DimensionError("ExperimentData: column counts must agree and be positive");
    if (x0t.rows() != x1t.rows() || x0t.rows() == 0 || u0t.rows() == 0)
      throw DimensionError("ExperimentData: inconsistent row counts");
  }
  Index samples() const { return u0t.cols(); }
  Index state_dim() const { return x0t.rows(); }
  Index input_dim() const { return u0t.rows(); }
  /// [U_{0,T}; X_{0,T}]
  MatrixXd theta() const {
    MatrixXd t(input_dim() + state_dim(), samples());
    t << u0t, x0t;
    return t;
  }
};

/// Returns x(0..T) for x(t+1) = A x(t) + B u(t) (+ d(t)).
inline Sequence simulate(const PlantModel& plant, const VectorXd& x0, const Sequence& inputs,
                         const std::optional<Sequence>& disturbances = std::nullopt) {
  if (inputs.empty()) throw DimensionError("simulate: need at least one input sample");
  if (x0.size() != plant.state_dim()) throw DimensionError("simulate: x0 has wrong dimension");
  if (disturbances && disturbances->size() != inputs.size())
    throw DimensionError("simulate: disturbance length must equal input length");
  Sequence x;
  x.reserve(inputs.size() + 1);
  x.push_back(x0);
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    if (inputs[t].size() != plant.input_dim())
      throw DimensionError("simulate: input sample has wrong dimension");
    VectorXd next = plant.a * x.back() + plant.b * inputs[t];
    if (disturbances) {
      if ((*disturbances)[t].size() != plant.state_dim())
        throw DimensionError("simulate: disturbance sample has wrong dimension");
      next += (*disturbances)[t];
    }
    x.push_back(std::move(next));
  }
  return x;
}

inline MatrixXd stack_columns(const Sequence& seq, std::size_t first, std::size_t count) {
  MatrixXd m(seq.at(first).size(), static_cast<Index>(count));
  for (std::size_t c = 0; c < count; ++c) m.col(static_cast<Index>(c)) = seq.at(first + c);
  return m;
}

inline ExperimentData build_data_matrices(const Sequence& inputs, const Sequence& states) {
  if (inputs.empty() || states.size() != inputs.size() + 1)
    throw DimensionError("build_data_matrices: need T >= 1 inputs and T + 1 states");
  const std::size_t t = inputs.size();
  return {stack_columns(inputs, 0, t), stack_columns(states, 0, t), stack_columns(states, 1, t)};
}

/// Block Hankel matrix: block (r, c) is z(start + r + c), r < depth, c < width.
inline MatrixXd hankel(const Sequence& seq, Index start, Index depth, Index width) {
  if (start < 0 || depth <= 0 || width <= 0)
    throw DimensionError("hankel: start must be >= 0, depth and width positive");
  if (start + depth + width - 1 > static_cast<Index>(seq.size()))
    throw DimensionError("hankel: sequence too short");
  const Index sigma = seq[start].size();
  MatrixXd h(sigma * depth, width);
  for (Index r = 0; r < depth; ++r)
    for (Index c = 0; c < width; ++c) {
      const auto& z = seq[start + r + c];
      if (z.size() != sigma) throw DimensionError("hankel: inconsistent sample dimension");
      h.block(r * sigma, c, sigma, 1) = z;
    }
  return h;
}

inline constexpr double kRankTol = 1e-9;

inline Index numerical_rank(const MatrixXd& m) { return detail::numerical_rank(m, kRankTol); }

/// Depth-L Hankel of the input has full row rank sigma*L.
inline bool is_persistently_exciting(const Sequence& inputs, Index order) {
  if (inputs.empty() || order <= 0) return false;
  const Index t = static_cast<Index>(inputs.size());
  const Index sigma = inputs.front().size();
  const Index width = t - order + 1;
  if (width < sigma * order) return false;
  return numerical_rank(hankel(inputs, 0, order, width)) == sigma * order;
}

/// Largest L with the input persistently exciting of order L (0 if none).
inline Index excitation_order(const Sequence& inputs) {
  Index best = 0;
  for (Index l = 1; l <= static_cast<Index>(inputs.size()); ++l) {
    if (!is_persistently_exciting(inputs, l)) break;
    best = l;
  }
  return best;
}

inline bool theta_has_full_row_rank(const ExperimentData& data) {
  const Index need = data.input_dim() + data.state_dim();
  if (data.samples() < need) return false;
  return numerical_rank(data.theta()) == need;
}

/// Minimum experiment length for persistency of excitation of order n+1.
inline Index minimum_samples(Index n, Index m) { return (m + 1) * n + m; }

inline MatrixXd controllability_matrix(const PlantModel& plant) {
  const Index n = plant.state_dim(), m = plant.input_dim();
  MatrixXd c(n, n * m);
  MatrixXd block = plant.b;
  for (Index k = 0; k < n; ++k) {
    c.middleCols(k * m, m) = block;
    block = plant.a * block;
  }
  return c;
}

inline bool is_controllable(const PlantModel& plant) {
  return numerical_rank(controllability_matrix(plant)) == plant.state_dim();
}

// ---------------------------------------------------------------------------
// Seeded data generation
// ---------------------------------------------------------------------------

using Rng = std::mt19937_64;

/// T i.i.d. samples uniform on [lo, hi]^m.
inline Sequence uniform_inputs(Rng& rng, Index m, Index t, double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Sequence u(static_cast<std::size_t>(t), VectorXd(m));
  for (auto& v : u)
    for (Index i = 0; i < m; ++i) v[i] = lo == hi ? lo : dist(rng);
  return u;
}

/// Random convex combinations of the vertices of D.
inline Sequence sample_disturbances(Rng& rng, const DisturbanceSet& set, Index t) {
  std::exponential_distribution<double> expo(1.0);
  const auto& vs = set.vertices();
  Sequence d(static_cast<std::size_t>(t), VectorXd::Zero(set.dim()));
  for (auto& v : d) {
    std::vector<double> w(vs.size());
    double total = 0.0;
    for (auto& wi : w) total += (wi = expo(rng));
    for (std::size_t i = 0; i < vs.size(); ++i) v += (w[i] / total) * vs[i];
  }
  return d;
}

/// Rejection-sampled controllable pair with entries uniform on [-scale, scale].
inline PlantModel random_controllable_plant(Rng& rng, Index n, Index m, double scale = 1.0) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  for (;;) {
    MatrixXd a(n, n), b(n, m);
    for (Index i = 0; i < a.size(); ++i) a.data()[i] = dist(rng);
    for (Index i = 0; i < b.size(); ++i) b.data()[i] = dist(rng);
    PlantModel p(a, b);
    if (is_controllable(p)) return p;
  }
}

}  // namespace ddinv
