#pragma once

// LP assembly for state-feedback gains that render a polyhedral C-set
// lambda-contractive (model- or data-based) or robustly invariant (data-based,
// bounded additive disturbance).
//
// Variable layout of every LP built here:
//   [ W (column-major, r x n) | P (row-major, n_s x n_s) | lambda ]
// where W is K (r = m) for model-based programs and G_K (r = T) for
// data-based ones. P is absent in robust programs, lambda only when minimized.

#include <Eigen/Dense>

#include <iostream>
#include <optional>
#include <string>
#include <variant>

#include "ddinv/errors.hpp"
#include "ddinv/experiment.hpp"
#include "ddinv/lp.hpp"
#include "ddinv/polytope.hpp"

namespace ddinv {

inline constexpr double kLambdaStrictEps = 1e-6;

struct SynthesisProblem {
  PolyhedralCSet state_set;
  InputPolytope input_set;
  std::optional<double> lambda;  // nullopt: minimize
  std::variant<PlantModel, ExperimentData> source;
  std::optional<DisturbanceSet> disturbance;

  bool data_based() const { return std::holds_alternative<ExperimentData>(source); }
  bool robust() const { return disturbance.has_value(); }
  Index state_dim() const { return state_set.dim(); }
  Index input_dim() const { return input_set.dim(); }

  void validate() const {
    const Index n = state_set.dim();
    const Index m = input_set.dim();
    if (const auto* p = std::get_if<PlantModel>(&source)) {
      if (p->state_dim() != n || p->input_dim() != m)
        throw DimensionError("problem: plant dimensions do not match the sets");
    } else {
      const auto& d = std::get<ExperimentData>(source);
      if (d.state_dim() != n || d.input_dim() != m)
        throw DimensionError("problem: data dimensions do not match the sets");
    }
    if (lambda && !(*lambda >= 0.0 && *lambda < 1.0))
      throw ValidationError("problem: lambda must lie in [0, 1)");
    if (disturbance) {
      if (!data_based()) throw ValidationError("problem: robust mode requires experiment data");
      if (disturbance->dim() != n)
        throw DimensionError("problem: disturbance dimension does not match the state");
    }
  }
};

struct Certificate {
  MatrixXd gain;                      // K, m x n
  std::optional<MatrixXd> g_matrix;   // G_K, T x n (data-based)
  std::optional<MatrixXd> p_matrix;   // P, n_s x n_s (absent in robust mode)
  double lambda = 1.0;
};

/// K = U_{0,T} G_K
inline MatrixXd extract_gain(const ExperimentData& data, const MatrixXd& g_matrix) {
  if (g_matrix.rows() != data.samples() || g_matrix.cols() != data.state_dim())
    throw DimensionError("extract_gain: G_K must be T x n");
  return data.u0t * g_matrix;
}

/// n x T matrix, zero except column j (1-based) equal to T * d.
inline MatrixXd build_delta(Index t, Index j, const VectorXd& d_vertex) {
  if (t <= 0 || j < 1 || j > t) throw DimensionError("build_delta: column index out of range");
  MatrixXd delta = MatrixXd::Zero(d_vertex.size(), t);
  delta.col(j - 1) = static_cast<double>(t) * d_vertex;
  return delta;
}

namespace detail {

// F = f_offset + f_factor * W, K = k_factor * W, optional X_{0,T} W = I_n.
struct GainParametrization {
  MatrixXd f_offset;
  MatrixXd f_factor;
  MatrixXd k_factor;
  std::optional<MatrixXd> x0t;

  Index w_rows() const { return f_factor.cols(); }
};

inline GainParametrization model_parametrization(const PlantModel& plant) {
  return {plant.a, plant.b, MatrixXd::Identity(plant.input_dim(), plant.input_dim()),
          std::nullopt};
}

inline GainParametrization data_parametrization(const ExperimentData& data) {
  return {MatrixXd::Zero(data.state_dim(), data.state_dim()), data.x1t, data.u0t, data.x0t};
}

struct Layout {
  Index r, n, ns;
  bool has_p, has_lambda;

  Index w(Index t, Index k) const { return k * r + t; }
  Index p(Index i, Index j) const { return r * n + i * ns + j; }
  Index lambda() const { return r * n + (has_p ? ns * ns : 0); }
  Index size() const { return lambda() + (has_lambda ? 1 : 0); }
};

// Rows of a·(W s) over the W variables, for a 1 x r coefficient row a.
inline void append_w_times_vertex(lp::Row& row, const Layout& lay, const Eigen::RowVectorXd& a,
                                  const VectorXd& s) {
  for (Index t = 0; t < lay.r; ++t) {
    if (a[t] == 0.0) continue;
    for (Index k = 0; k < lay.n; ++k)
      if (s[k] != 0.0) row.emplace_back(lay.w(t, k), a[t] * s[k]);
  }
}

inline void add_admissibility_rows(lp::LpBuilder& b, const Layout& lay,
                                   const GainParametrization& gp, const PolyhedralCSet& s_set,
                                   const InputPolytope& u_set) {
  const MatrixXd uk = u_set.h_matrix() * gp.k_factor;
  for (const auto& s : s_set.vertices())
    for (Index r = 0; r < uk.rows(); ++r) {
      lp::Row row;
      append_w_times_vertex(row, lay, uk.row(r), s);
      b.add_inequality(row, 1.0);
    }
}

inline void add_consistency_rows(lp::LpBuilder& b, const Layout& lay,
                                 const GainParametrization& gp) {
  if (!gp.x0t) return;
  const MatrixXd& x0 = *gp.x0t;
  for (Index l = 0; l < lay.n; ++l)
    for (Index k = 0; k < lay.n; ++k) {
      lp::Row row;
      for (Index t = 0; t < lay.r; ++t)
        if (x0(l, t) != 0.0) row.emplace_back(lay.w(t, k), x0(l, t));
      b.add_equality(row, l == k ? 1.0 : 0.0);
    }
}

// P >= 0, P 1 <= lambda 1, P S = S F, admissibility, consistency.
inline lp::LinearProgram build_contractive_lp(const GainParametrization& gp,
                                              const PolyhedralCSet& s_set,
                                              const InputPolytope& u_set,
                                              std::optional<double> lambda) {
  const MatrixXd& sh = s_set.h_matrix();
  const Layout lay{gp.w_rows(), s_set.dim(), s_set.num_rows(), true, !lambda.has_value()};
  lp::LpBuilder b(lay.size());

  for (Index i = 0; i < lay.ns; ++i)
    for (Index j = 0; j < lay.ns; ++j) b.set_bounds(lay.p(i, j), 0.0, lp::kInf);
  if (!lambda) {
    b.set_bounds(lay.lambda(), 0.0, 1.0 - kLambdaStrictEps);
    b.set_objective(lay.lambda(), 1.0);
  }

  for (Index i = 0; i < lay.ns; ++i) {
    lp::Row row;
    for (Index j = 0; j < lay.ns; ++j) row.emplace_back(lay.p(i, j), 1.0);
    if (!lambda) row.emplace_back(lay.lambda(), -1.0);
    b.add_inequality(row, lambda.value_or(0.0));
  }

  const MatrixXd sf0 = sh * gp.f_offset;
  const MatrixXd sl = sh * gp.f_factor;
  for (Index i = 0; i < lay.ns; ++i)
    for (Index k = 0; k < lay.n; ++k) {
      lp::Row row;
      for (Index j = 0; j < lay.ns; ++j)
        if (sh(j, k) != 0.0) row.emplace_back(lay.p(i, j), sh(j, k));
      for (Index t = 0; t < lay.r; ++t)
        if (sl(i, t) != 0.0) row.emplace_back(lay.w(t, k), -sl(i, t));
      b.add_equality(row, sf0(i, k));
    }

  add_admissibility_rows(b, lay, gp, s_set, u_set);
  add_consistency_rows(b, lay, gp);
  return b.build();
}

inline void check_lambda(double lambda) {
  if (!(lambda >= 0.0 && lambda < 1.0)) throw ValidationError("lambda must lie in [0, 1)");
}

inline void check_sets(Index n, Index m, const PolyhedralCSet& s_set, const InputPolytope& u_set) {
  if (s_set.dim() != n) throw DimensionError("state set dimension does not match the system");
  if (u_set.dim() != m) throw DimensionError("input set dimension does not match the system");
}

}  // namespace detail

inline lp::LinearProgram build_modelbased_lp(const PlantModel& plant, const PolyhedralCSet& s_set,
                                             const InputPolytope& u_set, double lambda) {
  detail::check_lambda(lambda);
  detail::check_sets(plant.state_dim(), plant.input_dim(), s_set, u_set);
  return detail::build_contractive_lp(detail::model_parametrization(plant), s_set, u_set, lambda);
}

inline lp::LinearProgram build_databased_lp(const ExperimentData& data, const PolyhedralCSet& s_set,
                                            const InputPolytope& u_set, double lambda) {
  detail::check_lambda(lambda);
  detail::check_sets(data.state_dim(), data.input_dim(), s_set, u_set);
  return detail::build_contractive_lp(detail::data_parametrization(data), s_set, u_set, lambda);
}

struct RobustOptions {
  /// Above this many inequality rows a diagnostic is written to std::clog.
  std::size_t row_cap = 200000;
};

/// Robust invariance LP in G_K only: for every vertex s of S, vertex w of D,
/// sample j and disturbance vertex d_i,
///   S (X_{1,T} - delta_ji) G_K s <= 1 - S w,
/// plus input admissibility at the vertices and X_{0,T} G_K = I_n.
inline lp::LinearProgram build_robust_lp(const ExperimentData& data, const PolyhedralCSet& s_set,
                                         const InputPolytope& u_set, const DisturbanceSet& d_set,
                                         const RobustOptions& opts = {}) {
  detail::check_sets(data.state_dim(), data.input_dim(), s_set, u_set);
  if (d_set.dim() != data.state_dim())
    throw DimensionError("build_robust_lp: disturbance dimension does not match the state");

  const auto gp = detail::data_parametrization(data);
  const Index t_len = data.samples();
  const detail::Layout lay{t_len, s_set.dim(), s_set.num_rows(), false, false};
  const MatrixXd& sh = s_set.h_matrix();
  const auto& sv = s_set.vertices();
  const auto& dv = d_set.vertices();

  const std::size_t rows = static_cast<std::size_t>(lay.ns) * sv.size() * dv.size() *
                               static_cast<std::size_t>(t_len) +
                           static_cast<std::size_t>(u_set.num_rows()) * sv.size();
  if (rows > opts.row_cap)
    std::clog << "warning: robust LP has " << rows << " inequality rows (cap " << opts.row_cap
              << ")\n";

  // Each row r only sees the worst w, so the w loop collapses to
  // 1 - max_w S_r w.
  VectorXd rhs = VectorXd::Constant(lay.ns, lp::kInf);
  for (const auto& w : dv) rhs = rhs.cwiseMin(VectorXd::Ones(lay.ns) - sh * w);

  lp::LpBuilder b(lay.size());
  const MatrixXd sx1 = sh * data.x1t;
  for (const auto& s : sv)
    for (Index j = 1; j <= t_len; ++j)
      for (const auto& d : dv) {
        // S delta_ji only differs from zero in column j.
        MatrixXd m = sx1;
        m.col(j - 1) -= static_cast<double>(t_len) * (sh * d);
        for (Index r = 0; r < lay.ns; ++r) {
          lp::Row row;
          detail::append_w_times_vertex(row, lay, m.row(r), s);
          b.add_inequality(row, rhs[r]);
        }
      }
  detail::add_admissibility_rows(b, lay, gp, s_set, u_set);
  detail::add_consistency_rows(b, lay, gp);
  return b.build();
}

namespace detail {

inline lp::LpSolution solve_or_throw(const lp::LinearProgram& prog, const char* what) {
  auto sol = lp::solve(prog);
  switch (sol.status) {
    case lp::Status::Optimal:
    case lp::Status::Feasible: return sol;
    case lp::Status::Infeasible:
      throw InfeasibleProblem(std::string(what) + ": linear program is infeasible");
    case lp::Status::IterationLimit:
      throw SolverFailure(std::string(what) + ": iteration limit reached");
    case lp::Status::Unbounded:
      throw SolverFailure(std::string(what) + ": linear program reported unbounded");
  }
  throw SolverFailure(what);
}

inline Certificate decode(const SynthesisProblem& problem, const VectorXd& z, bool has_p,
                          bool has_lambda, double fixed_lambda) {
  const Index n = problem.state_dim();
  const Index ns = problem.state_set.num_rows();
  Index r = problem.input_dim();
  if (const auto* d = std::get_if<ExperimentData>(&problem.source)) r = d->samples();
  const Layout lay{r, n, ns, has_p, has_lambda};

  MatrixXd w(r, n);
  for (Index t = 0; t < r; ++t)
    for (Index k = 0; k < n; ++k) w(t, k) = z[lay.w(t, k)];

  Certificate cert;
  if (const auto* d = std::get_if<ExperimentData>(&problem.source)) {
    cert.gain = extract_gain(*d, w);
    cert.g_matrix = w;
  } else {
    cert.gain = w;
  }
  if (has_p) {
    MatrixXd p(ns, ns);
    for (Index i = 0; i < ns; ++i)
      for (Index j = 0; j < ns; ++j) p(i, j) = std::max(0.0, z[lay.p(i, j)]);
    cert.p_matrix = p;
  }
  cert.lambda = has_lambda ? z[lay.lambda()] : fixed_lambda;
  return cert;
}

inline GainParametrization parametrization(const SynthesisProblem& problem) {
  if (const auto* d = std::get_if<ExperimentData>(&problem.source))
    return data_parametrization(*d);
  return model_parametrization(std::get<PlantModel>(problem.source));
}

}  // namespace detail

/// Smallest lambda in [0, 1 - eps] for which the contractivity LP is feasible,
/// solved as a single LP with lambda as a decision variable.
inline Certificate minimize_lambda(const SynthesisProblem& problem) {
  problem.validate();
  if (problem.robust())
    throw ValidationError("minimize_lambda: not available in robust mode");
  const auto prog = detail::build_contractive_lp(detail::parametrization(problem),
                                                 problem.state_set, problem.input_set,
                                                 std::nullopt);
  const auto sol = detail::solve_or_throw(prog, "minimize_lambda");
  return detail::decode(problem, *sol.primal, true, true, 0.0);
}

/// Dispatches to the model-based, data-based or robust program.
inline Certificate synthesize(const SynthesisProblem& problem,
                              const RobustOptions& robust_opts = {}) {
  problem.validate();
  if (problem.robust()) {
    const auto& data = std::get<ExperimentData>(problem.source);
    const auto prog = build_robust_lp(data, problem.state_set, problem.input_set,
                                      *problem.disturbance, robust_opts);
    const auto sol = detail::solve_or_throw(prog, "robust synthesis");
    return detail::decode(problem, *sol.primal, false, false, 1.0);
  }
  if (!problem.lambda) return minimize_lambda(problem);
  const auto prog = detail::build_contractive_lp(detail::parametrization(problem),
                                                 problem.state_set, problem.input_set,
                                                 problem.lambda);
  const auto sol = detail::solve_or_throw(prog, "synthesis");
  return detail::decode(problem, *sol.primal, true, false, *problem.lambda);
}

/// A + BK expressed through data: X_{1,T} G_K (exact for noiseless data).
inline MatrixXd closed_loop_from_data(const ExperimentData& data, const MatrixXd& g_matrix) {
  if (g_matrix.rows() != data.samples() || g_matrix.cols() != data.state_dim())
    throw DimensionError("closed_loop_from_data: G_K must be T x n");
  return data.x1t * g_matrix;
}

}  // namespace ddinv
