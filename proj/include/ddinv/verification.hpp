#pragma once

// Independent checks of certificates and closed-loop behaviour. None of these
// reuse the synthesis LPs; the only LP here is the explicit search for a
// nonnegative P given a fixed closed-loop matrix.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>

#include "ddinv/experiment.hpp"
#include "ddinv/lp.hpp"
#include "ddinv/polytope.hpp"
#include "ddinv/synthesis.hpp"

namespace ddinv {

inline constexpr double kVerifyTol = 1e-6;

struct VerificationReport {
  bool contractivity_ok = false;
  std::optional<bool> certificate_ok;  // absent when the certificate carries no P
  bool admissibility_ok = false;
  std::optional<bool> robust_ok;
  double lambda = 1.0;
  double worst_vertex_gauge = 0.0;
  double worst_input_violation = 0.0;
  std::optional<double> lyapunov_decay_margin;

  bool passed() const {
    return contractivity_ok && certificate_ok.value_or(true) && admissibility_ok &&
           robust_ok.value_or(true);
  }
};

/// P >= 0, P 1 <= lambda 1, P S = S F, all within tol.
inline bool check_p_certificate(const MatrixXd& f, const PolyhedralCSet& s_set,
                                    const MatrixXd& p, double lambda, double tol = kVerifyTol) {
  const MatrixXd& sh = s_set.h_matrix();
  if (f.rows() != s_set.dim() || f.cols() != s_set.dim() || p.rows() != sh.rows() ||
      p.cols() != sh.rows())
    throw DimensionError("check_p_certificate: shape mismatch");
  if (p.minCoeff() < -tol) return false;
  if ((p.rowwise().sum().array() > lambda + tol).any()) return false;
  return (p * sh - sh * f).cwiseAbs().maxCoeff() <= tol;
}

struct PSearchResult {
  bool found = false;
  MatrixXd p;
  double lambda = 0.0;  // the level used, or the minimum when minimized
};

/// Searches for P >= 0 with P S = S F and P 1 <= lambda 1. With lambda
/// omitted, minimizes the largest row sum of P instead.
inline PSearchResult find_p_certificate(const MatrixXd& f, const PolyhedralCSet& s_set,
                                            std::optional<double> lambda = std::nullopt) {
  const MatrixXd& sh = s_set.h_matrix();
  const Index ns = sh.rows(), n = sh.cols();
  if (f.rows() != n || f.cols() != n) throw DimensionError("find_p_certificate: F must be n x n");
  const Index lam = ns * ns;
  lp::LpBuilder b(lam + 1);
  for (Index i = 0; i < lam; ++i) b.set_bounds(i, 0.0, lp::kInf);
  if (lambda) {
    b.set_bounds(lam, *lambda, *lambda);
  } else {
    b.set_bounds(lam, 0.0, lp::kInf);
    b.set_objective(lam, 1.0);
  }
  for (Index i = 0; i < ns; ++i) {
    lp::Row row;
    for (Index j = 0; j < ns; ++j) row.emplace_back(i * ns + j, 1.0);
    row.emplace_back(lam, -1.0);
    b.add_inequality(row, 0.0);
  }
  const MatrixXd sf = sh * f;
  for (Index i = 0; i < ns; ++i)
    for (Index k = 0; k < n; ++k) {
      lp::Row row;
      for (Index j = 0; j < ns; ++j)
        if (sh(j, k) != 0.0) row.emplace_back(i * ns + j, sh(j, k));
      b.add_equality(row, sf(i, k));
    }
  const auto sol = lp::solve(b.build());
  PSearchResult out;
  if (sol.status != lp::Status::Optimal && sol.status != lp::Status::Feasible) return out;
  out.found = true;
  out.p = MatrixXd(ns, ns);
  for (Index i = 0; i < ns; ++i)
    for (Index j = 0; j < ns; ++j) out.p(i, j) = std::max(0.0, (*sol.primal)[i * ns + j]);
  out.lambda = (*sol.primal)[lam];
  return out;
}

/// Worst gauge of F s over the vertices of S.
inline std::pair<bool, double> check_vertex_contractivity(const MatrixXd& f,
                                                          const PolyhedralCSet& s_set,
                                                          double lambda, double tol = kVerifyTol) {
  double worst = 0.0;
  for (const auto& s : s_set.vertices()) worst = std::max(worst, gauge(s_set, f * s));
  return {worst <= lambda + tol, worst};
}

/// Worst U_i K s - 1 over vertices s of S and rows of U.
inline std::pair<bool, double> check_admissibility(const MatrixXd& k, const PolyhedralCSet& s_set,
                                                   const InputPolytope& u_set,
                                                   double tol = kVerifyTol) {
  if (k.rows() != u_set.dim() || k.cols() != s_set.dim())
    throw DimensionError("check_admissibility: K must be m x n");
  double worst = -lp::kInf;
  for (const auto& s : s_set.vertices())
    worst = std::max(worst, (u_set.h_matrix() * (k * s)).maxCoeff() - 1.0);
  return {worst <= tol, worst};
}

/// F s + w in S for every vertex pair.
inline bool check_robust_invariance(const MatrixXd& f, const PolyhedralCSet& s_set,
                                    const DisturbanceSet& d_set, double tol = kVerifyTol) {
  for (const auto& s : s_set.vertices()) {
    const VectorXd fs = f * s;
    for (const auto& w : d_set.vertices())
      if (!contains(s_set, fs + w, 1.0, tol)) return false;
  }
  return true;
}

/// V(x) = max_i |S_i x|
inline double lyapunov_value(const PolyhedralCSet& s_set, const VectorXd& x) {
  if (x.size() != s_set.dim()) throw DimensionError("lyapunov_value: dimension mismatch");
  return (s_set.h_matrix() * x).cwiseAbs().maxCoeff();
}

/// V(x(t+1)) <= lambda V(x(t)) + tol along the sequence; margin is the worst
/// V(x(t+1)) - lambda V(x(t)).
inline std::pair<bool, double> check_decay_along_trajectory(const PolyhedralCSet& s_set,
                                                            const Sequence& states, double lambda,
                                                            double tol = kVerifyTol) {
  double margin = -lp::kInf;
  for (std::size_t t = 0; t + 1 < states.size(); ++t)
    margin = std::max(margin, lyapunov_value(s_set, states[t + 1]) -
                                  lambda * lyapunov_value(s_set, states[t]));
  if (states.size() < 2) margin = 0.0;
  return {margin <= tol, margin};
}

/// x(t+1) = F x(t), t = 0..steps.
inline Sequence closed_loop_trajectory(const MatrixXd& f, const VectorXd& x0, Index steps) {
  Sequence x{x0};
  for (Index t = 0; t < steps; ++t) x.push_back(f * x.back());
  return x;
}

inline constexpr Index kDecaySteps = 50;

/// Runs every check that applies to `cert` against closed-loop matrix F.
inline VerificationReport verify_certificate(const MatrixXd& f, const Certificate& cert,
                                             const PolyhedralCSet& s_set,
                                             const InputPolytope& u_set,
                                             const DisturbanceSet* d_set = nullptr,
                                             double tol = kVerifyTol) {
  if (f.rows() != s_set.dim() || f.cols() != s_set.dim())
    throw DimensionError("verify_certificate: F must be n x n");
  if (cert.gain.rows() != u_set.dim() || cert.gain.cols() != s_set.dim())
    throw DimensionError("verify_certificate: K must be m x n");
  if (cert.p_matrix &&
      (cert.p_matrix->rows() != s_set.num_rows() || cert.p_matrix->cols() != s_set.num_rows()))
    throw DimensionError("verify_certificate: P must be n_s x n_s");

  VerificationReport rep;
  rep.lambda = cert.lambda;
  std::tie(rep.contractivity_ok, rep.worst_vertex_gauge) =
      check_vertex_contractivity(f, s_set, cert.lambda, tol);
  std::tie(rep.admissibility_ok, rep.worst_input_violation) =
      check_admissibility(cert.gain, s_set, u_set, tol);
  if (cert.p_matrix) rep.certificate_ok = check_p_certificate(f, s_set, *cert.p_matrix, cert.lambda, tol);
  if (d_set) {
    rep.robust_ok = check_robust_invariance(f, s_set, *d_set, tol);
  } else {
    double margin = -lp::kInf;
    for (const auto& v : s_set.vertices()) {
      const auto traj = closed_loop_trajectory(f, v, kDecaySteps);
      margin = std::max(margin, check_decay_along_trajectory(s_set, traj, cert.lambda, tol).second);
    }
    rep.lyapunov_decay_margin = margin;
  }
  return rep;
}

}  // namespace ddinv
