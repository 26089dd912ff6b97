#pragma once

// Dense two-phase primal simplex for the small linear programs built by the
// synthesis and verification layers.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "ddinv/errors.hpp"

namespace ddinv::lp {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Status { Optimal, Feasible, Infeasible, Unbounded, IterationLimit };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "Optimal";
    case Status::Feasible: return "Feasible";
    case Status::Infeasible: return "Infeasible";
    case Status::Unbounded: return "Unbounded";
    case Status::IterationLimit: return "IterationLimit";
  }
  return "?";
}

/// minimize objective·z  s.t.  eq_lhs·z = eq_rhs, ineq_lhs·z <= ineq_rhs,
/// lower <= z <= upper (bounds may be infinite).
///
/// Immutable once constructed; shapes are checked by the constructor.
class LinearProgram {
 public:
  LinearProgram(VectorXd objective, MatrixXd eq_lhs, VectorXd eq_rhs, MatrixXd ineq_lhs,
                VectorXd ineq_rhs, VectorXd lower_bounds, VectorXd upper_bounds)
      : objective_(std::move(objective)),
        eq_lhs_(std::move(eq_lhs)),
        eq_rhs_(std::move(eq_rhs)),
        ineq_lhs_(std::move(ineq_lhs)),
        ineq_rhs_(std::move(ineq_rhs)),
        lower_(std::move(lower_bounds)),
        upper_(std::move(upper_bounds)) {
    const Index n = objective_.size();
    if (n <= 0) throw DimensionError("LinearProgram: num_vars must be positive");
    if (eq_lhs_.rows() != eq_rhs_.size() || (eq_lhs_.rows() > 0 && eq_lhs_.cols() != n))
      throw DimensionError("LinearProgram: equality block shape mismatch");
    if (ineq_lhs_.rows() != ineq_rhs_.size() || (ineq_lhs_.rows() > 0 && ineq_lhs_.cols() != n))
      throw DimensionError("LinearProgram: inequality block shape mismatch");
    if (lower_.size() != n || upper_.size() != n)
      throw DimensionError("LinearProgram: bound vector length mismatch");
    eq_lhs_.conservativeResize(eq_lhs_.rows(), n);
    ineq_lhs_.conservativeResize(ineq_lhs_.rows(), n);
    for (Index i = 0; i < n; ++i) {
      if (std::isnan(lower_[i]) || std::isnan(upper_[i]) || lower_[i] > upper_[i])
        throw DimensionError("LinearProgram: lower bound exceeds upper bound for variable " +
                             std::to_string(i));
      if (lower_[i] == kInf || upper_[i] == -kInf)
        throw DimensionError("LinearProgram: empty bound interval for variable " +
                             std::to_string(i));
    }
  }

  Index num_vars() const { return objective_.size(); }
  Index num_equalities() const { return eq_lhs_.rows(); }
  Index num_inequalities() const { return ineq_lhs_.rows(); }

  const VectorXd& objective() const { return objective_; }
  const MatrixXd& eq_lhs() const { return eq_lhs_; }
  const VectorXd& eq_rhs() const { return eq_rhs_; }
  const MatrixXd& ineq_lhs() const { return ineq_lhs_; }
  const VectorXd& ineq_rhs() const { return ineq_rhs_; }
  const VectorXd& lower_bounds() const { return lower_; }
  const VectorXd& upper_bounds() const { return upper_; }

 private:
  VectorXd objective_;
  MatrixXd eq_lhs_;
  VectorXd eq_rhs_;
  MatrixXd ineq_lhs_;
  VectorXd ineq_rhs_;
  VectorXd lower_;
  VectorXd upper_;
};

/// Sparse (index, coefficient) row; repeated indices are summed.
using Row = std::vector<std::pair<Index, double>>;

/// Incremental construction of a LinearProgram. Variables default to free.
class LpBuilder {
 public:
  explicit LpBuilder(Index num_vars)
      : objective_(VectorXd::Zero(num_vars)),
        lower_(VectorXd::Constant(num_vars, -kInf)),
        upper_(VectorXd::Constant(num_vars, kInf)) {
    if (num_vars <= 0) throw DimensionError("LpBuilder: num_vars must be positive");
  }

  Index num_vars() const { return objective_.size(); }

  void set_objective(Index var, double c) { objective_[check(var)] = c; }

  void set_bounds(Index var, double lo, double hi) {
    check(var);
    lower_[var] = lo;
    upper_[var] = hi;
  }

  void add_equality(const Row& row, double rhs) { eq_.emplace_back(densify(row), rhs); }
  void add_inequality(const Row& row, double rhs) { ineq_.emplace_back(densify(row), rhs); }

  Index num_equalities() const { return static_cast<Index>(eq_.size()); }
  Index num_inequalities() const { return static_cast<Index>(ineq_.size()); }

  LinearProgram build() const {
    const Index n = num_vars();
    MatrixXd a_eq(eq_.size(), n);
    VectorXd b_eq(eq_.size());
    for (std::size_t i = 0; i < eq_.size(); ++i) {
      a_eq.row(i) = eq_[i].first.transpose();
      b_eq[i] = eq_[i].second;
    }
    MatrixXd a_in(ineq_.size(), n);
    VectorXd b_in(ineq_.size());
    for (std::size_t i = 0; i < ineq_.size(); ++i) {
      a_in.row(i) = ineq_[i].first.transpose();
      b_in[i] = ineq_[i].second;
    }
    return {objective_, std::move(a_eq), std::move(b_eq), std::move(a_in), std::move(b_in),
            lower_, upper_};
  }

 private:
  Index check(Index var) const {
    if (var < 0 || var >= num_vars())
      throw DimensionError("LpBuilder: variable index out of range");
    return var;
  }

  VectorXd densify(const Row& row) const {
    VectorXd dense = VectorXd::Zero(num_vars());
    for (const auto& [var, c] : row) dense[check(var)] += c;
    return dense;
  }

  VectorXd objective_;
  VectorXd lower_;
  VectorXd upper_;
  std::vector<std::pair<VectorXd, double>> eq_;
  std::vector<std::pair<VectorXd, double>> ineq_;
};

struct SolverOptions {
  double feas_tol = 1e-8;
  double pivot_tol = 1e-10;
  double opt_tol = 1e-9;
  double harris_tol = 1e-9;
  /// Consecutive degenerate pivots tolerated before switching to Bland's rule.
  int bland_after = 25;
  /// 0 selects 50 * (rows + columns) of the standard form.
  long max_iterations = 0;
};

struct LpSolution {
  Status status = Status::Infeasible;
  std::optional<VectorXd> primal;        // present iff Optimal or Feasible
  std::optional<double> objective_value;  // present iff Optimal
  long iterations = 0;
};

inline bool check_feasible(const LinearProgram& lp, const VectorXd& point, double tol) {
  if (point.size() != lp.num_vars()) return false;
  for (Index i = 0; i < lp.num_vars(); ++i) {
    if (!std::isfinite(point[i])) return false;
    if (point[i] < lp.lower_bounds()[i] - tol || point[i] > lp.upper_bounds()[i] + tol)
      return false;
  }
  if (lp.num_equalities() > 0) {
    const VectorXd r = lp.eq_lhs() * point - lp.eq_rhs();
    if (r.cwiseAbs().maxCoeff() > tol) return false;
  }
  if (lp.num_inequalities() > 0) {
    const VectorXd r = lp.ineq_lhs() * point - lp.ineq_rhs();
    if (r.maxCoeff() > tol) return false;
  }
  return true;
}

/// Plain-text dump, one constraint per line.
inline void dump(std::ostream& os, const LinearProgram& lp) {
  auto term_list = [&](const auto& row) {
    bool first = true;
    for (Index j = 0; j < row.size(); ++j) {
      if (row[j] == 0.0) continue;
      os << (first ? "" : " ") << (row[j] < 0 ? "- " : (first ? "" : "+ ")) << std::abs(row[j])
         << " z" << j;
      first = false;
    }
    if (first) os << "0";
  };
  os << "minimize: ";
  term_list(lp.objective());
  os << '\n';
  for (Index i = 0; i < lp.num_equalities(); ++i) {
    os << "eq" << i << ": ";
    term_list(lp.eq_lhs().row(i));
    os << " = " << lp.eq_rhs()[i] << '\n';
  }
  for (Index i = 0; i < lp.num_inequalities(); ++i) {
    os << "in" << i << ": ";
    term_list(lp.ineq_lhs().row(i));
    os << " <= " << lp.ineq_rhs()[i] << '\n';
  }
  for (Index j = 0; j < lp.num_vars(); ++j) {
    const double lo = lp.lower_bounds()[j], hi = lp.upper_bounds()[j];
    if (lo == -kInf && hi == kInf) continue;
    os << "bound: " << lo << " <= z" << j << " <= " << hi << '\n';
  }
}

namespace detail {

using Tableau = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Maps each original variable onto nonnegative standard-form columns.
struct VarMap {
  enum class Kind { Shifted, Reflected, Split } kind;
  double offset;
  Index col;
  Index col2;
};

struct StandardForm {
  MatrixXd a;  // rows x cols, every row with b >= 0
  VectorXd b;
  VectorXd cost;
  std::vector<VarMap> vars;
  std::vector<Index> unit_col;  // per row: column with +1 usable as initial basis, or -1
  VectorXd col_scale;           // original column = col_scale .* scaled column value
};

// Geometric-mean row/column equilibration with power-of-two factors. Slack
// columns are rescaled so their single entry stays exactly +-1.
inline void equilibrate(StandardForm& sf, Index structural, int passes = 4) {
  const Index m = sf.a.rows(), n = sf.a.cols();
  sf.col_scale = VectorXd::Ones(n);
  if (m == 0) return;
  auto pow2 = [](double v) { return std::exp2(std::round(std::log2(v))); };
  VectorXd row_scale = VectorXd::Ones(m);
  for (int pass = 0; pass < passes; ++pass) {
    for (Index i = 0; i < m; ++i) {
      double lo = kInf, hi = 0.0;
      for (Index j = 0; j < structural; ++j) {
        const double v = std::abs(sf.a(i, j));
        if (v == 0.0) continue;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      if (hi == 0.0) continue;
      const double f = pow2(1.0 / std::sqrt(lo * hi));
      sf.a.row(i) *= f;
      sf.b[i] *= f;
      row_scale[i] *= f;
    }
    for (Index j = 0; j < structural; ++j) {
      double lo = kInf, hi = 0.0;
      for (Index i = 0; i < m; ++i) {
        const double v = std::abs(sf.a(i, j));
        if (v == 0.0) continue;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      if (hi == 0.0) continue;
      const double f = pow2(1.0 / std::sqrt(lo * hi));
      sf.a.col(j) *= f;
      sf.col_scale[j] *= f;
    }
  }
  for (Index j = structural; j < n; ++j) {
    Index row = -1;
    for (Index i = 0; i < m && row < 0; ++i)
      if (sf.a(i, j) != 0.0) row = i;
    if (row < 0) continue;
    const double f = 1.0 / std::abs(sf.a(row, j));
    sf.a.col(j) *= f;
    sf.col_scale[j] = f;
  }
  sf.cost = sf.cost.cwiseProduct(sf.col_scale);
}

inline StandardForm to_standard_form(const LinearProgram& lp) {
  const Index n = lp.num_vars();
  StandardForm sf;
  sf.vars.reserve(n);

  Index cols = 0;
  std::vector<Index> bounded;  // variables needing an explicit upper-bound row
  for (Index i = 0; i < n; ++i) {
    const double lo = lp.lower_bounds()[i], hi = lp.upper_bounds()[i];
    if (std::isfinite(lo)) {
      sf.vars.push_back({VarMap::Kind::Shifted, lo, cols++, -1});
      if (std::isfinite(hi)) bounded.push_back(i);
    } else if (std::isfinite(hi)) {
      sf.vars.push_back({VarMap::Kind::Reflected, hi, cols++, -1});
    } else {
      sf.vars.push_back({VarMap::Kind::Split, 0.0, cols, cols + 1});
      cols += 2;
    }
  }
  const Index structural = cols;
  const Index r_eq = lp.num_equalities();
  const Index r_in = lp.num_inequalities();
  const Index r_bd = static_cast<Index>(bounded.size());
  const Index rows = r_eq + r_in + r_bd;
  const Index total_cols = structural + r_in + r_bd;

  sf.a = MatrixXd::Zero(rows, total_cols);
  sf.b = VectorXd::Zero(rows);
  sf.cost = VectorXd::Zero(total_cols);
  sf.unit_col.assign(rows, -1);

  auto map_row = [&](Index row, const auto& coeffs, double rhs) {
    for (Index i = 0; i < n; ++i) {
      const double c = coeffs[i];
      if (c == 0.0) continue;
      const VarMap& v = sf.vars[i];
      switch (v.kind) {
        case VarMap::Kind::Shifted:
          sf.a(row, v.col) += c;
          rhs -= c * v.offset;
          break;
        case VarMap::Kind::Reflected:
          sf.a(row, v.col) -= c;
          rhs -= c * v.offset;
          break;
        case VarMap::Kind::Split:
          sf.a(row, v.col) += c;
          sf.a(row, v.col2) -= c;
          break;
      }
    }
    sf.b[row] = rhs;
  };

  for (Index r = 0; r < r_eq; ++r) map_row(r, lp.eq_lhs().row(r), lp.eq_rhs()[r]);
  for (Index r = 0; r < r_in; ++r) {
    const Index row = r_eq + r;
    map_row(row, lp.ineq_lhs().row(r), lp.ineq_rhs()[r]);
    sf.a(row, structural + r) = 1.0;
    sf.unit_col[row] = structural + r;
  }
  for (Index k = 0; k < r_bd; ++k) {
    const Index i = bounded[k];
    const Index row = r_eq + r_in + k;
    sf.a(row, sf.vars[i].col) = 1.0;
    sf.a(row, structural + r_in + k) = 1.0;
    sf.b[row] = lp.upper_bounds()[i] - lp.lower_bounds()[i];
    sf.unit_col[row] = structural + r_in + k;
  }
  for (Index row = 0; row < rows; ++row) {
    if (sf.b[row] < 0.0) {
      sf.a.row(row) *= -1.0;
      sf.b[row] = -sf.b[row];
      sf.unit_col[row] = -1;
    }
  }

  for (Index i = 0; i < n; ++i) {
    const double c = lp.objective()[i];
    const VarMap& v = sf.vars[i];
    switch (v.kind) {
      case VarMap::Kind::Shifted: sf.cost[v.col] += c; break;
      case VarMap::Kind::Reflected: sf.cost[v.col] -= c; break;
      case VarMap::Kind::Split:
        sf.cost[v.col] += c;
        sf.cost[v.col2] -= c;
        break;
    }
  }
  equilibrate(sf, structural);
  return sf;
}

class Simplex {
 public:
  enum class Outcome { Done, Unbounded, Limit };

  // `tab` holds the constraint rows [A | b] plus an objective row; the rows are
  // kept so the tableau can be rebuilt from the basis to shed rounding drift.
  Simplex(Tableau tab, std::vector<Index> basis, const SolverOptions& opts, long max_iter)
      : tab_(std::move(tab)),
        orig_(tab_.topRows(tab_.rows() - 1)),
        basis_(std::move(basis)),
        opts_(opts),
        max_iter_(max_iter) {}

  Index rows() const { return tab_.rows() - 1; }
  Index rhs_col() const { return tab_.cols() - 1; }
  Tableau& tableau() { return tab_; }
  std::vector<Index>& basis() { return basis_; }
  long iterations() const { return iterations_; }

  void pivot(Index r, Index c) {
    const double p = tab_(r, c);
    tab_.row(r) /= p;
    tab_(r, c) = 1.0;
    for (Index i = 0; i < tab_.rows(); ++i) {
      if (i == r) continue;
      const double f = tab_(i, c);
      if (f == 0.0) continue;
      tab_.row(i) -= f * tab_.row(r);
      tab_(i, c) = 0.0;
    }
    basis_[r] = c;
  }

  // Reprices the objective row for cost vector `cost` over the current basis.
  void set_objective(const VectorXd& cost) {
    cost_ = cost;
    const Index m = rows();
    tab_.row(m).setZero();
    tab_.row(m).head(cost.size()) = cost.transpose();
    for (Index i = 0; i < m; ++i) {
      const double cb = tab_(m, basis_[i]);
      if (cb != 0.0) tab_.row(m) -= cb * tab_.row(i);
    }
  }

  // Recomputes the tableau as B^-1 [A | b] from the stored rows.
  bool reinvert() {
    const Index m = rows();
    if (m == 0) return true;
    MatrixXd bmat(m, m);
    for (Index k = 0; k < m; ++k) bmat.col(k) = orig_.col(basis_[k]);
    Eigen::PartialPivLU<MatrixXd> lu(bmat);
    if (!(std::abs(lu.determinant()) > 0.0)) return false;
    MatrixXd fresh = lu.solve(orig_);
    if (!fresh.allFinite()) return false;
    for (Index k = 0; k < m; ++k) {
      fresh.col(basis_[k]).setZero();
      fresh(k, basis_[k]) = 1.0;
    }
    tab_.topRows(m) = fresh;
    if (cost_.size() > 0) set_objective(cost_);
    return true;
  }

  Outcome run(Index active_cols) {
    const Index m = rows();
    const Index rhs = rhs_col();
    int degenerate_run = 0;
    int since_refactor = 0;
    int final_checks = 0;
    for (;;) {
      if (since_refactor >= std::max<Index>(kRefactorEvery, m)) {
        reinvert();
        since_refactor = 0;
      }
      const bool bland = degenerate_run >= opts_.bland_after;

      Index enter = -1;
      double best = -opts_.opt_tol;
      for (Index j = 0; j < active_cols; ++j) {
        const double d = tab_(m, j);
        if (d < best) {
          enter = j;
          if (bland) break;
          best = d;
        }
      }
      if (enter < 0) {
        if (since_refactor == 0 || final_checks >= 2 || !reinvert()) return Outcome::Done;
        since_refactor = 0;
        ++final_checks;
        continue;
      }

      Index leave = -1;
      double min_ratio = kInf;
      if (bland) {
        for (Index i = 0; i < m; ++i) {
          const double a = tab_(i, enter);
          if (a <= opts_.pivot_tol) continue;
          const double ratio = std::max(0.0, tab_(i, rhs)) / a;
          if (leave < 0 || ratio < min_ratio ||
              (ratio == min_ratio && basis_[i] < basis_[leave])) {
            leave = i;
            min_ratio = ratio;
          }
        }
      } else {
        // Harris two-pass test: bound the step with relaxed ratios, then take
        // the largest pivot among the rows within that bound.
        double bound = kInf;
        for (Index i = 0; i < m; ++i) {
          const double a = tab_(i, enter);
          if (a <= opts_.pivot_tol) continue;
          bound = std::min(bound, (std::max(0.0, tab_(i, rhs)) + opts_.harris_tol) / a);
        }
        double best_pivot = 0.0;
        for (Index i = 0; i < m; ++i) {
          const double a = tab_(i, enter);
          if (a <= opts_.pivot_tol) continue;
          const double ratio = std::max(0.0, tab_(i, rhs)) / a;
          if (ratio <= bound && a > best_pivot) {
            best_pivot = a;
            leave = i;
            min_ratio = ratio;
          }
        }
      }
      if (leave < 0) return Outcome::Unbounded;
      if (iterations_ >= max_iter_) return Outcome::Limit;

      degenerate_run = (min_ratio <= 1e-12) ? degenerate_run + 1 : 0;
      pivot(leave, enter);
      ++iterations_;
      ++since_refactor;
    }
  }

 private:
  static constexpr int kRefactorEvery = 20;

  Tableau tab_;
  MatrixXd orig_;
  VectorXd cost_;
  std::vector<Index> basis_;
  SolverOptions opts_;
  long max_iter_;
  long iterations_ = 0;
};

}  // namespace detail

/// Two-phase primal simplex. Deterministic for identical inputs.
inline LpSolution solve(const LinearProgram& lp, const SolverOptions& opts = {}) {
  using detail::Simplex;
  const detail::StandardForm sf = detail::to_standard_form(lp);
  const Index m = sf.a.rows();
  const Index ncols = sf.a.cols();
  const long max_iter =
      opts.max_iterations > 0 ? opts.max_iterations : 50L * static_cast<long>(m + ncols);

  // Phase 1 tableau: structural + slack columns, artificials, rhs.
  std::vector<Index> art_rows;
  for (Index i = 0; i < m; ++i)
    if (sf.unit_col[i] < 0) art_rows.push_back(i);
  const Index nart = static_cast<Index>(art_rows.size());

  detail::Tableau tab = detail::Tableau::Zero(m + 1, ncols + nart + 1);
  tab.topLeftCorner(m, ncols) = sf.a;
  tab.col(ncols + nart).head(m) = sf.b;
  std::vector<Index> basis(m);
  for (Index i = 0; i < m; ++i) basis[i] = sf.unit_col[i];
  for (Index k = 0; k < nart; ++k) {
    tab(art_rows[k], ncols + k) = 1.0;
    basis[art_rows[k]] = ncols + k;
  }

  LpSolution out;
  Simplex phase1(std::move(tab), std::move(basis), opts, max_iter);
  const double b_scale = std::max(1.0, m > 0 ? sf.b.cwiseAbs().maxCoeff() : 0.0);

  std::vector<Index> kept_rows;
  if (nart > 0) {
    VectorXd cost1 = VectorXd::Zero(ncols + nart);
    cost1.tail(nart).setOnes();
    phase1.set_objective(cost1);
    const auto res = phase1.run(ncols + nart);
    out.iterations = phase1.iterations();
    if (res == Simplex::Outcome::Limit) {
      out.status = Status::IterationLimit;
      return out;
    }
    const double infeas = -phase1.tableau()(m, ncols + nart);
    if (infeas > opts.feas_tol * b_scale) {
      out.status = Status::Infeasible;
      return out;
    }
    // Drive remaining artificials out of the basis; drop redundant rows.
    auto& t = phase1.tableau();
    for (Index i = 0; i < m; ++i) {
      if (phase1.basis()[i] < ncols) {
        kept_rows.push_back(i);
        continue;
      }
      Index best = -1;
      double best_abs = opts.pivot_tol;
      for (Index j = 0; j < ncols; ++j) {
        if (std::abs(t(i, j)) > best_abs) {
          best_abs = std::abs(t(i, j));
          best = j;
        }
      }
      if (best >= 0) {
        phase1.pivot(i, best);
        kept_rows.push_back(i);
      }
    }
  } else {
    for (Index i = 0; i < m; ++i) kept_rows.push_back(i);
  }

  // Phase 2 on the kept rows, artificial columns removed.
  const Index m2 = static_cast<Index>(kept_rows.size());
  detail::Tableau tab2(m2 + 1, ncols + 1);
  std::vector<Index> basis2(m2);
  {
    const auto& t = phase1.tableau();
    for (Index k = 0; k < m2; ++k) {
      const Index i = kept_rows[k];
      tab2.row(k).head(ncols) = t.row(i).head(ncols);
      tab2(k, ncols) = t(i, ncols + nart);
      basis2[k] = phase1.basis()[i];
    }
    tab2.row(m2).setZero();
  }
  detail::Tableau clean(m2 + 1, ncols + 1);
  for (Index k = 0; k < m2; ++k) {
    clean.row(k).head(ncols) = sf.a.row(kept_rows[k]);
    clean(k, ncols) = sf.b[kept_rows[k]];
  }
  clean.row(m2).setZero();
  Simplex phase2(clean, basis2, opts, max_iter);
  if (!phase2.reinvert()) phase2 = Simplex(std::move(tab2), std::move(basis2), opts, max_iter);
  phase2.set_objective(sf.cost);
  const auto res2 = phase2.run(ncols);
  out.iterations += phase2.iterations();
  if (res2 == Simplex::Outcome::Unbounded) {
    out.status = Status::Unbounded;
    return out;
  }

  // Basic solution from the tableau, then refined by refactoring the basis
  // against the original standard-form rows.
  VectorXd y = VectorXd::Zero(ncols);
  for (Index k = 0; k < m2; ++k) y[phase2.basis()[k]] = std::max(0.0, phase2.tableau()(k, ncols));
  if (m2 > 0) {
    MatrixXd bmat(m2, m2);
    VectorXd rhs(m2);
    for (Index k = 0; k < m2; ++k) {
      rhs[k] = sf.b[kept_rows[k]];
      for (Index c = 0; c < m2; ++c) bmat(k, c) = sf.a(kept_rows[k], phase2.basis()[c]);
    }
    Eigen::FullPivLU<MatrixXd> lu(bmat);
    if (lu.isInvertible()) {
      const VectorXd xb = lu.solve(rhs);
      if (xb.allFinite() && xb.minCoeff() >= -opts.feas_tol * b_scale) {
        VectorXd refined = VectorXd::Zero(ncols);
        for (Index k = 0; k < m2; ++k) refined[phase2.basis()[k]] = std::max(0.0, xb[k]);
        const double r_old = (sf.a * y - sf.b).cwiseAbs().maxCoeff();
        const double r_new = (sf.a * refined - sf.b).cwiseAbs().maxCoeff();
        if (r_new <= r_old) y = refined;
      }
    }
  }

  y = y.cwiseProduct(sf.col_scale);
  VectorXd z(lp.num_vars());
  for (Index i = 0; i < lp.num_vars(); ++i) {
    const auto& v = sf.vars[i];
    switch (v.kind) {
      case detail::VarMap::Kind::Shifted: z[i] = v.offset + y[v.col]; break;
      case detail::VarMap::Kind::Reflected: z[i] = v.offset - y[v.col]; break;
      case detail::VarMap::Kind::Split: z[i] = y[v.col] - y[v.col2]; break;
    }
  }
  out.primal = z;
  if (res2 == Simplex::Outcome::Limit) {
    out.status = Status::Feasible;
    return out;
  }
  out.status = Status::Optimal;
  out.objective_value = lp.objective().dot(z);
  return out;
}

}  // namespace ddinv::lp
