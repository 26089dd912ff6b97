#pragma once

// Subcommand implementations behind the ddinv executable. Each returns the
// process exit code: 0 success, 1 usage/IO/validation error, 2 infeasible
// problem or failed verification.

#include <Eigen/Dense>

#include <cctype>
#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ddinv/errors.hpp"
#include "ddinv/experiment.hpp"
#include "ddinv/io.hpp"
#include "ddinv/polytope.hpp"
#include "ddinv/svg.hpp"
#include "ddinv/synthesis.hpp"
#include "ddinv/verification.hpp"

namespace ddinv::cli {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitInfeasible = 2;

inline constexpr std::uint64_t kDefaultSeed = 1;

struct GenerateOptions {
  std::string config_path;
  std::string out_path;
  std::optional<std::uint64_t> seed;
};

struct SynthesizeOptions {
  std::string problem_path;
  std::string out_path;
  std::optional<std::string> lambda;  // number or "min"; overrides the file
  bool robust = false;
};

struct VerifyOptions {
  std::string problem_path;
  std::string certificate_path;
};

enum class PlotFormat { Csv, Svg };

struct SimulateOptions {
  std::string problem_path;
  std::string certificate_path;
  std::optional<std::string> x0;  // comma list; default: first vertex of S
  Index steps = 50;
  std::string out_path;  // empty: CSV to stdout
  PlotFormat format = PlotFormat::Csv;
};

namespace detail {

// Maps library exceptions onto exit codes.
template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const InfeasibleProblem& e) {
    err << "infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const SolverFailure& e) {
    err << "solver failure: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
  } catch (const nlohmann::json::exception& e) {
    err << "error: malformed file: " << e.what() << '\n';
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
  }
  return kExitError;
}

inline std::optional<double> parse_lambda(const std::string& text) {
  if (text == "min") return std::nullopt;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || text.empty())
    throw ValidationError("--lambda must be a number or 'min', got '" + text + "'");
  return v;
}

inline VectorXd parse_vector(const std::string& text) {
  std::vector<double> vals;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
    if (used == 0 || used != item.size())
      throw ValidationError("--x0: cannot parse '" + item + "' as a number");
    vals.push_back(v);
  }
  if (vals.empty()) throw ValidationError("--x0: empty list");
  return Eigen::Map<VectorXd>(vals.data(), static_cast<Index>(vals.size()));
}

/// Closed loop used for checking: the model when present, else X_{1,T} G_K.
inline MatrixXd closed_loop(const io::ProblemFile& p, const Certificate& cert) {
  if (p.model) return p.model->a + p.model->b * cert.gain;
  if (p.data && cert.g_matrix) return closed_loop_from_data(*p.data, *cert.g_matrix);
  throw ValidationError("cannot form the closed loop: no model block and no G_K in the certificate");
}

inline void check_shapes(const io::ProblemFile& p, const Certificate& cert) {
  const Index n = p.state_set.cols(), m = p.input_set.cols();
  if (cert.gain.rows() != m || cert.gain.cols() != n)
    throw ValidationError("certificate gain is " + std::to_string(cert.gain.rows()) + "x" +
                          std::to_string(cert.gain.cols()) + ", problem needs " +
                          std::to_string(m) + "x" + std::to_string(n));
  if (cert.p_matrix &&
      (cert.p_matrix->rows() != p.state_set.rows() || cert.p_matrix->cols() != p.state_set.rows()))
    throw ValidationError("certificate P does not match the number of rows of S");
  if (cert.g_matrix && (cert.g_matrix->cols() != n ||
                        (p.data && cert.g_matrix->rows() != p.data->samples())))
    throw ValidationError("certificate G_K does not match the data");
}

inline const char* verdict(bool ok) { return ok ? "pass" : "FAIL"; }

}  // namespace detail

inline void print_report(std::ostream& os, const VerificationReport& r) {
  os << "lambda:            " << r.lambda << '\n';
  os << "vertex test:       " << detail::verdict(r.contractivity_ok)
     << " (worst gauge " << r.worst_vertex_gauge << ")\n";
  if (r.certificate_ok) os << "P certificate:     " << detail::verdict(*r.certificate_ok) << '\n';
  os << "admissibility:     " << detail::verdict(r.admissibility_ok)
     << " (worst violation " << r.worst_input_violation << ")\n";
  if (r.robust_ok) os << "robust invariance: " << detail::verdict(*r.robust_ok) << '\n';
  if (r.lyapunov_decay_margin)
    os << "decay margin:      " << *r.lyapunov_decay_margin << '\n';
  os << "result:            " << (r.passed() ? "PASS" : "FAIL") << '\n';
}

inline int cmd_generate(const GenerateOptions& o, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    auto p = io::read_problem(o.config_path);
    if (!p.model) throw ValidationError("generate: the config needs a model block");
    const auto settings = p.experiment.value_or(io::ExperimentSettings{});
    const Index n = p.model->state_dim(), m = p.model->input_dim();
    const std::uint64_t seed = o.seed.value_or(p.seed.value_or(kDefaultSeed));
    p.seed = seed;

    Rng rng(seed);
    const auto inputs =
        uniform_inputs(rng, m, settings.samples, settings.input_low, settings.input_high);
    const VectorXd x0 =
        settings.initial_state.size() == n ? settings.initial_state : VectorXd::Zero(n);
    std::optional<Sequence> dist;
    if (settings.disturbance_radius && *settings.disturbance_radius > 0.0) {
      const auto d = DisturbanceSet::box(n, *settings.disturbance_radius);
      dist = sample_disturbances(rng, d, settings.samples);
      if (!p.disturbance) {
        MatrixXd v(static_cast<Index>(d.vertices().size()), n);
        for (Index i = 0; i < v.rows(); ++i) v.row(i) = d.vertices()[i].transpose();
        p.disturbance = v;
      }
    }
    const auto states = simulate(*p.model, x0, inputs, dist);
    p.data = build_data_matrices(inputs, states);

    const Index need = minimum_samples(n, m);
    if (settings.samples < need)
      err << "warning: T = " << settings.samples << " is below the minimum (m+1)n+m = " << need
          << "; the input cannot be persistently exciting of order n+1\n";
    const Index order = excitation_order(inputs);
    const Index rank = numerical_rank(p.data->theta());
    out << "seed: " << seed << '\n';
    out << "samples: " << settings.samples << '\n';
    out << "excitation order: " << order << " (needed " << n + 1 << ")\n";
    out << "theta rank: " << rank << " of " << n + m << " ("
        << (rank == n + m ? "full row rank" : "rank deficient") << ")\n";
    io::write_problem(o.out_path, p);
    return kExitOk;
  });
}

inline int cmd_synthesize(const SynthesizeOptions& o, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const std::string text = io::read_text(o.problem_path);
    auto p = io::problem_from_json(io::parse_json(text, o.problem_path));
    if (o.lambda) p.lambda = detail::parse_lambda(*o.lambda);
    const auto problem = io::to_synthesis_problem(p, o.robust);

    io::CertificateFile file;
    file.certificate = synthesize(problem);
    file.mode = o.robust ? "robust" : (p.lambda ? "fixed" : "min");
    file.input_digest = io::digest(text);
    const MatrixXd f = detail::closed_loop(p, file.certificate);
    file.report = verify_certificate(f, file.certificate, problem.state_set, problem.input_set,
                                     problem.disturbance ? &*problem.disturbance : nullptr);
    io::write_certificate(o.out_path, file);

    out << "mode: " << file.mode << '\n';
    out << "gain K:";
    for (Index i = 0; i < file.certificate.gain.rows(); ++i)
      for (Index j = 0; j < file.certificate.gain.cols(); ++j)
        out << ' ' << file.certificate.gain(i, j);
    out << '\n';
    print_report(out, file.report);
    if (!file.report.passed()) {
      err << "verification of the synthesized certificate failed\n";
      return kExitInfeasible;
    }
    return kExitOk;
  });
}

inline int cmd_verify(const VerifyOptions& o, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const auto p = io::read_problem(o.problem_path);
    const auto file = io::read_certificate(o.certificate_path);
    detail::check_shapes(p, file.certificate);
    const auto s = io::state_set_of(p);
    const auto u = io::input_set_of(p);
    const bool robust = file.mode == "robust";
    std::optional<DisturbanceSet> d;
    if (robust) {
      d = io::disturbance_of(p);
      if (!d) throw ValidationError("robust certificate but the problem has no disturbance block");
    }
    const MatrixXd f = detail::closed_loop(p, file.certificate);
    const auto rep = verify_certificate(f, file.certificate, s, u, d ? &*d : nullptr);
    print_report(out, rep);
    return rep.passed() ? kExitOk : kExitInfeasible;
  });
}

inline void write_csv(std::ostream& os, const Sequence& xs, const Sequence& us,
                      const PolyhedralCSet& s) {
  const Index n = xs.front().size(), m = us.front().size();
  os << "t";
  for (Index i = 1; i <= n; ++i) os << ",x_" << i;
  for (Index i = 1; i <= m; ++i) os << ",u_" << i;
  os << ",V\n";
  os << std::setprecision(17);
  for (std::size_t t = 0; t < xs.size(); ++t) {
    os << t;
    for (Index i = 0; i < n; ++i) os << ',' << xs[t][i];
    for (Index i = 0; i < m; ++i) os << ',' << us[t][i];
    os << ',' << lyapunov_value(s, xs[t]) << '\n';
  }
}

/// "<stem>-input.svg" next to the state plot.
inline std::string input_plot_path(const std::string& out_path) {
  std::filesystem::path path(out_path);
  const std::string stem = path.stem().string();
  path.replace_filename(stem + "-input.svg");
  return path.string();
}

inline int cmd_simulate(const SimulateOptions& o, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    if (o.steps < 1) throw ValidationError("--steps must be at least 1");
    const auto p = io::read_problem(o.problem_path);
    const auto file = io::read_certificate(o.certificate_path);
    detail::check_shapes(p, file.certificate);
    const auto s = io::state_set_of(p);
    const auto u = io::input_set_of(p);
    const VectorXd x0 = o.x0 ? detail::parse_vector(*o.x0) : s.vertices().front();
    if (x0.size() != s.dim())
      throw ValidationError("--x0 has " + std::to_string(x0.size()) + " entries, expected " +
                            std::to_string(s.dim()));
    if (!contains(s, x0)) {
      err << "x0 lies outside S (gauge " << gauge(s, x0) << ")\n";
      return kExitInfeasible;
    }

    const MatrixXd& k = file.certificate.gain;
    Sequence xs{x0}, us;
    for (Index t = 0; t < o.steps; ++t) {
      const VectorXd& x = xs.back();
      us.push_back(k * x);
      if (p.model) {
        xs.push_back(p.model->a * x + p.model->b * us.back());
      } else {
        xs.push_back(detail::closed_loop(p, file.certificate) * x);
      }
    }
    us.push_back(k * xs.back());

    if (o.format == PlotFormat::Csv) {
      if (o.out_path.empty()) {
        write_csv(out, xs, us, s);
      } else {
        std::ostringstream ss;
        write_csv(ss, xs, us, s);
        io::write_text(o.out_path, ss.str());
      }
      return kExitOk;
    }
    if (o.out_path.empty()) throw ValidationError("--format svg needs --out");
    io::write_text(o.out_path, svg::state_plot(s, file.certificate.lambda, xs));
    if (u.dim() == 1) {
      const auto [lo, hi] = svg::scalar_input_bounds(u.h_matrix());
      io::write_text(input_plot_path(o.out_path), svg::input_plot(us, lo, hi));
    }
    return kExitOk;
  });
}

}  // namespace ddinv::cli
