#pragma once

// JSON problem and certificate files. Matrices are stored as
// {"rows": r, "cols": c, "data": [row-major values]}; doubles are written in
// shortest round-trip form, so reading back reproduces every bit.

#include <Eigen/Dense>

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "ddinv/errors.hpp"
#include "ddinv/experiment.hpp"
#include "ddinv/polytope.hpp"
#include "ddinv/synthesis.hpp"
#include "ddinv/verification.hpp"

#ifndef DDINV_VERSION
#define DDINV_VERSION "0.0.0"
#endif

namespace ddinv::io {

using Json = nlohmann::json;
using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

inline constexpr const char* kToolVersion = DDINV_VERSION;

/// Settings for `generate`: one open-loop experiment on the model.
struct ExperimentSettings {
  Index samples = 20;
  double input_low = -1.0;
  double input_high = 1.0;
  VectorXd initial_state;           // empty: the origin
  std::optional<double> disturbance_radius;
};

struct ProblemFile {
  MatrixXd state_set;
  MatrixXd input_set;
  std::optional<double> lambda;  // nullopt: "min"
  std::optional<ExperimentData> data;
  std::optional<PlantModel> model;
  std::optional<MatrixXd> disturbance;  // one vertex per row
  std::optional<std::uint64_t> seed;
  std::string description;
  std::optional<ExperimentSettings> experiment;
};

struct CertificateFile {
  Certificate certificate;
  VerificationReport report;
  std::string mode;  // "fixed", "min" or "robust"
  std::string tool_version = kToolVersion;
  std::string input_digest;
};

namespace detail {

inline bool is_count(const Json& j) {
  return j.is_number_unsigned() || (j.is_number_integer() && j.get<std::int64_t>() >= 0);
}

}  // namespace detail

// ---- matrices ----

inline Json matrix_to_json(const MatrixXd& m) {
  Json data = Json::array();
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

inline MatrixXd matrix_from_json(const Json& j, const std::string& what) {
  if (!j.is_object() || !j.contains("rows") || !j.contains("cols") || !j.contains("data"))
    throw ValidationError(what + ": expected an object with rows, cols and data");
  const auto& r = j.at("rows");
  const auto& c = j.at("cols");
  const auto& d = j.at("data");
  if (!detail::is_count(r) || !detail::is_count(c) || !d.is_array())
    throw ValidationError(what + ": rows/cols must be non-negative integers and data an array");
  const auto rows = r.get<std::uint64_t>();
  const auto cols = c.get<std::uint64_t>();
  if (d.size() != rows * cols)
    throw ValidationError(what + ": data has " + std::to_string(d.size()) + " entries, shape is " +
                          std::to_string(rows) + "x" + std::to_string(cols));
  MatrixXd m(static_cast<Index>(rows), static_cast<Index>(cols));
  for (std::size_t k = 0; k < d.size(); ++k) {
    if (!d[k].is_number()) throw ValidationError(what + ": non-numeric entry");
    m(static_cast<Index>(k / cols), static_cast<Index>(k % cols)) = d[k].get<double>();
  }
  if (!m.allFinite()) throw ValidationError(what + ": non-finite entry");
  return m;
}

inline Json vector_to_json(const VectorXd& v) {
  Json a = Json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline VectorXd vector_from_json(const Json& j, const std::string& what) {
  if (!j.is_array()) throw ValidationError(what + ": expected an array");
  VectorXd v(static_cast<Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) {
    if (!j[k].is_number()) throw ValidationError(what + ": non-numeric entry");
    v[static_cast<Index>(k)] = j[k].get<double>();
  }
  return v;
}

namespace detail {

inline double number_field(const Json& j, const char* key, const std::string& what) {
  if (!j.contains(key) || !j.at(key).is_number())
    throw ValidationError(what + ": '" + key + "' must be a number");
  return j.at(key).get<double>();
}

inline std::optional<double> optional_number(const Json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  if (!j.at(key).is_number()) throw ValidationError(std::string("'") + key + "' must be a number");
  return j.at(key).get<double>();
}

inline std::optional<bool> optional_bool(const Json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  if (!j.at(key).is_boolean()) throw ValidationError(std::string("'") + key + "' must be a boolean");
  return j.at(key).get<bool>();
}

inline Json optional_to_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }
inline Json optional_to_json(const std::optional<bool>& v) { return v ? Json(*v) : Json(nullptr); }

}  // namespace detail

// ---- problem files ----

inline Json problem_to_json(const ProblemFile& p) {
  Json j;
  j["state_set"] = matrix_to_json(p.state_set);
  j["input_set"] = matrix_to_json(p.input_set);
  j["lambda"] = p.lambda ? Json(*p.lambda) : Json("min");
  if (p.data)
    j["data"] = {{"u0t", matrix_to_json(p.data->u0t)},
                 {"x0t", matrix_to_json(p.data->x0t)},
                 {"x1t", matrix_to_json(p.data->x1t)}};
  if (p.model) j["model"] = {{"A", matrix_to_json(p.model->a)}, {"B", matrix_to_json(p.model->b)}};
  if (p.disturbance) j["disturbance"] = {{"vertices", matrix_to_json(*p.disturbance)}};
  j["meta"] = {{"seed", p.seed ? Json(*p.seed) : Json(nullptr)}, {"description", p.description}};
  if (p.experiment) {
    const auto& e = *p.experiment;
    j["experiment"] = {{"samples", e.samples},
                       {"input_range", {e.input_low, e.input_high}},
                       {"initial_state", vector_to_json(e.initial_state)},
                       {"disturbance_radius", detail::optional_to_json(e.disturbance_radius)}};
  }
  return j;
}

inline ProblemFile problem_from_json(const Json& j) {
  if (!j.is_object()) throw ValidationError("problem: top level must be an object");
  for (const char* key : {"state_set", "input_set"})
    if (!j.contains(key)) throw ValidationError(std::string("problem: missing '") + key + "'");
  ProblemFile p;
  p.state_set = matrix_from_json(j.at("state_set"), "state_set");
  p.input_set = matrix_from_json(j.at("input_set"), "input_set");

  const Json lam = j.value("lambda", Json("min"));
  if (lam.is_string()) {
    if (lam.get<std::string>() != "min")
      throw ValidationError("problem: lambda must be a number or \"min\"");
  } else if (lam.is_number()) {
    p.lambda = lam.get<double>();
  } else {
    throw ValidationError("problem: lambda must be a number or \"min\"");
  }

  try {
    if (j.contains("data")) {
      const auto& d = j.at("data");
      for (const char* key : {"u0t", "x0t", "x1t"})
        if (!d.contains(key)) throw ValidationError(std::string("data: missing '") + key + "'");
      p.data.emplace(matrix_from_json(d.at("u0t"), "data.u0t"),
                     matrix_from_json(d.at("x0t"), "data.x0t"),
                     matrix_from_json(d.at("x1t"), "data.x1t"));
    }
    if (j.contains("model")) {
      const auto& m = j.at("model");
      if (!m.contains("A") || !m.contains("B")) throw ValidationError("model: needs A and B");
      p.model.emplace(matrix_from_json(m.at("A"), "model.A"), matrix_from_json(m.at("B"), "model.B"));
    }
  } catch (const DimensionError& e) {
    throw ValidationError(e.what());
  }
  if (j.contains("disturbance")) {
    const auto& d = j.at("disturbance");
    if (!d.contains("vertices")) throw ValidationError("disturbance: missing 'vertices'");
    p.disturbance = matrix_from_json(d.at("vertices"), "disturbance.vertices");
  }
  if (j.contains("meta")) {
    const auto& m = j.at("meta");
    if (m.contains("seed") && !m.at("seed").is_null()) {
      if (!detail::is_count(m.at("seed")))
        throw ValidationError("meta.seed must be a non-negative integer");
      p.seed = m.at("seed").get<std::uint64_t>();
    }
    if (m.contains("description")) {
      if (!m.at("description").is_string())
        throw ValidationError("meta.description must be a string");
      p.description = m.at("description").get<std::string>();
    }
  }
  if (j.contains("experiment")) {
    const auto& e = j.at("experiment");
    ExperimentSettings s;
    if (e.contains("samples")) {
      if (!detail::is_count(e.at("samples")) || e.at("samples").get<std::uint64_t>() == 0)
        throw ValidationError("experiment.samples must be a positive integer");
      s.samples = static_cast<Index>(e.at("samples").get<std::uint64_t>());
    }
    if (e.contains("input_range")) {
      const auto r = vector_from_json(e.at("input_range"), "experiment.input_range");
      if (r.size() != 2 || !(r[0] <= r[1]))
        throw ValidationError("experiment.input_range must be [low, high] with low <= high");
      s.input_low = r[0];
      s.input_high = r[1];
    }
    if (e.contains("initial_state"))
      s.initial_state = vector_from_json(e.at("initial_state"), "experiment.initial_state");
    s.disturbance_radius = detail::optional_number(e, "disturbance_radius");
    if (s.disturbance_radius && !(*s.disturbance_radius >= 0.0))
      throw ValidationError("experiment.disturbance_radius must be non-negative");
    p.experiment = s;
  }

  const Index n = p.state_set.cols();
  const Index m = p.input_set.cols();
  if (p.data && (p.data->state_dim() != n || p.data->input_dim() != m))
    throw ValidationError("problem: data shapes do not match the state/input sets");
  if (p.model && (p.model->state_dim() != n || p.model->input_dim() != m))
    throw ValidationError("problem: model shapes do not match the state/input sets");
  if (p.disturbance && p.disturbance->cols() != n)
    throw ValidationError("problem: disturbance vertices must have n columns");
  if (p.experiment && p.experiment->initial_state.size() != 0 &&
      p.experiment->initial_state.size() != n)
    throw ValidationError("problem: experiment.initial_state must have n entries");
  return p;
}

/// Canonical text: sorted keys, two-space indent, trailing newline.
inline std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw IoError("write to '" + path + "' failed");
}

inline Json parse_json(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ValidationError(what + ": " + e.what());
  }
}

inline ProblemFile read_problem(const std::string& path) {
  return problem_from_json(parse_json(read_text(path), path));
}

inline void write_problem(const std::string& path, const ProblemFile& p) {
  write_text(path, dump_json(problem_to_json(p)));
}

/// FNV-1a 64-bit digest, rendered as "fnv1a64:<16 hex digits>".
inline std::string digest(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream ss;
  ss << "fnv1a64:" << std::hex << std::setw(16) << std::setfill('0') << h;
  return ss.str();
}

// ---- problem file -> library types ----

inline PolyhedralCSet state_set_of(const ProblemFile& p) { return PolyhedralCSet::validate(p.state_set); }
inline InputPolytope input_set_of(const ProblemFile& p) { return InputPolytope::validate(p.input_set); }

inline std::optional<DisturbanceSet> disturbance_of(const ProblemFile& p) {
  if (!p.disturbance) return std::nullopt;
  std::vector<VectorXd> v;
  for (Index i = 0; i < p.disturbance->rows(); ++i) v.push_back(p.disturbance->row(i).transpose());
  return DisturbanceSet::validate(std::move(v));
}

/// Data wins when both blocks are present; the model is then only used to
/// check and simulate the closed loop.
inline SynthesisProblem to_synthesis_problem(const ProblemFile& p, bool robust) {
  if (!p.data && !p.model) throw ValidationError("problem: needs a data or a model block");
  if (robust && !p.data) throw ValidationError("problem: robust synthesis requires a data block");
  if (robust && !p.disturbance) throw ValidationError("problem: robust synthesis requires a disturbance block");
  std::variant<PlantModel, ExperimentData> source =
      p.data ? std::variant<PlantModel, ExperimentData>(*p.data)
             : std::variant<PlantModel, ExperimentData>(*p.model);
  SynthesisProblem sp{state_set_of(p), input_set_of(p), p.lambda, std::move(source),
                      robust ? disturbance_of(p) : std::nullopt};
  sp.validate();
  return sp;
}

// ---- certificate files ----

inline Json report_to_json(const VerificationReport& r) {
  return {{"contractivity_ok", r.contractivity_ok},
          {"certificate_ok", detail::optional_to_json(r.certificate_ok)},
          {"admissibility_ok", r.admissibility_ok},
          {"robust_ok", detail::optional_to_json(r.robust_ok)},
          {"lambda", r.lambda},
          {"worst_vertex_gauge", r.worst_vertex_gauge},
          {"worst_input_violation", r.worst_input_violation},
          {"lyapunov_decay_margin", detail::optional_to_json(r.lyapunov_decay_margin)},
          {"passed", r.passed()}};
}

inline VerificationReport report_from_json(const Json& j) {
  if (!j.is_object()) throw ValidationError("report: expected an object");
  VerificationReport r;
  for (const char* key : {"contractivity_ok", "admissibility_ok"})
    if (!j.contains(key) || !j.at(key).is_boolean())
      throw ValidationError(std::string("report: '") + key + "' must be a boolean");
  r.contractivity_ok = j.at("contractivity_ok").get<bool>();
  r.admissibility_ok = j.at("admissibility_ok").get<bool>();
  r.certificate_ok = detail::optional_bool(j, "certificate_ok");
  r.robust_ok = detail::optional_bool(j, "robust_ok");
  r.lambda = detail::number_field(j, "lambda", "report");
  r.worst_vertex_gauge = detail::number_field(j, "worst_vertex_gauge", "report");
  r.worst_input_violation = detail::number_field(j, "worst_input_violation", "report");
  r.lyapunov_decay_margin = detail::optional_number(j, "lyapunov_decay_margin");
  return r;
}

inline Json certificate_to_json(const CertificateFile& c) {
  Json j;
  j["gain"] = matrix_to_json(c.certificate.gain);
  j["g_matrix"] = c.certificate.g_matrix ? matrix_to_json(*c.certificate.g_matrix) : Json(nullptr);
  j["p_matrix"] = c.certificate.p_matrix ? matrix_to_json(*c.certificate.p_matrix) : Json(nullptr);
  j["lambda"] = c.certificate.lambda;
  j["mode"] = c.mode;
  j["report"] = report_to_json(c.report);
  j["tool_version"] = c.tool_version;
  j["input_digest"] = c.input_digest;
  return j;
}

inline CertificateFile certificate_from_json(const Json& j) {
  if (!j.is_object()) throw ValidationError("certificate: top level must be an object");
  if (!j.contains("gain")) throw ValidationError("certificate: missing 'gain'");
  CertificateFile c;
  c.certificate.gain = matrix_from_json(j.at("gain"), "gain");
  if (j.contains("g_matrix") && !j.at("g_matrix").is_null())
    c.certificate.g_matrix = matrix_from_json(j.at("g_matrix"), "g_matrix");
  if (j.contains("p_matrix") && !j.at("p_matrix").is_null())
    c.certificate.p_matrix = matrix_from_json(j.at("p_matrix"), "p_matrix");
  c.certificate.lambda = detail::number_field(j, "lambda", "certificate");
  if (j.contains("report")) c.report = report_from_json(j.at("report"));
  c.mode = j.value("mode", std::string());
  c.tool_version = j.value("tool_version", std::string());
  c.input_digest = j.value("input_digest", std::string());
  return c;
}

inline CertificateFile read_certificate(const std::string& path) {
  return certificate_from_json(parse_json(read_text(path), path));
}

inline void write_certificate(const std::string& path, const CertificateFile& c) {
  write_text(path, dump_json(certificate_to_json(c)));
}

}  // namespace ddinv::io
