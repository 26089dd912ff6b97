#pragma once

#include "ddinv/experiment.hpp"
#include "ddinv/polytope.hpp"
#include "ddinv/synthesis.hpp"

namespace ddinv::oracle {

// Two-state benchmark: quadrilateral state set, |u| <= 7, unstable plant.
inline MatrixXd benchmark_s() {
  MatrixXd s(4, 2);
  s << 1.0 / 5, 2.0 / 5, -1.0 / 5, -2.0 / 5, -3.0 / 20, 1.0 / 5, 3.0 / 20, -1.0 / 5;
  return s;
}

inline MatrixXd benchmark_u() { return (MatrixXd(2, 1) << 1.0 / 7, -1.0 / 7).finished(); }

inline PlantModel benchmark_plant() {
  MatrixXd a(2, 2), b(2, 1);
  a << 4.0 / 5, 1.0 / 2, -2.0 / 5, 6.0 / 5;
  b << 0, 1;
  return {a, b};
}

inline constexpr std::uint64_t kBenchmarkSeed = 20200;
inline constexpr Index kBenchmarkSamples = 20;

struct BenchmarkExperiment {
  Sequence inputs;
  Sequence states;
  ExperimentData data;
};

inline BenchmarkExperiment benchmark_experiment(std::uint64_t seed = kBenchmarkSeed) {
  Rng rng(seed);
  auto u = uniform_inputs(rng, 1, kBenchmarkSamples, -1.0, 1.0);
  auto x = simulate(benchmark_plant(), (VectorXd(2) << 1.0, 0.0).finished(), u);
  auto d = build_data_matrices(u, x);
  return {std::move(u), std::move(x), std::move(d)};
}

inline SynthesisProblem benchmark_problem(std::optional<double> lambda, bool data_based = true) {
  auto s = PolyhedralCSet::validate(benchmark_s());
  auto u = InputPolytope::validate(benchmark_u());
  if (data_based) return {s, u, lambda, benchmark_experiment().data, std::nullopt};
  return {s, u, lambda, benchmark_plant(), std::nullopt};
}

}  // namespace ddinv::oracle
