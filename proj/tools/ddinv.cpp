#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "ddinv/cli.hpp"

int main(int argc, char** argv) {
  using namespace ddinv::cli;
  CLI::App app{"Invariant-set state feedback from open-loop data", "ddinv"};
  app.set_version_flag("--version", std::string(ddinv::io::kToolVersion));
  app.require_subcommand(1);

  GenerateOptions gen;
  std::uint64_t gen_seed = 0;
  auto* g = app.add_subcommand("generate", "run a seeded open-loop experiment on a model");
  g->add_option("config", gen.config_path, "problem file with a model block")->required();
  auto* seed_opt = g->add_option("--seed", gen_seed, "random seed (overrides meta.seed)");
  g->add_option("--out", gen.out_path, "output problem file")->required();

  SynthesizeOptions syn;
  std::string syn_lambda;
  auto* s = app.add_subcommand("synthesize", "compute a contractive gain and its certificate");
  s->add_option("problem", syn.problem_path, "problem file")->required();
  auto* lambda_opt = s->add_option("--lambda", syn_lambda, "contraction level, or 'min'");
  s->add_flag("--robust", syn.robust, "robust synthesis against the disturbance block");
  s->add_option("--out", syn.out_path, "output certificate file")->required();

  VerifyOptions ver;
  auto* v = app.add_subcommand("verify", "check a certificate against a problem");
  v->add_option("problem", ver.problem_path, "problem file")->required();
  v->add_option("certificate", ver.certificate_path, "certificate file")->required();

  SimulateOptions sim;
  std::string sim_x0;
  auto* m = app.add_subcommand("simulate", "closed-loop trajectory as CSV or SVG");
  m->add_option("problem", sim.problem_path, "problem file")->required();
  m->add_option("certificate", sim.certificate_path, "certificate file")->required();
  auto* x0_opt = m->add_option("--x0", sim_x0, "initial state, comma separated");
  m->add_option("--steps", sim.steps, "number of steps")->capture_default_str();
  m->add_option("--out", sim.out_path, "output file (CSV defaults to stdout)");
  const std::map<std::string, PlotFormat> formats{{"csv", PlotFormat::Csv},
                                                  {"svg", PlotFormat::Svg}};
  m->add_option("--format", sim.format, "csv or svg")
      ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  if (*g) {
    if (*seed_opt) gen.seed = gen_seed;
    return cmd_generate(gen, std::cout, std::cerr);
  }
  if (*s) {
    if (*lambda_opt) syn.lambda = syn_lambda;
    return cmd_synthesize(syn, std::cout, std::cerr);
  }
  if (*v) return cmd_verify(ver, std::cout, std::cerr);
  if (*x0_opt) sim.x0 = sim_x0;
  return cmd_simulate(sim, std::cout, std::cerr);
}
