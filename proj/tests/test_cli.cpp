#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "ddinv/cli.hpp"
#include "fixtures.hpp"

namespace {

using namespace ddinv;
using namespace ddinv::cli;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("ddinv_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  // Benchmark config: model block plus a 20-sample experiment on [-1, 1].
  std::string write_config(Index samples = oracle::kBenchmarkSamples, double lo = -1.0,
                           double hi = 1.0) {
    io::ProblemFile p{oracle::benchmark_s(), oracle::benchmark_u(), 0.84};
    p.model = oracle::benchmark_plant();
    p.seed = oracle::kBenchmarkSeed;
    p.experiment = io::ExperimentSettings{samples, lo, hi, (VectorXd(2) << 1.0, 0.0).finished(),
                                          std::nullopt};
    const auto file = path("config.json");
    io::write_problem(file, p);
    return file;
  }

  std::string generated_problem() {
    const auto out = path("problem.json");
    EXPECT_EQ(cmd_generate({write_config(), out, std::nullopt}, sink_, sink_), kExitOk);
    return out;
  }

  std::string certificate(const std::string& problem, const std::string& lambda = "0.84") {
    const auto out = path("cert-" + lambda + ".json");
    EXPECT_EQ(cmd_synthesize({problem, out, lambda, false}, sink_, sink_), kExitOk);
    return out;
  }

  std::filesystem::path dir_;
  std::ostringstream sink_;
};

TEST_F(CliTest, GenerateBenchmark) {
  std::ostringstream out, err;
  const auto problem = path("problem.json");
  ASSERT_EQ(cmd_generate({write_config(), problem, std::nullopt}, out, err), kExitOk);
  EXPECT_NE(out.str().find("full row rank"), std::string::npos);
  EXPECT_TRUE(err.str().empty());
  const auto p = io::read_problem(problem);
  ASSERT_TRUE(p.data);
  EXPECT_EQ(p.data->samples(), 20);
  EXPECT_EQ(p.seed, oracle::kBenchmarkSeed);
  EXPECT_TRUE(theta_has_full_row_rank(*p.data));
  // Same seed, same data as the library-level experiment.
  EXPECT_EQ(p.data->x1t, oracle::benchmark_experiment().data.x1t);
}

TEST_F(CliTest, GenerateSeedOverrideRecorded) {
  const auto problem = path("problem.json");
  ASSERT_EQ(cmd_generate({write_config(), problem, 42}, sink_, sink_), kExitOk);
  EXPECT_EQ(io::read_problem(problem).seed, 42u);
}

TEST_F(CliTest, GenerateShortExperimentWarns) {
  std::ostringstream out, err;
  ASSERT_EQ(cmd_generate({write_config(4), path("p.json"), std::nullopt}, out, err), kExitOk);
  EXPECT_NE(err.str().find("below the minimum (m+1)n+m = 5"), std::string::npos);
}

TEST_F(CliTest, GenerateZeroRangeIsRankDeficient) {
  std::ostringstream out, err;
  ASSERT_EQ(cmd_generate({write_config(20, 0.0, 0.0), path("p.json"), std::nullopt}, out, err),
            kExitOk);
  EXPECT_NE(out.str().find("rank deficient"), std::string::npos);
  EXPECT_FALSE(theta_has_full_row_rank(*io::read_problem(path("p.json")).data));
}

TEST_F(CliTest, GenerateErrors) {
  EXPECT_EQ(cmd_generate({write_config(), "/nonexistent/dir/p.json", std::nullopt}, sink_, sink_),
            kExitError);
  EXPECT_EQ(cmd_generate({path("missing.json"), path("p.json"), std::nullopt}, sink_, sink_),
            kExitError);
  io::ProblemFile no_model{oracle::benchmark_s(), oracle::benchmark_u(), 0.84};
  io::write_problem(path("nomodel.json"), no_model);
  EXPECT_EQ(cmd_generate({path("nomodel.json"), path("p.json"), std::nullopt}, sink_, sink_),
            kExitError);
}

TEST_F(CliTest, SynthesizeExitCodes) {
  const auto problem = generated_problem();
  const auto out = path("c.json");
  EXPECT_EQ(cmd_synthesize({problem, out, "0.84", false}, sink_, sink_), kExitOk);
  EXPECT_EQ(cmd_synthesize({problem, out, "0.2", false}, sink_, sink_), kExitInfeasible);
  EXPECT_EQ(cmd_synthesize({problem, out, "abc", false}, sink_, sink_), kExitError);
  EXPECT_EQ(cmd_synthesize({problem, out, "1.5", false}, sink_, sink_), kExitError);
  EXPECT_EQ(cmd_synthesize({problem, out, std::nullopt, true}, sink_, sink_), kExitError);
  EXPECT_EQ(cmd_synthesize({path("missing.json"), out, std::nullopt, false}, sink_, sink_),
            kExitError);
}

TEST_F(CliTest, SynthesizeMinimumLambda) {
  const auto problem = generated_problem();
  const auto cert = io::read_certificate(certificate(problem, "min"));
  EXPECT_NEAR(cert.certificate.lambda, 0.758, 1e-3);
  EXPECT_EQ(cert.mode, "min");
  EXPECT_EQ(cert.input_digest, io::digest(io::read_text(problem)));
  EXPECT_EQ(cert.tool_version, io::kToolVersion);
  EXPECT_TRUE(cert.certificate.g_matrix);
}

// Exit 0 implies every applicable check in the embedded report passed.
TEST_F(CliTest, ExitZeroMeansReportPassed) {
  const auto problem = generated_problem();
  for (const std::string lambda : {"0.8", "0.84", "0.9", "min"}) {
    const auto cert = io::read_certificate(certificate(problem, lambda));
    EXPECT_TRUE(cert.report.contractivity_ok);
    EXPECT_TRUE(cert.report.admissibility_ok);
    EXPECT_EQ(cert.report.certificate_ok, true);
    EXPECT_TRUE(cert.report.passed());
  }
}

TEST_F(CliTest, VerifyOutcomes) {
  const auto problem = generated_problem();
  const auto good = certificate(problem);
  std::ostringstream out;
  EXPECT_EQ(cmd_verify({problem, good}, out, sink_), kExitOk);
  EXPECT_NE(out.str().find("PASS"), std::string::npos);

  auto bad = io::read_certificate(good);
  bad.certificate.gain.array() += 1.0;
  io::write_certificate(path("bad.json"), bad);
  EXPECT_EQ(cmd_verify({problem, path("bad.json")}, sink_, sink_), kExitInfeasible);

  io::CertificateFile zero;
  zero.certificate.gain = MatrixXd::Zero(1, 2);
  zero.certificate.lambda = 0.84;
  zero.mode = "fixed";
  io::write_certificate(path("zero.json"), zero);
  EXPECT_EQ(cmd_verify({problem, path("zero.json")}, sink_, sink_), kExitInfeasible);

  zero.certificate.gain = MatrixXd::Zero(1, 3);
  io::write_certificate(path("shape.json"), zero);
  EXPECT_EQ(cmd_verify({problem, path("shape.json")}, sink_, sink_), kExitError);
}

TEST_F(CliTest, SimulateCsvColumns) {
  const auto problem = generated_problem();
  const auto cert = certificate(problem);
  for (const std::string x0 : {"6,-0.5", "0,0", "-2,3.5", "1.5, 0.25"}) {
    std::ostringstream out;
    SimulateOptions o{problem, cert, x0, 50, "", PlotFormat::Csv};
    ASSERT_EQ(cmd_simulate(o, out, sink_), kExitOk);
    std::istringstream lines(out.str());
    std::string line;
    int rows = 0;
    while (std::getline(lines, line)) {
      EXPECT_EQ(std::count(line.begin(), line.end(), ','), 1 + 2 + 1 + 1 - 1) << line;
      ++rows;
    }
    EXPECT_EQ(rows, 1 + 51);
  }
}

TEST_F(CliTest, SimulateVertexDecayAndBounds) {
  const auto problem = generated_problem();
  const auto cert = certificate(problem);
  const auto out = path("traj.csv");
  ASSERT_EQ(cmd_simulate({problem, cert, "6,-0.5", 50, out, PlotFormat::Csv}, sink_, sink_), kExitOk);
  std::istringstream lines(io::read_text(out));
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "t,x_1,x_2,u_1,V");
  double prev_v = -1.0;
  while (std::getline(lines, line)) {
    std::vector<double> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(std::stod(cell));
    ASSERT_EQ(f.size(), 5u);
    EXPECT_LE(std::abs(f[3]), 7.0 + 1e-6);
    if (prev_v >= 0) EXPECT_LE(f[4], 0.84 * prev_v + 1e-6);
    prev_v = f[4];
  }
}

TEST_F(CliTest, SimulateZeroStateStaysZero) {
  const auto problem = generated_problem();
  std::ostringstream out;
  ASSERT_EQ(cmd_simulate({problem, certificate(problem), "0,0", 10, "", PlotFormat::Csv}, out, sink_),
            kExitOk);
  std::istringstream lines(out.str());
  std::string line;
  std::getline(lines, line);
  int t = 0;
  while (std::getline(lines, line)) EXPECT_EQ(line, std::to_string(t++) + ",0,0,0,0");
}

TEST_F(CliTest, SimulateErrors) {
  const auto problem = generated_problem();
  const auto cert = certificate(problem);
  EXPECT_EQ(cmd_simulate({problem, cert, "60,-0.5", 10, "", PlotFormat::Csv}, sink_, sink_),
            kExitInfeasible);
  EXPECT_EQ(cmd_simulate({problem, cert, "1,2,3", 10, "", PlotFormat::Csv}, sink_, sink_), kExitError);
  EXPECT_EQ(cmd_simulate({problem, cert, "1,x", 10, "", PlotFormat::Csv}, sink_, sink_), kExitError);
  EXPECT_EQ(cmd_simulate({problem, cert, "0,0", 0, "", PlotFormat::Csv}, sink_, sink_), kExitError);
  EXPECT_EQ(cmd_simulate({problem, cert, "0,0", 5, "", PlotFormat::Svg}, sink_, sink_), kExitError);
}

TEST_F(CliTest, SimulateSvg) {
  const auto problem = generated_problem();
  const auto out = path("traj.svg");
  ASSERT_EQ(cmd_simulate({problem, certificate(problem), "6,-0.5", 20, out, PlotFormat::Svg}, sink_,
                         sink_),
            kExitOk);
  const auto text = io::read_text(out);
  EXPECT_EQ(text.rfind("<svg", 0), 0u);
  EXPECT_NE(text.find("<polyline"), std::string::npos);
  // 0.84^k >= 0.05 for k = 1..17: S plus 17 nested copies.
  std::size_t polygons = 0;
  for (auto pos = text.find("<polygon"); pos != std::string::npos; pos = text.find("<polygon", pos + 1))
    ++polygons;
  EXPECT_EQ(polygons, 18u);
  // Bounding box of S is [-6, 6] x [-3.5, 3.5]; inflated by 10%.
  EXPECT_NE(text.find("viewBox=\"-7.2 -4.2 14.4 8.4\""), std::string::npos);
  const auto input = io::read_text(path("traj-input.svg"));
  EXPECT_NE(input.find("stroke=\"red\""), std::string::npos);
}

TEST_F(CliTest, RobustWorkflow) {
  io::ProblemFile p{box_h_matrix(VectorXd::Ones(2)), (MatrixXd(2, 1) << 2.0, -2.0).finished(),
                    std::nullopt};
  p.model.emplace((MatrixXd(2, 2) << 0.5, 0.2, -0.1, 0.9).finished(),
                  (MatrixXd(2, 1) << 0.0, 1.0).finished());
  p.seed = 7;
  p.experiment = io::ExperimentSettings{10, -5.0, 5.0, VectorXd::Zero(2), 0.05};
  io::write_problem(path("config.json"), p);
  ASSERT_EQ(cmd_generate({path("config.json"), path("r.json"), std::nullopt}, sink_, sink_), kExitOk);
  const auto generated = io::read_problem(path("r.json"));
  ASSERT_TRUE(generated.disturbance);
  EXPECT_EQ(generated.disturbance->rows(), 4);
  ASSERT_EQ(cmd_synthesize({path("r.json"), path("rc.json"), std::nullopt, true}, sink_, sink_),
            kExitOk);
  const auto cert = io::read_certificate(path("rc.json"));
  EXPECT_EQ(cert.mode, "robust");
  EXPECT_EQ(cert.report.robust_ok, true);
  EXPECT_FALSE(cert.certificate.p_matrix);
  EXPECT_EQ(cmd_verify({path("r.json"), path("rc.json")}, sink_, sink_), kExitOk);
}

}  // namespace
