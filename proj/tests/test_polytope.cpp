#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "ddinv/polytope.hpp"
#include "oracles.hpp"

namespace {

using namespace ddinv;

MatrixXd example_s() {
  MatrixXd s(4, 2);
  s << 0.2, 0.4, -0.2, -0.4, -0.15, 0.2, 0.15, -0.2;
  return s;
}

std::vector<VectorXd> points(std::initializer_list<std::pair<double, double>> xy) {
  std::vector<VectorXd> out;
  for (auto [x, y] : xy) out.push_back((VectorXd(2) << x, y).finished());
  return out;
}

TEST(Polytope, UnitBoxVertices) {
  const auto set = PolyhedralCSet::validate(box_h_matrix(VectorXd::Ones(2)));
  EXPECT_TRUE(oracle::same_point_set(set.vertices(),
                                      points({{1, 1}, {1, -1}, {-1, 1}, {-1, -1}})));
}

TEST(Polytope, ExampleQuadrilateralVertices) {
  // Rows 1 and 4: x + 2y = 5 and 3x/20 - y/5 = 1 give (6, -0.5); the other
  // vertices follow from the remaining adjacent row pairs.
  const auto set = PolyhedralCSet::validate(example_s());
  EXPECT_TRUE(oracle::same_point_set(set.vertices(),
                                      points({{6, -0.5}, {-6, 0.5}, {-2, 3.5}, {2, -3.5}})));
}

TEST(Polytope, HexagonHasSixVertices) {
  MatrixXd h(6, 2);
  for (int k = 0; k < 6; ++k) {
    const double th = k * std::numbers::pi / 3.0;
    h.row(k) << std::cos(th), std::sin(th);
  }
  const auto v = enumerate_vertices(h);
  EXPECT_EQ(v.size(), 6u);
  EXPECT_TRUE(oracle::same_point_set(v, oracle::pairwise_vertices_2d(h)));
}

TEST(Polytope, StripIsUnbounded) {
  MatrixXd h(2, 2);
  h << 1, 0, -1, 0;
  EXPECT_THROW(PolyhedralCSet::validate(h), UnboundedSetError);
}

TEST(Polytope, OpenWedgeIsUnbounded) {
  MatrixXd h(3, 2);
  h << 1, 0, 0, 1, -1, 1;  // recession direction (-1, -2)
  EXPECT_THROW(PolyhedralCSet::validate(h), UnboundedSetError);
  EXPECT_THROW(enumerate_vertices(h), UnboundedSetError);
}

TEST(Polytope, RankDeficientRejected) {
  MatrixXd h(4, 2);
  h << 1, 2, -1, -2, 2, 4, -3, -6;
  EXPECT_THROW(PolyhedralCSet::validate(h), RankDeficientError);
}

TEST(Polytope, RedundantRowsAccepted) {
  MatrixXd h(5, 2);
  h << box_h_matrix(VectorXd::Ones(2)), 0.5, 0.0;
  const auto set = PolyhedralCSet::validate(h);
  EXPECT_EQ(set.vertices().size(), 4u);
}

TEST(Polytope, GaugeExamples) {
  const auto set = PolyhedralCSet::validate(example_s());
  EXPECT_EQ(gauge(set, VectorXd::Zero(2)), 0.0);
  for (const auto& v : set.vertices()) EXPECT_NEAR(gauge(set, v), 1.0, 1e-9);
  EXPECT_NEAR(gauge(set, (VectorXd(2) << 3, -0.25).finished()), 0.5, 1e-12);
}

TEST(Polytope, ContainsExamples) {
  const auto box = PolyhedralCSet::validate(box_h_matrix(VectorXd::Ones(2)));
  EXPECT_TRUE(contains(box, (VectorXd(2) << 0.5, 0.5).finished(), 1.0, 1e-9));
  EXPECT_FALSE(contains(box, (VectorXd(2) << 1.2, 0.0).finished(), 1.0, 1e-9));
  const auto set = PolyhedralCSet::validate(example_s());
  EXPECT_FALSE(contains(set, (VectorXd(2) << 6, -0.5).finished(), 0.84, 1e-9));
}

TEST(PolytopeProperty, GaugeHomogeneityAndMembership) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-10.0, 10.0), alpha(0.0, 10.0);
  const auto set = PolyhedralCSet::validate(example_s());
  for (int i = 0; i < 500; ++i) {
    VectorXd x(2);
    x << u(rng), u(rng);
    const double a = alpha(rng);
    EXPECT_NEAR(gauge(set, a * x), a * gauge(set, x), 1e-9 * (1.0 + a * gauge(set, x)));
    EXPECT_EQ(contains(set, x, 1.0, 1e-9), gauge(set, x) <= 1.0 + 1e-9);
  }
}

// Rebuilding the H-representation from ordered vertices (edge normals)
// reproduces the same vertex set.
TEST(PolytopeProperty, EdgeNormalRebuildIsIdempotent) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> k(3, 9);
  for (int trial = 0; trial < 50; ++trial) {
    const auto set = PolyhedralCSet::validate(oracle::random_polygon_h(rng, k(rng)));
    const auto ordered = ordered_polygon(set);
    const Index nv = static_cast<Index>(ordered.size());
    MatrixXd rebuilt(nv, 2);
    for (Index i = 0; i < nv; ++i) {
      MatrixXd m(2, 2);
      m.row(0) = ordered[i].transpose();
      m.row(1) = ordered[(i + 1) % nv].transpose();
      rebuilt.row(i) = m.fullPivLu().solve(VectorXd::Ones(2)).transpose();
    }
    const auto again = PolyhedralCSet::validate(rebuilt);
    EXPECT_TRUE(oracle::same_point_set(again.vertices(), set.vertices())) << "trial " << trial;
    for (const auto& v : again.vertices()) EXPECT_NEAR(gauge(again, v), 1.0, 1e-9);
  }
}

TEST(Disturbance, BoxAndZero) {
  const auto d = DisturbanceSet::box(2, 0.05);
  EXPECT_EQ(d.vertices().size(), 4u);
  EXPECT_TRUE(d.origin_interior());
  const auto z = DisturbanceSet::validate({VectorXd::Zero(2)});
  EXPECT_FALSE(z.origin_interior());
}

TEST(Disturbance, OriginOutsideRejected) {
  EXPECT_THROW(DisturbanceSet::validate({(VectorXd(2) << 1, 1).finished(),
                                         (VectorXd(2) << 2, 1).finished()}),
               ValidationError);
  EXPECT_THROW(DisturbanceSet::validate({}), ValidationError);
}

}  // namespace
