#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "revip/involutions.hpp"
#include "revip/kernels.hpp"
#include "revip/laws.hpp"
#include "revip/rng.hpp"
#include "revip/skorokhod.hpp"
#include "revip/special.hpp"

using namespace revip;

namespace {

std::vector<std::pair<double, double>> gaussian_points(double beta, double sigma, std::size_t n, std::uint64_t seed) {
  Stream rng(seed);
  const double sd = sigma / std::sqrt(1 - beta * beta);
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < n; ++i) pts.emplace_back(sd * rng.normal(), 0.001 + 0.998 * rng.uniform());
  return pts;
}

}  // namespace

TEST(Skorokhod, HandValues) {
  const auto fam = gaussian_family(0.5, 1.0);
  // F_x^{-1}(1/2) = beta x
  EXPECT_NEAR(skorokhod_f(fam, 2.0, 0.5), 1.0, 1e-12);
  EXPECT_NEAR(skorokhod_f(fam, 0.0, normal_cdf(1.0)), 1.0, 1e-12);
  // g(0, 1/2) = F_0(0) = 1/2
  EXPECT_NEAR(rosenblatt_g(fam, 0.0, 0.5), 0.5, 1e-12);
  EXPECT_THROW(skorokhod_f(fam, 0.0, 0.0), std::domain_error);
  EXPECT_THROW(skorokhod_f(fam, 0.0, 1.0), std::domain_error);
  EXPECT_THROW(gaussian_family(0.5, 0.0), std::invalid_argument);
}

TEST(Skorokhod, NumericPathMatchesClosedForm) {
  for (const auto& [beta, sigma] : {std::pair{0.5, 1.0}, std::pair{-0.5, 1.0}, std::pair{0.9, 2.0}}) {
    const auto numeric = gaussian_family(beta, sigma);
    const auto closed = gaussian_family(beta, sigma, true);
    const auto ref = catalog::gaussian_rosenblatt(beta, sigma);
    double worst_f = 0.0;
    double worst_g = 0.0;
    for (const auto& [x, u] : gaussian_points(beta, sigma, 2000, 1)) {
      worst_f = std::max(worst_f, std::abs(skorokhod_f(numeric, x, u) - skorokhod_f(closed, x, u)));
      worst_f = std::max(worst_f, std::abs(skorokhod_f(numeric, x, u) - ref.f(x, u)));
      worst_g = std::max(worst_g, std::abs(rosenblatt_g(numeric, x, u) - ref.g(x, u)));
    }
    EXPECT_LE(worst_f, 1e-8) << beta << "," << sigma;
    EXPECT_LE(worst_g, 1e-8) << beta << "," << sigma;
  }
}

TEST(Skorokhod, IndependentKernelIgnoresDriver) {
  // beta = 0: g(x, u) = Phi(x / sigma) for every u
  const auto fam = gaussian_family(0.0, 2.0);
  for (const double u : {0.1, 0.5, 0.9}) EXPECT_NEAR(rosenblatt_g(fam, 1.0, u), normal_cdf(0.5), 1e-12);
}

TEST(Skorokhod, UniformFamily) {
  const auto fam = uniform_family();
  EXPECT_NEAR(skorokhod_f(fam, 0.3, 0.7), 0.7, 1e-12);
  EXPECT_NEAR(rosenblatt_g(fam, 0.3, 0.7), 0.3, 1e-12);
  const auto h = build_involution(fam);
  EXPECT_EQ(h.x_space.kind, SpaceKind::UnitInterval);
  std::vector<std::pair<double, double>> pts{{0.2, 0.3}, {0.9, 0.01}, {0.5, 0.5}};
  EXPECT_TRUE((check_involution<double, double>(h, pts, 1e-12).pass));
}

TEST(Skorokhod, Monotonicity) {
  EXPECT_TRUE(is_strictly_increasing(gaussian_family(0.5, 1.0), 3.0));
  CdfFamily flat;
  flat.name = "flat";
  flat.cdf = [](double, double y) { return std::clamp(normal_cdf(y), 0.3, 0.7); };
  EXPECT_FALSE(is_strictly_increasing(flat, 0.0));
}

TEST(Skorokhod, BracketFailure) {
  CdfFamily bad;
  bad.name = "defective";
  bad.cdf = [](double, double y) { return 0.5 * normal_cdf(y); };
  EXPECT_THROW(skorokhod_f(bad, 0.0, 0.9), BracketError);
}

TEST(Skorokhod, BuiltPairIsInvolution) {
  for (const auto& [beta, sigma] : {std::pair{0.5, 1.0}, std::pair{-0.5, 1.0}, std::pair{0.9, 2.0}}) {
    const auto h = build_involution(gaussian_family(beta, sigma));
    EXPECT_EQ(h.params.at("reversible"), 1.0);
    const auto pts = gaussian_points(beta, sigma, 2000, 2);
    const auto r = check_involution<double, double>(h, pts, 1e-8);
    EXPECT_TRUE(r.pass) << beta << "," << sigma << " " << r.values.at("max_deviation");
  }
  EXPECT_EQ(build_involution(gaussian_family(1.5, 1.0)).params.at("reversible"), 0.0);
}

TEST(Skorokhod, BuiltPairPreservesIndependence) {
  const double beta = 0.5;
  const double sigma = 1.0;
  const auto h = build_involution(gaussian_family(beta, sigma));
  const auto mu = from_law<double>(Law::normal(0.0, sigma * sigma / (1 - beta * beta)));
  const auto nu = from_law<double>(Law::uniform_unit());
  Stream rng(3);
  EXPECT_TRUE(check_ip_statistical(h, mu, nu, 100000, rng).pass);
  const auto wrong = from_law<double>(Law::normal(0.0, 3.0));
  EXPECT_FALSE(check_ip_statistical(h, wrong, nu, 100000, rng).pass);
}

TEST(Skorokhod, IntervalSpaces) {
  EXPECT_EQ(interval_space(0.0, 1.0).kind, SpaceKind::UnitInterval);
  EXPECT_EQ(interval_space(0.0, INFINITY).kind, SpaceKind::PositiveReal);
  EXPECT_THROW(interval_space(1.0, 2.0), std::invalid_argument);
}
