#include <gtest/gtest.h>

#include <algorithm>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>

#include "revip/burke_field.hpp"
#include "revip/involutions.hpp"
#include "revip/kernels.hpp"
#include "revip/laws.hpp"

using namespace revip;

namespace {

using I = std::int64_t;

Distribution<I> geo(double theta) { return from_law<I>(Law::geometric(theta)); }
Distribution<I> three(double p, double q, double r) { return from_law<I>(Law::three_point(p, q, r)); }

}  // namespace

TEST(Field, SingleVertexIsOneApplication) {
  const auto h = catalog::reflecting_rw();
  Stream rng(1);
  const auto fld = simulate_field(h, geo(0.4), three(0.2, 0.5, 0.3), 1, 1, rng);
  EXPECT_EQ(fld.x(1, 1), h.f(fld.x(1, 0), fld.u(0, 0)));
  EXPECT_EQ(fld.u(1, 0), h.g(fld.x(1, 0), fld.u(0, 0)));
  EXPECT_THROW(simulate_field(h, geo(0.4), three(0.2, 0.5, 0.3), 0, 1, rng), std::invalid_argument);
}

TEST(Field, RecursionAndRangeClosure) {
  const auto h = catalog::reflecting_rw();
  Stream rng(2);
  const auto fld = simulate_field(h, geo(0.4), three(0.2, 0.5, 0.3), 40, 40, rng);
  EXPECT_EQ(field_recursion_deviation(fld), 0.0);
  for (const I x : fld.xs) EXPECT_GE(x, 0);
  for (const I u : fld.us) {
    EXPECT_GE(u, -1);
    EXPECT_LE(u, 1);
  }
  // X[n][t+1] = f(X[n][t], U[n-1][t]) read back by hand at one site
  EXPECT_EQ(fld.x(7, 13), std::max<I>(0, fld.x(7, 12) + fld.u(6, 12)));
}

TEST(Field, DeterministicForSeed) {
  const auto h = catalog::matsumoto_yor();
  const auto mu = from_law<double>(Law::gig(2.0, 1.0));
  const auto nu = from_law<double>(Law::gamma(2.0, 1.0));
  Stream a(3);
  Stream b(3);
  const auto f1 = simulate_field(h, mu, nu, 30, 30, a);
  const auto f2 = simulate_field(h, mu, nu, 30, 30, b);
  EXPECT_EQ(f1.xs, f2.xs);
  EXPECT_EQ(f1.us, f2.us);
}

TEST(Burke, ReflectingWalkStationary) {
  Stream rng(4);
  const auto fld = simulate_field(catalog::reflecting_rw(), geo(0.4), three(0.2, 0.5, 0.3), 200, 200, rng);
  const auto r = verify_burke(fld);
  EXPECT_TRUE(r.pass) << r.tests.size();
  for (const auto& key : {"rows_gof", "rows_independence", "column_transitions", "u_duality", "u_columns_gof"}) {
    EXPECT_TRUE(r.tests.count(key)) << key;
  }
}

TEST(Burke, MatsumotoYorStationary) {
  Stream rng(5);
  const auto fld = simulate_field(catalog::matsumoto_yor(), from_law<double>(Law::gig(2.0, 1.0)),
                                  from_law<double>(Law::gamma(2.0, 1.0)), 150, 150, rng);
  EXPECT_TRUE(verify_burke(fld).pass);
}

TEST(Burke, CorruptedBoundaryRejects) {
  Stream rng(6);
  const auto fld = simulate_field(catalog::reflecting_rw(), geo(0.4), three(0.2, 0.5, 0.3), 200, 200, rng,
                                  std::optional<Distribution<I>>(three(0.5, 0.2, 0.3)));
  const auto r = verify_burke(fld);
  EXPECT_FALSE(r.pass);
  EXPECT_FALSE(r.tests.at("u_columns_gof").pass);
}

TEST(Burke, MismatchedStateLawRejects) {
  Stream rng(7);
  auto fld = simulate_field(catalog::reflecting_rw(), geo(0.6), three(0.2, 0.5, 0.3), 200, 200, rng);
  fld.mu = geo(0.4);
  const auto r = verify_burke(fld);
  EXPECT_FALSE(r.pass);
  EXPECT_FALSE(r.tests.at("rows_gof").pass);
}

TEST(Burke, SmallFieldRefused) {
  Stream rng(8);
  const auto fld = simulate_field(catalog::reflecting_rw(), geo(0.4), three(0.2, 0.5, 0.3), 10, 50, rng);
  EXPECT_THROW(verify_burke(fld), std::invalid_argument);
}

TEST(Burke, CsvLayout) {
  Stream rng(9);
  const auto fld = simulate_field(catalog::reflecting_rw(), geo(0.4), three(0.2, 0.5, 0.3), 2, 3, rng);
  std::ostringstream os;
  write_field_csv(os, fld);
  const std::string s = os.str();
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 1 + 3 * 4);
  EXPECT_EQ(s.substr(0, 8), "n,t,x,u\n");
  EXPECT_NE(s.find("\n0,0,,"), std::string::npos);
  EXPECT_NE(s.find("\n2,3," + std::to_string(fld.x(2, 3)) + ",\n"), std::string::npos);
}
