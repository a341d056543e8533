#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

#include "soctuner/design_space.hpp"
#include "support.hpp"

using namespace soctuner;

TEST_CASE("table1 document loads 24 parameters in order") {
  const auto& s = table1_space();
  CHECK(s.dimension() == 24);
  const auto host = s.find("HostCore");
  REQUIRE(host < s.dimension());
  CHECK(s.parameter(host).labels == std::vector<std::string>{"c1", "c2", "c3"});
  CHECK(s.parameter(host).symbolic);
  const auto mesh = s.find("Meshrow/col");
  REQUIRE(mesh < s.dimension());
  CHECK(s.parameter(mesh).labels == std::vector<std::string>{"8", "16", "32", "64"});
  CHECK(s.parameter(0).name == "HostCore");
  CHECK(s.log10_cardinality() > 12.0);
  for (const auto& p : s.parameters())
    CHECK((p.group == "host-core" || p.group == "systolic" || p.group == "memory" ||
           p.group == "controller" || p.group == "rocc"));
}

TEST_CASE("symbolic candidates get ordinal levels") {
  const auto& s = table1_space();
  const auto& df = s.parameter(s.find("Dataflow"));
  CHECK(df.levels == std::vector<double>{0.0, 1.0, 2.0});
}

TEST_CASE("single parameter single candidate space") {
  const auto s = load_space(R"({"parameters":[{"name":"a","group":"memory","candidates":[3]}]})");
  CHECK(s.cardinality() == 1);
  const auto pts = s.sample_uniform(5, 1);
  REQUIRE(pts.size() == 5);
  for (const auto& p : pts) CHECK(p == DesignPoint{{0}});
  CHECK(s.encode(pts[0]) == std::vector<double>{0.0});
}

TEST_CASE("load_space errors name the offending parameter") {
  auto message = [](std::string_view doc) {
    try {
      load_space(doc);
    } catch (const SpaceError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  const auto dup = message(R"({"parameters":[{"name":"x","candidates":[1,2]},{"name":"x","candidates":[3]}]})");
  CHECK(dup.find("'x'") != std::string::npos);
  CHECK(dup.find("parameters[1]") != std::string::npos);
  const auto empty = message(R"({"parameters":[{"name":"y","candidates":[]}]})");
  CHECK(empty.find("'y'") != std::string::npos);
  CHECK(empty.find("empty") != std::string::npos);
  CHECK(message(R"({"parameters":[{"name":"z","candidates":[1,1]}]})").find("'z'") != std::string::npos);
  CHECK(message(R"({"parameters":[{"name":"m","candidates":[1,"a"]}]})").find("'m'") != std::string::npos);
  CHECK(message(R"({"parameters": [ )").find("byte") != std::string::npos);
  CHECK(!message(R"({"params":[]})").empty());
  CHECK(!message(R"({"parameters":[{"candidates":[1]}]})").empty());
}

TEST_CASE("document seed is carried") {
  const auto s = load_space(R"({"seed": 42, "parameters":[{"name":"a","candidates":[0.5,1.5]}]})");
  CHECK(s.seed() == 42);
  CHECK(s.parameter(0).labels == std::vector<std::string>{"0.5", "1.5"});
}

TEST_CASE("encode uses min-max scaled levels") {
  const auto& s = table1_space();
  const auto mesh = s.find("Meshrow/col");
  DesignPoint p{std::vector<std::size_t>(s.dimension(), 0)};
  CHECK(s.encode(p)[mesh] == 0.0);
  p.assignment[mesh] = 3;
  CHECK(s.encode(p)[mesh] == 1.0);
  p.assignment[mesh] = 1;
  CHECK(s.encode(p)[mesh] == doctest::Approx((16.0 - 8.0) / (64.0 - 8.0)).epsilon(1e-15));
  CHECK(s.encode(p)[mesh] == doctest::Approx(0.142857142857).epsilon(1e-10));
}

TEST_CASE("encode rejects out-of-range indices") {
  const auto s = testing::grid_space(2, 3);
  CHECK_THROWS_AS(s.encode(DesignPoint{{0, 3}}), SpaceError);
  CHECK_THROWS_AS(s.encode(DesignPoint{{0}}), SpaceError);
  CHECK_FALSE(s.contains(DesignPoint{{5, 0}}));
}

TEST_CASE("encode/decode round trip and unit box") {
  const auto& s = table1_space();
  for (const auto& p : s.sample_uniform(500, 3)) {
    const auto x = s.encode(p);
    for (double c : x) {
      CHECK(c >= 0.0);
      CHECK(c <= 1.0);
    }
    CHECK(s.decode(x) == p);
  }
}

TEST_CASE("sample_uniform is deterministic under seed") {
  const auto& s = table1_space();
  CHECK(s.sample_uniform(30, 7) == s.sample_uniform(30, 7));
  CHECK(s.sample_uniform(30, 7) != s.sample_uniform(30, 8));
  CHECK_THROWS(s.sample_uniform(0, 1));
}

TEST_CASE("sample_uniform candidate frequencies") {
  const auto s = testing::grid_space(2, 2);
  const std::size_t n = 10000;
  const auto pts = s.sample_uniform(n, 11);
  const double sigma = std::sqrt(n * 0.25);
  for (std::size_t i = 0; i < 2; ++i) {
    std::size_t ones = 0;
    for (const auto& p : pts) ones += p[i];
    CHECK(std::abs(static_cast<double>(ones) - 0.5 * n) <= 3.0 * sigma);
  }
}

TEST_CASE("cardinality saturates") {
  std::vector<ParameterDef> ps;
  for (int i = 0; i < 70; ++i) ps.push_back(testing::numeric("q" + std::to_string(i), {0, 1, 2}));
  DesignSpace big(ps);
  CHECK(big.cardinality() == UINT64_MAX);
  CHECK(big.log10_cardinality() == doctest::Approx(70 * std::log10(3.0)));
}

TEST_CASE("unique_points keeps first occurrence order") {
  std::vector<DesignPoint> pts{{{1, 0}}, {{0, 0}}, {{1, 0}}, {{2, 2}}};
  const auto u = unique_points(pts);
  CHECK(u == std::vector<DesignPoint>{{{1, 0}}, {{0, 0}}, {{2, 2}}});
}
