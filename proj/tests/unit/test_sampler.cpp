#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "rellevy/levy.hpp"
#include "rellevy/rng.hpp"
#include "rellevy/sampler.hpp"
#include "rellevy/stats.hpp"

using namespace rellevy;

TEST_CASE("rng streams are keyed and reproducible") {
  RngStream a(1, 2, 3), b(1, 2, 3), c(1, 2, 4), d(1, 3, 3);
  const auto x = a();
  CHECK(x == b());
  CHECK(x != c());
  CHECK(x != d());
  RngStream u(9, 0, 0);
  for (int i = 0; i < 10000; ++i) {
    const double v = u.uniform();
    REQUIRE(v > 0.0);
    REQUIRE(v < 1.0);
  }
  RunningStats st;
  for (int i = 0; i < 20000; ++i) st.add(static_cast<double>(u.poisson(3.5)));
  CHECK(std::abs(st.mean - 3.5) < 5 * st.stderr_mean());
}

TEST_CASE("stats helpers") {
  RunningStats a, b, all;
  for (int i = 0; i < 100; ++i) {
    const double v = std::sin(i * 0.7);
    (i < 37 ? a : b).add(v);
    all.add(v);
  }
  a.merge(b);
  CHECK(a.mean == doctest::Approx(all.mean).epsilon(1e-14));
  CHECK(a.variance() == doctest::Approx(all.variance()).epsilon(1e-12));
  NeumaierSum s;
  s.add(1.0);
  s.add(1e100);
  s.add(1.0);
  s.add(-1e100);
  CHECK(s.value() == 2.0);
  std::vector<double> xs{0.1, 0.4, 0.6, 0.9};
  CHECK(ks_distance(xs, [](double x) { return x; }) == doctest::Approx(0.15));
}

TEST_CASE("sampled paths satisfy the path invariants") {
  for (double m : {0.0, 0.5}) {
    const RadialMap map = m == 0.0 ? RadialMap::identity(2) : RadialMap::build({2, m});
    for (int i = 0; i < 50; ++i) {
      RngStream rng(5, 1, i);
      const JumpPath p = sample_path(1.5, 1e-2, map, rng);
      CHECK_NOTHROW(p.validate());
      CHECK(p.params.m == m);
      CHECK(p.cutoff == 1e-2);
    }
  }
  RngStream rng(1, 1, 1);
  CHECK_THROWS_AS(sample_path(0.0, 1e-2, RadialMap::identity(1), rng), std::invalid_argument);
}

TEST_CASE("jump count matches the tail mass") {
  const ModelParams p{1, 1.0};
  const RadialMap map = RadialMap::build(p);
  RunningStats st;
  for (int i = 0; i < 4000; ++i) {
    RngStream rng(11, 2, i);
    st.add(static_cast<double>(sample_path(1.0, 1e-2, map, rng).size()));
  }
  CHECK(std::abs(st.mean - tail_mass(1e-2, p)) < 4 * st.stderr_mean());
}

TEST_CASE("position is right-continuous") {
  JumpPath p{{1, 0.0}, 1.0, 0.1, {0.25, 0.5}, {1.0, -3.0}};
  p.validate();
  CHECK(p.position(0.2)[0] == 0.0);
  CHECK(p.position(0.25)[0] == 1.0);
  CHECK(p.position(0.75)[0] == -2.0);
  JumpPath bad = p;
  bad.times = {0.5, 0.25};
  CHECK_THROWS_AS(bad.validate(), std::logic_error);
  bad = p;
  bad.jumps = {0.01, 1.0};
  CHECK_THROWS_AS(bad.validate(), std::logic_error);
}

TEST_CASE("coupling keeps times and shrinks every jump") {
  const RadialMap map = RadialMap::build({3, 1.0});
  RngStream rng(3, 3, 3);
  const JumpPath base = sample_path(1.0, 1e-2, RadialMap::identity(3), rng);
  const CoupledPair pair = transform_path(base, map);
  CHECK(pair.transformed.times == base.times);
  CHECK(pair.transformed.params.m == 1.0);
  CHECK_NOTHROW(pair.transformed.validate());
  for (std::size_t i = 0; i < base.size(); ++i) {
    const auto a = base.jump(i);
    const auto b = pair.transformed.jump(i);
    CHECK(std::hypot(b[0], b[1], b[2]) < std::hypot(a[0], a[1], a[2]));
    CHECK(a[0] * b[0] + a[1] * b[1] + a[2] * b[2] > 0.0);
  }
  CHECK(sup_distance(base, base, 1.0) == 0.0);
  CHECK(sup_distance(pair.transformed, base, 1.0) > 0.0);
  CHECK_THROWS_AS(transform_path(pair.transformed, map), std::invalid_argument);
}

TEST_CASE("sup_distance sees every jump time") {
  JumpPath a{{1, 0.0}, 1.0, 0.1, {0.2, 0.4}, {1.0, -1.0}};
  JumpPath b{{1, 0.0}, 1.0, 0.1, {0.3}, {0.5}};
  // on [0.2, 0.3): |1 - 0| = 1
  CHECK(sup_distance(a, b, 1.0) == 1.0);
  CHECK(sup_distance(a, b, 0.1) == 0.0);
}

TEST_CASE("subordinated increments have the right law") {
  for (double m : {0.0, 1.0}) {
    std::vector<double> xs;
    for (int i = 0; i < 20000; ++i) {
      RngStream rng(21, 7, i);
      xs.push_back(sample_increment(1.0, {1, m}, rng)[0]);
    }
    CHECK(ks_distance(xs, [&](double x) { return kernel_cdf_1d(x, 1.0, m); }) < 1.63 / std::sqrt(20000.0));
  }
}

TEST_CASE("truncation residual") {
  const std::vector<double> xi{1.0};
  CHECK(truncation_char_residual(xi, 0.1, {1, 0.0}) == doctest::Approx(0.031822148445258900421).epsilon(1e-10));
  CHECK(truncation_char_residual(xi, 0.01, {1, 0.5}) < truncation_char_residual(xi, 0.1, {1, 0.5}));
}

TEST_CASE("path dump round trip") {
  std::vector<JumpPath> paths;
  const RadialMap map = RadialMap::build({2, 0.3});
  for (int i = 0; i < 3; ++i) {
    RngStream rng(8, 8, i);
    paths.push_back(sample_path(1.0, 0.05, map, rng));
  }
  paths.push_back(JumpPath{{2, 0.3}, 1.0, 0.05, {}, {}});
  std::stringstream ss;
  write_path_dump(ss, paths);
  const std::string text = ss.str();
  CHECK(text.rfind("path,d,mass,horizon,cutoff,n_jumps,times,jumps\n", 0) == 0);
  const auto back = read_path_dump(ss);
  REQUIRE(back.size() == paths.size());
  for (std::size_t i = 0; i < paths.size(); ++i) {
    CHECK(back[i].times == paths[i].times);
    CHECK(back[i].jumps == paths[i].jumps);
    CHECK(back[i].params.m == paths[i].params.m);
    CHECK(back[i].cutoff == paths[i].cutoff);
  }
  std::stringstream bad("nope\n");
  CHECK_THROWS(read_path_dump(bad));
}
