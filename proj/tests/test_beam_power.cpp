#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "uavsense/beam_power.hpp"
#include "uavsense/rng.hpp"

#include <cmath>

using namespace uavsense;

namespace {

Vec vec(std::initializer_list<double> values) {
  Vec v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

LinkModel equalBank(int n, double gain = 1.0, double bandwidth = 1.0) {
  LinkModel links;
  for (int b = 0; b < n; ++b) links.beams.push_back({gain, bandwidth, 1.0});
  return links;
}

}  // namespace

TEST_CASE("rate to power closed forms") {
  CHECK(rateToPower(0.0, {1.0, 1.0, 1.0}) == 0.0);
  // R = W with g = N0 = 1: (2^1 - 1) * W
  CHECK(rateToPower(3.0, {1.0, 3.0, 1.0}) == doctest::Approx(3.0));
  // (1/2)(2^2 - 1)
  CHECK(rateToPower(2.0, {2.0, 1.0, 1.0}) == doctest::Approx(1.5));
  CHECK_THROWS_AS(rateToPower(-1.0, {1.0, 1.0, 1.0}), ConfigError);
  CHECK_THROWS_AS(rateToPower(1.0, {0.0, 1.0, 1.0}), ConfigError);
}

TEST_CASE("rate law round-trips through its inverse") {
  Rng rng(3);
  for (int t = 0; t < 200; ++t) {
    const Beam beam{0.2 + 3.0 * rng.nextDouble(), 0.5 + 4.0 * rng.nextDouble(),
                    0.3 + 2.0 * rng.nextDouble()};
    const double rate = 10.0 * beam.bandwidth * rng.nextDouble();
    const double back = linkRate(rateToPower(rate, beam), beam);
    CHECK(std::abs(back - rate) <= 1e-10 * std::max(1.0, rate));
  }
}

TEST_CASE("schedule fixture: strong beam takes the heavy layer") {
  LinkModel links;
  links.beams = {{1.0, 1.0, 1.0}, {2.0, 1.0, 1.0}};
  const PowerSchedule s = schedule(vec({2.0, 1.0}), links, 100.0);
  CHECK(s.assignment[0] == 1);  // rate 2 -> gain 2
  CHECK(s.assignment[1] == 0);
  CHECK(s.totalPower == doctest::Approx(2.5));
  CHECK(s.feasible);

  const PowerSchedule oracle = bruteForceSchedule(vec({2.0, 1.0}), links, 100.0);
  CHECK(oracle.totalPower == doctest::Approx(2.5));
  CHECK(oracle.assignment == s.assignment);

  const PowerSchedule tight = schedule(vec({2.0, 1.0}), links, 2.0);
  CHECK_FALSE(tight.feasible);
  CHECK(tight.totalPower == doctest::Approx(2.5));
}

TEST_CASE("equal beams make the assignment irrelevant") {
  const LinkModel links = equalBank(3);
  const Vec rates = vec({1.2, 0.4, 2.0});
  const PowerSchedule a = schedule(rates, links, 1e6);
  const PowerSchedule b = bruteForceSchedule(rates, links, 1e6);
  CHECK(a.totalPower == doctest::Approx(b.totalPower).epsilon(1e-14));
}

TEST_CASE("zero rates cost nothing and are always feasible") {
  const LinkModel links = equalBank(3, 2.0);
  const PowerSchedule s = schedule(vec({0.0, 0.0, 0.0}), links, 0.0);
  CHECK(s.totalPower == 0.0);
  CHECK(s.feasible);
}

TEST_CASE("single beam oracle is the only assignment") {
  LinkModel links;
  links.beams = {{1.5, 2.0, 1.0}};
  const PowerSchedule s = bruteForceSchedule(vec({1.0}), links, 10.0);
  CHECK(s.assignment[0] == 0);
  CHECK(s.totalPower == doctest::Approx(rateToPower(1.0, links.beams[0])));
}

TEST_CASE("sort-based schedule matches brute force with equal bandwidths") {
  Rng rng(11);
  for (int t = 0; t < 100; ++t) {
    const int n = 2 + static_cast<int>(rng.nextBelow(5));
    LinkModel links;
    Vec rates(n);
    for (int i = 0; i < n; ++i) {
      links.beams.push_back({0.3 + 3.0 * rng.nextDouble(), 2.0,
                             0.4 + 1.5 * rng.nextDouble()});
      rates[i] = 3.0 * rng.nextDouble();
    }
    const PowerSchedule fast = schedule(rates, links, 1e9);
    const PowerSchedule oracle = bruteForceSchedule(rates, links, 1e9);
    CHECK(std::abs(fast.totalPower - oracle.totalPower) <= 1e-12);
  }
}

TEST_CASE("unequal bandwidths: the oracle never loses to the heuristic") {
  Rng rng(13);
  for (int t = 0; t < 50; ++t) {
    const int n = 2 + static_cast<int>(rng.nextBelow(3));
    LinkModel links;
    Vec rates(n);
    for (int i = 0; i < n; ++i) {
      links.beams.push_back({0.3 + 3.0 * rng.nextDouble(),
                             0.5 + 3.0 * rng.nextDouble(),
                             0.4 + 1.5 * rng.nextDouble()});
      rates[i] = 3.0 * rng.nextDouble();
    }
    const PowerSchedule fast = schedule(rates, links, 1e9);
    const PowerSchedule oracle = bruteForceSchedule(rates, links, 1e9);
    CHECK(oracle.totalPower <= fast.totalPower + 1e-12);
  }
}

TEST_CASE("raising any layer rate never lowers the total power") {
  Rng rng(17);
  for (int t = 0; t < 50; ++t) {
    const int n = 2 + static_cast<int>(rng.nextBelow(4));
    LinkModel links;
    Vec rates(n);
    for (int i = 0; i < n; ++i) {
      links.beams.push_back({0.5 + 2.0 * rng.nextDouble(), 2.0, 1.0});
      rates[i] = 2.0 * rng.nextDouble();
    }
    const double before = schedule(rates, links, 1e9).totalPower;
    Vec more = rates;
    more[rng.nextBelow(n)] += 0.5;
    const double after = schedule(more, links, 1e9).totalPower;
    CHECK(after >= before - 1e-12);
  }
}

TEST_CASE("splitting across equal beams beats one beam with the summed rate") {
  // Bandwidth aggregation, the mechanism behind the directional power gain.
  Rng rng(19);
  for (int t = 0; t < 50; ++t) {
    const int n = 2 + static_cast<int>(rng.nextBelow(3));
    const double gain = 0.5 + 2.0 * rng.nextDouble();
    const LinkModel links = equalBank(n, gain, 1.5);
    Vec rates(n);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      rates[i] = 0.2 + 2.0 * rng.nextDouble();
      sum += rates[i];
    }
    const double multi = schedule(rates, links, 1e9).totalPower;
    const double single = rateToPower(sum, links.beams[0]);
    CHECK(multi <= single + 1e-12);
  }
}

TEST_CASE("dimension and scale guards") {
  const LinkModel links = equalBank(2);
  CHECK_THROWS_AS(schedule(vec({1.0, 1.0, 1.0}), links, 1.0), ConfigError);
  CHECK_THROWS_AS(schedule(vec({-0.5, 1.0}), links, 1.0), ConfigError);
  const LinkModel big = equalBank(9);
  Vec nine = Vec::Ones(9);
  CHECK_THROWS_AS(bruteForceSchedule(nine, big, 1.0), std::runtime_error);
}
