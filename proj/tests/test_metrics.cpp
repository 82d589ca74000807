/*
 * Copyright 2026 The calrec Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <cmath>
#include <numeric>

#include "calrec/errors.hpp"
#include "calrec/metrics.hpp"
#include "doctest.h"
#include "test_util.hpp"

namespace calrec {
namespace {

using Profile = std::vector<std::pair<ItemId, double>>;

auto Universe(std::vector<std::string> genres) {
  return std::make_shared<const std::vector<std::string>>(std::move(genres));
}

std::vector<double> RandomSimplex(Rng& rng, std::size_t n, bool full_support) {
  std::vector<double> v(n);
  for (double& x : v) x = full_support ? 0.01 + rng.unit() : (rng.unit() < 0.4 ? 0.0 : rng.unit());
  if (std::accumulate(v.begin(), v.end(), 0.0) == 0.0) v[0] = 1.0;
  const double s = std::accumulate(v.begin(), v.end(), 0.0);
  for (double& x : v) x /= s;
  return v;
}

TEST_SUITE("metrics") {

TEST_CASE("inconsistency: single item three away from its mean") {
  const Profile profile{{ItemId{1}, 5.0}};
  CHECK(Inconsistency(profile, {{ItemId{1}, 2.0}}) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("inconsistency: ratings equal to the means") {
  const Profile profile{{ItemId{1}, 4.0}, {ItemId{2}, 2.5}};
  CHECK(Inconsistency(profile, {{ItemId{1}, 4.0}, {ItemId{2}, 2.5}}) == 0.0);
}

TEST_CASE("inconsistency: mean absolute deviation over three items") {
  const Profile profile{{ItemId{1}, 4.0}, {ItemId{2}, 2.0}, {ItemId{3}, 5.0}};
  const double got = Inconsistency(profile, {{ItemId{1}, 3.5}, {ItemId{2}, 2.0}, {ItemId{3}, 3.0}});
  CHECK(std::abs(got - 0.8333333333333334) < 1e-9);
}

TEST_CASE("inconsistency errors") {
  CHECK_THROWS_AS(Inconsistency(Profile{}, {}), ArgumentError);
  try {
    Inconsistency(Profile{{ItemId{77}, 3.0}}, {{ItemId{1}, 3.0}});
    FAIL("expected LookupError");
  } catch (const LookupError& e) {
    CHECK(std::string(e.what()).find("77") != std::string::npos);
  }
}

TEST_CASE("inconsistency lies in [0, 4] and ignores order") {
  Rng rng(17);
  for (int trial = 0; trial < 1000; ++trial) {
    Profile profile;
    std::map<ItemId, double> means;
    const int n = 1 + static_cast<int>(rng.below(20));
    for (int i = 0; i < n; ++i) {
      profile.emplace_back(ItemId{i}, static_cast<double>(1 + rng.below(5)));
      means[ItemId{i}] = rng.uniform(1.0, 5.0);
    }
    const double a = Inconsistency(profile, means);
    CHECK(a >= 0.0);
    CHECK(a <= 4.0);
    rng.shuffle(std::span<std::pair<ItemId, double>>(profile));
    CHECK(std::abs(Inconsistency(profile, means) - a) < 1e-12);
  }
}

TEST_CASE("inconsistency excluding the user's own rating") {
  const Dataset d = testing::MakeDataset({{1, 1, 5}, {2, 1, 3}, {3, 1, 1}, {1, 2, 4}});
  const Profile profile{{ItemId{1}, 5.0}, {ItemId{2}, 4.0}};
  // Item 1 without user 1 has mean 2; item 2 has no other raters.
  const auto got = InconsistencyExcludingOwn(profile, d);
  REQUIRE(got.has_value());
  CHECK(*got == doctest::Approx(3.0));
  CHECK_FALSE(InconsistencyExcludingOwn(Profile{{ItemId{2}, 4.0}}, d).has_value());
}

TEST_CASE("genre distribution: one Action and one Action|Adventure movie") {
  const ItemCatalog c = ItemCatalog::FromGenres({{1, {"Action"}}, {2, {"Action", "Adventure"}}});
  const std::vector<ItemId> items{ItemId{1}, ItemId{2}};
  const GenreDistribution d = GenreDistributionOf(items, c);
  CHECK(std::abs(d.at("Action") - 0.75) < 1e-9);
  CHECK(std::abs(d.at("Adventure") - 0.25) < 1e-9);
}

TEST_CASE("genre distribution: 70% action, 30% adventure") {
  std::map<std::int64_t, std::vector<std::string>> genres;
  std::vector<ItemId> items;
  for (int i = 0; i < 10; ++i) {
    genres[i] = {i < 7 ? "Action" : "Adventure"};
    items.push_back(ItemId{i});
  }
  const GenreDistribution d = GenreDistributionOf(items, ItemCatalog::FromGenres(genres));
  CHECK(std::abs(d.at("Action") - 0.7) < 1e-9);
  CHECK(std::abs(d.at("Adventure") - 0.3) < 1e-9);
}

TEST_CASE("genre distribution: single item, empty list, unknown item") {
  const ItemCatalog c = ItemCatalog::FromGenres({{1, {"Drama"}}, {2, {"Comedy"}}});
  const std::vector<ItemId> one{ItemId{1}};
  CHECK(GenreDistributionOf(one, c).at("Drama") == 1.0);
  CHECK(GenreDistributionOf(one, c).at("Comedy") == 0.0);
  CHECK(GenreDistributionOf({}, c).empty());
  const std::vector<ItemId> unknown{ItemId{3}};
  CHECK_THROWS_AS(GenreDistributionOf(unknown, c), LookupError);
}

TEST_CASE("genre distribution is normalized on random catalogs") {
  Rng rng(23);
  const std::vector<std::string> names{"A", "B", "C", "D", "E", "F", "G"};
  for (int trial = 0; trial < 1000; ++trial) {
    std::map<std::int64_t, std::vector<std::string>> genres;
    for (int i = 0; i < 15; ++i) {
      std::vector<std::string> g;
      for (const auto& n : names) if (rng.unit() < 0.3) g.push_back(n);
      if (g.empty()) g.push_back(names[rng.below(names.size())]);
      genres[i] = g;
    }
    const ItemCatalog c = ItemCatalog::FromGenres(genres);
    std::vector<ItemId> items;
    const int n = 1 + static_cast<int>(rng.below(15));
    for (int k = 0; k < n; ++k) items.push_back(ItemId{static_cast<std::int64_t>(rng.below(15))});
    const GenreDistribution d = GenreDistributionOf(items, c);
    CHECK(std::abs(d.total() - 1.0) <= 1e-9);
    CHECK(d.is_normalized());
  }
}

TEST_CASE("smoothing examples") {
  const auto u = Universe({"A", "B"});
  const GenreDistribution q(u, {1.0, 0.0});
  const GenreDistribution p(u, {0.5, 0.5});
  const GenreDistribution s = SmoothDistribution(q, p, 0.01);
  CHECK(std::abs(s.at("A") - 0.995) < 1e-9);
  CHECK(std::abs(s.at("B") - 0.005) < 1e-9);
  const GenreDistribution tiny = SmoothDistribution(q, p, 1e-12);
  CHECK(std::abs(tiny.at("A") - 1.0) < 1e-9);
  CHECK(std::abs(tiny.at("B") - 0.0) < 1e-9);
  const GenreDistribution same = SmoothDistribution(p, p, 0.37);
  CHECK(same.at("A") == 0.5);
  CHECK(same.at("B") == 0.5);
}

TEST_CASE("smoothing rejects mismatched universes and bad alpha") {
  const GenreDistribution a(Universe({"A", "B"}), {1.0, 0.0});
  const GenreDistribution b(Universe({"A", "C"}), {1.0, 0.0});
  CHECK_THROWS_AS(SmoothDistribution(a, b, 0.01), ArgumentError);
  CHECK_THROWS_AS(SmoothDistribution(a, a, 0.0), ArgumentError);
  CHECK_THROWS_AS(SmoothDistribution(a, a, 1.0), ArgumentError);
}

TEST_CASE("smoothing keeps normalization and fills the support of p") {
  Rng rng(29);
  const auto u = Universe({"A", "B", "C", "D", "E", "F"});
  for (int trial = 0; trial < 1000; ++trial) {
    const GenreDistribution p(u, RandomSimplex(rng, 6, false));
    const GenreDistribution q(u, RandomSimplex(rng, 6, false));
    const double alpha = rng.uniform(1e-6, 0.5);
    const GenreDistribution s = SmoothDistribution(q, p, alpha);
    CHECK(std::abs(s.total() - 1.0) <= 1e-9);
    for (std::size_t c = 0; c < 6; ++c) {
      if (p.mass()[c] > 0.0) CHECK(s.mass()[c] > 0.0);
    }
  }
}

TEST_CASE("KL examples") {
  const auto u = Universe({"A", "B"});
  const CalibrationConfig natural;
  CHECK(std::abs(KlMiscalibration(GenreDistribution(u, {0.7, 0.3}), GenreDistribution(u, {0.3, 0.7}), natural) -
                 0.3313666878425624) < 1e-9);
  CHECK(std::abs(KlMiscalibration(GenreDistribution(u, {0.0, 1.0}), GenreDistribution(u, {1.0, 0.0}), natural) -
                 4.605170185988092) < 1e-9);
  const GenreDistribution p(u, {0.25, 0.75});
  CHECK(KlMiscalibration(p, p, natural) == 0.0);
}

TEST_CASE("KL in bits is KL in nats over ln 2") {
  const auto u = Universe({"A", "B"});
  const GenreDistribution p(u, {0.7, 0.3});
  const GenreDistribution q(u, {0.3, 0.7});
  const double nats = KlMiscalibration(p, q, {});
  const double bits = KlMiscalibration(p, q, {0.01, LogBase::kBase2});
  CHECK(std::abs(bits - nats / std::log(2.0)) < 1e-12);
}

TEST_CASE("KL rejects unnormalized p") {
  const auto u = Universe({"A", "B"});
  CHECK_THROWS_AS(KlMiscalibration(GenreDistribution(u, {0.5, 0.4}), GenreDistribution(u, {0.5, 0.5}), {}),
                  ArgumentError);
}

TEST_CASE("KL(p, p) is exactly zero") {
  Rng rng(31);
  const auto u = Universe({"A", "B", "C", "D", "E", "F", "G", "H"});
  for (int trial = 0; trial < 1000; ++trial) {
    const GenreDistribution p(u, RandomSimplex(rng, 8, false));
    CHECK(KlMiscalibration(p, p, {rng.uniform(1e-6, 0.9), LogBase::kNatural}) == 0.0);
  }
}

TEST_CASE("KL is non-negative on full-support pairs") {
  Rng rng(37);
  const auto u = Universe({"A", "B", "C", "D", "E"});
  for (int trial = 0; trial < 1000; ++trial) {
    const GenreDistribution p(u, RandomSimplex(rng, 5, true));
    const GenreDistribution q(u, RandomSimplex(rng, 5, true));
    CHECK(KlMiscalibration(p, q, {1e-12, LogBase::kNatural}) >= -1e-12);
    CHECK(KlMiscalibration(p, q, {}) >= -1e-12);
  }
}

}  // TEST_SUITE

}  // namespace
}  // namespace calrec
