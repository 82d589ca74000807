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

#include "calrec/analysis.hpp"
#include "calrec/errors.hpp"
#include "doctest.h"
#include "test_util.hpp"

namespace calrec {
namespace {

std::vector<UserMetrics> FromInconsistency(const std::vector<double>& values) {
  std::vector<UserMetrics> m;
  for (std::size_t k = 0; k < values.size(); ++k) {
    m.push_back({UserId{static_cast<std::int64_t>(k + 1)}, values[k], 0.1 * static_cast<double>(k)});
  }
  return m;
}

TEST_SUITE("analysis") {

TEST_CASE("two equal-width bins") {
  const auto groups = BinUsers(FromInconsistency({0.9, 0.1, 1.0, 0.2}), 2);
  REQUIRE(groups.size() == 2);
  CHECK(groups[0].user_count == 2);
  CHECK(groups[1].user_count == 2);
  CHECK(groups[0].range_low == doctest::Approx(0.1));
  CHECK(groups[0].range_high == doctest::Approx(0.55));
  CHECK(groups[1].range_high == doctest::Approx(1.0));
  CHECK(groups[0].avg_inconsistency == doctest::Approx(0.15));
  CHECK(groups[1].avg_inconsistency == doctest::Approx(0.95));
}

TEST_CASE("identical inconsistency puts everyone in the first bin") {
  const auto groups = BinUsers(FromInconsistency({0.5, 0.5, 0.5}), 4);
  REQUIRE(groups.size() == 4);
  CHECK(groups[0].user_count == 3);
  for (std::size_t b = 1; b < 4; ++b) CHECK(groups[b].user_count == 0);
}

TEST_CASE("four evenly spread users in four bins") {
  const auto groups = BinUsers(FromInconsistency({0.0, 1.0, 2.0, 3.0}), 4);
  for (const auto& g : groups) CHECK(g.user_count == 1);
}

TEST_CASE("boundary values go to the higher bin") {
  // Range [0, 4] in 4 bins: 1.0 and 2.0 sit on boundaries.
  const auto groups = BinUsers(FromInconsistency({0.0, 1.0, 2.0, 4.0}), 4);
  CHECK(groups[0].user_count == 1);
  CHECK(groups[1].user_count == 1);
  CHECK(groups[2].user_count == 1);
  CHECK(groups[3].user_count == 1);
}

TEST_CASE("binning argument errors") {
  CHECK_THROWS_AS(BinUsers(FromInconsistency({0.1, 0.2}), 1), ArgumentError);
  CHECK_THROWS_AS(BinUsers({}, 3), ArgumentError);
}

TEST_CASE("quantile bins hold equal counts") {
  std::vector<double> values;
  for (int k = 0; k < 20; ++k) values.push_back(static_cast<double>(k * k));
  const auto groups = BinUsers(FromInconsistency(values), 4, BinMode::kQuantile);
  for (const auto& g : groups) CHECK(g.user_count == 5);
}

TEST_CASE("binning conserves users and does not depend on input order") {
  Rng rng(41);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> values;
    const int n = 2 + static_cast<int>(rng.below(60));
    for (int k = 0; k < n; ++k) values.push_back(rng.uniform(0.0, 4.0));
    auto metrics = FromInconsistency(values);
    const std::size_t bins = 2 + rng.below(10);
    const auto a = BinUsers(metrics, bins);
    rng.shuffle(std::span<UserMetrics>(metrics));
    const auto b = BinUsers(metrics, bins);
    std::size_t total = 0;
    for (std::size_t g = 0; g < a.size(); ++g) {
      total += a[g].user_count;
      CHECK(a[g].user_count == b[g].user_count);
      CHECK(a[g].avg_miscalibration == doctest::Approx(b[g].avg_miscalibration));
      if (a[g].user_count > 0) {
        CHECK(a[g].avg_inconsistency >= a[g].range_low);
        CHECK(a[g].avg_inconsistency <= a[g].range_high);
      }
    }
    CHECK(total == metrics.size());
  }
}

TEST_CASE("pearson examples") {
  const std::vector<double> x3{1, 2, 3};
  CHECK(Pearson(x3, std::vector<double>{2, 4, 6}) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(Pearson(x3, std::vector<double>{6, 4, 2}) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(std::abs(Pearson(std::vector<double>{1, 2, 3, 4}, std::vector<double>{1, 3, 2, 4}) - 0.8) < 1e-9);
}

TEST_CASE("pearson errors") {
  const std::vector<double> c{2, 2, 2};
  const std::vector<double> x{1, 2, 3};
  CHECK_THROWS_AS(Pearson(c, x), UndefinedCorrelationError);
  CHECK_THROWS_AS(Pearson(x, c), UndefinedCorrelationError);
  CHECK_THROWS_AS(Pearson(std::vector<double>{1}, std::vector<double>{2}), ArgumentError);
  CHECK_THROWS_AS(Pearson(x, std::vector<double>{1, 2}), ArgumentError);
}

TEST_CASE("pearson is symmetric, bounded and affine invariant") {
  Rng rng(43);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng.below(30);
    std::vector<double> x(n);
    std::vector<double> y(n);
    for (std::size_t k = 0; k < n; ++k) {
      x[k] = rng.uniform(-5.0, 5.0);
      y[k] = 0.5 * x[k] + rng.uniform(-5.0, 5.0);
    }
    const double r = Pearson(x, y);
    CHECK(r >= -1.0);
    CHECK(r <= 1.0);
    CHECK(std::abs(Pearson(y, x) - r) < 1e-12);
    const double a = rng.uniform(0.1, 10.0);
    const double b = rng.uniform(-10.0, 10.0);
    const double c = rng.uniform(0.1, 10.0);
    const double d = rng.uniform(-10.0, 10.0);
    std::vector<double> xa(n);
    std::vector<double> yc(n);
    for (std::size_t k = 0; k < n; ++k) {
      xa[k] = a * x[k] + b;
      yc[k] = c * y[k] + d;
    }
    CHECK(std::abs(Pearson(xa, yc) - r) < 1e-9);
  }
}

TEST_CASE("group correlation skips empty groups") {
  std::vector<GroupStats> groups{{0, 0, 1, 0.5, 0.1, 3}, {1, 1, 2, 0, 0, 0}, {2, 2, 3, 2.5, 0.3, 2},
                                 {3, 3, 4, 3.5, 0.35, 1}};
  const double r = CorrelateGroups(groups);
  CHECK(r == doctest::Approx(Pearson(std::vector<double>{0.5, 2.5, 3.5}, std::vector<double>{0.1, 0.3, 0.35})));
  groups.resize(2);
  CHECK_THROWS_AS(CorrelateGroups(groups), UndefinedCorrelationError);
}

}  // TEST_SUITE

}  // namespace
}  // namespace calrec
