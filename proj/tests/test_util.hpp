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

#ifndef CALREC_TESTS_TEST_UTIL_HPP_
#define CALREC_TESTS_TEST_UTIL_HPP_

#include <memory>
#include <string>
#include <tuple>
#include <vector>

#include "calrec/data.hpp"
#include "calrec/random.hpp"

namespace calrec::testing {

inline Dataset MakeDataset(const std::vector<std::tuple<std::int64_t, std::int64_t, double>>& triples) {
  std::vector<RatingRecord> records;
  std::int64_t t = 0;
  for (const auto& [u, i, r] : triples) records.push_back({UserId{u}, ItemId{i}, r, t++});
  return Dataset::FromRecords(std::move(records));
}

inline std::shared_ptr<const Dataset> Share(Dataset d) { return std::make_shared<const Dataset>(std::move(d)); }

// Random integer ratings: each user rates each item with probability
// density; every user gets at least two ratings.
inline Dataset RandomDataset(Rng& rng, int users, int items, double density) {
  std::vector<RatingRecord> records;
  for (int u = 1; u <= users; ++u) {
    int count = 0;
    for (int i = 1; i <= items; ++i) {
      if (rng.unit() < density || (i > items - 2 && count < 2)) {
        records.push_back({UserId{u}, ItemId{i}, static_cast<double>(1 + rng.below(5)), 0});
        ++count;
      }
    }
  }
  return Dataset::FromRecords(std::move(records));
}

inline std::string ToyDir() { return CALREC_TOY_DIR; }

}  // namespace calrec::testing

#endif  // CALREC_TESTS_TEST_UTIL_HPP_
