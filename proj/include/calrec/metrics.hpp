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

#ifndef CALREC_METRICS_HPP_
#define CALREC_METRICS_HPP_

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "calrec/data.hpp"

namespace calrec {

// Tolerance used for every "sums to one" check.
inline constexpr double kNormalizationTolerance = 1e-9;

// Probability mass over a fixed, shared genre universe. A distribution built
// from an empty item list is all-zero and reports empty().
class GenreDistribution {
 public:
  // Throws ArgumentError if the sizes differ or a mass is negative or
  // non-finite.
  GenreDistribution(std::shared_ptr<const std::vector<std::string>> universe, std::vector<double> mass);

  std::span<const std::string> universe() const { return *universe_; }
  const std::shared_ptr<const std::vector<std::string>>& shared_universe() const { return universe_; }
  std::span<const double> mass() const { return mass_; }
  std::size_t size() const { return mass_.size(); }

  double total() const;
  bool empty() const { return total() == 0.0; }
  bool is_normalized() const;

  // Mass of a genre label; LookupError if the label is not in the universe.
  double at(std::string_view genre) const;

  bool same_universe(const GenreDistribution& other) const;

 private:
  std::shared_ptr<const std::vector<std::string>> universe_;
  std::vector<double> mass_;
};

enum class LogBase { kNatural, kBase2 };

struct CalibrationConfig {
  double alpha = 0.01;
  LogBase log_base = LogBase::kNatural;

  // Throws ArgumentError unless 0 < alpha < 1.
  void Validate() const;
};

// Mean absolute deviation of a user's ratings from the item means:
//   sum_i |r_ui - mean_i| / N_u.
// Throws ArgumentError on an empty profile and LookupError naming the first
// item without a mean.
double Inconsistency(std::span<const std::pair<ItemId, double>> profile, const std::map<ItemId, double>& means);

// Variant where each item mean excludes the user's own rating. `reference`
// must contain every (user, item, rating) of the profile. Items rated by
// nobody else are skipped; returns nullopt when every item is skipped.
std::optional<double> InconsistencyExcludingOwn(std::span<const std::pair<ItemId, double>> profile,
                                                const Dataset& reference);

// Each item contributes weight 1 split equally across its genres; the result
// is divided by the item count. LookupError for an item outside the catalog.
GenreDistribution GenreDistributionOf(std::span<const ItemId> items, const ItemCatalog& catalog);

// q~ = (1 - alpha) q + alpha p, genre by genre. Evaluated as q + alpha (p - q)
// so that q == p gives q~ == p exactly.
GenreDistribution SmoothDistribution(const GenreDistribution& q, const GenreDistribution& p, double alpha);

// KL(p || q~) = sum_{c : p_c > 0} p_c log(p_c / q~_c). Reported as-is, so a
// smoothed q~ can in principle yield a small negative value.
double KlMiscalibration(const GenreDistribution& p, const GenreDistribution& q, const CalibrationConfig& config);

}  // namespace calrec

#endif  // CALREC_METRICS_HPP_
