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

#ifndef CALREC_ANALYSIS_HPP_
#define CALREC_ANALYSIS_HPP_

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "calrec/data.hpp"

namespace calrec {

struct UserMetrics {
  UserId user{};
  double inconsistency = 0.0;
  double miscalibration = 0.0;
};

// One inconsistency bin. Averages are zero when user_count is zero.
struct GroupStats {
  std::size_t group_index = 0;
  double range_low = 0.0;
  double range_high = 0.0;
  double avg_inconsistency = 0.0;
  double avg_miscalibration = 0.0;
  std::size_t user_count = 0;
};

enum class BinMode { kEqualWidth, kQuantile };

std::string_view BinModeName(BinMode mode);
BinMode ParseBinMode(std::string_view name);

// Equal-width bins over [min, max] inconsistency. A value on an inner
// boundary falls in the higher bin; the maximum falls in the last bin. If
// every user has the same inconsistency they all land in the first bin.
// Quantile mode instead sorts users by (inconsistency, user id) and cuts the
// sequence into num_bins runs of near-equal size. Empty bins are kept.
// Throws ArgumentError on empty input or num_bins < 2.
std::vector<GroupStats> BinUsers(std::span<const UserMetrics> metrics, std::size_t num_bins,
                                 BinMode mode = BinMode::kEqualWidth);

// Sample Pearson correlation. Throws ArgumentError on mismatched or short
// input and UndefinedCorrelationError if either sequence is constant.
double Pearson(std::span<const double> xs, std::span<const double> ys);

// Pearson over (avg_inconsistency, avg_miscalibration) of the populated
// groups.
double CorrelateGroups(std::span<const GroupStats> groups);

// Pearson over the raw per-user pairs.
double CorrelateUsers(std::span<const UserMetrics> metrics);

}  // namespace calrec

#endif  // CALREC_ANALYSIS_HPP_
