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

#include "calrec/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "calrec/errors.hpp"

namespace calrec {

std::string_view BinModeName(BinMode mode) { return mode == BinMode::kEqualWidth ? "equal_width" : "quantile"; }

BinMode ParseBinMode(std::string_view name) {
  if (name == "equal_width") return BinMode::kEqualWidth;
  if (name == "quantile") return BinMode::kQuantile;
  throw ArgumentError("unknown bin mode '" + std::string(name) + "'");
}

std::vector<GroupStats> BinUsers(std::span<const UserMetrics> metrics, std::size_t num_bins, BinMode mode) {
  if (num_bins < 2) throw ArgumentError("need at least 2 bins, got " + std::to_string(num_bins));
  if (metrics.empty()) throw ArgumentError("no user metrics to bin");

  // Canonical order makes the result independent of input order, including
  // the floating-point summation order of the averages.
  std::vector<UserMetrics> sorted(metrics.begin(), metrics.end());
  std::sort(sorted.begin(), sorted.end(), [](const UserMetrics& a, const UserMetrics& b) {
    return a.inconsistency != b.inconsistency ? a.inconsistency < b.inconsistency : raw(a.user) < raw(b.user);
  });
  const double lo = sorted.front().inconsistency;
  const double hi = sorted.back().inconsistency;

  std::vector<GroupStats> groups(num_bins);
  std::vector<std::size_t> bin_of(sorted.size());
  if (mode == BinMode::kEqualWidth) {
    const double width = (hi - lo) / static_cast<double>(num_bins);
    for (std::size_t g = 0; g < num_bins; ++g) {
      groups[g].range_low = lo + width * static_cast<double>(g);
      groups[g].range_high = g + 1 == num_bins ? hi : lo + width * static_cast<double>(g + 1);
    }
    for (std::size_t k = 0; k < sorted.size(); ++k) {
      std::size_t g = 0;
      if (width > 0.0) {
        g = static_cast<std::size_t>(std::floor((sorted[k].inconsistency - lo) / width));
        g = std::min(g, num_bins - 1);
        // Correct for rounding in the division against the stored edges.
        while (g + 1 < num_bins && sorted[k].inconsistency >= groups[g + 1].range_low) ++g;
        while (g > 0 && sorted[k].inconsistency < groups[g].range_low) --g;
      }
      bin_of[k] = g;
    }
  } else {
    const std::size_t n = sorted.size();
    for (std::size_t k = 0; k < n; ++k) bin_of[k] = k * num_bins / n;
    for (std::size_t g = 0; g < num_bins; ++g) {
      const std::size_t first = (g * n + num_bins - 1) / num_bins;
      const std::size_t last = ((g + 1) * n + num_bins - 1) / num_bins;
      if (first < last) {
        groups[g].range_low = sorted[first].inconsistency;
        groups[g].range_high = sorted[last - 1].inconsistency;
      } else {
        const double edge = first < n ? sorted[first].inconsistency : hi;
        groups[g].range_low = groups[g].range_high = edge;
      }
    }
  }

  for (std::size_t g = 0; g < num_bins; ++g) groups[g].group_index = g;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    GroupStats& group = groups[bin_of[k]];
    ++group.user_count;
    group.avg_inconsistency += sorted[k].inconsistency;
    group.avg_miscalibration += sorted[k].miscalibration;
  }
  for (auto& group : groups) {
    if (group.user_count == 0) continue;
    group.avg_inconsistency /= static_cast<double>(group.user_count);
    group.avg_miscalibration /= static_cast<double>(group.user_count);
    // A mean of values inside [low, high] can drift past an edge by an ulp.
    group.avg_inconsistency = std::clamp(group.avg_inconsistency, group.range_low, group.range_high);
  }
  return groups;
}

double Pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw ArgumentError("pearson: sequences differ in length");
  if (xs.size() < 2) throw ArgumentError("pearson: need at least 2 pairs");
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double dx = xs[k] - mx;
    const double dy = ys[k] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw UndefinedCorrelationError("pearson: a sequence is constant");
  return std::clamp(sxy / (std::sqrt(sxx) * std::sqrt(syy)), -1.0, 1.0);
}

double CorrelateGroups(std::span<const GroupStats> groups) {
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& g : groups) {
    if (g.user_count == 0) continue;
    xs.push_back(g.avg_inconsistency);
    ys.push_back(g.avg_miscalibration);
  }
  if (xs.size() < 2) throw UndefinedCorrelationError("correlation needs at least 2 populated groups");
  return Pearson(xs, ys);
}

double CorrelateUsers(std::span<const UserMetrics> metrics) {
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& m : metrics) {
    xs.push_back(m.inconsistency);
    ys.push_back(m.miscalibration);
  }
  return Pearson(xs, ys);
}

}  // namespace calrec
