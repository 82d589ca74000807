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

#include "calrec/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "calrec/errors.hpp"
#include "format.hpp"

namespace calrec {
namespace {

double Smoothed(double qc, double pc, double alpha) { return qc + alpha * (pc - qc); }

}  // namespace

GenreDistribution::GenreDistribution(std::shared_ptr<const std::vector<std::string>> universe,
                                     std::vector<double> mass)
    : universe_(std::move(universe)), mass_(std::move(mass)) {
  if (!universe_ || universe_->size() != mass_.size()) {
    throw ArgumentError("distribution size does not match its genre universe");
  }
  for (double m : mass_) {
    if (!(m >= 0.0) || !std::isfinite(m)) throw ArgumentError("distribution mass must be finite and >= 0");
  }
}

double GenreDistribution::total() const { return std::accumulate(mass_.begin(), mass_.end(), 0.0); }

bool GenreDistribution::is_normalized() const { return std::abs(total() - 1.0) <= kNormalizationTolerance; }

double GenreDistribution::at(std::string_view genre) const {
  auto it = std::find(universe_->begin(), universe_->end(), genre);
  if (it == universe_->end()) throw LookupError("genre '" + std::string(genre) + "' not in universe");
  return mass_[static_cast<std::size_t>(it - universe_->begin())];
}

bool GenreDistribution::same_universe(const GenreDistribution& other) const {
  return universe_ == other.universe_ || *universe_ == *other.universe_;
}

void CalibrationConfig::Validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("alpha must lie in (0, 1), got " + FormatDouble(alpha));
}

double Inconsistency(std::span<const std::pair<ItemId, double>> profile, const std::map<ItemId, double>& means) {
  if (profile.empty()) throw ArgumentError("inconsistency of an empty profile");
  double deviation = 0.0;
  for (const auto& [item, rating] : profile) {
    auto it = means.find(item);
    if (it == means.end()) throw LookupError("no mean rating for item " + std::to_string(raw(item)));
    deviation += std::abs(rating - it->second);
  }
  return deviation / static_cast<double>(profile.size());
}

std::optional<double> InconsistencyExcludingOwn(std::span<const std::pair<ItemId, double>> profile,
                                                const Dataset& reference) {
  if (profile.empty()) throw ArgumentError("inconsistency of an empty profile");
  double deviation = 0.0;
  std::size_t counted = 0;
  for (const auto& [item, rating] : profile) {
    const auto row = reference.item_row(reference.item_index(item));
    if (row.size() < 2) continue;
    double sum = 0.0;
    for (const Cell& c : row) sum += c.rating;
    const double others = (sum - rating) / static_cast<double>(row.size() - 1);
    deviation += std::abs(rating - others);
    ++counted;
  }
  if (counted == 0) return std::nullopt;
  return deviation / static_cast<double>(counted);
}

GenreDistribution GenreDistributionOf(std::span<const ItemId> items, const ItemCatalog& catalog) {
  std::vector<double> mass(catalog.genre_universe().size(), 0.0);
  for (ItemId item : items) {
    const auto& genres = catalog.genre_indices(item);
    const double share = 1.0 / static_cast<double>(genres.size());
    for (std::size_t g : genres) mass[g] += share;
  }
  if (!items.empty()) {
    const double n = static_cast<double>(items.size());
    for (double& m : mass) m /= n;
  }
  return GenreDistribution(catalog.shared_universe(), std::move(mass));
}

GenreDistribution SmoothDistribution(const GenreDistribution& q, const GenreDistribution& p, double alpha) {
  if (!q.same_universe(p)) throw ArgumentError("distributions are over different genre universes");
  CalibrationConfig{alpha}.Validate();
  std::vector<double> mass(q.size());
  for (std::size_t c = 0; c < mass.size(); ++c) mass[c] = Smoothed(q.mass()[c], p.mass()[c], alpha);
  return GenreDistribution(q.shared_universe(), std::move(mass));
}

double KlMiscalibration(const GenreDistribution& p, const GenreDistribution& q, const CalibrationConfig& config) {
  config.Validate();
  if (!p.same_universe(q)) throw ArgumentError("distributions are over different genre universes");
  if (!p.is_normalized()) {
    throw ArgumentError("profile distribution sums to " + FormatDouble(p.total()) + ", expected 1");
  }
  const double alpha = config.alpha;
  double kl = 0.0;
  for (std::size_t c = 0; c < p.size(); ++c) {
    const double pc = p.mass()[c];
    if (pc <= 0.0) continue;
    const double smoothed = Smoothed(q.mass()[c], pc, alpha);
    kl += pc * std::log(pc / smoothed);
  }
  return config.log_base == LogBase::kBase2 ? kl / std::log(2.0) : kl;
}

}  // namespace calrec
