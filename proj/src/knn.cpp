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

#include <algorithm>
#include <cmath>
#include <ostream>

#include "calrec/errors.hpp"
#include "calrec/models.hpp"
#include "format.hpp"

namespace calrec {
namespace {

constexpr std::size_t kMinCoRatings = 2;
// Item-kNN keeps a dense copy of the similarities up to this many items.
constexpr std::size_t kMaxDenseItems = 8192;

// Running sums over the co-rated entries of a pair of rows.
struct PairSums {
  std::size_t n = 0;
  double a = 0, b = 0, aa = 0, bb = 0, ab = 0;

  void Add(double x, double y) {
    ++n;
    a += x;
    b += y;
    aa += x * x;
    bb += y * y;
    ab += x * y;
  }
};

double SimilarityFromSums(const PairSums& s, Similarity similarity) {
  if (s.n < kMinCoRatings) return 0.0;
  double num = 0.0;
  double den = 0.0;
  if (similarity == Similarity::kCosine) {
    num = s.ab;
    den = std::sqrt(s.aa * s.bb);
  } else {
    const double n = static_cast<double>(s.n);
    num = s.ab - s.a * s.b / n;
    den = std::sqrt(std::max(0.0, s.aa - s.a * s.a / n) * std::max(0.0, s.bb - s.b * s.b / n));
  }
  if (!(den > 0.0)) return 0.0;
  return std::clamp(num / den, -1.0, 1.0);
}

std::span<const Cell> EntityRow(const Dataset& d, bool user_based, std::size_t e) {
  return user_based ? d.user_row(e) : d.item_row(e);
}

std::span<const Cell> PivotRow(const Dataset& d, bool user_based, std::size_t p) {
  return user_based ? d.item_row(p) : d.user_row(p);
}

std::vector<double> ComputePacked(const Dataset& d, bool user_based, Similarity similarity) {
  const std::size_t n = user_based ? d.num_users() : d.num_items();
  std::vector<double> packed(n * (n - 1) / 2, 0.0);
  std::vector<PairSums> sums(n);
  std::vector<std::uint32_t> touched;
  std::size_t base = 0;
  for (std::size_t a = 0; a < n; ++a) {
    touched.clear();
    for (const Cell& pivot : EntityRow(d, user_based, a)) {
      const auto others = PivotRow(d, user_based, pivot.index);
      auto first = std::upper_bound(others.begin(), others.end(), a,
                                    [](std::size_t v, const Cell& c) { return v < c.index; });
      for (auto it = first; it != others.end(); ++it) {
        PairSums& s = sums[it->index];
        if (s.n == 0) touched.push_back(it->index);
        s.Add(pivot.rating, it->rating);
      }
    }
    for (std::uint32_t b : touched) {
      packed[base + (b - a - 1)] = SimilarityFromSums(sums[b], similarity);
      sums[b] = PairSums{};
    }
    base += n - a - 1;
  }
  return packed;
}

}  // namespace

double RowSimilarity(std::span<const Cell> a, std::span<const Cell> b, Similarity similarity) {
  std::vector<std::pair<double, double>> common;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i].index < b[j].index) {
      ++i;
    } else if (b[j].index < a[i].index) {
      ++j;
    } else {
      common.emplace_back(a[i].rating, b[j].rating);
      ++i;
      ++j;
    }
  }
  if (common.size() < kMinCoRatings) return 0.0;
  double mean_a = 0.0;
  double mean_b = 0.0;
  if (similarity == Similarity::kPearson) {
    for (auto [x, y] : common) {
      mean_a += x;
      mean_b += y;
    }
    mean_a /= static_cast<double>(common.size());
    mean_b /= static_cast<double>(common.size());
  }
  double dot = 0.0;
  double norm_a = 0.0;
  double norm_b = 0.0;
  for (auto [x, y] : common) {
    dot += (x - mean_a) * (y - mean_b);
    norm_a += (x - mean_a) * (x - mean_a);
    norm_b += (y - mean_b) * (y - mean_b);
  }
  const double den = std::sqrt(norm_a * norm_b);
  if (!(den > 0.0)) return 0.0;
  return std::clamp(dot / den, -1.0, 1.0);
}

KnnModel::KnnModel(std::shared_ptr<const Dataset> train, const ModelConfig& config)
    : KnnModel(train, config,
               ComputePacked(*train, config.algorithm == Algorithm::kUserKnn, config.similarity)) {}

KnnModel::KnnModel(std::shared_ptr<const Dataset> train, const ModelConfig& config, std::vector<double> packed)
    : TrainedModel(std::move(train), config), packed_(std::move(packed)) {
  const Dataset& d = this->train();
  const std::size_t n = user_based() ? d.num_users() : d.num_items();
  if (packed_.size() != n * (n - 1) / 2) throw ArgumentError("similarity table does not match the train set");
  means_.resize(n);
  for (std::size_t e = 0; e < n; ++e) means_[e] = user_based() ? d.user_mean(e) : d.item_mean(e);
  if (!user_based() && n <= kMaxDenseItems) {
    dense_.assign(n * n, 0.0);
    for (std::size_t a = 0; a < n; ++a) {
      dense_[a * n + a] = 1.0;
      for (std::size_t b = a + 1; b < n; ++b) dense_[a * n + b] = dense_[b * n + a] = packed_[PackedIndex(a, b)];
    }
  }
}

std::size_t KnnModel::PackedIndex(std::size_t a, std::size_t b) const {
  if (a > b) std::swap(a, b);
  const std::size_t n = means_.size();
  return a * n - a * (a + 1) / 2 + (b - a - 1);
}

double KnnModel::similarity(std::size_t a, std::size_t b) const {
  if (a == b) return 1.0;
  return packed_[PackedIndex(a, b)];
}

double KnnModel::Predict(std::size_t center, std::vector<Neighbor>& neighbors) const {
  const auto k = static_cast<std::size_t>(config().neighborhood_size);
  auto better = [](const Neighbor& x, const Neighbor& y) {
    return x.similarity != y.similarity ? x.similarity > y.similarity : x.index < y.index;
  };
  if (neighbors.size() > k) {
    std::nth_element(neighbors.begin(), neighbors.begin() + static_cast<std::ptrdiff_t>(k), neighbors.end(), better);
    neighbors.resize(k);
  }
  // Fixed summation order keeps scores independent of nth_element's layout.
  std::sort(neighbors.begin(), neighbors.end(), better);
  if (config().scoring == KnnScoring::kSimilaritySum) {
    double sum = 0.0;
    for (const Neighbor& nb : neighbors) sum += nb.similarity;
    return sum;
  }
  double num = 0.0;
  double den = 0.0;
  for (const Neighbor& nb : neighbors) {
    num += nb.similarity * (nb.rating - means_[nb.index]);
    den += std::abs(nb.similarity);
  }
  if (den == 0.0) return means_[center];
  return means_[center] + num / den;
}

void KnnModel::ScoreCandidates(std::size_t u, std::span<const std::uint32_t> items, std::span<double> out) const {
  const Dataset& d = train();
  std::vector<Neighbor> neighbors;
  if (user_based()) {
    if (items.size() >= kRankedScanThreshold) {
      ScoreByNeighborRank(u, items, out);
      return;
    }
    std::vector<double> row(means_.size());
    for (std::size_t v = 0; v < row.size(); ++v) row[v] = similarity(u, v);
    for (std::size_t c = 0; c < items.size(); ++c) {
      neighbors.clear();
      for (const Cell& rater : d.item_row(items[c])) {
        if (rater.index == u) continue;
        const double s = row[rater.index];
        if (s > 0.0) neighbors.push_back({s, rater.index, rater.rating});
      }
      out[c] = Predict(u, neighbors);
    }
  } else {
    const auto profile = d.user_row(u);
    const std::size_t n = means_.size();
    for (std::size_t c = 0; c < items.size(); ++c) {
      const std::size_t i = items[c];
      neighbors.clear();
      if (!dense_.empty()) {
        const double* row = dense_.data() + i * n;
        for (const Cell& rated : profile) {
          const double s = row[rated.index];
          if (s > 0.0 && rated.index != i) neighbors.push_back({s, rated.index, rated.rating});
        }
      } else {
        for (const Cell& rated : profile) {
          if (rated.index == i) continue;
          const double s = packed_[PackedIndex(i, rated.index)];
          if (s > 0.0) neighbors.push_back({s, rated.index, rated.rating});
        }
      }
      out[c] = Predict(i, neighbors);
    }
  }
}

// Visits u's neighbours from most to least similar and lets each one vote on
// the items it rated until those items have k votes. Same neighbour sets and
// summation order as Predict, without a selection per item.
void KnnModel::ScoreByNeighborRank(std::size_t u, std::span<const std::uint32_t> items, std::span<double> out) const {
  const Dataset& d = train();
  const auto k = static_cast<std::uint32_t>(config().neighborhood_size);
  std::vector<std::pair<double, std::uint32_t>> ranked;
  for (std::size_t v = 0; v < means_.size(); ++v) {
    if (v == u) continue;
    const double s = similarity(u, v);
    if (s > 0.0) ranked.emplace_back(s, static_cast<std::uint32_t>(v));
  }
  std::sort(ranked.begin(), ranked.end(),
            [](const auto& x, const auto& y) { return x.first != y.first ? x.first > y.first : x.second < y.second; });
  const std::size_t num_items = d.num_items();
  std::vector<std::uint32_t> votes(num_items, 0);
  std::vector<double> num(num_items, 0.0);
  std::vector<double> den(num_items, 0.0);
  const bool sum_only = config().scoring == KnnScoring::kSimilaritySum;
  for (const auto& [s, v] : ranked) {
    const double mean_v = means_[v];
    for (const Cell& cell : d.user_row(v)) {
      if (votes[cell.index] == k) continue;
      ++votes[cell.index];
      if (sum_only) {
        num[cell.index] += s;
      } else {
        num[cell.index] += s * (cell.rating - mean_v);
        den[cell.index] += std::abs(s);
      }
    }
  }
  for (std::size_t c = 0; c < items.size(); ++c) {
    const std::size_t i = items[c];
    if (sum_only) {
      out[c] = num[i];
    } else {
      out[c] = den[i] == 0.0 ? means_[u] : means_[u] + num[i] / den[i];
    }
  }
}

void KnnModel::SaveParameters(std::ostream& out) const {
  out << "similarities " << packed_.size() << '\n';
  for (double s : packed_) out << FormatDouble(s) << '\n';
}

std::unique_ptr<const TrainedModel> FitKnn(std::shared_ptr<const Dataset> train, const ModelConfig& config) {
  return std::make_unique<KnnModel>(std::move(train), config);
}

}  // namespace calrec
