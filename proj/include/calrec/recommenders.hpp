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

#ifndef CALREC_RECOMMENDERS_HPP_
#define CALREC_RECOMMENDERS_HPP_

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "calrec/data.hpp"

namespace calrec {

enum class Algorithm { kUserKnn, kItemKnn, kSvdpp, kListRankMf };
enum class Similarity { kCosine, kPearson };

// How kNN models rank candidates: the neighbour-weighted rating prediction,
// or the summed similarity of the k nearest neighbours (zero without any).
enum class KnnScoring { kPrediction, kSimilaritySum };

std::string_view AlgorithmName(Algorithm algorithm);
Algorithm ParseAlgorithm(std::string_view name);
std::string_view SimilarityName(Similarity similarity);
Similarity ParseSimilarity(std::string_view name);
std::string_view KnnScoringName(KnnScoring scoring);
KnnScoring ParseKnnScoring(std::string_view name);

// Hyperparameters of one model. Fields that do not apply to `algorithm` are
// ignored by Fit but still validated.
struct ModelConfig {
  Algorithm algorithm = Algorithm::kUserKnn;
  // kNN
  int neighborhood_size = 30;
  Similarity similarity = Similarity::kCosine;
  KnnScoring scoring = KnnScoring::kPrediction;
  // Matrix factorization
  int factors = 10;
  double learning_rate = 0.01;
  double regularization = 0.01;
  int epochs = 20;
  std::uint64_t rng_seed = 0;

  void Validate() const;

  // Flat "key=value" description of the fields relevant to the algorithm,
  // space separated, e.g. "algorithm=user_knn k=30 similarity=cosine".
  std::string Describe() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// Applies one "key = value" assignment. Keys: algorithm, k, similarity,
// scoring, factors, learning_rate, regularization, epochs, seed. Throws ArgumentError
// on an unknown key or a malformed value.
void SetModelConfigField(ModelConfig& config, std::string_view key, std::string_view value);

// Grid file: blocks of "key = value" lines, one config per block. A block
// starts at a "[config]" header or after one or more blank lines; '#' starts
// a comment. Every block is validated.
std::vector<ModelConfig> ParseGrid(std::string_view text);

struct Recommendation {
  ItemId item;
  double score;

  friend bool operator==(const Recommendation&, const Recommendation&) = default;
};

// Ranked by score descending, ties by ascending item id.
struct RecommendationList {
  UserId user{};
  std::vector<Recommendation> items;

  friend bool operator==(const RecommendationList&, const RecommendationList&) = default;
};

// A fitted recommender. Immutable after construction; every const member is
// safe to call concurrently.
class TrainedModel {
 public:
  TrainedModel(std::shared_ptr<const Dataset> train, ModelConfig config);
  virtual ~TrainedModel() = default;

  TrainedModel(const TrainedModel&) = delete;
  TrainedModel& operator=(const TrainedModel&) = delete;

  const ModelConfig& config() const { return config_; }
  const Dataset& train() const { return *train_; }
  std::shared_ptr<const Dataset> shared_train() const { return train_; }

  // Predicted preference of a train user for a train item. LookupError if
  // either is unknown.
  double Score(UserId user, ItemId item) const;

  // The n best train items the user has not rated.
  RecommendationList RecommendTopN(UserId user, std::size_t n) const;

  // Training objective after each epoch, preceded by its initial value.
  // Empty for neighborhood models.
  const std::vector<double>& objective_trace() const { return objective_trace_; }

  // Self-describing text dump; LoadModel restores identical scores.
  void Save(std::ostream& out) const;

  // Scores of user row `u` for the dense item indices in `items`.
  virtual void ScoreCandidates(std::size_t u, std::span<const std::uint32_t> items, std::span<double> out) const = 0;

 protected:
  virtual void SaveParameters(std::ostream& out) const = 0;

  std::vector<double> objective_trace_;

 private:
  std::shared_ptr<const Dataset> train_;
  ModelConfig config_;
};

// Throws ArgumentError on an empty train set or an invalid config, and
// DivergenceError if the training objective becomes non-finite.
std::unique_ptr<const TrainedModel> Fit(std::shared_ptr<const Dataset> train, const ModelConfig& config);

// `train` must be the dataset the model was fitted on.
std::unique_ptr<const TrainedModel> LoadModel(std::istream& in, std::shared_ptr<const Dataset> train);

// Top-n lists for every train user in ascending user id order. The result
// does not depend on `threads`.
std::vector<RecommendationList> RecommendAll(const TrainedModel& model, std::size_t n, unsigned threads = 1);

// |top-k ∩ test items of the user| / k. With a threshold, only test ratings
// >= threshold are relevant. nullopt when the user has no test ratings.
std::optional<double> PrecisionAtK(const RecommendationList& recs, const Dataset& test, std::size_t k,
                                   std::optional<double> relevance_threshold = std::nullopt);

// Mean of PrecisionAtK over the users that have test ratings.
double MeanPrecisionAtK(std::span<const RecommendationList> recs, const Dataset& test, std::size_t k,
                        std::optional<double> relevance_threshold = std::nullopt);

struct GridRow {
  ModelConfig config;
  double precision;
};

struct GridSearchResult {
  ModelConfig best;
  std::vector<GridRow> report;
};

struct GridSearchOptions {
  double validation_fraction = 0.1;
  std::uint64_t seed = 0;
  std::size_t k = 10;
  std::optional<double> relevance_threshold;
  unsigned threads = 1;
};

// Fits every config on an inner split of `train` and keeps the one with the
// highest validation precision@k; ties go to the earliest config. Fit errors
// are rethrown with the offending config in the message.
GridSearchResult GridSearch(const Dataset& train, std::span<const ModelConfig> grid, const GridSearchOptions& options);

}  // namespace calrec

#endif  // CALREC_RECOMMENDERS_HPP_
