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

// Concrete model types behind TrainedModel, plus the training objectives of
// the two factorization models in a form that can be checked numerically.

#ifndef CALREC_MODELS_HPP_
#define CALREC_MODELS_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "calrec/data.hpp"
#include "calrec/recommenders.hpp"

namespace calrec {

// Similarity of two rows over their co-rated entries (cells must be sorted
// by index). Fewer than two co-ratings give 0. Pearson centers each side by
// its mean over the co-rated entries.
double RowSimilarity(std::span<const Cell> a, std::span<const Cell> b, Similarity similarity);

// User-based or item-based neighborhood model. Similarities between all
// pairs of the neighbor side (users or items) are precomputed in a packed
// upper triangle.
class KnnModel final : public TrainedModel {
 public:
  // User-kNN candidate sets at least this large are scored in one pass over
  // the ranked neighbours.
  static constexpr std::size_t kRankedScanThreshold = 64;

  KnnModel(std::shared_ptr<const Dataset> train, const ModelConfig& config);
  KnnModel(std::shared_ptr<const Dataset> train, const ModelConfig& config, std::vector<double> packed);

  bool user_based() const { return config().algorithm == Algorithm::kUserKnn; }
  std::size_t num_entities() const { return means_.size(); }

  // Dense indices of two users (user_knn) or two items (item_knn). The
  // diagonal is 1.
  double similarity(std::size_t a, std::size_t b) const;

  void ScoreCandidates(std::size_t u, std::span<const std::uint32_t> items, std::span<double> out) const override;

 protected:
  void SaveParameters(std::ostream& out) const override;

 private:
  struct Neighbor {
    double similarity;
    std::uint32_t index;
    double rating;
  };

  std::size_t PackedIndex(std::size_t a, std::size_t b) const;
  // mean[center] + weighted mean deviation of the k most similar neighbors.
  double Predict(std::size_t center, std::vector<Neighbor>& neighbors) const;
  void ScoreByNeighborRank(std::size_t u, std::span<const std::uint32_t> items, std::span<double> out) const;

  std::vector<double> packed_;
  std::vector<double> dense_;  // item-kNN only, row-major copy of packed_
  std::vector<double> means_;
};

// Parameters of r^_ui = mu + b_u + b_i + q_i . (p_u + |R(u)|^-1/2 sum_{j in R(u)} y_j).
// Factor matrices are row-major with `factors` columns.
struct SvdppParameters {
  int factors = 0;
  double global_mean = 0.0;
  std::vector<double> user_bias;
  std::vector<double> item_bias;
  std::vector<double> user_factors;
  std::vector<double> item_factors;
  std::vector<double> implicit_factors;
};

// Small uniform initialization in [-0.01, 0.01], zero biases, mu = train mean.
SvdppParameters InitSvdpp(const Dataset& train, int factors, std::uint64_t seed);

// sum_{(u,i)} [ e_ui^2 / 2 + reg/2 (b_u^2 + b_i^2 + |p_u|^2 + |q_i|^2) ]
//   + reg/2 sum_u sum_{j in R(u)} |y_j|^2,   e_ui = r_ui - r^_ui.
// mu is held fixed and has no gradient.
double SvdppObjective(const Dataset& train, const SvdppParameters& params, double regularization);
SvdppParameters SvdppGradient(const Dataset& train, const SvdppParameters& params, double regularization);

// One SGD epoch. Users are visited in a shuffled order and each user's
// ratings in a shuffled order; biases, p_u and q_i move after every rating,
// the implicit factors y_j once per user from the gradient accumulated over
// that user's ratings.
void SvdppEpoch(const Dataset& train, SvdppParameters& params, double learning_rate, double regularization,
                std::uint64_t epoch_seed);

class SvdppModel final : public TrainedModel {
 public:
  SvdppModel(std::shared_ptr<const Dataset> train, const ModelConfig& config, SvdppParameters params,
             std::vector<double> trace = {});

  const SvdppParameters& parameters() const { return params_; }
  void ScoreCandidates(std::size_t u, std::span<const std::uint32_t> items, std::span<double> out) const override;

 protected:
  void SaveParameters(std::ostream& out) const override;

 private:
  SvdppParameters params_;
  std::vector<double> user_vectors_;  // p_u + implicit term, cached per user
};

struct ListRankParameters {
  int factors = 0;
  std::vector<double> user_factors;
  std::vector<double> item_factors;
};

// Uniform initialization in [-0.1, 0.1].
ListRankParameters InitListRank(const Dataset& train, int factors, std::uint64_t seed);

// Top-one probabilities of one user's rated list: softmax of the ratings
// (target) and softmax of the logistic of U_u . V_i (model), in row order.
void ListRankDistributions(const Dataset& train, const ListRankParameters& params, std::size_t u,
                           std::vector<double>& target, std::vector<double>& model);

// sum_u sum_{i in I_u} -P_ui log P^_ui + reg/2 (|U|^2 + |V|^2).
double ListRankObjective(const Dataset& train, const ListRankParameters& params, double regularization);
ListRankParameters ListRankGradient(const Dataset& train, const ListRankParameters& params, double regularization);

class ListRankMfModel final : public TrainedModel {
 public:
  ListRankMfModel(std::shared_ptr<const Dataset> train, const ModelConfig& config, ListRankParameters params,
                  std::vector<double> trace = {});

  const ListRankParameters& parameters() const { return params_; }
  void ScoreCandidates(std::size_t u, std::span<const std::uint32_t> items, std::span<double> out) const override;

 protected:
  void SaveParameters(std::ostream& out) const override;

 private:
  ListRankParameters params_;
};

std::unique_ptr<const TrainedModel> FitKnn(std::shared_ptr<const Dataset> train, const ModelConfig& config);
std::unique_ptr<const TrainedModel> FitSvdpp(std::shared_ptr<const Dataset> train, const ModelConfig& config);
std::unique_ptr<const TrainedModel> FitListRankMf(std::shared_ptr<const Dataset> train, const ModelConfig& config);

}  // namespace calrec

#endif  // CALREC_MODELS_HPP_
