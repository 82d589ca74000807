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
#include <numeric>
#include <ostream>

#include "calrec/errors.hpp"
#include "calrec/models.hpp"
#include "calrec/random.hpp"
#include "format.hpp"

namespace calrec {
namespace {

constexpr double kInitScale = 0.1;

double Logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::span<const double> Row(const std::vector<double>& m, std::size_t r, int f) {
  return {m.data() + r * static_cast<std::size_t>(f), static_cast<std::size_t>(f)};
}

std::span<double> Row(std::vector<double>& m, std::size_t r, int f) {
  return {m.data() + r * static_cast<std::size_t>(f), static_cast<std::size_t>(f)};
}

double Dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

// In-place softmax with max subtraction.
void Softmax(std::vector<double>& v) {
  if (v.empty()) return;
  const double top = *std::max_element(v.begin(), v.end());
  double sum = 0.0;
  for (double& x : v) {
    x = std::exp(x - top);
    sum += x;
  }
  for (double& x : v) x /= sum;
}

double SquaredNorm(const std::vector<double>& v) { return std::inner_product(v.begin(), v.end(), v.begin(), 0.0); }

}  // namespace

ListRankParameters InitListRank(const Dataset& train, int factors, std::uint64_t seed) {
  ListRankParameters p;
  p.factors = factors;
  Rng rng(derive_seed(seed, "listrank-init"));
  p.user_factors.resize(train.num_users() * static_cast<std::size_t>(factors));
  p.item_factors.resize(train.num_items() * static_cast<std::size_t>(factors));
  for (double& x : p.user_factors) x = rng.uniform(-kInitScale, kInitScale);
  for (double& x : p.item_factors) x = rng.uniform(-kInitScale, kInitScale);
  return p;
}

void ListRankDistributions(const Dataset& train, const ListRankParameters& params, std::size_t u,
                           std::vector<double>& target, std::vector<double>& model) {
  const auto row = train.user_row(u);
  const auto uf = Row(params.user_factors, u, params.factors);
  target.resize(row.size());
  model.resize(row.size());
  for (std::size_t k = 0; k < row.size(); ++k) {
    target[k] = row[k].rating;
    model[k] = Logistic(Dot(uf, Row(params.item_factors, row[k].index, params.factors)));
  }
  Softmax(target);
  Softmax(model);
}

double ListRankObjective(const Dataset& train, const ListRankParameters& params, double regularization) {
  std::vector<double> target;
  std::vector<double> model;
  double loss = 0.0;
  for (std::size_t u = 0; u < train.num_users(); ++u) {
    ListRankDistributions(train, params, u, target, model);
    for (std::size_t k = 0; k < target.size(); ++k) loss -= target[k] * std::log(model[k]);
  }
  return loss + 0.5 * regularization * (SquaredNorm(params.user_factors) + SquaredNorm(params.item_factors));
}

ListRankParameters ListRankGradient(const Dataset& train, const ListRankParameters& params, double regularization) {
  const int f = params.factors;
  ListRankParameters g;
  g.factors = f;
  g.user_factors.resize(params.user_factors.size());
  g.item_factors.resize(params.item_factors.size());
  for (std::size_t x = 0; x < g.user_factors.size(); ++x) g.user_factors[x] = regularization * params.user_factors[x];
  for (std::size_t x = 0; x < g.item_factors.size(); ++x) g.item_factors[x] = regularization * params.item_factors[x];

  std::vector<double> target;
  std::vector<double> model;
  for (std::size_t u = 0; u < train.num_users(); ++u) {
    ListRankDistributions(train, params, u, target, model);
    const auto row = train.user_row(u);
    const auto uf = Row(params.user_factors, u, f);
    auto gu = Row(g.user_factors, u, f);
    for (std::size_t k = 0; k < row.size(); ++k) {
      const auto vf = Row(params.item_factors, row[k].index, f);
      const double s = Logistic(Dot(uf, vf));
      // d/dx of the cross-entropy through softmax(g(x)) given sum(target) = 1.
      const double coeff = (model[k] - target[k]) * s * (1.0 - s);
      auto gv = Row(g.item_factors, row[k].index, f);
      for (int d = 0; d < f; ++d) {
        gu[d] += coeff * vf[d];
        gv[d] += coeff * uf[d];
      }
    }
  }
  return g;
}

ListRankMfModel::ListRankMfModel(std::shared_ptr<const Dataset> train, const ModelConfig& config,
                                 ListRankParameters params, std::vector<double> trace)
    : TrainedModel(std::move(train), config), params_(std::move(params)) {
  objective_trace_ = std::move(trace);
  const std::size_t f = static_cast<std::size_t>(params_.factors);
  if (params_.user_factors.size() != this->train().num_users() * f ||
      params_.item_factors.size() != this->train().num_items() * f) {
    throw ArgumentError("ListRankMF parameters do not match the train set");
  }
}

void ListRankMfModel::ScoreCandidates(std::size_t u, std::span<const std::uint32_t> items,
                                      std::span<double> out) const {
  const auto uf = Row(params_.user_factors, u, params_.factors);
  for (std::size_t c = 0; c < items.size(); ++c) out[c] = Dot(uf, Row(params_.item_factors, items[c], params_.factors));
}

void ListRankMfModel::SaveParameters(std::ostream& out) const {
  auto dump = [&](const char* name, const std::vector<double>& v) {
    out << name << ' ' << v.size() << '\n';
    for (double x : v) out << FormatDouble(x) << '\n';
  };
  dump("user_factors", params_.user_factors);
  dump("item_factors", params_.item_factors);
}

std::unique_ptr<const TrainedModel> FitListRankMf(std::shared_ptr<const Dataset> train, const ModelConfig& config) {
  ListRankParameters params = InitListRank(*train, config.factors, config.rng_seed);
  std::vector<double> trace{ListRankObjective(*train, params, config.regularization)};
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const ListRankParameters grad = ListRankGradient(*train, params, config.regularization);
    for (std::size_t x = 0; x < params.user_factors.size(); ++x) {
      params.user_factors[x] -= config.learning_rate * grad.user_factors[x];
    }
    for (std::size_t x = 0; x < params.item_factors.size(); ++x) {
      params.item_factors[x] -= config.learning_rate * grad.item_factors[x];
    }
    const double objective = ListRankObjective(*train, params, config.regularization);
    if (!std::isfinite(objective)) {
      throw DivergenceError("ListRankMF objective became non-finite at epoch " + std::to_string(epoch));
    }
    trace.push_back(objective);
  }
  return std::make_unique<ListRankMfModel>(std::move(train), config, std::move(params), std::move(trace));
}

}  // namespace calrec
