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
#include <numeric>
#include <ostream>

#include "calrec/errors.hpp"
#include "calrec/models.hpp"
#include "calrec/random.hpp"
#include "format.hpp"

namespace calrec {
namespace {

constexpr double kInitScale = 0.01;

std::span<double> Row(std::vector<double>& m, std::size_t r, int f) {
  return {m.data() + r * static_cast<std::size_t>(f), static_cast<std::size_t>(f)};
}

std::span<const double> Row(const std::vector<double>& m, std::size_t r, int f) {
  return {m.data() + r * static_cast<std::size_t>(f), static_cast<std::size_t>(f)};
}

double Dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double SquaredNorm(std::span<const double> a) { return Dot(a, a); }

// p_u + |R(u)|^-1/2 sum_j y_j, and the scale factor itself.
std::vector<double> UserVector(const Dataset& train, const SvdppParameters& params, std::size_t u, double* scale) {
  const auto row = train.user_row(u);
  const int f = params.factors;
  std::vector<double> implicit(static_cast<std::size_t>(f), 0.0);
  for (const Cell& c : row) {
    const auto y = Row(params.implicit_factors, c.index, f);
    for (int k = 0; k < f; ++k) implicit[k] += y[k];
  }
  const double s = row.empty() ? 0.0 : 1.0 / std::sqrt(static_cast<double>(row.size()));
  const auto p = Row(params.user_factors, u, f);
  for (int k = 0; k < f; ++k) implicit[k] = p[k] + s * implicit[k];
  if (scale != nullptr) *scale = s;
  return implicit;
}

}  // namespace

SvdppParameters InitSvdpp(const Dataset& train, int factors, std::uint64_t seed) {
  SvdppParameters p;
  p.factors = factors;
  p.global_mean = train.global_mean();
  p.user_bias.assign(train.num_users(), 0.0);
  p.item_bias.assign(train.num_items(), 0.0);
  Rng rng(derive_seed(seed, "svdpp-init"));
  auto fill = [&](std::vector<double>& m, std::size_t rows) {
    m.resize(rows * static_cast<std::size_t>(factors));
    for (double& x : m) x = rng.uniform(-kInitScale, kInitScale);
  };
  fill(p.user_factors, train.num_users());
  fill(p.item_factors, train.num_items());
  fill(p.implicit_factors, train.num_items());
  return p;
}

double SvdppObjective(const Dataset& train, const SvdppParameters& params, double regularization) {
  const int f = params.factors;
  double loss = 0.0;
  for (std::size_t u = 0; u < train.num_users(); ++u) {
    const auto z = UserVector(train, params, u, nullptr);
    const double pu_norm = SquaredNorm(Row(params.user_factors, u, f));
    for (const Cell& c : train.user_row(u)) {
      const auto q = Row(params.item_factors, c.index, f);
      const double pred = params.global_mean + params.user_bias[u] + params.item_bias[c.index] + Dot(q, z);
      const double e = c.rating - pred;
      loss += 0.5 * e * e;
      loss += 0.5 * regularization *
              (params.user_bias[u] * params.user_bias[u] + params.item_bias[c.index] * params.item_bias[c.index] +
               pu_norm + SquaredNorm(q));
      loss += 0.5 * regularization * SquaredNorm(Row(params.implicit_factors, c.index, f));
    }
  }
  return loss;
}

SvdppParameters SvdppGradient(const Dataset& train, const SvdppParameters& params, double regularization) {
  const int f = params.factors;
  const double reg = regularization;
  SvdppParameters g;
  g.factors = f;
  g.user_bias.assign(params.user_bias.size(), 0.0);
  g.item_bias.assign(params.item_bias.size(), 0.0);
  g.user_factors.assign(params.user_factors.size(), 0.0);
  g.item_factors.assign(params.item_factors.size(), 0.0);
  g.implicit_factors.assign(params.implicit_factors.size(), 0.0);
  std::vector<double> z_grad(static_cast<std::size_t>(f));
  for (std::size_t u = 0; u < train.num_users(); ++u) {
    double scale = 0.0;
    const auto z = UserVector(train, params, u, &scale);
    const auto p = Row(params.user_factors, u, f);
    auto gp = Row(g.user_factors, u, f);
    std::fill(z_grad.begin(), z_grad.end(), 0.0);
    for (const Cell& c : train.user_row(u)) {
      const auto q = Row(params.item_factors, c.index, f);
      const double e =
          c.rating - (params.global_mean + params.user_bias[u] + params.item_bias[c.index] + Dot(q, z));
      g.user_bias[u] += -e + reg * params.user_bias[u];
      g.item_bias[c.index] += -e + reg * params.item_bias[c.index];
      auto gq = Row(g.item_factors, c.index, f);
      for (int k = 0; k < f; ++k) {
        gp[k] += -e * q[k] + reg * p[k];
        gq[k] += -e * z[k] + reg * q[k];
        z_grad[k] += -e * q[k];
      }
    }
    for (const Cell& c : train.user_row(u)) {
      const auto y = Row(params.implicit_factors, c.index, f);
      auto gy = Row(g.implicit_factors, c.index, f);
      for (int k = 0; k < f; ++k) gy[k] += scale * z_grad[k] + reg * y[k];
    }
  }
  return g;
}

void SvdppEpoch(const Dataset& train, SvdppParameters& params, double learning_rate, double regularization,
                std::uint64_t epoch_seed) {
  const int f = params.factors;
  const double lr = learning_rate;
  const double reg = regularization;
  Rng rng(epoch_seed);
  std::vector<std::uint32_t> users(train.num_users());
  std::iota(users.begin(), users.end(), 0u);
  rng.shuffle(std::span<std::uint32_t>(users));

  std::vector<Cell> ratings;
  std::vector<double> z_grad(static_cast<std::size_t>(f));
  std::vector<double> p_old(static_cast<std::size_t>(f));
  for (std::uint32_t u : users) {
    const auto row = train.user_row(u);
    ratings.assign(row.begin(), row.end());
    rng.shuffle(std::span<Cell>(ratings));
    double scale = 0.0;
    const auto implicit_plus_p = UserVector(train, params, u, &scale);
    // Implicit part alone; p_u changes during the user's block.
    std::vector<double> implicit(implicit_plus_p);
    auto p = Row(params.user_factors, u, f);
    for (int k = 0; k < f; ++k) implicit[k] -= p[k];
    std::fill(z_grad.begin(), z_grad.end(), 0.0);

    for (const Cell& c : ratings) {
      auto q = Row(params.item_factors, c.index, f);
      double dot = 0.0;
      for (int k = 0; k < f; ++k) dot += q[k] * (p[k] + implicit[k]);
      const double e = c.rating - (params.global_mean + params.user_bias[u] + params.item_bias[c.index] + dot);
      params.user_bias[u] -= lr * (-e + reg * params.user_bias[u]);
      params.item_bias[c.index] -= lr * (-e + reg * params.item_bias[c.index]);
      std::copy(p.begin(), p.end(), p_old.begin());
      for (int k = 0; k < f; ++k) {
        z_grad[k] += -e * q[k];
        p[k] -= lr * (-e * q[k] + reg * p[k]);
        q[k] -= lr * (-e * (p_old[k] + implicit[k]) + reg * q[k]);
      }
    }
    for (const Cell& c : row) {
      auto y = Row(params.implicit_factors, c.index, f);
      for (int k = 0; k < f; ++k) y[k] -= lr * (scale * z_grad[k] + reg * y[k]);
    }
  }
}

SvdppModel::SvdppModel(std::shared_ptr<const Dataset> train, const ModelConfig& config, SvdppParameters params,
                       std::vector<double> trace)
    : TrainedModel(std::move(train), config), params_(std::move(params)) {
  objective_trace_ = std::move(trace);
  const Dataset& d = this->train();
  const std::size_t f = static_cast<std::size_t>(params_.factors);
  if (params_.user_bias.size() != d.num_users() || params_.item_bias.size() != d.num_items() ||
      params_.user_factors.size() != d.num_users() * f || params_.item_factors.size() != d.num_items() * f ||
      params_.implicit_factors.size() != d.num_items() * f) {
    throw ArgumentError("SVD++ parameters do not match the train set");
  }
  user_vectors_.reserve(d.num_users() * f);
  for (std::size_t u = 0; u < d.num_users(); ++u) {
    const auto v = UserVector(d, params_, u, nullptr);
    user_vectors_.insert(user_vectors_.end(), v.begin(), v.end());
  }
}

void SvdppModel::ScoreCandidates(std::size_t u, std::span<const std::uint32_t> items, std::span<double> out) const {
  const int f = params_.factors;
  const auto z = Row(user_vectors_, u, f);
  const double base = params_.global_mean + params_.user_bias[u];
  for (std::size_t c = 0; c < items.size(); ++c) {
    out[c] = base + params_.item_bias[items[c]] + Dot(Row(params_.item_factors, items[c], f), z);
  }
}

void SvdppModel::SaveParameters(std::ostream& out) const {
  auto dump = [&](const char* name, const std::vector<double>& v) {
    out << name << ' ' << v.size() << '\n';
    for (double x : v) out << FormatDouble(x) << '\n';
  };
  out << "global_mean " << FormatDouble(params_.global_mean) << '\n';
  dump("user_bias", params_.user_bias);
  dump("item_bias", params_.item_bias);
  dump("user_factors", params_.user_factors);
  dump("item_factors", params_.item_factors);
  dump("implicit_factors", params_.implicit_factors);
}

std::unique_ptr<const TrainedModel> FitSvdpp(std::shared_ptr<const Dataset> train, const ModelConfig& config) {
  SvdppParameters params = InitSvdpp(*train, config.factors, config.rng_seed);
  std::vector<double> trace{SvdppObjective(*train, params, config.regularization)};
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    SvdppEpoch(*train, params, config.learning_rate, config.regularization,
               derive_seed(config.rng_seed, "svdpp-epoch", static_cast<std::uint64_t>(epoch)));
    const double objective = SvdppObjective(*train, params, config.regularization);
    if (!std::isfinite(objective)) {
      throw DivergenceError("SVD++ objective became non-finite at epoch " + std::to_string(epoch));
    }
    trace.push_back(objective);
  }
  return std::make_unique<SvdppModel>(std::move(train), config, std::move(params), std::move(trace));
}

}  // namespace calrec
