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

#include "calrec/recommenders.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>
#include <unordered_set>

#include "calrec/errors.hpp"
#include "calrec/models.hpp"
#include "calrec/random.hpp"
#include "format.hpp"

namespace calrec {
namespace {

constexpr std::string_view kModelMagic = "calrec-model";
constexpr int kModelVersion = 1;

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
T ParseValue(std::string_view key, std::string_view value) {
  T out{};
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (value.empty() || ec != std::errc() || ptr != end) {
    throw ArgumentError("invalid value '" + std::string(value) + "' for " + std::string(key));
  }
  return out;
}

// Every field, for persistence.
std::string AllFields(const ModelConfig& c) {
  std::ostringstream out;
  out << "algorithm=" << AlgorithmName(c.algorithm) << " k=" << c.neighborhood_size
      << " similarity=" << SimilarityName(c.similarity) << " scoring=" << KnnScoringName(c.scoring)
      << " factors=" << c.factors
      << " learning_rate=" << FormatDouble(c.learning_rate) << " regularization=" << FormatDouble(c.regularization)
      << " epochs=" << c.epochs << " seed=" << c.rng_seed;
  return out.str();
}

ModelConfig ParseFields(std::string_view text) {
  ModelConfig config;
  std::istringstream in{std::string(text)};
  std::string token;
  while (in >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) throw ArgumentError("expected key=value, got '" + token + "'");
    SetModelConfigField(config, std::string_view(token).substr(0, eq), std::string_view(token).substr(eq + 1));
  }
  return config;
}

// Rethrows the active calrec error with `prefix` prepended, keeping its type.
[[noreturn]] void RethrowTagged(const std::string& prefix) {
  try {
    throw;
  } catch (const DivergenceError& e) {
    throw DivergenceError(prefix + e.what());
  } catch (const ArgumentError& e) {
    throw ArgumentError(prefix + e.what());
  } catch (const LookupError& e) {
    throw LookupError(prefix + e.what());
  } catch (const Error& e) {
    throw Error(prefix + e.what());
  }
}

std::vector<double> ReadVector(std::istream& in, std::string_view name) {
  std::string label;
  std::size_t count = 0;
  if (!(in >> label >> count) || label != name) {
    throw ParseError("model file: expected section '" + std::string(name) + "'");
  }
  std::vector<double> values(count);
  std::string token;
  for (std::size_t k = 0; k < count; ++k) {
    if (!(in >> token)) throw ParseError("model file: truncated section '" + std::string(name) + "'");
    values[k] = ParseValue<double>(name, token);
  }
  return values;
}

double ReadScalar(std::istream& in, std::string_view name) {
  std::string label;
  std::string token;
  if (!(in >> label >> token) || label != name) {
    throw ParseError("model file: expected '" + std::string(name) + "'");
  }
  return ParseValue<double>(name, token);
}

}  // namespace

std::string_view AlgorithmName(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kUserKnn:
      return "user_knn";
    case Algorithm::kItemKnn:
      return "item_knn";
    case Algorithm::kSvdpp:
      return "svdpp";
    case Algorithm::kListRankMf:
      return "listrank_mf";
  }
  return "unknown";
}

Algorithm ParseAlgorithm(std::string_view name) {
  for (Algorithm a : {Algorithm::kUserKnn, Algorithm::kItemKnn, Algorithm::kSvdpp, Algorithm::kListRankMf}) {
    if (AlgorithmName(a) == name) return a;
  }
  throw ArgumentError("unknown algorithm '" + std::string(name) + "'");
}

std::string_view SimilarityName(Similarity similarity) {
  return similarity == Similarity::kCosine ? "cosine" : "pearson";
}

Similarity ParseSimilarity(std::string_view name) {
  if (name == "cosine") return Similarity::kCosine;
  if (name == "pearson") return Similarity::kPearson;
  throw ArgumentError("unknown similarity '" + std::string(name) + "'");
}

std::string_view KnnScoringName(KnnScoring scoring) {
  return scoring == KnnScoring::kPrediction ? "prediction" : "similarity_sum";
}

KnnScoring ParseKnnScoring(std::string_view name) {
  if (name == "prediction") return KnnScoring::kPrediction;
  if (name == "similarity_sum") return KnnScoring::kSimilaritySum;
  throw ArgumentError("unknown kNN scoring '" + std::string(name) + "'");
}

void ModelConfig::Validate() const {
  if (neighborhood_size < 1) throw ArgumentError("neighborhood size k must be >= 1");
  if (factors < 1) throw ArgumentError("factors must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ArgumentError("learning_rate must be > 0");
  if (!(regularization >= 0.0) || !std::isfinite(regularization)) {
    throw ArgumentError("regularization must be >= 0");
  }
  if (epochs < 1) throw ArgumentError("epochs must be >= 1");
}

std::string ModelConfig::Describe() const {
  std::ostringstream out;
  out << "algorithm=" << AlgorithmName(algorithm);
  if (algorithm == Algorithm::kUserKnn || algorithm == Algorithm::kItemKnn) {
    out << " k=" << neighborhood_size << " similarity=" << SimilarityName(similarity)
        << " scoring=" << KnnScoringName(scoring);
  } else {
    out << " factors=" << factors << " learning_rate=" << FormatDouble(learning_rate)
        << " regularization=" << FormatDouble(regularization) << " epochs=" << epochs << " seed=" << rng_seed;
  }
  return out.str();
}

void SetModelConfigField(ModelConfig& config, std::string_view key, std::string_view value) {
  key = Trim(key);
  value = Trim(value);
  if (key == "algorithm") {
    config.algorithm = ParseAlgorithm(value);
  } else if (key == "k" || key == "neighborhood_size") {
    config.neighborhood_size = ParseValue<int>(key, value);
  } else if (key == "similarity") {
    config.similarity = ParseSimilarity(value);
  } else if (key == "scoring") {
    config.scoring = ParseKnnScoring(value);
  } else if (key == "factors") {
    config.factors = ParseValue<int>(key, value);
  } else if (key == "learning_rate") {
    config.learning_rate = ParseValue<double>(key, value);
  } else if (key == "regularization") {
    config.regularization = ParseValue<double>(key, value);
  } else if (key == "epochs") {
    config.epochs = ParseValue<int>(key, value);
  } else if (key == "seed" || key == "rng_seed") {
    config.rng_seed = ParseValue<std::uint64_t>(key, value);
  } else {
    throw ArgumentError("unknown model config key '" + std::string(key) + "'");
  }
}

std::vector<ModelConfig> ParseGrid(std::string_view text) {
  std::vector<ModelConfig> grid;
  std::optional<ModelConfig> current;
  std::size_t line_no = 0;
  auto flush = [&] {
    if (current) {
      current->Validate();
      grid.push_back(*current);
      current.reset();
    }
  };
  std::istringstream in{std::string(text)};
  std::string raw_line;
  while (std::getline(in, raw_line)) {
    ++line_no;
    std::string_view line = raw_line;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = Trim(line);
    if (line.empty()) {
      flush();
      continue;
    }
    if (line == "[config]") {
      flush();
      current = ModelConfig{};
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError("grid line " + std::to_string(line_no) + ": expected key = value");
    }
    if (!current) current = ModelConfig{};
    try {
      SetModelConfigField(*current, line.substr(0, eq), line.substr(eq + 1));
    } catch (const ArgumentError& e) {
      throw ParseError("grid line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  flush();
  return grid;
}

TrainedModel::TrainedModel(std::shared_ptr<const Dataset> train, ModelConfig config)
    : train_(std::move(train)), config_(config) {
  if (!train_ || train_->empty()) throw ArgumentError("cannot fit a model on an empty train set");
}

double TrainedModel::Score(UserId user, ItemId item) const {
  const std::size_t u = train_->user_index(user);
  const auto i = static_cast<std::uint32_t>(train_->item_index(item));
  double out = 0.0;
  ScoreCandidates(u, std::span<const std::uint32_t>(&i, 1), std::span<double>(&out, 1));
  return out;
}

RecommendationList TrainedModel::RecommendTopN(UserId user, std::size_t n) const {
  const std::size_t u = train_->user_index(user);
  const auto profile = train_->user_row(u);
  std::vector<std::uint32_t> candidates;
  candidates.reserve(train_->num_items() - profile.size());
  std::size_t next = 0;
  for (std::uint32_t i = 0; i < train_->num_items(); ++i) {
    while (next < profile.size() && profile[next].index < i) ++next;
    if (next < profile.size() && profile[next].index == i) continue;
    candidates.push_back(i);
  }
  std::vector<double> scores(candidates.size());
  ScoreCandidates(u, candidates, scores);

  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  // Dense item indices follow ascending item id.
  auto better = [&](std::size_t a, std::size_t b) {
    return scores[a] != scores[b] ? scores[a] > scores[b] : candidates[a] < candidates[b];
  };
  const std::size_t take = std::min(n, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(), better);

  RecommendationList list{user, {}};
  list.items.reserve(take);
  for (std::size_t r = 0; r < take; ++r) {
    list.items.push_back({train_->item_id(candidates[order[r]]), scores[order[r]]});
  }
  return list;
}

void TrainedModel::Save(std::ostream& out) const {
  out << kModelMagic << ' ' << kModelVersion << '\n';
  out << "algorithm " << AlgorithmName(config_.algorithm) << '\n';
  out << "config " << AllFields(config_) << '\n';
  out << "train " << train_->num_users() << ' ' << train_->num_items() << ' ' << train_->size() << '\n';
  SaveParameters(out);
  out << "end\n";
  if (!out) throw IoError("failed to write model");
}

std::unique_ptr<const TrainedModel> Fit(std::shared_ptr<const Dataset> train, const ModelConfig& config) {
  config.Validate();
  if (!train || train->empty()) throw ArgumentError("cannot fit a model on an empty train set");
  switch (config.algorithm) {
    case Algorithm::kUserKnn:
    case Algorithm::kItemKnn:
      return FitKnn(std::move(train), config);
    case Algorithm::kSvdpp:
      return FitSvdpp(std::move(train), config);
    case Algorithm::kListRankMf:
      return FitListRankMf(std::move(train), config);
  }
  throw ArgumentError("unknown algorithm");
}

std::unique_ptr<const TrainedModel> LoadModel(std::istream& in, std::shared_ptr<const Dataset> train) {
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != kModelMagic) throw ParseError("not a calrec model file");
  if (version != kModelVersion) throw ParseError("unsupported model version " + std::to_string(version));
  std::string label;
  std::string algorithm;
  if (!(in >> label >> algorithm) || label != "algorithm") throw ParseError("model file: missing algorithm");
  if (!(in >> label) || label != "config") throw ParseError("model file: missing config");
  std::string config_line;
  std::getline(in, config_line);
  const ModelConfig config = ParseFields(config_line);
  if (AlgorithmName(config.algorithm) != algorithm) throw ParseError("model file: algorithm/config mismatch");
  config.Validate();
  std::size_t users = 0;
  std::size_t items = 0;
  std::size_t ratings = 0;
  if (!(in >> label >> users >> items >> ratings) || label != "train") {
    throw ParseError("model file: missing train dimensions");
  }
  if (!train || users != train->num_users() || items != train->num_items() || ratings != train->size()) {
    throw ArgumentError("model was fitted on a different train set");
  }

  std::unique_ptr<const TrainedModel> model;
  switch (config.algorithm) {
    case Algorithm::kUserKnn:
    case Algorithm::kItemKnn:
      model = std::make_unique<KnnModel>(train, config, ReadVector(in, "similarities"));
      break;
    case Algorithm::kSvdpp: {
      SvdppParameters p;
      p.factors = config.factors;
      p.global_mean = ReadScalar(in, "global_mean");
      p.user_bias = ReadVector(in, "user_bias");
      p.item_bias = ReadVector(in, "item_bias");
      p.user_factors = ReadVector(in, "user_factors");
      p.item_factors = ReadVector(in, "item_factors");
      p.implicit_factors = ReadVector(in, "implicit_factors");
      model = std::make_unique<SvdppModel>(train, config, std::move(p));
      break;
    }
    case Algorithm::kListRankMf: {
      ListRankParameters p;
      p.factors = config.factors;
      p.user_factors = ReadVector(in, "user_factors");
      p.item_factors = ReadVector(in, "item_factors");
      model = std::make_unique<ListRankMfModel>(train, config, std::move(p));
      break;
    }
  }
  if (!(in >> label) || label != "end") throw ParseError("model file: missing end marker");
  return model;
}

std::vector<RecommendationList> RecommendAll(const TrainedModel& model, std::size_t n, unsigned threads) {
  const Dataset& train = model.train();
  std::vector<RecommendationList> lists(train.num_users());
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(threads, lists.size()));
  auto work = [&](std::size_t w) {
    for (std::size_t u = w; u < lists.size(); u += workers) lists[u] = model.RecommendTopN(train.user_id(u), n);
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }
  return lists;
}

std::optional<double> PrecisionAtK(const RecommendationList& recs, const Dataset& test, std::size_t k,
                                   std::optional<double> relevance_threshold) {
  if (k == 0) throw ArgumentError("precision@k needs k >= 1");
  const auto u = test.find_user(recs.user);
  if (!u || test.user_row(*u).empty()) return std::nullopt;
  std::unordered_set<std::int64_t> relevant;
  for (const Cell& c : test.user_row(*u)) {
    if (!relevance_threshold || c.rating >= *relevance_threshold) relevant.insert(raw(test.item_id(c.index)));
  }
  std::size_t hits = 0;
  const std::size_t top = std::min(k, recs.items.size());
  for (std::size_t r = 0; r < top; ++r) hits += relevant.contains(raw(recs.items[r].item)) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(k);
}

double MeanPrecisionAtK(std::span<const RecommendationList> recs, const Dataset& test, std::size_t k,
                        std::optional<double> relevance_threshold) {
  double sum = 0.0;
  std::size_t counted = 0;
  for (const auto& list : recs) {
    if (auto p = PrecisionAtK(list, test, k, relevance_threshold)) {
      sum += *p;
      ++counted;
    }
  }
  return counted == 0 ? 0.0 : sum / static_cast<double>(counted);
}

GridSearchResult GridSearch(const Dataset& train, std::span<const ModelConfig> grid,
                            const GridSearchOptions& options) {
  if (grid.empty()) throw ArgumentError("grid search needs at least one config");
  for (const auto& c : grid) {
    if (c.algorithm != grid.front().algorithm) throw ArgumentError("grid mixes algorithms");
  }
  const SplitPair inner = Split(train, 1.0 - options.validation_fraction, derive_seed(options.seed, "grid-validation"));
  auto inner_train = std::make_shared<const Dataset>(inner.train);

  GridSearchResult result;
  std::optional<std::size_t> best;
  for (const ModelConfig& config : grid) {
    std::unique_ptr<const TrainedModel> model;
    try {
      model = Fit(inner_train, config);
    } catch (const Error&) {
      RethrowTagged("[" + config.Describe() + "] ");
    }
    const auto lists = RecommendAll(*model, options.k, options.threads);
    const double precision = MeanPrecisionAtK(lists, inner.test, options.k, options.relevance_threshold);
    result.report.push_back({config, precision});
    if (!best || precision > result.report[*best].precision) best = result.report.size() - 1;
  }
  result.best = result.report[*best].config;
  return result;
}

}  // namespace calrec
