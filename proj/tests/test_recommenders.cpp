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
#include <set>
#include <sstream>

#include "calrec/errors.hpp"
#include "calrec/models.hpp"
#include "calrec/recommenders.hpp"
#include "doctest.h"
#include "knn_tables.hpp"
#include "test_util.hpp"

namespace calrec {
namespace {

using testing::MakeDataset;
using testing::Share;

std::shared_ptr<const Dataset> Toy() {
  static const auto toy = Share(ParseRatings(ReadFile(testing::ToyDir() + "/ratings.dat")));
  return toy;
}

ModelConfig Config(Algorithm algorithm) {
  ModelConfig c;
  c.algorithm = algorithm;
  c.neighborhood_size = 2;
  c.factors = 3;
  c.epochs = 5;
  c.rng_seed = 9;
  return c;
}

const Algorithm kAll[] = {Algorithm::kUserKnn, Algorithm::kItemKnn, Algorithm::kSvdpp, Algorithm::kListRankMf};

TEST_SUITE("recommenders") {

TEST_CASE("user-kNN similarities match the oracle") {
  const auto model = Fit(Toy(), Config(Algorithm::kUserKnn));
  const auto& knn = dynamic_cast<const KnnModel&>(*model);
  for (const auto& e : testing::kToySimilarities) {
    const std::size_t a = Toy()->user_index(UserId{e.a});
    const std::size_t b = Toy()->user_index(UserId{e.b});
    CHECK(std::abs(knn.similarity(a, b) - e.value) < 1e-9);
    CHECK(knn.similarity(a, b) == knn.similarity(b, a));
  }
  CHECK(knn.similarity(0, 0) == 1.0);
}

TEST_CASE("user-kNN predictions match the oracle table") {
  const auto model = Fit(Toy(), Config(Algorithm::kUserKnn));
  for (const auto& e : testing::kToyPredictions) {
    CAPTURE(e.a);
    CAPTURE(e.b);
    CHECK(std::abs(model->Score(UserId{e.a}, ItemId{e.b}) - e.value) < 1e-9);
  }
}

TEST_CASE("user-kNN predictions on a sub-fixture match the oracle table") {
  std::vector<RatingRecord> kept;
  for (const auto& r : Toy()->records()) {
    if (raw(r.user) <= 4 && raw(r.item) <= 5) kept.push_back(r);
  }
  const auto model = Fit(Share(Dataset::FromRecords(kept)), Config(Algorithm::kUserKnn));
  for (const auto& e : testing::kSubsetPredictions) {
    CHECK(std::abs(model->Score(UserId{e.a}, ItemId{e.b}) - e.value) < 1e-9);
  }
}

TEST_CASE("user-kNN hand example") {
  // A = {1:2, 2:4}; B = {1:2, 2:4, 3:4.5} agrees perfectly with A on the
  // co-rated items and rates item 3 one above B's mean; C shares nothing.
  const auto train = Share(MakeDataset({{1, 1, 2}, {1, 2, 4}, {2, 1, 2}, {2, 2, 4}, {2, 3, 4.5}, {3, 4, 1}}));
  ModelConfig c;
  const auto model = Fit(train, c);
  CHECK(model->Score(UserId{1}, ItemId{3}) == doctest::Approx(4.0).epsilon(1e-12));
  // No neighbour has positive similarity: fall back to the user's mean.
  CHECK(model->Score(UserId{3}, ItemId{3}) == 1.0);
}

TEST_CASE("similarity-sum scoring") {
  const auto train = Share(MakeDataset({{1, 1, 2}, {1, 2, 4}, {2, 1, 2}, {2, 2, 4}, {2, 3, 4.5}, {3, 4, 1}}));
  ModelConfig c;
  c.scoring = KnnScoring::kSimilaritySum;
  const auto model = Fit(train, c);
  CHECK(model->Score(UserId{1}, ItemId{3}) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(model->Score(UserId{3}, ItemId{3}) == 0.0);
  c.algorithm = Algorithm::kItemKnn;
  CHECK(Fit(train, c)->Score(UserId{3}, ItemId{3}) == 0.0);
}

TEST_CASE("bulk kNN scoring equals single-item scoring bit for bit") {
  Rng rng(83);
  const auto train = Share(testing::RandomDataset(rng, 40, 150, 0.15));
  for (Algorithm alg : {Algorithm::kUserKnn, Algorithm::kItemKnn}) {
    for (KnnScoring scoring : {KnnScoring::kPrediction, KnnScoring::kSimilaritySum}) {
      ModelConfig c;
      c.algorithm = alg;
      c.scoring = scoring;
      c.neighborhood_size = 5;
      const auto model = Fit(train, c);
      for (const auto& list : RecommendAll(*model, 200)) {
        CHECK(list.items.size() >= KnnModel::kRankedScanThreshold);
        for (const auto& r : list.items) CHECK(model->Score(list.user, r.item) == r.score);
      }
    }
  }
}

TEST_CASE("similarities agree with the direct row computation and are symmetric") {
  Rng rng(51);
  int cases = 0;
  for (int trial = 0; trial < 10; ++trial) {
    const auto train = Share(testing::RandomDataset(rng, 25, 20, 0.35));
    for (Algorithm alg : {Algorithm::kUserKnn, Algorithm::kItemKnn}) {
      for (Similarity sim : {Similarity::kCosine, Similarity::kPearson}) {
        ModelConfig c;
        c.algorithm = alg;
        c.similarity = sim;
        const auto model = Fit(train, c);
        const auto& knn = dynamic_cast<const KnnModel&>(*model);
        for (int pair = 0; pair < 25; ++pair) {
          const std::size_t a = rng.below(knn.num_entities());
          const std::size_t b = rng.below(knn.num_entities());
          const auto ra = alg == Algorithm::kUserKnn ? train->user_row(a) : train->item_row(a);
          const auto rb = alg == Algorithm::kUserKnn ? train->user_row(b) : train->item_row(b);
          CHECK(knn.similarity(a, b) == knn.similarity(b, a));
          CHECK(std::abs(RowSimilarity(ra, rb, sim) - RowSimilarity(rb, ra, sim)) < 1e-12);
          if (a != b) CHECK(std::abs(knn.similarity(a, b) - RowSimilarity(ra, rb, sim)) < 1e-9);
          ++cases;
        }
      }
    }
  }
  CHECK(cases == 1000);
}

TEST_CASE("item-kNN hand example") {
  // Items 1 and 2 are co-rated identically by two users; item 3 shares
  // only one rater with them, so its similarities are zero.
  const auto train = Share(MakeDataset({{1, 1, 4}, {1, 2, 4}, {2, 1, 2}, {2, 2, 2}, {3, 1, 5}, {3, 3, 1}}));
  ModelConfig c;
  c.algorithm = Algorithm::kItemKnn;
  const auto model = Fit(train, c);
  // Mean of item 2 is 3; item 1 (mean 11/3) gives deviation 5 - 11/3.
  CHECK(model->Score(UserId{3}, ItemId{2}) == doctest::Approx(3.0 + 5.0 - 11.0 / 3.0).epsilon(1e-12));
  CHECK(model->Score(UserId{1}, ItemId{3}) == 1.0);
}

TEST_CASE("svdpp validation and zero factors") {
  ModelConfig c = Config(Algorithm::kSvdpp);
  c.epochs = 0;
  CHECK_THROWS_AS(Fit(Toy(), c), ArgumentError);
  c.epochs = 1;
  c.learning_rate = 0.0;
  CHECK_THROWS_AS(Fit(Toy(), c), ArgumentError);

  SvdppParameters p = InitSvdpp(*Toy(), 3, 1);
  std::fill(p.user_factors.begin(), p.user_factors.end(), 0.0);
  std::fill(p.item_factors.begin(), p.item_factors.end(), 0.0);
  for (std::size_t u = 0; u < p.user_bias.size(); ++u) p.user_bias[u] = 0.1 * static_cast<double>(u);
  for (std::size_t i = 0; i < p.item_bias.size(); ++i) p.item_bias[i] = -0.2 * static_cast<double>(i);
  const SvdppModel model(Toy(), Config(Algorithm::kSvdpp), p);
  for (std::size_t u = 0; u < Toy()->num_users(); ++u) {
    for (std::size_t i = 0; i < Toy()->num_items(); ++i) {
      CHECK(model.Score(Toy()->user_id(u), Toy()->item_id(i)) ==
            doctest::Approx(p.global_mean + p.user_bias[u] + p.item_bias[i]).epsilon(1e-12));
    }
  }
  CHECK(p.global_mean == doctest::Approx(Toy()->global_mean()));
}

TEST_CASE("training objectives decrease on the toy fixture") {
  ModelConfig c = Config(Algorithm::kSvdpp);
  c.epochs = 30;
  const auto svdpp = Fit(Toy(), c);
  REQUIRE(svdpp->objective_trace().size() == 31);
  CHECK(svdpp->objective_trace().back() < svdpp->objective_trace().front());

  c.algorithm = Algorithm::kListRankMf;
  c.learning_rate = 1.0;
  const auto listrank = Fit(Toy(), c);
  const auto& t = listrank->objective_trace();
  for (std::size_t e = 1; e < t.size(); ++e) CHECK(t[e] <= t[e - 1]);
}

TEST_CASE("a diverging fit is reported") {
  ModelConfig c = Config(Algorithm::kSvdpp);
  c.learning_rate = 1e6;
  c.epochs = 50;
  CHECK_THROWS_AS(Fit(Toy(), c), DivergenceError);
}

TEST_CASE("listrank distributions sum to one") {
  Rng rng(53);
  const Dataset d = testing::RandomDataset(rng, 20, 15, 0.4);
  const ListRankParameters p = InitListRank(d, 4, 7);
  std::vector<double> target;
  std::vector<double> model;
  for (std::size_t u = 0; u < d.num_users(); ++u) {
    ListRankDistributions(d, p, u, target, model);
    double st = 0.0;
    double sm = 0.0;
    for (double x : target) st += x;
    for (double x : model) sm += x;
    CHECK(std::abs(st - 1.0) < 1e-9);
    CHECK(std::abs(sm - 1.0) < 1e-9);
  }
}

TEST_CASE("ties are ordered by ascending item id") {
  ListRankParameters p = InitListRank(*Toy(), 2, 1);
  std::fill(p.user_factors.begin(), p.user_factors.end(), 0.0);
  const ListRankMfModel model(Toy(), Config(Algorithm::kListRankMf), p);
  const RecommendationList recs = model.RecommendTopN(UserId{1}, 10);
  REQUIRE(recs.items.size() == 2);
  CHECK(raw(recs.items[0].item) == 5);
  CHECK(raw(recs.items[1].item) == 6);
}

TEST_CASE("a user who rated every train item gets an empty list") {
  const auto train = Share(MakeDataset({{1, 1, 4}, {1, 2, 3}, {2, 1, 5}}));
  for (Algorithm alg : kAll) {
    const auto model = Fit(train, Config(alg));
    CHECK(model->RecommendTopN(UserId{1}, 10).items.empty());
    CHECK(model->RecommendTopN(UserId{2}, 10).items.size() == 1);
  }
}

TEST_CASE("unknown users and items are lookup errors") {
  const auto model = Fit(Toy(), Config(Algorithm::kUserKnn));
  CHECK_THROWS_AS(model->RecommendTopN(UserId{99}, 10), LookupError);
  CHECK_THROWS_AS(model->Score(UserId{1}, ItemId{99}), LookupError);
}

TEST_CASE("recommendation lists are disjoint from train profiles") {
  Rng rng(59);
  int cases = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto train = Share(testing::RandomDataset(rng, 25, 30, 0.3));
    ModelConfig c = Config(kAll[trial % 4]);
    c.rng_seed = rng.next();
    const auto model = Fit(train, c);
    const std::size_t n = 1 + rng.below(12);
    for (const RecommendationList& list : RecommendAll(*model, n)) {
      const std::size_t u = train->user_index(list.user);
      std::set<std::uint32_t> profile;
      for (const Cell& cell : train->user_row(u)) profile.insert(cell.index);
      CHECK(list.items.size() == std::min(n, train->num_items() - profile.size()));
      std::set<ItemId> seen;
      for (std::size_t r = 0; r < list.items.size(); ++r) {
        CHECK_FALSE(profile.contains(static_cast<std::uint32_t>(train->item_index(list.items[r].item))));
        CHECK(seen.insert(list.items[r].item).second);
        if (r > 0) {
          const auto& prev = list.items[r - 1];
          const auto& cur = list.items[r];
          CHECK((prev.score > cur.score || (prev.score == cur.score && prev.item < cur.item)));
        }
      }
      ++cases;
    }
    if (cases >= 1000) break;
  }
  CHECK(cases >= 500);
}

TEST_CASE("fitting and recommending is deterministic across thread counts") {
  Rng rng(61);
  const auto train = Share(testing::RandomDataset(rng, 40, 30, 0.3));
  for (Algorithm alg : kAll) {
    const auto a = Fit(train, Config(alg));
    const auto b = Fit(train, Config(alg));
    CHECK(RecommendAll(*a, 10, 1) == RecommendAll(*b, 10, 3));
  }
}

TEST_CASE("save and load round trip gives identical scores") {
  for (Algorithm alg : kAll) {
    const auto model = Fit(Toy(), Config(alg));
    std::stringstream buffer;
    model->Save(buffer);
    const auto loaded = LoadModel(buffer, Toy());
    CHECK(loaded->config() == model->config());
    CHECK(RecommendAll(*loaded, 10) == RecommendAll(*model, 10));
    for (const auto& r : Toy()->records()) CHECK(loaded->Score(r.user, r.item) == model->Score(r.user, r.item));
  }
}

TEST_CASE("loading against a different train set fails") {
  const auto model = Fit(Toy(), Config(Algorithm::kSvdpp));
  std::stringstream buffer;
  model->Save(buffer);
  CHECK_THROWS_AS(LoadModel(buffer, Share(MakeDataset({{1, 1, 4}, {2, 2, 3}}))), ArgumentError);
}

TEST_CASE("precision at k") {
  const Dataset test = MakeDataset({{1, 11, 4}, {1, 13, 1}, {1, 99, 5}});
  RecommendationList list{UserId{1}, {}};
  for (int i = 10; i < 20; ++i) list.items.push_back({ItemId{i}, 1.0});
  CHECK(PrecisionAtK(list, test, 10).value() == doctest::Approx(0.2));
  CHECK(PrecisionAtK(list, test, 10, 4.0).value() == doctest::Approx(0.1));
  CHECK(PrecisionAtK(list, test, 2).value() == doctest::Approx(0.5));
  const RecommendationList other{UserId{2}, list.items};
  CHECK_FALSE(PrecisionAtK(other, test, 10).has_value());
  const std::vector<RecommendationList> both{list, other};
  CHECK(MeanPrecisionAtK(both, test, 10) == doctest::Approx(0.2));
  // Short lists are still divided by k.
  list.items.resize(3);
  CHECK(PrecisionAtK(list, test, 10).value() == doctest::Approx(0.1));
}

TEST_CASE("grid search: singleton, tie-break and report") {
  Rng rng(67);
  const Dataset train = testing::RandomDataset(rng, 30, 25, 0.4);
  ModelConfig big;
  big.neighborhood_size = 500;
  ModelConfig bigger = big;
  bigger.neighborhood_size = 900;
  GridSearchOptions options;
  options.seed = 5;
  const std::vector<ModelConfig> one{bigger};
  CHECK(GridSearch(train, one, options).best == bigger);
  const std::vector<ModelConfig> two{bigger, big};
  const GridSearchResult result = GridSearch(train, two, options);
  REQUIRE(result.report.size() == 2);
  CHECK(result.report[0].precision == result.report[1].precision);
  CHECK(result.best == bigger);
  CHECK(GridSearch(train, std::vector<ModelConfig>{big, bigger}, options).best == big);
  CHECK_THROWS_AS(GridSearch(train, std::vector<ModelConfig>{}, options), ArgumentError);
}

TEST_CASE("grid search tags fit errors with the config") {
  const Dataset train = *Toy();
  ModelConfig bad = Config(Algorithm::kSvdpp);
  bad.learning_rate = 1e6;
  bad.epochs = 50;
  try {
    GridSearch(train, std::vector<ModelConfig>{bad}, {});
    FAIL("expected DivergenceError");
  } catch (const DivergenceError& e) {
    CHECK(std::string(e.what()).find("algorithm=svdpp") != std::string::npos);
  }
}

TEST_CASE("config fields and grids") {
  ModelConfig c;
  SetModelConfigField(c, "algorithm", "svdpp");
  SetModelConfigField(c, "factors", "20");
  SetModelConfigField(c, " learning_rate ", " 0.005 ");
  CHECK(c.algorithm == Algorithm::kSvdpp);
  CHECK(c.factors == 20);
  CHECK(c.learning_rate == 0.005);
  CHECK_THROWS_AS(SetModelConfigField(c, "nope", "1"), ArgumentError);
  CHECK_THROWS_AS(SetModelConfigField(c, "factors", "ten"), ArgumentError);
  CHECK_THROWS_AS(SetModelConfigField(c, "algorithm", "bpr"), ArgumentError);

  const auto grid = ParseGrid(
      "# two blocks\n[config]\nalgorithm = user_knn\nk = 10\n\n[config]\nalgorithm = user_knn\nk = 50\n"
      "similarity = pearson\n");
  REQUIRE(grid.size() == 2);
  CHECK(grid[0].neighborhood_size == 10);
  CHECK(grid[1].similarity == Similarity::kPearson);
  CHECK_THROWS_AS(ParseGrid("k 10\n"), ParseError);
  CHECK_THROWS_AS(ParseGrid("k = 0\n"), ArgumentError);
}

}  // TEST_SUITE

}  // namespace
}  // namespace calrec
