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

#include "calrec/calrec.h"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>

#include "calrec/analysis.hpp"
#include "calrec/data.hpp"
#include "calrec/errors.hpp"
#include "calrec/metrics.hpp"
#include "calrec/pipeline.hpp"
#include "calrec/recommenders.hpp"

struct calrec_dataset {
  std::shared_ptr<const calrec::Dataset> data;
};

struct calrec_catalog {
  calrec::ItemCatalog catalog;
};

struct calrec_model {
  std::unique_ptr<const calrec::TrainedModel> model;
};

namespace {

thread_local std::string last_error;

calrec_status Fail(calrec_status status, const char* what) {
  last_error = what;
  return status;
}

// Runs fn, translating exceptions into status codes.
template <typename Fn>
calrec_status Guard(Fn&& fn) {
  try {
    last_error.clear();
    fn();
    return CALREC_OK;
  } catch (const calrec::ArgumentError& e) {
    return Fail(CALREC_ERR_ARGUMENT, e.what());
  } catch (const calrec::ParseError& e) {
    return Fail(CALREC_ERR_PARSE, e.what());
  } catch (const calrec::LookupError& e) {
    return Fail(CALREC_ERR_LOOKUP, e.what());
  } catch (const calrec::IoError& e) {
    return Fail(CALREC_ERR_IO, e.what());
  } catch (const calrec::DivergenceError& e) {
    return Fail(CALREC_ERR_DIVERGENCE, e.what());
  } catch (const calrec::UndefinedCorrelationError& e) {
    return Fail(CALREC_ERR_UNDEFINED, e.what());
  } catch (const calrec::ExperimentError& e) {
    return Fail(CALREC_ERR_EXPERIMENT, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return Fail(CALREC_ERR_IO, e.what());
  } catch (const std::exception& e) {
    return Fail(CALREC_ERR_INTERNAL, e.what());
  } catch (...) {
    return Fail(CALREC_ERR_INTERNAL, "unknown exception");
  }
}

void Require(const void* p, const char* name) {
  if (p == nullptr) throw calrec::ArgumentError(std::string(name) + " must not be NULL");
}

calrec::ExperimentConfig LoadWithOverrides(const char* config_path, const char* output_dir, const uint64_t* seed) {
  Require(config_path, "config_path");
  calrec::ExperimentConfig config = calrec::LoadExperimentConfig(config_path);
  if (output_dir != nullptr) config.output_dir = output_dir;
  if (seed != nullptr) {
    // Grids that were seeded from the experiment seed follow the override.
    for (auto& [algorithm, grid] : config.grids) {
      for (auto& c : grid) {
        if (c.rng_seed == calrec::DefaultModelSeed(config.seed, algorithm)) {
          c.rng_seed = calrec::DefaultModelSeed(*seed, algorithm);
        }
      }
    }
    config.seed = *seed;
  }
  return config;
}

char* CopyString(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* calrec_version(void) { return "1.0.0"; }

const char* calrec_last_error(void) { return last_error.c_str(); }

const char* calrec_status_name(calrec_status status) {
  switch (status) {
    case CALREC_OK:
      return "ok";
    case CALREC_ERR_ARGUMENT:
      return "argument error";
    case CALREC_ERR_PARSE:
      return "parse error";
    case CALREC_ERR_LOOKUP:
      return "lookup error";
    case CALREC_ERR_IO:
      return "I/O error";
    case CALREC_ERR_DIVERGENCE:
      return "divergence";
    case CALREC_ERR_UNDEFINED:
      return "undefined correlation";
    case CALREC_ERR_EXPERIMENT:
      return "experiment failure";
    case CALREC_ERR_INTERNAL:
      return "internal error";
  }
  return "unknown status";
}

calrec_status calrec_dataset_parse(const char* text, size_t length, calrec_dataset** out) {
  return Guard([&] {
    Require(out, "out");
    if (length > 0) Require(text, "text");
    auto data = std::make_shared<const calrec::Dataset>(calrec::ParseRatings(std::string_view(text, length)));
    *out = new calrec_dataset{std::move(data)};
  });
}

calrec_status calrec_dataset_load(const char* path, calrec_dataset** out) {
  return Guard([&] {
    Require(path, "path");
    Require(out, "out");
    const std::string text = calrec::ReadFile(path);
    std::shared_ptr<const calrec::Dataset> data;
    try {
      data = std::make_shared<const calrec::Dataset>(calrec::ParseRatings(text));
    } catch (const calrec::ParseError& e) {
      throw calrec::ParseError(std::string(path) + ": " + e.what());
    }
    *out = new calrec_dataset{std::move(data)};
  });
}

void calrec_dataset_free(calrec_dataset* dataset) { delete dataset; }

calrec_status calrec_dataset_counts(const calrec_dataset* dataset, size_t* users, size_t* items, size_t* ratings) {
  return Guard([&] {
    Require(dataset, "dataset");
    if (users != nullptr) *users = dataset->data->num_users();
    if (items != nullptr) *items = dataset->data->num_items();
    if (ratings != nullptr) *ratings = dataset->data->size();
  });
}

calrec_status calrec_dataset_split(const calrec_dataset* dataset, double train_fraction, uint64_t seed,
                                   calrec_dataset** train, calrec_dataset** test) {
  return Guard([&] {
    Require(dataset, "dataset");
    Require(train, "train");
    Require(test, "test");
    calrec::SplitPair split = calrec::Split(*dataset->data, train_fraction, seed);
    auto train_handle = std::make_unique<calrec_dataset>(
        calrec_dataset{std::make_shared<const calrec::Dataset>(std::move(split.train))});
    auto test_handle = std::make_unique<calrec_dataset>(
        calrec_dataset{std::make_shared<const calrec::Dataset>(std::move(split.test))});
    *train = train_handle.release();
    *test = test_handle.release();
  });
}

calrec_status calrec_dataset_item_mean(const calrec_dataset* dataset, int64_t item, double* out) {
  return Guard([&] {
    Require(dataset, "dataset");
    Require(out, "out");
    *out = dataset->data->item_mean(dataset->data->item_index(calrec::ItemId{item}));
  });
}

calrec_status calrec_catalog_parse(const char* text, size_t length, calrec_catalog** out) {
  return Guard([&] {
    Require(out, "out");
    if (length > 0) Require(text, "text");
    *out = new calrec_catalog{calrec::ParseItems(std::string_view(text, length))};
  });
}

calrec_status calrec_catalog_load(const char* path, calrec_catalog** out) {
  return Guard([&] {
    Require(path, "path");
    Require(out, "out");
    const std::string text = calrec::ReadFile(path);
    try {
      *out = new calrec_catalog{calrec::ParseItems(text)};
    } catch (const calrec::ParseError& e) {
      throw calrec::ParseError(std::string(path) + ": " + e.what());
    }
  });
}

void calrec_catalog_free(calrec_catalog* catalog) { delete catalog; }

calrec_status calrec_catalog_genre_count(const calrec_catalog* catalog, size_t* out) {
  return Guard([&] {
    Require(catalog, "catalog");
    Require(out, "out");
    *out = catalog->catalog.genre_universe().size();
  });
}

calrec_status calrec_catalog_distribution(const calrec_catalog* catalog, const int64_t* items, size_t count,
                                          double* mass) {
  return Guard([&] {
    Require(catalog, "catalog");
    Require(mass, "mass");
    if (count > 0) Require(items, "items");
    std::vector<calrec::ItemId> ids;
    ids.reserve(count);
    for (size_t k = 0; k < count; ++k) ids.push_back(calrec::ItemId{items[k]});
    const auto dist = calrec::GenreDistributionOf(ids, catalog->catalog);
    std::copy(dist.mass().begin(), dist.mass().end(), mass);
  });
}

calrec_status calrec_model_fit(const calrec_dataset* train, const char* config, calrec_model** out) {
  return Guard([&] {
    Require(train, "train");
    Require(config, "config");
    Require(out, "out");
    calrec::ModelConfig model_config;
    std::istringstream in(config);
    std::string token;
    while (in >> token) {
      const auto eq = token.find('=');
      if (eq == std::string::npos) throw calrec::ArgumentError("expected key=value, got '" + token + "'");
      calrec::SetModelConfigField(model_config, std::string_view(token).substr(0, eq),
                                  std::string_view(token).substr(eq + 1));
    }
    *out = new calrec_model{calrec::Fit(train->data, model_config)};
  });
}

void calrec_model_free(calrec_model* model) { delete model; }

calrec_status calrec_model_score(const calrec_model* model, int64_t user, int64_t item, double* out) {
  return Guard([&] {
    Require(model, "model");
    Require(out, "out");
    *out = model->model->Score(calrec::UserId{user}, calrec::ItemId{item});
  });
}

calrec_status calrec_model_recommend(const calrec_model* model, int64_t user, size_t n, int64_t* items,
                                     double* scores, size_t* count) {
  return Guard([&] {
    Require(model, "model");
    Require(count, "count");
    if (n > 0) Require(items, "items");
    const auto list = model->model->RecommendTopN(calrec::UserId{user}, n);
    for (size_t r = 0; r < list.items.size(); ++r) {
      items[r] = calrec::raw(list.items[r].item);
      if (scores != nullptr) scores[r] = list.items[r].score;
    }
    *count = list.items.size();
  });
}

calrec_status calrec_model_save(const calrec_model* model, const char* path) {
  return Guard([&] {
    Require(model, "model");
    Require(path, "path");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw calrec::IoError(std::string("cannot open '") + path + "' for writing");
    model->model->Save(out);
  });
}

calrec_status calrec_model_load(const char* path, const calrec_dataset* train, calrec_model** out) {
  return Guard([&] {
    Require(path, "path");
    Require(train, "train");
    Require(out, "out");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw calrec::IoError(std::string("cannot open '") + path + "' for reading");
    *out = new calrec_model{calrec::LoadModel(in, train->data)};
  });
}

calrec_status calrec_inconsistency(const double* ratings, const double* item_means, size_t count, double* out) {
  return Guard([&] {
    Require(out, "out");
    if (count > 0) {
      Require(ratings, "ratings");
      Require(item_means, "item_means");
    }
    std::vector<std::pair<calrec::ItemId, double>> profile;
    std::map<calrec::ItemId, double> means;
    for (size_t k = 0; k < count; ++k) {
      const calrec::ItemId id{static_cast<std::int64_t>(k)};
      profile.emplace_back(id, ratings[k]);
      means.emplace(id, item_means[k]);
    }
    *out = calrec::Inconsistency(profile, means);
  });
}

calrec_status calrec_kl_miscalibration(const double* p, const double* q, size_t count, double alpha,
                                       calrec_log_base base, double* out) {
  return Guard([&] {
    Require(out, "out");
    if (count == 0) throw calrec::ArgumentError("distributions need at least one category");
    Require(p, "p");
    Require(q, "q");
    auto universe = std::make_shared<std::vector<std::string>>();
    for (size_t c = 0; c < count; ++c) universe->push_back(std::to_string(c));
    const calrec::GenreDistribution pd(universe, std::vector<double>(p, p + count));
    const calrec::GenreDistribution qd(universe, std::vector<double>(q, q + count));
    calrec::CalibrationConfig config;
    config.alpha = alpha;
    config.log_base = base == CALREC_LOG_BASE2 ? calrec::LogBase::kBase2 : calrec::LogBase::kNatural;
    *out = calrec::KlMiscalibration(pd, qd, config);
  });
}

calrec_status calrec_pearson(const double* xs, const double* ys, size_t count, double* out) {
  return Guard([&] {
    Require(out, "out");
    if (count > 0) {
      Require(xs, "xs");
      Require(ys, "ys");
    }
    *out = calrec::Pearson(std::span<const double>(xs, count), std::span<const double>(ys, count));
  });
}

calrec_status calrec_cmd_split(const char* config_path, const char* output_dir, const uint64_t* seed) {
  return Guard([&] { calrec::CmdSplit(LoadWithOverrides(config_path, output_dir, seed), std::cerr); });
}

calrec_status calrec_cmd_run(const char* config_path, const char* output_dir, const uint64_t* seed) {
  return Guard([&] { calrec::CmdRun(LoadWithOverrides(config_path, output_dir, seed), std::cerr); });
}

calrec_status calrec_cmd_report(const char* output_dir, char** report) {
  return Guard([&] {
    Require(output_dir, "output_dir");
    Require(report, "report");
    *report = CopyString(calrec::CmdReport(output_dir));
  });
}

calrec_status calrec_check_run(const char* output_dir, char** issues) {
  return Guard([&] {
    Require(output_dir, "output_dir");
    Require(issues, "issues");
    std::string text;
    for (const auto& issue : calrec::CheckRunConsistency(output_dir)) text += issue + '\n';
    *issues = CopyString(text);
  });
}

void calrec_string_free(char* s) { std::free(s); }

}  // extern "C"
