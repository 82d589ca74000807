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

#include "calrec/pipeline.hpp"

#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "calrec/errors.hpp"
#include "calrec/random.hpp"
#include "format.hpp"

namespace calrec {
namespace fs = std::filesystem;

namespace {

constexpr std::size_t kPrecisionK = 10;
constexpr double kCrossFileTolerance = 1e-6;

const char* const kUsersHeader = "user_id,profile_size,inconsistency,miscalibration";
const char* const kGroupsHeader = "group_index,range_low,range_high,avg_inconsistency,avg_miscalibration,user_count";
const char* const kSummaryHeader =
    "algorithm,precision_at_10,group_correlation,user_correlation,num_bins,alpha,seed";
const char* const kRecsHeader = "user_id,rank,item_id,score";

std::string_view Trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string> SplitList(std::string_view value, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = value.find(sep, start);
    const auto piece = Trim(value.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (!piece.empty()) out.emplace_back(piece);
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

template <typename T>
T Number(std::string_view key, std::string_view value) {
  T out{};
  value = Trim(value);
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (value.empty() || ec != std::errc() || ptr != end) {
    throw ArgumentError("invalid value '" + std::string(value) + "' for " + std::string(key));
  }
  return out;
}

bool Boolean(std::string_view key, std::string_view value) {
  if (value == "true" || value == "yes" || value == "1") return true;
  if (value == "false" || value == "no" || value == "0") return false;
  throw ArgumentError("invalid boolean '" + std::string(value) + "' for " + std::string(key));
}

std::string ResolvePath(const std::string& base_dir, std::string_view value) {
  fs::path p{std::string(value)};
  if (p.is_relative()) p = fs::path(base_dir) / p;
  return p.lexically_normal().string();
}

// Cartesian product of comma-separated value lists, first key outermost.
std::vector<ModelConfig> ExpandGrid(Algorithm algorithm,
                                    const std::vector<std::pair<std::string, std::vector<std::string>>>& axes,
                                    std::uint64_t default_seed) {
  ModelConfig base;
  base.algorithm = algorithm;
  base.rng_seed = default_seed;
  std::vector<ModelConfig> grid{base};
  for (const auto& [key, values] : axes) {
    std::vector<ModelConfig> next;
    for (const auto& config : grid) {
      for (const auto& v : values) {
        ModelConfig c = config;
        SetModelConfigField(c, key, v);
        next.push_back(c);
      }
    }
    grid = std::move(next);
  }
  for (const auto& c : grid) {
    if (c.algorithm != algorithm) throw ArgumentError("grid section may not change the algorithm");
    c.Validate();
  }
  return grid;
}

std::string Crc32Hex(std::string_view bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  std::size_t offset = 0;
  while (offset < bytes.size()) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(bytes.size() - offset, 1u << 30));
    crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data() + offset), chunk);
    offset += chunk;
  }
  char buf[9];
  std::snprintf(buf, sizeof(buf), "%08lx", static_cast<unsigned long>(crc));
  return buf;
}

std::string Fixed6(double x) {
  std::string s = FormatFixed(x, 6);
  if (s == "-0.000000") s = "0.000000";
  return s;
}

std::string OptionalFixed6(const std::optional<double>& x) { return x ? Fixed6(*x) : "NA"; }

std::string OutPath(const ExperimentConfig& config, const std::string& name) {
  return (fs::path(config.output_dir) / name).string();
}

struct LoadedInputs {
  Dataset ratings;
  ItemCatalog catalog;
  std::string ratings_crc;
  std::string movies_crc;
};

LoadedInputs LoadInputs(const ExperimentConfig& config, std::ostream& log) {
  LoadedInputs in;
  const std::string ratings_text = ReadFile(config.ratings_path);
  const std::string movies_text = ReadFile(config.movies_path);
  try {
    in.ratings = ParseRatings(ratings_text);
  } catch (const ParseError& e) {
    throw ParseError(config.ratings_path + ": " + e.what());
  }
  try {
    in.catalog = ParseItems(movies_text);
  } catch (const ParseError& e) {
    throw ParseError(config.movies_path + ": " + e.what());
  }
  for (ItemId item : in.ratings.item_ids()) {
    if (!in.catalog.contains(item)) {
      throw LookupError(config.ratings_path + ": item " + std::to_string(raw(item)) + " missing from " +
                        config.movies_path);
    }
  }
  in.ratings_crc = Crc32Hex(ratings_text);
  in.movies_crc = Crc32Hex(movies_text);
  log << "loaded " << in.ratings.size() << " ratings from " << in.ratings.num_users() << " users on "
      << in.ratings.num_items() << " items; " << in.catalog.genre_universe().size() << " genres\n";
  return in;
}

std::string ManifestText(const ExperimentConfig& config, const LoadedInputs& in, const SplitPair& split) {
  std::ostringstream m;
  m << "seed = " << config.seed << '\n'
    << "train_fraction = " << FormatDouble(config.train_fraction) << '\n'
    << "ratings_file = " << config.ratings_path << '\n'
    << "ratings_crc32 = " << in.ratings_crc << '\n'
    << "movies_file = " << config.movies_path << '\n'
    << "movies_crc32 = " << in.movies_crc << '\n'
    << "users = " << in.ratings.num_users() << '\n'
    << "items = " << in.ratings.num_items() << '\n'
    << "ratings = " << in.ratings.size() << '\n'
    << "genres = " << in.catalog.genre_universe().size() << '\n'
    << "train_ratings = " << split.train.size() << '\n'
    << "test_ratings = " << split.test.size() << '\n';
  return m.str();
}

SplitPair SplitAndPersist(const ExperimentConfig& config, const LoadedInputs& in, std::ostream& log) {
  fs::create_directories(config.output_dir);
  const std::string manifest_path = OutPath(config, "manifest.txt");
  const std::string train_path = OutPath(config, "train.csv");
  const std::string test_path = OutPath(config, "test.csv");
  SplitPair split = Split(in.ratings, config.train_fraction, config.seed);
  const std::string manifest = ManifestText(config, in, split);
  // Reuse an existing split only when it was produced by the same inputs and
  // parameters; it must then be identical to the fresh one.
  if (fs::exists(manifest_path) && fs::exists(train_path) && fs::exists(test_path) &&
      ReadFile(manifest_path) == manifest) {
    log << "reusing split in " << config.output_dir << '\n';
    return split;
  }
  WriteFile(train_path, SerializeRatingsCsv(split.train));
  WriteFile(test_path, SerializeRatingsCsv(split.test));
  WriteFile(manifest_path, manifest);
  log << "split: " << split.train.size() << " train / " << split.test.size() << " test ratings (seed "
      << config.seed << ")\n";
  return split;
}

// Rows of a CSV file with the expected header; DescriptiveError otherwise.
std::vector<std::vector<std::string>> ReadCsv(const std::string& path, std::string_view header) {
  const std::string text = ReadFile(path);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || Trim(line) != header) {
    throw ParseError(path + ": expected header '" + std::string(header) + "'");
  }
  std::vector<std::vector<std::string>> rows;
  const std::size_t columns = SplitList(header, ',').size();
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
      const std::size_t pos = line.find(',', start);
      fields.emplace_back(Trim(std::string_view(line).substr(start, pos == std::string::npos ? pos : pos - start)));
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
    if (fields.size() != columns) {
      throw ParseError(path + ": line " + std::to_string(line_no) + ": expected " + std::to_string(columns) +
                       " fields");
    }
    rows.push_back(std::move(fields));
  }
  return rows;
}

std::map<std::string, std::string> ReadKeyValues(const std::string& path) {
  std::map<std::string, std::string> out;
  std::istringstream in(ReadFile(path));
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    out[std::string(Trim(std::string_view(line).substr(0, eq)))] = std::string(Trim(std::string_view(line).substr(eq + 1)));
  }
  return out;
}

struct AlgorithmArtifacts {
  std::vector<RecommendationList> lists;
  std::vector<UserMetrics> metrics;
  std::vector<std::size_t> profile_sizes;
  std::vector<GroupStats> groups;
};

AlgorithmArtifacts Evaluate(const ExperimentConfig& config, const TrainedModel& model, const SplitPair& split,
                            const ItemCatalog& catalog, const Dataset& full) {
  AlgorithmArtifacts a;
  a.lists = RecommendAll(model, config.top_n, config.threads);
  const Dataset& train = split.train;
  const std::map<ItemId, double> means =
      ItemMeans(config.item_means == ItemMeanSource::kTrain ? train : full);
  const Dataset& reference = config.item_means == ItemMeanSource::kTrain ? train : full;

  std::vector<ItemId> items;
  for (std::size_t u = 0; u < train.num_users(); ++u) {
    const auto& list = a.lists[u];
    if (list.items.empty()) continue;
    const auto profile = train.profile(list.user);
    std::optional<double> inconsistency;
    if (config.exclude_own_rating) {
      inconsistency = InconsistencyExcludingOwn(profile, reference);
    } else {
      inconsistency = Inconsistency(profile, means);
    }
    if (!inconsistency) continue;
    items.clear();
    for (const auto& [item, rating] : profile) items.push_back(item);
    const GenreDistribution p = GenreDistributionOf(items, catalog);
    items.clear();
    for (const auto& r : list.items) items.push_back(r.item);
    const GenreDistribution q = GenreDistributionOf(items, catalog);
    a.metrics.push_back({list.user, *inconsistency, KlMiscalibration(p, q, config.calibration)});
    a.profile_sizes.push_back(profile.size());
  }
  if (!a.metrics.empty()) a.groups = BinUsers(a.metrics, config.num_bins, config.bin_mode);
  return a;
}

void WriteArtifacts(const ExperimentConfig& config, Algorithm algorithm, const AlgorithmArtifacts& a,
                    const GridSearchResult& grid) {
  const std::string name(AlgorithmName(algorithm));
  std::string recs = std::string(kRecsHeader) + '\n';
  for (const auto& list : a.lists) {
    for (std::size_t r = 0; r < list.items.size(); ++r) {
      recs += std::to_string(raw(list.user)) + ',' + std::to_string(r + 1) + ',' +
              std::to_string(raw(list.items[r].item)) + ',' + FormatDouble(list.items[r].score) + '\n';
    }
  }
  WriteFile(OutPath(config, "recs_" + name + ".csv"), recs);

  std::string users = std::string(kUsersHeader) + '\n';
  for (std::size_t k = 0; k < a.metrics.size(); ++k) {
    users += std::to_string(raw(a.metrics[k].user)) + ',' + std::to_string(a.profile_sizes[k]) + ',' +
             Fixed6(a.metrics[k].inconsistency) + ',' + Fixed6(a.metrics[k].miscalibration) + '\n';
  }
  WriteFile(OutPath(config, "users_" + name + ".csv"), users);

  std::string groups = std::string(kGroupsHeader) + '\n';
  for (const auto& g : a.groups) {
    groups += std::to_string(g.group_index) + ',' + Fixed6(g.range_low) + ',' + Fixed6(g.range_high) + ',' +
              Fixed6(g.avg_inconsistency) + ',' + Fixed6(g.avg_miscalibration) + ',' + std::to_string(g.user_count) +
              '\n';
  }
  WriteFile(OutPath(config, "groups_" + name + ".csv"), groups);

  std::string report = "index,config,validation_precision_at_10\n";
  for (std::size_t k = 0; k < grid.report.size(); ++k) {
    report += std::to_string(k) + ',' + grid.report[k].config.Describe() + ',' + Fixed6(grid.report[k].precision) + '\n';
  }
  WriteFile(OutPath(config, "grid_" + name + ".csv"), report);
}

double Seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

}  // namespace

std::uint64_t DefaultModelSeed(std::uint64_t experiment_seed, Algorithm algorithm) {
  return derive_seed(experiment_seed, "model", static_cast<std::uint64_t>(algorithm));
}

std::vector<ModelConfig> ExperimentConfig::GridFor(Algorithm algorithm) const {
  if (auto it = grids.find(algorithm); it != grids.end() && !it->second.empty()) return it->second;
  ModelConfig c;
  c.algorithm = algorithm;
  c.rng_seed = DefaultModelSeed(seed, algorithm);
  return {c};
}

void ExperimentConfig::Validate() const {
  if (ratings_path.empty()) throw ArgumentError("config: ratings path not set");
  if (movies_path.empty()) throw ArgumentError("config: movies path not set");
  if (output_dir.empty()) throw ArgumentError("config: output directory not set");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ArgumentError("config: train_fraction must lie in (0, 1)");
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw ArgumentError("config: validation_fraction must lie in (0, 1)");
  }
  if (top_n < 1) throw ArgumentError("config: top_n must be >= 1");
  if (num_bins < 2) throw ArgumentError("config: num_bins must be >= 2");
  if (threads < 1) throw ArgumentError("config: threads must be >= 1");
  calibration.Validate();
  std::set<Algorithm> seen;
  for (Algorithm a : algorithms) {
    if (!seen.insert(a).second) throw ArgumentError("config: algorithm listed twice");
  }
}

ExperimentConfig ParseExperimentConfig(std::string_view text, const std::string& base_dir) {
  ExperimentConfig config;
  std::string section = "experiment";
  std::map<Algorithm, std::vector<std::pair<std::string, std::vector<std::string>>>> axes;
  std::map<Algorithm, std::string> grid_files;
  std::istringstream in{std::string(text)};
  std::string raw_line;
  std::size_t line_no = 0;
  while (std::getline(in, raw_line)) {
    ++line_no;
    std::string_view line = raw_line;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = Trim(line);
    if (line.empty()) continue;
    const std::string where = "config line " + std::to_string(line_no) + ": ";
    try {
      if (line.front() == '[') {
        if (line.back() != ']') throw ArgumentError("unterminated section header");
        section = std::string(Trim(line.substr(1, line.size() - 2)));
        if (section != "experiment") ParseAlgorithm(section);
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) throw ArgumentError("expected key = value");
      const std::string key(Trim(line.substr(0, eq)));
      const std::string_view value = Trim(line.substr(eq + 1));
      if (section != "experiment") {
        const Algorithm algorithm = ParseAlgorithm(section);
        if (key == "grid_file") {
          grid_files[algorithm] = ResolvePath(base_dir, value);
        } else {
          auto values = SplitList(value, ',');
          if (values.empty()) throw ArgumentError("empty value list for " + key);
          ModelConfig probe;
          for (const auto& v : values) SetModelConfigField(probe, key, v);
          axes[algorithm].emplace_back(key, std::move(values));
        }
        continue;
      }
      if (key == "ratings") {
        config.ratings_path = ResolvePath(base_dir, value);
      } else if (key == "movies") {
        config.movies_path = ResolvePath(base_dir, value);
      } else if (key == "output") {
        config.output_dir = ResolvePath(base_dir, value);
      } else if (key == "train_fraction") {
        config.train_fraction = Number<double>(key, value);
      } else if (key == "seed") {
        config.seed = Number<std::uint64_t>(key, value);
      } else if (key == "top_n") {
        config.top_n = Number<std::size_t>(key, value);
      } else if (key == "alpha") {
        config.calibration.alpha = Number<double>(key, value);
      } else if (key == "log_base") {
        if (value == "natural") {
          config.calibration.log_base = LogBase::kNatural;
        } else if (value == "base2") {
          config.calibration.log_base = LogBase::kBase2;
        } else {
          throw ArgumentError("log_base must be natural or base2");
        }
      } else if (key == "num_bins") {
        config.num_bins = Number<std::size_t>(key, value);
      } else if (key == "bin_mode") {
        config.bin_mode = ParseBinMode(value);
      } else if (key == "validation_fraction") {
        config.validation_fraction = Number<double>(key, value);
      } else if (key == "item_means") {
        if (value == "train") {
          config.item_means = ItemMeanSource::kTrain;
        } else if (value == "full") {
          config.item_means = ItemMeanSource::kFull;
        } else {
          throw ArgumentError("item_means must be train or full");
        }
      } else if (key == "exclude_own_rating") {
        config.exclude_own_rating = Boolean(key, value);
      } else if (key == "relevance_threshold") {
        if (value == "none") {
          config.relevance_threshold.reset();
        } else {
          config.relevance_threshold = Number<double>(key, value);
        }
      } else if (key == "threads") {
        config.threads = Number<unsigned>(key, value);
      } else if (key == "algorithms") {
        config.algorithms.clear();
        for (const auto& name : SplitList(value, ',')) config.algorithms.push_back(ParseAlgorithm(name));
      } else {
        throw ArgumentError("unknown key '" + key + "'");
      }
    } catch (const ArgumentError& e) {
      throw ParseError(where + e.what());
    }
  }
  if (config.algorithms.empty()) {
    config.algorithms = {Algorithm::kUserKnn, Algorithm::kItemKnn, Algorithm::kSvdpp, Algorithm::kListRankMf};
  }
  for (Algorithm a : config.algorithms) {
    if (grid_files.contains(a) && axes.contains(a)) {
      throw ParseError("config: [" + std::string(AlgorithmName(a)) + "] sets both grid_file and inline values");
    }
    if (auto it = grid_files.find(a); it != grid_files.end()) {
      auto grid = ParseGrid(ReadFile(it->second));
      for (auto& c : grid) {
        if (c.algorithm != a) throw ParseError(it->second + ": config for a different algorithm");
      }
      config.grids[a] = std::move(grid);
    } else if (auto ax = axes.find(a); ax != axes.end()) {
      try {
        config.grids[a] = ExpandGrid(a, ax->second, DefaultModelSeed(config.seed, a));
      } catch (const ArgumentError& e) {
        throw ParseError("config: [" + std::string(AlgorithmName(a)) + "]: " + e.what());
      }
    }
  }
  return config;
}

ExperimentConfig LoadExperimentConfig(const std::string& path) {
  const std::string text = ReadFile(path);
  const std::string base = fs::path(path).parent_path().string();
  try {
    return ParseExperimentConfig(text, base.empty() ? "." : base);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

SplitPair CmdSplit(const ExperimentConfig& config, std::ostream& log) {
  config.Validate();
  const LoadedInputs in = LoadInputs(config, log);
  return SplitAndPersist(config, in, log);
}

std::vector<AlgorithmOutcome> CmdRun(const ExperimentConfig& config, std::ostream& log) {
  config.Validate();
  const auto start = std::chrono::steady_clock::now();
  const LoadedInputs in = LoadInputs(config, log);
  const SplitPair split = SplitAndPersist(config, in, log);
  auto train = std::make_shared<const Dataset>(split.train);

  std::ostringstream run_log;
  std::ostringstream run_manifest;
  run_manifest << "seed = " << config.seed << '\n'
               << "top_n = " << config.top_n << '\n'
               << "precision_k = " << kPrecisionK << '\n'
               << "relevance_threshold = "
               << (config.relevance_threshold ? FormatDouble(*config.relevance_threshold) : "none") << '\n'
               << "alpha = " << FormatDouble(config.calibration.alpha) << '\n'
               << "log_base = " << (config.calibration.log_base == LogBase::kNatural ? "natural" : "base2") << '\n'
               << "num_bins = " << config.num_bins << '\n'
               << "bin_mode = " << BinModeName(config.bin_mode) << '\n'
               << "item_means = " << (config.item_means == ItemMeanSource::kTrain ? "train" : "full") << '\n'
               << "exclude_own_rating = " << (config.exclude_own_rating ? "true" : "false") << '\n';

  std::vector<AlgorithmOutcome> outcomes;
  for (Algorithm algorithm : config.algorithms) {
    AlgorithmOutcome outcome;
    outcome.algorithm = algorithm;
    const std::string name(AlgorithmName(algorithm));
    const auto t0 = std::chrono::steady_clock::now();
    try {
      GridSearchOptions options;
      options.validation_fraction = config.validation_fraction;
      options.seed = config.seed;
      options.k = kPrecisionK;
      options.relevance_threshold = config.relevance_threshold;
      options.threads = config.threads;
      const auto grid = config.GridFor(algorithm);
      const GridSearchResult search = GridSearch(*train, grid, options);
      for (const auto& row : search.report) {
        log << name << " grid: " << row.config.Describe() << " -> precision@10 " << Fixed6(row.precision) << '\n';
      }
      const double t_grid = Seconds(t0);
      const auto model = Fit(train, search.best);
      const AlgorithmArtifacts artifacts = Evaluate(config, *model, split, in.catalog, in.ratings);
      outcome.chosen = search.best;
      outcome.precision = MeanPrecisionAtK(artifacts.lists, split.test, kPrecisionK, config.relevance_threshold);
      try {
        outcome.group_correlation = CorrelateGroups(artifacts.groups);
      } catch (const UndefinedCorrelationError& e) {
        log << name << ": group correlation undefined (" << e.what() << ")\n";
      }
      try {
        outcome.user_correlation = CorrelateUsers(artifacts.metrics);
      } catch (const Error& e) {
        log << name << ": user correlation undefined (" << e.what() << ")\n";
      }
      WriteArtifacts(config, algorithm, artifacts, search);
      outcome.ok = true;
      run_manifest << "chosen." << name << " = " << search.best.Describe() << '\n';
      run_log << name << ": grid " << Fixed6(t_grid) << " s, total " << Fixed6(Seconds(t0))
              << " s, chosen " << search.best.Describe() << '\n';
      log << name << ": precision@10 " << Fixed6(outcome.precision) << ", group correlation "
          << OptionalFixed6(outcome.group_correlation) << " (" << Fixed6(Seconds(t0)) << " s)\n";
    } catch (const Error& e) {
      outcome.error = e.what();
      run_log << name << ": FAILED: " << e.what() << '\n';
      log << name << ": FAILED: " << e.what() << '\n';
    }
    outcomes.push_back(std::move(outcome));
  }

  std::string summary = std::string(kSummaryHeader) + '\n';
  for (const auto& o : outcomes) {
    if (!o.ok) continue;
    summary += std::string(AlgorithmName(o.algorithm)) + ',' + Fixed6(o.precision) + ',' +
               OptionalFixed6(o.group_correlation) + ',' + OptionalFixed6(o.user_correlation) + ',' +
               std::to_string(config.num_bins) + ',' + FormatDouble(config.calibration.alpha) + ',' +
               std::to_string(config.seed) + '\n';
  }
  WriteFile(OutPath(config, "summary.csv"), summary);
  WriteFile(OutPath(config, "run_manifest.txt"), run_manifest.str());
  run_log << "total " << Fixed6(Seconds(start)) << " s\n";
  WriteFile(OutPath(config, "run_log.txt"), run_log.str());

  const auto failed = std::count_if(outcomes.begin(), outcomes.end(), [](const auto& o) { return !o.ok; });
  if (failed > 0) {
    throw ExperimentError(std::to_string(failed) + " of " + std::to_string(outcomes.size()) +
                          " algorithms failed; see run_log.txt");
  }
  return outcomes;
}

std::string CmdReport(const std::string& output_dir) {
  const fs::path dir(output_dir);
  const std::string summary_path = (dir / "summary.csv").string();
  if (!fs::exists(summary_path)) {
    throw IoError("no completed run in '" + output_dir +
                  "': expected summary.csv, run_manifest.txt and groups_<algorithm>.csv, users_<algorithm>.csv, "
                  "recs_<algorithm>.csv per algorithm");
  }
  const auto rows = ReadCsv(summary_path, kSummaryHeader);
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-14s %14s %18s %17s\n", "algorithm", "precision@10", "group correlation",
                "user correlation");
  out << line;
  out << std::string(66, '-') << '\n';
  for (const auto& r : rows) {
    ParseAlgorithm(r[0]);
    const std::string groups_path = (dir / ("groups_" + r[0] + ".csv")).string();
    if (!fs::exists(groups_path)) throw IoError("missing " + groups_path);
    std::snprintf(line, sizeof(line), "%-14s %14s %18s %17s\n", r[0].c_str(), r[1].c_str(), r[2].c_str(),
                  r[3].c_str());
    out << line;
  }
  if (!rows.empty()) {
    out << "\nbins: " << rows.front()[4] << ", alpha: " << rows.front()[5] << ", seed: " << rows.front()[6] << '\n';
  }
  return out.str();
}

std::vector<std::string> CheckRunConsistency(const std::string& output_dir) {
  std::vector<std::string> issues;
  const fs::path dir(output_dir);
  auto path = [&](const std::string& name) { return (dir / name).string(); };

  const auto manifest = ReadKeyValues(path("run_manifest.txt"));
  auto setting = [&](const std::string& key) -> const std::string& {
    auto it = manifest.find(key);
    if (it == manifest.end()) throw ParseError(path("run_manifest.txt") + ": missing " + key);
    return it->second;
  };
  const auto top_n = Number<std::size_t>("top_n", setting("top_n"));
  const auto k = Number<std::size_t>("precision_k", setting("precision_k"));
  std::optional<double> threshold;
  if (setting("relevance_threshold") != "none") {
    threshold = Number<double>("relevance_threshold", setting("relevance_threshold"));
  }
  const Dataset train = ParseRatingsCsv(ReadFile(path("train.csv")));
  const Dataset test = ParseRatingsCsv(ReadFile(path("test.csv")));

  for (const auto& row : ReadCsv(path("summary.csv"), kSummaryHeader)) {
    const std::string& name = row[0];
    // Rebuild the lists from the dump.
    std::map<std::int64_t, RecommendationList> lists;
    for (const auto& r : ReadCsv(path("recs_" + name + ".csv"), kRecsHeader)) {
      const auto user = Number<std::int64_t>("user_id", r[0]);
      auto& list = lists[user];
      list.user = UserId{user};
      list.items.push_back({ItemId{Number<std::int64_t>("item_id", r[2])}, Number<double>("score", r[3])});
      if (Number<std::size_t>("rank", r[1]) != list.items.size()) {
        issues.push_back(name + ": ranks of user " + r[0] + " are not consecutive");
      }
    }
    std::vector<RecommendationList> all;
    for (std::size_t u = 0; u < train.num_users(); ++u) {
      const auto user = train.user_id(u);
      const auto row_u = train.user_row(u);
      const std::size_t expected = std::min(top_n, train.num_items() - row_u.size());
      auto it = lists.find(raw(user));
      const std::size_t got = it == lists.end() ? 0 : it->second.items.size();
      if (got != expected) {
        issues.push_back(name + ": user " + std::to_string(raw(user)) + " has " + std::to_string(got) +
                         " recommendations, expected " + std::to_string(expected));
      }
      if (it == lists.end()) continue;
      std::unordered_set<std::int64_t> profile;
      for (const Cell& c : row_u) profile.insert(raw(train.item_id(c.index)));
      for (const auto& r : it->second.items) {
        if (profile.contains(raw(r.item))) {
          issues.push_back(name + ": user " + std::to_string(raw(user)) + " was recommended train item " +
                           std::to_string(raw(r.item)));
        }
      }
      all.push_back(it->second);
    }
    if (all.size() != lists.size()) issues.push_back(name + ": recommendations for users outside train");
    const double precision = MeanPrecisionAtK(all, test, k, threshold);
    if (std::abs(precision - Number<double>("precision_at_10", row[1])) > kCrossFileTolerance) {
      issues.push_back(name + ": summary precision " + row[1] + " != recomputed " + Fixed6(precision));
    }

    const auto users = ReadCsv(path("users_" + name + ".csv"), kUsersHeader);
    std::size_t non_empty = 0;
    for (const auto& [user, list] : lists) non_empty += list.items.empty() ? 0 : 1;
    if (users.size() > non_empty) issues.push_back(name + ": more metric rows than recommendation lists");
    for (const auto& r : users) {
      const auto u = train.find_user(UserId{Number<std::int64_t>("user_id", r[0])});
      if (!u) {
        issues.push_back(name + ": metrics for unknown user " + r[0]);
      } else if (train.user_row(*u).size() != Number<std::size_t>("profile_size", r[1])) {
        issues.push_back(name + ": profile size mismatch for user " + r[0]);
      }
    }
    std::size_t grouped = 0;
    for (const auto& g : ReadCsv(path("groups_" + name + ".csv"), kGroupsHeader)) {
      grouped += Number<std::size_t>("user_count", g[5]);
    }
    if (grouped != users.size()) {
      issues.push_back(name + ": groups hold " + std::to_string(grouped) + " users, metrics dump has " +
                       std::to_string(users.size()));
    }
  }
  return issues;
}

}  // namespace calrec
