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

#ifndef CALREC_PIPELINE_HPP_
#define CALREC_PIPELINE_HPP_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "calrec/analysis.hpp"
#include "calrec/data.hpp"
#include "calrec/metrics.hpp"
#include "calrec/recommenders.hpp"

namespace calrec {

enum class ItemMeanSource { kTrain, kFull };

// Everything needed to reproduce one experiment. Defaults match the
// standard setup: 80/20 split, top-10 lists, alpha 0.01, 20 equal-width bins.
struct ExperimentConfig {
  std::string ratings_path;
  std::string movies_path;
  std::string output_dir = "out";
  double train_fraction = 0.8;
  std::uint64_t seed = 42;
  std::size_t top_n = 10;
  CalibrationConfig calibration;
  std::size_t num_bins = 20;
  BinMode bin_mode = BinMode::kEqualWidth;
  double validation_fraction = 0.1;
  ItemMeanSource item_means = ItemMeanSource::kTrain;
  bool exclude_own_rating = false;
  std::optional<double> relevance_threshold;
  unsigned threads = 1;
  std::vector<Algorithm> algorithms;
  std::map<Algorithm, std::vector<ModelConfig>> grids;

  // Grid of one algorithm: the configured one, or a single default config
  // seeded from the experiment seed.
  std::vector<ModelConfig> GridFor(Algorithm algorithm) const;

  // Cross-field checks; throws ArgumentError.
  void Validate() const;
};

// Parses the line-oriented config format (see README). Relative paths are
// resolved against base_dir. Throws ParseError with the line number.
ExperimentConfig ParseExperimentConfig(std::string_view text, const std::string& base_dir = ".");
ExperimentConfig LoadExperimentConfig(const std::string& path);

// Model seed used when a grid section does not set one.
std::uint64_t DefaultModelSeed(std::uint64_t experiment_seed, Algorithm algorithm);

// Reads both input files, splits, and writes train.csv, test.csv and
// manifest.txt to the output directory.
SplitPair CmdSplit(const ExperimentConfig& config, std::ostream& log);

struct AlgorithmOutcome {
  Algorithm algorithm;
  bool ok = false;
  std::string error;
  ModelConfig chosen;
  double precision = 0.0;
  std::optional<double> group_correlation;
  std::optional<double> user_correlation;
};

// Full experiment. Each algorithm runs independently; if any fails the
// others still write their outputs and ExperimentError is thrown at the end.
std::vector<AlgorithmOutcome> CmdRun(const ExperimentConfig& config, std::ostream& log);

// Table of precision and correlations read back from summary.csv.
std::string CmdReport(const std::string& output_dir);

// Recomputes cross-file relations of a finished run (precision from the
// recommendation dumps, list lengths, group counts). Returns one message per
// violation; empty means consistent.
std::vector<std::string> CheckRunConsistency(const std::string& output_dir);

}  // namespace calrec

#endif  // CALREC_PIPELINE_HPP_
