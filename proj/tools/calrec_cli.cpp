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

// calrec: split / run / report driver over the libcalrec C interface.

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "calrec/calrec.h"

namespace {

// 0 success, 1 experiment failure, 2 usage or I/O error.
int ExitCode(calrec_status status) {
  switch (status) {
    case CALREC_OK:
      return 0;
    case CALREC_ERR_DIVERGENCE:
    case CALREC_ERR_UNDEFINED:
    case CALREC_ERR_EXPERIMENT:
    case CALREC_ERR_INTERNAL:
      return 1;
    default:
      return 2;
  }
}

int Report(calrec_status status, const char* command) {
  if (status != CALREC_OK) {
    std::fprintf(stderr, "calrec %s: %s: %s\n", command, calrec_status_name(status), calrec_last_error());
  }
  return ExitCode(status);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Calibration and profile-inconsistency experiments for collaborative filtering"};
  app.require_subcommand(1);
  app.set_version_flag("--version", calrec_version());

  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;

  auto* split = app.add_subcommand("split", "Split the ratings into train/test files");
  auto* run = app.add_subcommand("run", "Run the full experiment (grid search, metrics, groups)");
  auto* report = app.add_subcommand("report", "Print the summary table of a finished run");
  auto* check = app.add_subcommand("check", "Verify cross-file consistency of a finished run");
  for (auto* sub : {split, run}) {
    sub->add_option("--config", config_path, "Experiment config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "Output directory (overrides the config)");
    sub->add_option("--seed", seed, "Experiment seed (overrides the config)");
  }
  for (auto* sub : {report, check}) {
    sub->add_option("--out", out_dir, "Run directory")->required();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const char* out = out_dir.empty() ? nullptr : out_dir.c_str();
  const std::uint64_t* seed_ptr = seed ? &*seed : nullptr;
  if (*split) return Report(calrec_cmd_split(config_path.c_str(), out, seed_ptr), "split");
  if (*run) return Report(calrec_cmd_run(config_path.c_str(), out, seed_ptr), "run");
  if (*report) {
    char* text = nullptr;
    const calrec_status status = calrec_cmd_report(out, &text);
    if (status == CALREC_OK) std::fputs(text, stdout);
    calrec_string_free(text);
    return Report(status, "report");
  }
  char* issues = nullptr;
  const calrec_status status = calrec_check_run(out, &issues);
  if (status == CALREC_OK) {
    if (issues[0] == '\0') {
      std::puts("consistent");
    } else {
      std::fputs(issues, stdout);
    }
  }
  const bool clean = status == CALREC_OK && issues[0] == '\0';
  calrec_string_free(issues);
  if (status != CALREC_OK) return Report(status, "check");
  return clean ? 0 : 1;
}
