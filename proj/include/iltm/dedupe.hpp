/*
 * Copyright 2026 The iltm Authors.
 *
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


// Leakage screening of candidate training datasets against an evaluation
// panel. Each candidate gets one verdict and, when discarded, the first rule
// that fired.
#pragma once

#include "iltm/tabular.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace iltm {

enum class DedupeRule {
  kNone,
  kExplicitEval,
  kExactName,
  kKeywordName,
  kSubstring,
  kLevenshtein,
  kTokenSort,
  kStructural,
  kEdgeCase,
  kSampleLeak,
  kIoError,
};

std::string_view to_string(DedupeRule rule);

struct DedupeConfig {
  double lambda = 0.8;
  int k = 5;
  std::vector<std::string> keywords = {"small",      "medium",  "processed",
                                       "classif",    "regression", "version"};
  /// Names the evaluation registry knows under another identity; matched verbatim.
  std::vector<std::string> explicit_eval;
  int min_features = 2;
  int min_rows = 10;
  int max_features = 100000;
  int max_rows = 1000000;
  std::uint64_t seed = 0;
  int threads = 1;

  void validate() const;
};

struct DiscardRecord {
  std::string name;
  bool keep = true;
  DedupeRule rule = DedupeRule::kNone;
  std::string evidence;
};

/// Shape is always known; values are loaded on demand and may throw.
struct DatasetRef {
  std::string name;
  long long n_rows = 0;
  long long n_features = 0;
  std::function<std::shared_ptr<const TabularTask>()> load;

  static DatasetRef from_task(std::shared_ptr<const TabularTask> task);
  /// Reads the schema and counts CSV records; values stay on disk.
  static DatasetRef from_file(const std::filesystem::path& csv_path);
};

std::string sanitize_name(std::string_view s);
std::string clean_keywords(std::string_view s, const std::vector<std::string>& keywords);
std::size_t levenshtein_distance(std::string_view a, std::string_view b);
double levenshtein_similarity(std::string_view a, std::string_view b);
double token_sort_ratio(std::string_view a, std::string_view b);

/// Sorted canonical cell texts of one row.
std::vector<std::string> canonical_row(const TabularTask& task, int row);

struct LeakMatch {
  bool found = false;
  int eval_row = -1;
  int candidate_row = -1;
};

LeakMatch sample_leak_check(const TabularTask& eval, const TabularTask& candidate, int k,
                            std::uint64_t seed);

std::vector<DiscardRecord> run_pipeline(const std::vector<DatasetRef>& candidates,
                                        const std::vector<std::shared_ptr<const TabularTask>>& evals,
                                        const DedupeConfig& cfg);
std::vector<DiscardRecord> run_pipeline(const MetaCollection& candidates,
                                        const MetaCollection& evals, const DedupeConfig& cfg);

std::string discard_csv(const std::vector<DiscardRecord>& records);

}  // namespace iltm
