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

// Tabular datasets: CSV + schema ingestion, splits, labels and metrics.
//
// Cell encoding in TabularTask::X:
//   numeric column      -> the value, NaN when missing/unparseable
//   categorical column  -> vocabulary code 0..|V|-1, NaN when missing,
//                          kUnknownCategory when outside the vocabulary
#pragma once

#include "iltm/common.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace iltm {

inline constexpr double kUnknownCategory = -1.0;

enum class ColumnKind { kNumeric, kCategorical, kClassTarget, kRegressionTarget };
enum class TaskKind { kClassification, kRegression };

std::string_view to_string(ColumnKind kind);
ColumnKind parse_column_kind(std::string_view s);

struct Column {
  std::string name;
  ColumnKind kind = ColumnKind::kNumeric;
  // Categorical features: dense code order. Class targets: label strings in
  // class order (code k <-> class k+1).
  std::vector<std::string> vocabulary;
};

// One line per column, in CSV order: name,kind[,vocab...]. Lines starting
// with '#' are comments.
struct Schema {
  std::vector<Column> columns;

  static Schema parse(std::string_view text);
  static Schema load(const std::filesystem::path& path);
  std::string serialize() const;
  void save(const std::filesystem::path& path) const;

  /// Throws DataError unless exactly one target column exists.
  int target_index() const;
  TaskKind task_kind() const;
  std::vector<Column> feature_columns() const;
};

struct TabularTask {
  std::string name;
  Schema schema;  // vocabularies resolved after load
  Mat X;          // N x d
  std::vector<double> y;
  int K = 0;  // 0 for regression
  std::map<std::string, std::vector<int>> splits;

  TaskKind kind() const { return K == 0 ? TaskKind::kRegression : TaskKind::kClassification; }
  int n_rows() const { return static_cast<int>(X.rows()); }
  int n_features() const { return static_cast<int>(X.cols()); }
  std::vector<Column> features() const { return schema.feature_columns(); }

  const std::vector<int>& split(const std::string& which) const;
  bool has_split(const std::string& which) const { return splits.count(which) > 0; }

  /// Checks the structural invariants; throws DataError.
  void validate() const;
};

// RFC-4180 style: quoted fields, doubled quotes, CRLF or LF line ends.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);
std::string csv_escape(std::string_view field);
std::string read_file(const std::filesystem::path& path);

TabularTask load_csv(const std::filesystem::path& path, const Schema& schema);
TabularTask parse_task_csv(std::string_view text, const Schema& schema, std::string name);
/// Inverse of load_csv for the parsed values (numbers in shortest round-trip form).
std::string serialize_task_csv(const TabularTask& task);

/// Loads `<stem>.csv` with `<stem>.schema` and optional `<stem>.{train,val,test}` splits.
TabularTask load_task(const std::filesystem::path& csv_path);
void save_task(const TabularTask& task, const std::filesystem::path& dir);
std::vector<std::filesystem::path> list_task_files(const std::filesystem::path& dir);

std::vector<int> read_split_file(const std::filesystem::path& path);
void write_split_file(const std::filesystem::path& path, const std::vector<int>& idx);

/// Random train/val/test partition of [0, n).
std::map<std::string, std::vector<int>> make_random_splits(int n, double train_frac,
                                                           double val_frac, std::uint64_t seed);

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

Mat one_hot_labels(std::span<const double> y, int K);

/// Binary Mann-Whitney AUC with average ranks for ties.
double auc_binary(std::span<const double> scores, std::span<const int> positive);
/// Binary: positive class is 2 (column 1 when two columns are given).
/// Multiclass: macro one-vs-rest over classes present in y.
double auc(const Mat& scores, std::span<const double> y);
double rmse(std::span<const double> pred, std::span<const double> y);
double accuracy(const Mat& probs, std::span<const double> y);

/// Average-tie ranks per task (column), averaged over tasks.
std::vector<double> mean_rank(const Mat& score_table, bool higher_is_better);

enum class CollectionRole { kMetaTrain, kMetaVal, kMetaTest };

struct MetaCollection {
  CollectionRole role = CollectionRole::kMetaTrain;
  std::vector<std::shared_ptr<const TabularTask>> tasks;
};

/// Throws DataError when a task name appears under more than one role.
void check_disjoint_roles(std::span<const MetaCollection> collections);

}  // namespace iltm
