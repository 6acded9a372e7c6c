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

#include "iltm/tabular.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

namespace iltm {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::string_view kUnknownToken = "__unknown__";

std::optional<double> parse_number(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::vector<std::string> infer_vocabulary(const std::vector<std::vector<std::string>>& rows,
                                          std::size_t col, bool numeric_order) {
  std::set<std::string> seen;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (!rows[r][col].empty()) seen.insert(rows[r][col]);
  }
  std::vector<std::string> vocab(seen.begin(), seen.end());
  if (numeric_order) {
    const bool all_numeric = std::all_of(vocab.begin(), vocab.end(),
                                         [](const std::string& s) { return parse_number(s).has_value(); });
    if (all_numeric) {
      std::stable_sort(vocab.begin(), vocab.end(), [](const std::string& a, const std::string& b) {
        return *parse_number(a) < *parse_number(b);
      });
    }
  }
  return vocab;
}

}  // namespace

std::string_view to_string(ColumnKind kind) {
  switch (kind) {
    case ColumnKind::kNumeric: return "numeric";
    case ColumnKind::kCategorical: return "categorical";
    case ColumnKind::kClassTarget: return "class_target";
    case ColumnKind::kRegressionTarget: return "regression_target";
  }
  return "numeric";
}

ColumnKind parse_column_kind(std::string_view s) {
  if (s == "numeric") return ColumnKind::kNumeric;
  if (s == "categorical") return ColumnKind::kCategorical;
  if (s == "class_target") return ColumnKind::kClassTarget;
  if (s == "regression_target") return ColumnKind::kRegressionTarget;
  throw DataError("unknown column kind '" + std::string(s) + "'");
}

// ---------------------------------------------------------------- CSV

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    // A bare empty line is skipped rather than read as a single empty cell.
    if (!(row.size() == 1 && row[0].empty())) rows.push_back(std::move(row));
    row.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        in_quotes = true;
        field_started = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        break;
      case '\n':
        end_row();
        break;
      default:
        field.push_back(c);
        field_started = true;
    }
  }
  if (in_quotes) throw DataError("unterminated quoted CSV field");
  if (field_started || !field.empty() || !row.empty()) end_row();
  return rows;
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string format_double(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

// ---------------------------------------------------------------- Schema

Schema Schema::parse(std::string_view text) {
  Schema schema;
  std::istringstream lines{std::string(text)};
  std::string line;
  while (std::getline(lines, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    auto rows = parse_csv(line);
    if (rows.empty()) continue;
    auto& fields = rows.front();
    if (fields.size() < 2) throw DataError("schema line needs name and kind: " + line);
    Column col{fields[0], parse_column_kind(fields[1]), {}};
    col.vocabulary.assign(fields.begin() + 2, fields.end());
    schema.columns.push_back(std::move(col));
  }
  return schema;
}

Schema Schema::load(const std::filesystem::path& path) { return parse(read_file(path)); }

std::string Schema::serialize() const {
  std::string out;
  for (const auto& col : columns) {
    out += csv_escape(col.name);
    out += ',';
    out += to_string(col.kind);
    for (const auto& v : col.vocabulary) {
      out += ',';
      out += csv_escape(v);
    }
    out += '\n';
  }
  return out;
}

void Schema::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << serialize();
}

int Schema::target_index() const {
  int found = -1;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    const auto k = columns[i].kind;
    if (k == ColumnKind::kClassTarget || k == ColumnKind::kRegressionTarget) {
      if (found >= 0) throw DataError("schema declares more than one target column");
      found = static_cast<int>(i);
    }
  }
  if (found < 0) throw DataError("schema has no target column");
  return found;
}

TaskKind Schema::task_kind() const {
  return columns[static_cast<std::size_t>(target_index())].kind == ColumnKind::kClassTarget
             ? TaskKind::kClassification
             : TaskKind::kRegression;
}

std::vector<Column> Schema::feature_columns() const {
  const int t = target_index();
  std::vector<Column> out;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (static_cast<int>(i) != t) out.push_back(columns[i]);
  }
  return out;
}

// ---------------------------------------------------------------- Task

const std::vector<int>& TabularTask::split(const std::string& which) const {
  auto it = splits.find(which);
  if (it == splits.end()) throw DataError("task '" + name + "' has no '" + which + "' split");
  return it->second;
}

void TabularTask::validate() const {
  const int n = n_rows();
  if (n < 1 || n_features() < 1) throw DataError("task '" + name + "' needs N >= 1 and d >= 1");
  if (static_cast<int>(y.size()) != n) throw DataError("label count does not match rows");
  if (K > 0) {
    for (double v : y) {
      if (!(v >= 1 && v <= K) || v != std::floor(v)) {
        throw DataError("class label out of range in task '" + name + "'");
      }
    }
  }
  std::vector<char> used(static_cast<std::size_t>(n), 0);
  for (const auto& [split_name, idx] : splits) {
    for (int i : idx) {
      if (i < 0 || i >= n) throw DataError("split '" + split_name + "' index out of range");
      if (used[static_cast<std::size_t>(i)]) throw DataError("splits of '" + name + "' overlap");
      used[static_cast<std::size_t>(i)] = 1;
    }
  }
}

TabularTask parse_task_csv(std::string_view text, const Schema& schema_in, std::string name) {
  auto rows = parse_csv(text);
  if (rows.empty()) throw DataError("CSV has no header");
  const auto& header = rows.front();
  {
    std::set<std::string> names(header.begin(), header.end());
    if (names.size() != header.size()) throw DataError("duplicate column names in CSV header");
  }
  Schema schema = schema_in;
  const int target = schema.target_index();
  const auto& target_name = schema.columns[static_cast<std::size_t>(target)].name;
  if (std::find(header.begin(), header.end(), target_name) == header.end()) {
    throw DataError("CSV is missing target column '" + target_name + "'");
  }
  if (header.size() != schema.columns.size()) throw DataError("CSV header does not match schema");
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] != schema.columns[c].name) {
      throw DataError("CSV column '" + header[c] + "' does not match schema column '" +
                      schema.columns[c].name + "'");
    }
  }
  const std::size_t n = rows.size() - 1;
  if (n == 0) throw DataError("CSV has zero data rows");
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != header.size()) {
      throw DataError("CSV row " + std::to_string(r) + " has " + std::to_string(rows[r].size()) +
                      " fields, expected " + std::to_string(header.size()));
    }
  }

  for (std::size_t c = 0; c < schema.columns.size(); ++c) {
    auto& col = schema.columns[c];
    if (col.vocabulary.empty() &&
        (col.kind == ColumnKind::kCategorical || col.kind == ColumnKind::kClassTarget)) {
      col.vocabulary = infer_vocabulary(rows, c, col.kind == ColumnKind::kClassTarget);
    }
  }

  TabularTask task;
  task.name = std::move(name);
  task.X.resize(static_cast<Index>(n), static_cast<Index>(header.size() - 1));
  task.y.resize(n);
  const auto& tcol = schema.columns[static_cast<std::size_t>(target)];
  task.K = tcol.kind == ColumnKind::kClassTarget ? static_cast<int>(tcol.vocabulary.size()) : 0;

  std::vector<std::unordered_map<std::string, int>> lookup(schema.columns.size());
  for (std::size_t c = 0; c < schema.columns.size(); ++c) {
    const auto& vocab = schema.columns[c].vocabulary;
    for (std::size_t v = 0; v < vocab.size(); ++v) lookup[c].emplace(vocab[v], static_cast<int>(v));
  }

  for (std::size_t r = 0; r < n; ++r) {
    const auto& fields = rows[r + 1];
    Index out_col = 0;
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const auto& col = schema.columns[c];
      const auto& cell = fields[c];
      switch (col.kind) {
        case ColumnKind::kNumeric:
          task.X(static_cast<Index>(r), out_col++) = parse_number(cell).value_or(kNaN);
          break;
        case ColumnKind::kCategorical: {
          double code = kNaN;
          if (!cell.empty()) {
            auto it = lookup[c].find(cell);
            code = it == lookup[c].end() ? kUnknownCategory : it->second;
          }
          task.X(static_cast<Index>(r), out_col++) = code;
          break;
        }
        case ColumnKind::kClassTarget: {
          auto it = lookup[c].find(cell);
          if (it == lookup[c].end()) {
            throw DataError("row " + std::to_string(r + 1) + ": class '" + cell +
                            "' not in target vocabulary");
          }
          task.y[r] = it->second + 1;
          break;
        }
        case ColumnKind::kRegressionTarget: {
          auto v = parse_number(cell);
          if (!v) throw DataError("row " + std::to_string(r + 1) + ": unparseable regression target");
          task.y[r] = *v;
          break;
        }
      }
    }
  }
  task.schema = std::move(schema);
  task.validate();
  return task;
}

TabularTask load_csv(const std::filesystem::path& path, const Schema& schema) {
  return parse_task_csv(read_file(path), schema, path.stem().string());
}

std::string serialize_task_csv(const TabularTask& task) {
  std::string out;
  const auto& cols = task.schema.columns;
  for (std::size_t c = 0; c < cols.size(); ++c) {
    if (c) out += ',';
    out += csv_escape(cols[c].name);
  }
  out += '\n';
  for (int r = 0; r < task.n_rows(); ++r) {
    Index feat = 0;
    for (std::size_t c = 0; c < cols.size(); ++c) {
      if (c) out += ',';
      const auto& col = cols[c];
      switch (col.kind) {
        case ColumnKind::kNumeric:
          out += format_double(task.X(r, feat++));
          break;
        case ColumnKind::kCategorical: {
          const double code = task.X(r, feat++);
          if (std::isnan(code)) break;
          if (code == kUnknownCategory) out += kUnknownToken;
          else out += csv_escape(col.vocabulary[static_cast<std::size_t>(code)]);
          break;
        }
        case ColumnKind::kClassTarget:
          out += csv_escape(col.vocabulary[static_cast<std::size_t>(task.y[static_cast<std::size_t>(r)]) - 1]);
          break;
        case ColumnKind::kRegressionTarget:
          out += format_double(task.y[static_cast<std::size_t>(r)]);
          break;
      }
    }
    out += '\n';
  }
  return out;
}

std::vector<int> read_split_file(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::vector<int> idx;
  std::string line;
  while (std::getline(in, line)) {
    if (auto v = parse_number(line)) idx.push_back(static_cast<int>(*v));
    else if (!line.empty() && line != "\r") throw DataError("bad split index '" + line + "'");
  }
  return idx;
}

void write_split_file(const std::filesystem::path& path, const std::vector<int>& idx) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  for (int i : idx) out << i << '\n';
}

TabularTask load_task(const std::filesystem::path& csv_path) {
  auto stem = csv_path;
  stem.replace_extension();
  auto schema_path = stem;
  schema_path += ".schema";
  TabularTask task = load_csv(csv_path, Schema::load(schema_path));
  for (const char* split : {"train", "val", "test"}) {
    auto p = stem;
    p += std::string(".") + split;
    if (std::filesystem::exists(p)) task.splits[split] = read_split_file(p);
  }
  task.validate();
  return task;
}

void save_task(const TabularTask& task, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto stem = dir / task.name;
  {
    auto p = stem;
    p += ".csv";
    std::ofstream out(p, std::ios::binary);
    if (!out) throw DataError("cannot write " + p.string());
    out << serialize_task_csv(task);
  }
  auto schema_path = stem;
  schema_path += ".schema";
  task.schema.save(schema_path);
  for (const auto& [split, idx] : task.splits) {
    auto p = stem;
    p += "." + split;
    write_split_file(p, idx);
  }
}

std::vector<std::filesystem::path> list_task_files(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> out;
  if (!std::filesystem::is_directory(dir)) throw DataError("not a directory: " + dir.string());
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() == ".csv") out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::map<std::string, std::vector<int>> make_random_splits(int n, double train_frac,
                                                           double val_frac, std::uint64_t seed) {
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  const int n_train = std::max(1, static_cast<int>(std::lround(train_frac * n)));
  const int n_val = std::min(n - n_train, static_cast<int>(std::lround(val_frac * n)));
  std::map<std::string, std::vector<int>> splits;
  splits["train"].assign(perm.begin(), perm.begin() + n_train);
  splits["val"].assign(perm.begin() + n_train, perm.begin() + n_train + n_val);
  splits["test"].assign(perm.begin() + n_train + n_val, perm.end());
  for (auto& [_, idx] : splits) std::sort(idx.begin(), idx.end());
  return splits;
}

// ---------------------------------------------------------------- labels & metrics

Mat one_hot_labels(std::span<const double> y, int K) {
  Mat out = Mat::Zero(static_cast<Index>(y.size()), K);
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double v = y[i];
    if (!(v >= 1 && v <= K) || v != std::floor(v)) {
      throw DataError("label " + format_double(v) + " outside 1.." + std::to_string(K));
    }
    out(static_cast<Index>(i), static_cast<Index>(v) - 1) = 1.0;
  }
  return out;
}

double auc_binary(std::span<const double> scores, std::span<const int> positive) {
  const std::size_t n = scores.size();
  if (positive.size() != n) throw std::invalid_argument("auc: length mismatch");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) {
      if (positive[order[k]]) {
        rank_sum += avg_rank;
        ++n_pos;
      }
    }
    i = j + 1;
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) throw NumericError("auc undefined: only one class present");
  const double np = static_cast<double>(n_pos);
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * static_cast<double>(n_neg));
}

double auc(const Mat& scores, std::span<const double> y) {
  if (static_cast<std::size_t>(scores.rows()) != y.size()) throw std::invalid_argument("auc: row mismatch");
  std::set<int> present;
  for (double v : y) present.insert(static_cast<int>(v));
  if (y.size() < 2 || present.size() < 2) throw NumericError("auc undefined: fewer than two classes");
  std::vector<int> pos(y.size());
  if (scores.cols() <= 2) {
    const Index col = scores.cols() - 1;
    const int positive_class = scores.cols() == 1 ? *present.rbegin() : 2;
    std::vector<double> s(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
      s[i] = scores(static_cast<Index>(i), col);
      pos[i] = static_cast<int>(y[i]) == positive_class;
    }
    return auc_binary(s, pos);
  }
  double total = 0.0;
  int counted = 0;
  std::vector<double> s(y.size());
  for (int k : present) {
    if (k < 1 || k > scores.cols()) throw std::invalid_argument("auc: label exceeds score columns");
    for (std::size_t i = 0; i < y.size(); ++i) {
      s[i] = scores(static_cast<Index>(i), k - 1);
      pos[i] = static_cast<int>(y[i]) == k;
    }
    total += auc_binary(s, pos);
    ++counted;
  }
  return total / counted;
}

double rmse(std::span<const double> pred, std::span<const double> y) {
  if (pred.size() != y.size() || y.empty()) throw std::invalid_argument("rmse: length mismatch");
  double ss = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) ss += (pred[i] - y[i]) * (pred[i] - y[i]);
  return std::sqrt(ss / static_cast<double>(y.size()));
}

double accuracy(const Mat& probs, std::span<const double> y) {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    Index arg = 0;
    probs.row(static_cast<Index>(i)).maxCoeff(&arg);
    hits += static_cast<int>(arg) + 1 == static_cast<int>(y[i]);
  }
  return static_cast<double>(hits) / static_cast<double>(y.size());
}

std::vector<double> mean_rank(const Mat& table, bool higher_is_better) {
  const Index methods = table.rows();
  const Index tasks = table.cols();
  if (methods == 0 || tasks == 0) throw std::invalid_argument("mean_rank: empty table");
  std::vector<double> sum(static_cast<std::size_t>(methods), 0.0);
  std::vector<Index> order(static_cast<std::size_t>(methods));
  for (Index t = 0; t < tasks; ++t) {
    std::iota(order.begin(), order.end(), 0);
    auto better = [&](Index a, Index b) {
      return higher_is_better ? table(a, t) > table(b, t) : table(a, t) < table(b, t);
    };
    std::sort(order.begin(), order.end(), better);
    for (std::size_t i = 0; i < order.size();) {
      std::size_t j = i;
      while (j + 1 < order.size() && table(order[j + 1], t) == table(order[i], t)) ++j;
      const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
      for (std::size_t k = i; k <= j; ++k) sum[static_cast<std::size_t>(order[k])] += avg;
      i = j + 1;
    }
  }
  for (auto& s : sum) s /= static_cast<double>(tasks);
  return sum;
}

void check_disjoint_roles(std::span<const MetaCollection> collections) {
  std::map<std::string, CollectionRole> owner;
  for (const auto& coll : collections) {
    for (const auto& task : coll.tasks) {
      auto [it, inserted] = owner.emplace(task->name, coll.role);
      if (!inserted && it->second != coll.role) {
        throw DataError("task '" + task->name + "' appears in more than one meta collection role");
      }
    }
  }
}

}  // namespace iltm
