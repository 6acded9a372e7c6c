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


#include "iltm/dedupe.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_set>

namespace iltm {

std::string_view to_string(DedupeRule rule) {
  switch (rule) {
    case DedupeRule::kNone: return "none";
    case DedupeRule::kExplicitEval: return "explicit-eval";
    case DedupeRule::kExactName: return "exact-name";
    case DedupeRule::kKeywordName: return "keyword-name";
    case DedupeRule::kSubstring: return "substring";
    case DedupeRule::kLevenshtein: return "levenshtein";
    case DedupeRule::kTokenSort: return "token-sort";
    case DedupeRule::kStructural: return "structural";
    case DedupeRule::kEdgeCase: return "edge-case";
    case DedupeRule::kSampleLeak: return "sample-leak";
    case DedupeRule::kIoError: return "io-error";
  }
  return "none";
}

void DedupeConfig::validate() const {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("dedupe lambda must lie in [0,1]");
  if (k < 1) throw ConfigError("dedupe k must be at least 1");
}

namespace {

bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

std::vector<std::string> split_tokens(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (is_alnum(c)) {
      cur.push_back(c);
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::string join(const std::vector<std::string>& parts, char sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out.push_back(sep);
    out += parts[i];
  }
  return out;
}

std::string fmt_score(double v) {
  std::ostringstream os;
  os.precision(4);
  os << std::fixed << v;
  return os.str();
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string row_key(const std::vector<std::string>& cells) {
  std::string key;
  for (const auto& c : cells) {
    key += c;
    key.push_back('\x1f');
  }
  return key;
}

std::vector<int> sampled_rows(const TabularTask& eval, int k, std::uint64_t seed) {
  std::vector<int> pool(static_cast<std::size_t>(eval.n_rows()));
  std::iota(pool.begin(), pool.end(), 0);
  Rng rng(derive_seed(seed, fnv1a(eval.name)));
  return sample_without_replacement(pool, std::min<std::size_t>(pool.size(), k), rng);
}

}  // namespace

std::string sanitize_name(std::string_view s) {
  std::string out;
  bool pending_sep = false;
  for (char c : s) {
    if (is_alnum(c)) {
      if (pending_sep && !out.empty()) out.push_back('-');
      pending_sep = false;
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else {
      pending_sep = true;
    }
  }
  return out;
}

std::string clean_keywords(std::string_view s, const std::vector<std::string>& keywords) {
  std::vector<std::string> kept;
  for (auto& tok : split_tokens(sanitize_name(s))) {
    if (std::find(keywords.begin(), keywords.end(), tok) != keywords.end()) continue;
    std::string stripped;
    for (char c : tok) {
      if (!std::isdigit(static_cast<unsigned char>(c))) stripped.push_back(c);
    }
    if (!stripped.empty()) kept.push_back(std::move(stripped));
  }
  return join(kept, '-');
}

std::size_t levenshtein_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  std::iota(prev.begin(), prev.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double levenshtein_similarity(std::string_view a, std::string_view b) {
  const std::size_t m = std::max(a.size(), b.size());
  if (m == 0) return 1.0;
  return 1.0 - static_cast<double>(levenshtein_distance(a, b)) / static_cast<double>(m);
}

double token_sort_ratio(std::string_view a, std::string_view b) {
  auto ta = split_tokens(a);
  auto tb = split_tokens(b);
  std::sort(ta.begin(), ta.end());
  std::sort(tb.begin(), tb.end());
  return levenshtein_similarity(join(ta, ' '), join(tb, ' '));
}

std::vector<std::string> canonical_row(const TabularTask& task, int row) {
  const auto cols = task.features();
  std::vector<std::string> cells;
  cells.reserve(cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j) {
    const double v = task.X(row, static_cast<Index>(j));
    if (std::isnan(v)) {
      cells.emplace_back();
    } else if (cols[j].kind == ColumnKind::kCategorical) {
      const auto code = static_cast<long long>(v);
      if (code >= 0 && code < static_cast<long long>(cols[j].vocabulary.size())) {
        cells.push_back(cols[j].vocabulary[static_cast<std::size_t>(code)]);
      } else {
        cells.emplace_back("\x01unknown");
      }
    } else {
      cells.push_back(format_double(v));
    }
  }
  std::sort(cells.begin(), cells.end());
  return cells;
}

namespace {

struct EvalIndex {
  std::string sanitized;
  std::string cleaned;
  long long n = 0;
  long long f = 0;
  std::string name;
  std::vector<std::pair<std::string, int>> sampled;  // key, eval row
};

LeakMatch match_rows(const std::vector<std::pair<std::string, int>>& sampled,
                     const TabularTask& candidate) {
  LeakMatch m;
  for (int i = 0; i < candidate.n_rows(); ++i) {
    const std::string key = row_key(canonical_row(candidate, i));
    for (const auto& [k, r] : sampled) {
      if (k == key) {
        m.found = true;
        m.eval_row = r;
        m.candidate_row = i;
        return m;
      }
    }
  }
  return m;
}

std::vector<std::pair<std::string, int>> sample_keys(const TabularTask& eval, int k,
                                                     std::uint64_t seed) {
  std::vector<std::pair<std::string, int>> out;
  for (int r : sampled_rows(eval, k, seed)) out.emplace_back(row_key(canonical_row(eval, r)), r);
  return out;
}

}  // namespace

LeakMatch sample_leak_check(const TabularTask& eval, const TabularTask& candidate, int k,
                            std::uint64_t seed) {
  if (k < 1) throw ConfigError("dedupe k must be at least 1");
  if (eval.n_features() != candidate.n_features()) return {};
  return match_rows(sample_keys(eval, k, seed), candidate);
}

DatasetRef DatasetRef::from_task(std::shared_ptr<const TabularTask> task) {
  DatasetRef ref;
  ref.name = task->name;
  ref.n_rows = task->n_rows();
  ref.n_features = task->n_features();
  ref.load = [task] { return task; };
  return ref;
}

DatasetRef DatasetRef::from_file(const std::filesystem::path& csv_path) {
  DatasetRef ref;
  ref.name = csv_path.stem().string();
  ref.n_rows = -1;
  ref.n_features = -1;
  try {
    auto schema_path = csv_path;
    schema_path.replace_extension(".schema");
    const Schema schema = Schema::load(schema_path);
    const auto records = parse_csv(read_file(csv_path));
    ref.n_features = static_cast<long long>(schema.feature_columns().size());
    ref.n_rows = records.empty() ? 0 : static_cast<long long>(records.size()) - 1;
  } catch (const std::exception&) {
    ref.n_rows = ref.n_features = -1;
  }
  ref.load = [csv_path] { return std::make_shared<const TabularTask>(load_task(csv_path)); };
  return ref;
}

std::vector<DiscardRecord> run_pipeline(const std::vector<DatasetRef>& candidates,
                                        const std::vector<std::shared_ptr<const TabularTask>>& evals,
                                        const DedupeConfig& cfg) {
  cfg.validate();
  std::vector<EvalIndex> index(evals.size());
  for (std::size_t e = 0; e < evals.size(); ++e) {
    const auto& t = *evals[e];
    index[e] = {sanitize_name(t.name), clean_keywords(t.name, cfg.keywords), t.n_rows(),
                t.n_features(), t.name, sample_keys(t, cfg.k, cfg.seed)};
  }
  const std::unordered_set<std::string> explicit_names(cfg.explicit_eval.begin(),
                                                       cfg.explicit_eval.end());

  std::vector<DiscardRecord> out(candidates.size());
  parallel_for(static_cast<int>(candidates.size()), cfg.threads, [&](int ci) {
    const DatasetRef& c = candidates[static_cast<std::size_t>(ci)];
    DiscardRecord& rec = out[static_cast<std::size_t>(ci)];
    rec.name = c.name;
    auto discard = [&](DedupeRule rule, std::string evidence) {
      rec.keep = false;
      rec.rule = rule;
      rec.evidence = std::move(evidence);
    };
    const std::string s = sanitize_name(c.name);
    const std::string t = clean_keywords(c.name, cfg.keywords);

    if (explicit_names.count(c.name)) return discard(DedupeRule::kExplicitEval, c.name);
    for (const auto& e : index) {
      if (s == e.sanitized) return discard(DedupeRule::kExactName, e.name);
    }
    for (const auto& e : index) {
      if (!t.empty() && t == e.cleaned) return discard(DedupeRule::kKeywordName, e.name);
    }
    for (const auto& e : index) {
      if (!e.sanitized.empty() && s.find(e.sanitized) != std::string::npos) {
        return discard(DedupeRule::kSubstring, e.name);
      }
    }
    for (const auto& e : index) {
      const double sim = levenshtein_similarity(s, e.sanitized);
      if (sim >= cfg.lambda) return discard(DedupeRule::kLevenshtein, e.name + " " + fmt_score(sim));
    }
    for (const auto& e : index) {
      const double sim = token_sort_ratio(s, e.sanitized);
      if (sim >= cfg.lambda) return discard(DedupeRule::kTokenSort, e.name + " " + fmt_score(sim));
    }
    if (c.n_rows < 0 || c.n_features < 0) return discard(DedupeRule::kIoError, "unreadable metadata");
    for (const auto& e : index) {
      if (c.n_rows == e.n && c.n_features == e.f) {
        return discard(DedupeRule::kStructural, e.name + " N=" + std::to_string(e.n) +
                                                    " F=" + std::to_string(e.f));
      }
    }
    if (c.n_features < cfg.min_features) {
      return discard(DedupeRule::kEdgeCase, "F=" + std::to_string(c.n_features) + " < " +
                                                std::to_string(cfg.min_features));
    }
    if (c.n_rows < cfg.min_rows) {
      return discard(DedupeRule::kEdgeCase,
                     "N=" + std::to_string(c.n_rows) + " < " + std::to_string(cfg.min_rows));
    }
    if (c.n_features > cfg.max_features) {
      return discard(DedupeRule::kEdgeCase, "F=" + std::to_string(c.n_features) + " > " +
                                                std::to_string(cfg.max_features));
    }
    if (c.n_rows > cfg.max_rows) {
      return discard(DedupeRule::kEdgeCase,
                     "N=" + std::to_string(c.n_rows) + " > " + std::to_string(cfg.max_rows));
    }
    bool needs_values = false;
    for (const auto& e : index) needs_values = needs_values || e.f == c.n_features;
    if (!needs_values) return;
    std::shared_ptr<const TabularTask> task;
    try {
      task = c.load();
    } catch (const std::exception& ex) {
      return discard(DedupeRule::kIoError, ex.what());
    }
    for (const auto& e : index) {
      if (e.f != task->n_features()) continue;
      const LeakMatch m = match_rows(e.sampled, *task);
      if (m.found) {
        return discard(DedupeRule::kSampleLeak, e.name + " row " + std::to_string(m.eval_row) +
                                                    " = row " + std::to_string(m.candidate_row));
      }
    }
  });
  return out;
}

std::vector<DiscardRecord> run_pipeline(const MetaCollection& candidates,
                                        const MetaCollection& evals, const DedupeConfig& cfg) {
  std::vector<DatasetRef> refs;
  for (const auto& t : candidates.tasks) refs.push_back(DatasetRef::from_task(t));
  return run_pipeline(refs, evals.tasks, cfg);
}

std::string discard_csv(const std::vector<DiscardRecord>& records) {
  std::string out = "name,verdict,rule,evidence\n";
  for (const auto& r : records) {
    out += csv_escape(r.name) + "," + (r.keep ? "keep" : "discard") + "," +
           std::string(to_string(r.rule)) + "," + csv_escape(r.evidence) + "\n";
  }
  return out;
}

}  // namespace iltm
