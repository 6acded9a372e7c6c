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

#include "test_util.hpp"

#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>

using namespace iltm;

namespace {

// Exponential recursion; only for short strings.
std::size_t naive_edit(std::string_view a, std::string_view b) {
  if (a.empty()) return b.size();
  if (b.empty()) return a.size();
  const std::size_t sub = naive_edit(a.substr(1), b.substr(1)) + (a[0] == b[0] ? 0 : 1);
  return std::min({sub, naive_edit(a.substr(1), b) + 1, naive_edit(a, b.substr(1)) + 1});
}

// Numeric features plus a binary class target; `value(r, c)` fills the cells.
template <class F>
std::shared_ptr<const TabularTask> make_task(const std::string& name, int n, int f, F value) {
  TabularTask t;
  t.name = name;
  for (int c = 0; c < f; ++c) t.schema.columns.push_back({"f" + std::to_string(c), ColumnKind::kNumeric, {}});
  t.schema.columns.push_back({"y", ColumnKind::kClassTarget, {"a", "b"}});
  t.X.resize(n, f);
  t.y.resize(static_cast<std::size_t>(n));
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < f; ++c) t.X(r, c) = value(r, c);
    t.y[static_cast<std::size_t>(r)] = 1 + r % 2;
  }
  t.K = 2;
  return std::make_shared<const TabularTask>(std::move(t));
}

std::shared_ptr<const TabularTask> unique_task(const std::string& name, int n, int f, double base) {
  return make_task(name, n, f, [base](int r, int c) { return base + 1000.0 * r + c; });
}

const DiscardRecord& find(const std::vector<DiscardRecord>& recs, const std::string& name) {
  const auto it = std::find_if(recs.begin(), recs.end(), [&](const auto& r) { return r.name == name; });
  REQUIRE(it != recs.end());
  return *it;
}

}  // namespace

TEST_CASE("sanitize_name lowercases, trims and collapses separators") {
  CHECK(sanitize_name("Credit-G ") == "credit-g");
  CHECK(sanitize_name("Heart  Disease!!") == "heart-disease");
  for (const char* s : {"Credit-G ", "  __a..B  c__", "", "x"}) {
    CHECK(sanitize_name(sanitize_name(s)) == sanitize_name(s));
  }
}

TEST_CASE("clean_keywords drops keywords, years and digits") {
  const DedupeConfig cfg;
  CHECK(clean_keywords("airlines_small_2016_processed", cfg.keywords) == "airlines");
  CHECK(clean_keywords("splice", cfg.keywords) == "splice");
  CHECK(clean_keywords("dataset-version-2", cfg.keywords) == "dataset");
  CHECK(clean_keywords("Medium Regression", cfg.keywords).empty());
}

TEST_CASE("levenshtein similarity against a recursive oracle") {
  CHECK(levenshtein_distance("kitten", "sitting") == 3);
  CHECK(levenshtein_similarity("kitten", "sitting") == doctest::Approx(4.0 / 7.0).epsilon(1e-12));
  CHECK(levenshtein_similarity("abc", "abc") == 1.0);
  CHECK(levenshtein_similarity("", "") == 1.0);
  CHECK(levenshtein_similarity("", "abc") == 0.0);
  std::mt19937 gen(5);
  std::uniform_int_distribution<int> len(0, 6), ch(0, 2);
  for (int i = 0; i < 300; ++i) {
    std::string a, b;
    for (int k = len(gen); k > 0; --k) a += static_cast<char>('a' + ch(gen));
    for (int k = len(gen); k > 0; --k) b += static_cast<char>('a' + ch(gen));
    CHECK(levenshtein_distance(a, b) == naive_edit(a, b));
    const double s = levenshtein_similarity(a, b);
    CHECK(s == levenshtein_similarity(b, a));
    CHECK(s >= 0.0);
    CHECK(s <= 1.0);
    CHECK((s == 1.0) == (a == b));
  }
}

TEST_CASE("token sort ratio ignores word order") {
  CHECK(token_sort_ratio("heart disease", "disease heart") == 1.0);
  CHECK(token_sort_ratio("heart_disease", "disease-heart") == 1.0);
  CHECK(token_sort_ratio("aaaa bbbb", "xyzw qrst") < DedupeConfig{}.lambda);
  CHECK(token_sort_ratio("one two", "two three") == token_sort_ratio("two three", "one two"));
}

TEST_CASE("sample leak matches value multisets regardless of column order") {
  auto eval = make_task("ev", 1, 3, [](int, int c) { return 1.0 + c; });
  auto perm = make_task("cand", 1, 3, [](int, int c) { return c == 0 ? 3.0 : c; });
  auto other = make_task("cand", 4, 3, [](int, int c) { return c == 2 ? 4.0 : 1.0 + c; });
  auto wider = make_task("cand", 1, 4, [](int, int c) { return 1.0 + c % 3; });
  CHECK(sample_leak_check(*eval, *perm, 5, 1).found);
  CHECK_FALSE(sample_leak_check(*eval, *other, 5, 1).found);
  CHECK_FALSE(sample_leak_check(*eval, *wider, 5, 1).found);
}

TEST_CASE("sample leak is invariant under candidate column permutations") {
  auto eval = unique_task("ev", 40, 6, 0.25);
  // The candidate copies eval row 17 somewhere inside otherwise fresh rows.
  std::vector<int> cols(6);
  std::iota(cols.begin(), cols.end(), 0);
  std::mt19937 gen(11);
  for (int trial = 0; trial < 10; ++trial) {
    std::shuffle(cols.begin(), cols.end(), gen);
    auto cand = make_task("cand", 30, 6, [&](int r, int c) {
      return r == 9 ? eval->X(17, cols[static_cast<std::size_t>(c)]) : -5.0 - r - 0.1 * c;
    });
    // With k equal to N every eval row is sampled.
    const LeakMatch m = sample_leak_check(*eval, *cand, 40, 3);
    CHECK(m.found);
    CHECK(m.eval_row == 17);
    CHECK(m.candidate_row == 9);
  }
}

TEST_CASE("canonical rows render categorical cells by vocabulary") {
  TabularTask t;
  t.name = "c";
  t.schema.columns = {{"a", ColumnKind::kNumeric, {}}, {"b", ColumnKind::kCategorical, {"p", "q"}},
                      {"y", ColumnKind::kClassTarget, {"0", "1"}}};
  t.X.resize(1, 2);
  t.X << 0.1, 1;
  t.y = {1};
  t.K = 2;
  const auto row = canonical_row(t, 0);
  CHECK(row == std::vector<std::string>{"0.1", "q"});
}

TEST_CASE("pipeline rule examples") {
  const std::vector<std::shared_ptr<const TabularTask>> evals = {
      unique_task("credit-g", 50, 4, 0.5), unique_task("vehicle", 846, 19, 0.75)};
  std::vector<DatasetRef> cands;
  cands.push_back(DatasetRef::from_task(unique_task("credit-g-v2", 30, 3, 10.5)));
  cands.push_back(DatasetRef::from_task(unique_task("cars", 846, 19, 20.5)));
  DatasetRef huge;
  huge.name = "huge";
  huge.n_rows = 1000001;
  huge.n_features = 5;
  huge.load = [] { return unique_task("huge", 1, 5, 0); };
  cands.push_back(huge);
  cands.push_back(DatasetRef::from_task(unique_task("zebra", 30, 3, 30.5)));
  const auto recs = run_pipeline(cands, evals, DedupeConfig{});
  REQUIRE(recs.size() == 4);
  CHECK(find(recs, "credit-g-v2").rule == DedupeRule::kSubstring);
  CHECK(find(recs, "cars").rule == DedupeRule::kStructural);
  CHECK(find(recs, "cars").evidence.find("vehicle") != std::string::npos);
  CHECK(find(recs, "huge").rule == DedupeRule::kEdgeCase);
  CHECK(find(recs, "zebra").keep);
  CHECK(find(recs, "zebra").rule == DedupeRule::kNone);
}

TEST_CASE("every evaluation dataset fed as a candidate is excluded by exact name") {
  MetaCollection evals{CollectionRole::kMetaTest,
                       {unique_task("Credit-G", 20, 3, 0), unique_task("splice", 20, 4, 100)}};
  MetaCollection cands = evals;
  cands.role = CollectionRole::kMetaTrain;
  for (const auto& r : run_pipeline(cands, evals, DedupeConfig{})) {
    CHECK_FALSE(r.keep);
    CHECK(r.rule == DedupeRule::kExactName);
  }
}

TEST_CASE("explicit eval names come first") {
  DedupeConfig cfg;
  cfg.explicit_eval = {"legacy-copy"};
  const std::vector<std::shared_ptr<const TabularTask>> evals = {unique_task("legacy", 20, 3, 0)};
  const auto recs = run_pipeline({DatasetRef::from_task(unique_task("legacy-copy", 20, 3, 0))}, evals, cfg);
  CHECK(recs[0].rule == DedupeRule::kExplicitEval);
}

TEST_CASE("pipeline verdicts do not depend on candidate order") {
  const std::vector<std::shared_ptr<const TabularTask>> evals = {unique_task("alpha", 30, 3, 0),
                                                                 unique_task("beta", 25, 4, 1e4)};
  std::vector<DatasetRef> cands;
  cands.push_back(DatasetRef::from_task(unique_task("alpha-2", 10, 3, 7)));
  cands.push_back(DatasetRef::from_task(unique_task("betta", 40, 5, 8)));
  cands.push_back(DatasetRef::from_task(unique_task("gamma", 30, 3, 9)));
  cands.push_back(DatasetRef::from_task(unique_task("tiny", 5, 3, 10)));
  cands.push_back(DatasetRef::from_task(unique_task("delta", 33, 4, 1e4)));
  const auto base = run_pipeline(cands, evals, DedupeConfig{});
  std::mt19937 gen(4);
  for (int trial = 0; trial < 5; ++trial) {
    auto shuffled = cands;
    std::shuffle(shuffled.begin(), shuffled.end(), gen);
    DedupeConfig cfg;
    cfg.threads = 1 + trial % 3;
    for (const auto& r : run_pipeline(shuffled, evals, cfg)) {
      const auto& b = find(base, r.name);
      CHECK(r.keep == b.keep);
      CHECK(r.rule == b.rule);
      CHECK(r.evidence == b.evidence);
    }
  }
}

TEST_CASE("unreadable candidate values are an io-error discard") {
  const auto dir = iltm_test::scratch_dir("dedupe_io");
  {
    std::ofstream(dir / "broken.schema") << "a,numeric\nb,numeric\ny,class_target\n";
    // Enough rows to pass the edge-case bounds; the last record is short.
    std::ofstream csv(dir / "broken.csv");
    csv << "a,b,y\n";
    for (int r = 0; r < 12; ++r) csv << r << "," << r + 0.5 << ",1\n";
    csv << "3,4\n";
  }
  // Values are only read when an eval shares the feature count.
  const std::vector<std::shared_ptr<const TabularTask>> evals = {unique_task("zzz", 20, 3, 0),
                                                                 unique_task("www", 20, 2, 0)};
  DatasetRef loadfail;
  loadfail.name = "qqq";
  loadfail.n_rows = 30;
  loadfail.n_features = 3;
  loadfail.load = []() -> std::shared_ptr<const TabularTask> { throw DataError("gone"); };
  const auto recs = run_pipeline({DatasetRef::from_file(dir / "broken.csv"),
                                  DatasetRef::from_file(dir / "missing.csv"), loadfail},
                                 evals, DedupeConfig{});
  for (const auto& r : recs) {
    INFO(r.name);
    CHECK_FALSE(r.keep);
    CHECK(r.rule == DedupeRule::kIoError);
  }
}

TEST_CASE("config validation and discard csv") {
  DedupeConfig cfg;
  cfg.lambda = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = DedupeConfig{};
  cfg.k = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  const std::vector<DiscardRecord> recs = {{"a", true, DedupeRule::kNone, ""},
                                           {"b,c", false, DedupeRule::kSampleLeak, "x row 1 = row 2"}};
  CHECK(discard_csv(recs) ==
        "name,verdict,rule,evidence\na,keep,none,\n\"b,c\",discard,sample-leak,x row 1 = row 2\n");
}
