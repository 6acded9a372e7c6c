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


// Meta-training of the hypernetwork over a task collection with gradient
// accumulation, few-shot meta-validation and checkpoint selection.
#pragma once

#include <filesystem>
#include <memory>

#include "iltm/hypernet.hpp"
#include "iltm/projection.hpp"
#include "iltm/psi.hpp"

namespace iltm {

/// Per-task state fitted off-line: psi (robust scaler and/or GBDT) on the
/// GBDT half of the train split, and the rows that feed the hypernetwork.
struct TaskCache {
  std::shared_ptr<const TabularTask> task;
  PsiVariant psi;
  std::vector<int> gbdt_rows;  // absolute row ids
  std::vector<int> pool_rows;  // absolute row ids
  std::uint64_t seed = 0;

  void save(Container& c) const;
  static TaskCache load(const Container& c, std::shared_ptr<const TabularTask> task);
};

TaskCache build_task_cache(std::shared_ptr<const TabularTask> task, PsiTag tag, const GbdtConfig& gbdt,
                           std::uint64_t seed);
/// File name keyed by task name, variant, seed and GBDT configuration hash.
std::string cache_file_name(const std::string& task_name, PsiTag tag, std::uint64_t seed,
                            const GbdtConfig& gbdt);
/// Loads the cache beside the task when present; otherwise builds it (and
/// writes it when `write` is set) or throws DataError when `build` is unset.
TaskCache load_or_build_cache(std::shared_ptr<const TabularTask> task, const std::filesystem::path& dir,
                              PsiTag tag, const GbdtConfig& gbdt, std::uint64_t seed, bool build,
                              bool write);

enum class OptimizerKind { kAdam, kSgd };

struct MetaTrainConfig {
  int accumulation = 40;  // A
  double learning_rate = 1e-4;
  int max_steps = 1000;
  int batch_gen = 2048;
  int batch_grad = 2048;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  std::uint64_t seed = 0;
  int val_period = 100;
  bool retrieval_in_training = false;
  double alpha = 0.5;
  double tau = 2.0;
  int random_features = kDefaultRandomFeatures;
  HyperNetConfig hypernet;
  int threads = 1;
};

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long step = 0;
  ParamSet m;
  ParamSet v;
};

/// phi <- phi - lr * update(grad). Adam keeps its moments in `state`.
void optimizer_update(ParamSet& params, const ParamSet& grad, OptimizerKind kind, double lr, AdamState& state);

/// Generation and gradient subsets of one draw (absolute row ids, disjoint).
struct Draw {
  std::vector<int> gen;
  std::vector<int> grad;
  std::uint64_t omega_seed = 0;
};
Draw draw_subsets(const TaskCache& cache, int batch_gen, int batch_grad, std::uint64_t seed);

/// Embeds `rows` with the cached psi and a projection fitted on `fit_rows`.
struct Embedded {
  ProjectionParams projection;
  Mat fit;
  Mat rows;
};
Embedded embed_rows(const TaskCache& cache, std::span<const int> fit_rows, std::span<const int> rows,
                    int r, int d_main, std::uint64_t omega_seed);

/// Cross-entropy of one draw; adds d loss / d phi into `grad` when given.
double task_loss(const HyperNet& phi, const TaskCache& cache, const Draw& draw, const MetaTrainConfig& cfg,
                 ParamSet* grad);

struct StepReport {
  int step = 0;
  double loss = 0.0;
  int tasks_used = 0;
  int skipped = 0;
};

/// One accumulation step: A task draws, summed gradients, one update.
StepReport meta_step(HyperNet& phi, AdamState& opt, std::span<const TaskCache> tasks,
                     const MetaTrainConfig& cfg, int step);

/// Mean few-shot test AUC: one generation batch per task, no fine-tuning.
double meta_validate(const HyperNet& phi, std::span<const TaskCache> tasks, const MetaTrainConfig& cfg,
                     std::uint64_t seed);

/// Argmax, earliest on ties.
int select_checkpoint(std::span<const double> scores);

struct Checkpoint {
  HyperNet phi;
  AdamState opt;
  int step = 0;
  std::vector<int> history_steps;
  std::vector<double> history_scores;
  std::map<std::string, std::string> config_echo;

  Container to_container() const;
  static Checkpoint from_container(const Container& c);
  void save(const std::filesystem::path& path) const { to_container().save(path); }
  static Checkpoint load(const std::filesystem::path& path) { return from_container(Container::load(path)); }
};

struct MetaTrainResult {
  Checkpoint final_state;
  std::vector<StepReport> steps;
  std::vector<std::filesystem::path> checkpoints;
  int best_index = -1;
  std::filesystem::path best_path;
};

/// Full loop. Checkpoints and the meta-val log land in `out_dir` when it is
/// non-empty. `echo` is stored in each checkpoint.
MetaTrainResult run_meta_train(HyperNet phi, std::span<const TaskCache> train,
                               std::span<const TaskCache> val, const MetaTrainConfig& cfg,
                               const std::filesystem::path& out_dir,
                               const std::map<std::string, std::string>& echo = {},
                               const std::function<void(const StepReport&)>& on_step = {});

}  // namespace iltm
