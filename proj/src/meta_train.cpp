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


#include "iltm/meta_train.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>

namespace iltm {
namespace {

std::vector<int> train_rows(const TabularTask& task) {
  if (task.has_split("train")) return task.split("train");
  std::vector<int> all(static_cast<std::size_t>(task.n_rows()));
  std::iota(all.begin(), all.end(), 0);
  return all;
}

std::vector<int> zero_based(const TabularTask& task, std::span<const int> rows) {
  std::vector<int> out;
  out.reserve(rows.size());
  for (int r : rows) out.push_back(static_cast<int>(task.y[static_cast<std::size_t>(r)]) - 1);
  return out;
}

Mat softmax_rows(const Mat& z) {
  Mat p(z.rows(), z.cols());
  for (Index r = 0; r < z.rows(); ++r) {
    const double mx = z.row(r).maxCoeff();
    p.row(r) = (z.row(r).array() - mx).exp();
    p.row(r) /= p.row(r).sum();
  }
  return p;
}

bool usable_classification(const TabularTask& t) { return t.K >= 2; }

}  // namespace

// ---------------------------------------------------------------- cache

TaskCache build_task_cache(std::shared_ptr<const TabularTask> task, PsiTag tag, const GbdtConfig& gbdt,
                           std::uint64_t seed) {
  const auto train = train_rows(*task);
  if (train.empty()) throw DataError("task '" + task->name + "' has an empty train split");
  const FitSplit split = dynamic_fit_split(static_cast<int>(train.size()), derive_seed(seed, 0xf17));
  TaskCache c;
  c.task = task;
  c.seed = seed;
  for (int i : split.gbdt_fit) c.gbdt_rows.push_back(train[static_cast<std::size_t>(i)]);
  for (int i : split.hypernet_pool) c.pool_rows.push_back(train[static_cast<std::size_t>(i)]);
  const auto features = task->features();
  c.psi = fit_psi(tag, take_rows(task->X, c.gbdt_rows), take(task->y, c.gbdt_rows), task->K, features, gbdt,
                  derive_seed(seed, 0x6bd7));
  return c;
}

void TaskCache::save(Container& c) const {
  c.meta["kind"] = "task-cache";
  c.meta["task"] = task ? task->name : "";
  c.meta["seed"] = std::to_string(seed);
  c.put_ints("gbdt_rows", gbdt_rows);
  c.put_ints("pool_rows", pool_rows);
  psi.save(c, "psi.");
}

TaskCache TaskCache::load(const Container& c, std::shared_ptr<const TabularTask> task) {
  if (c.meta.count("kind") == 0 || c.get_meta("kind") != "task-cache") throw DataError("not a task cache");
  if (c.get_meta("task") != task->name) throw DataError("cache belongs to task '" + c.get_meta("task") + "'");
  TaskCache t;
  t.task = std::move(task);
  t.seed = std::stoull(c.get_meta("seed"));
  t.gbdt_rows = c.get_ints("gbdt_rows");
  t.pool_rows = c.get_ints("pool_rows");
  t.psi = PsiVariant::load(c, "psi.");
  return t;
}

std::string cache_file_name(const std::string& task_name, PsiTag tag, std::uint64_t seed,
                            const GbdtConfig& gbdt) {
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(gbdt.hash()));
  return task_name + "." + std::string(to_string(tag)) + "." + std::to_string(seed) + "." + hash + ".iltmcache";
}

TaskCache load_or_build_cache(std::shared_ptr<const TabularTask> task, const std::filesystem::path& dir,
                              PsiTag tag, const GbdtConfig& gbdt, std::uint64_t seed, bool build,
                              bool write) {
  const auto path = dir / cache_file_name(task->name, tag, seed, gbdt);
  if (std::filesystem::exists(path)) return TaskCache::load(Container::load(path), task);
  if (!build) throw DataError("embedding cache missing for task '" + task->name + "' (run build-cache)");
  TaskCache c = build_task_cache(task, tag, gbdt, seed);
  if (write) {
    Container out;
    c.save(out);
    out.save(path);
  }
  return c;
}

// ---------------------------------------------------------------- optimizer

void optimizer_update(ParamSet& params, const ParamSet& grad, OptimizerKind kind, double lr, AdamState& s) {
  if (kind == OptimizerKind::kSgd) {
    for (std::size_t i = 0; i < params.size(); ++i) params.values[i] -= lr * grad.values[i];
    return;
  }
  if (s.m.size() != params.size()) {
    s.m = params.zeros_like();
    s.v = params.zeros_like();
    s.step = 0;
  }
  ++s.step;
  const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
  const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    s.m.values[i] = s.beta1 * s.m.values[i] + (1.0 - s.beta1) * grad.values[i];
    s.v.values[i] = s.beta2 * s.v.values[i] + (1.0 - s.beta2) * grad.values[i].cwiseAbs2();
    params.values[i].array() -=
        lr * (s.m.values[i].array() / c1) / ((s.v.values[i].array() / c2).sqrt() + s.eps);
  }
}

// ---------------------------------------------------------------- draws

Draw draw_subsets(const TaskCache& cache, int batch_gen, int batch_grad, std::uint64_t seed) {
  const int pool = static_cast<int>(cache.pool_rows.size());
  if (pool < 3) throw DataError("task '" + cache.task->name + "' has fewer than 3 pool rows");
  const int n_gen = std::max(2, std::min(batch_gen, (pool + 1) / 2));
  const int n_grad = std::max(1, std::min(batch_grad, pool - n_gen));
  Rng rng(seed);
  auto picked = sample_without_replacement(cache.pool_rows, static_cast<std::size_t>(n_gen + n_grad), rng);
  Draw d;
  d.gen.assign(picked.begin(), picked.begin() + n_gen);
  d.grad.assign(picked.begin() + n_gen, picked.end());
  d.omega_seed = derive_seed(seed, 0x0e6a);
  return d;
}

Embedded embed_rows(const TaskCache& cache, std::span<const int> fit_rows, std::span<const int> rows, int r,
                    int d_main, std::uint64_t omega_seed) {
  const auto& X = cache.task->X;
  const SpMat psi_fit = build_psi(cache.psi, take_rows(X, fit_rows));
  Embedded e;
  e.projection = fit_projection(psi_fit, r, d_main, omega_seed);
  e.fit = apply_projection(e.projection, psi_fit);
  e.rows = apply_projection(e.projection, build_psi(cache.psi, take_rows(X, rows)));
  return e;
}

double task_loss(const HyperNet& phi, const TaskCache& cache, const Draw& draw, const MetaTrainConfig& cfg,
                 ParamSet* grad) {
  const auto& task = *cache.task;
  const Embedded e = embed_rows(cache, draw.gen, draw.grad, cfg.random_features, phi.config.d_main,
                                draw.omega_seed);
  Tape tape;
  const auto ids = mark_params(tape, phi.params);
  const Tape::Id xg = tape.constant(e.fit);
  const auto gen_labels = zero_based(task, draw.gen);
  const MainIds net = generate_on_tape(tape, phi.config, ids, xg, gen_labels, task.K);
  const auto [h_q, logits] = forward_main_on_tape(tape, net, tape.constant(e.rows));
  Tape::Id out = logits;
  if (cfg.retrieval_in_training && cfg.alpha > 0.0) {
    const auto [h_c, unused] = forward_main_on_tape(tape, net, xg);
    (void)unused;
    const Mat y_ctx = one_hot_labels(take(task.y, draw.gen), task.K);
    out = combine_on_tape(tape, logits, retrieval_on_tape(tape, h_q, h_c, y_ctx, cfg.tau), cfg.alpha);
  }
  const Tape::Id loss = tape.ce_loss(out, one_hot_labels(take(task.y, draw.grad), task.K));
  const double value = tape.value(loss)(0, 0);
  if (!std::isfinite(value)) throw NumericError("non-finite meta-training loss on task '" + task.name + "'");
  if (grad != nullptr) {
    tape.backward(loss);
    tape.accumulate_grads(*grad);
  }
  return value;
}

StepReport meta_step(HyperNet& phi, AdamState& opt, std::span<const TaskCache> tasks, const MetaTrainConfig& cfg,
                     int step) {
  if (tasks.empty()) throw DataError("meta_step: empty task collection");
  if (cfg.accumulation < 1 || cfg.batch_gen < 1 || cfg.batch_grad < 1) {
    throw ConfigError("accumulation and batch sizes must be >= 1");
  }
  const int A = cfg.accumulation;
  std::vector<ParamSet> grads(static_cast<std::size_t>(A));
  std::vector<double> losses(static_cast<std::size_t>(A), 0.0);
  std::vector<char> used(static_cast<std::size_t>(A), 0);
  parallel_for(A, cfg.threads, [&](int a) {
    const std::uint64_t s = derive_seed(cfg.seed, 0x57e9, static_cast<std::uint64_t>(step),
                                        static_cast<std::uint64_t>(a));
    Rng rng(s);
    const auto& cache = tasks[std::uniform_int_distribution<std::size_t>(0, tasks.size() - 1)(rng)];
    if (!usable_classification(*cache.task)) return;
    const Draw draw = draw_subsets(cache, cfg.batch_gen, cfg.batch_grad, derive_seed(s, 1));
    auto& g = grads[static_cast<std::size_t>(a)];
    g = phi.params.zeros_like();
    losses[static_cast<std::size_t>(a)] = task_loss(phi, cache, draw, cfg, &g);
    used[static_cast<std::size_t>(a)] = 1;
  });
  StepReport rep;
  rep.step = step;
  ParamSet total = phi.params.zeros_like();
  for (int a = 0; a < A; ++a) {
    if (!used[static_cast<std::size_t>(a)]) {
      ++rep.skipped;
      continue;
    }
    for (std::size_t i = 0; i < total.size(); ++i) total.values[i] += grads[static_cast<std::size_t>(a)].values[i];
    rep.loss += losses[static_cast<std::size_t>(a)];
    ++rep.tasks_used;
  }
  if (rep.skipped > 0) {
    std::clog << "warning: step " << step << " skipped " << rep.skipped << " draw(s) of single-class tasks\n";
  }
  if (rep.tasks_used == 0) throw DataError("meta_step: no task with at least two classes");
  rep.loss /= rep.tasks_used;
  optimizer_update(phi.params, total, cfg.optimizer, cfg.learning_rate, opt);
  return rep;
}

double meta_validate(const HyperNet& phi, std::span<const TaskCache> tasks, const MetaTrainConfig& cfg,
                     std::uint64_t seed) {
  std::vector<double> scores(tasks.size(), std::numeric_limits<double>::quiet_NaN());
  parallel_for(static_cast<int>(tasks.size()), cfg.threads, [&](int i) {
    const auto& cache = tasks[static_cast<std::size_t>(i)];
    const auto& task = *cache.task;
    if (!usable_classification(task) || !task.has_split("test") || task.split("test").empty()) return;
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    const auto n_gen = std::min<std::size_t>(static_cast<std::size_t>(cfg.batch_gen), cache.pool_rows.size());
    const auto gen = sample_without_replacement(cache.pool_rows, n_gen, rng);
    const auto& test = task.split("test");
    const Embedded e = embed_rows(cache, gen, test, cfg.random_features, phi.config.d_main,
                                  derive_seed(seed, static_cast<std::uint64_t>(i), 2));
    const MainNet net = generate_weights(phi, e.fit, take(task.y, gen), task.K);
    const MainOutput q = forward_main(net, e.rows);
    Mat logits = q.logits;
    if (cfg.retrieval_in_training && cfg.alpha > 0.0) {
      const MainOutput c = forward_main(net, e.fit);
      logits = combined_logits(q.logits, retrieval_logits(q.H, c.H, one_hot_labels(take(task.y, gen), task.K), cfg.tau),
                               cfg.alpha);
    }
    const auto y_test = take(task.y, test);
    try {
      scores[static_cast<std::size_t>(i)] = auc(softmax_rows(logits), y_test);
    } catch (const NumericError&) {
      // Test split with a single class: AUC undefined, task left out.
    }
  });
  double sum = 0.0;
  int n = 0;
  for (double s : scores) {
    if (std::isnan(s)) continue;
    sum += s;
    ++n;
  }
  if (n == 0) throw DataError("meta_validate: no validation task produced an AUC");
  return sum / n;
}

int select_checkpoint(std::span<const double> scores) {
  if (scores.empty()) throw DataError("select_checkpoint: empty history");
  int best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  }
  return best;
}

// ---------------------------------------------------------------- checkpoint

Container Checkpoint::to_container() const {
  Container c;
  c.meta["kind"] = "checkpoint";
  c.meta["version"] = version_string();
  for (const auto& [k, v] : config_echo) c.meta["cfg." + k] = v;
  phi.save(c, "phi.");
  c.put_scalar("step", step);
  c.put_ints("history_steps", history_steps);
  c.put("history_scores", history_scores);
  c.put("adam.hyper", std::vector<double>{opt.beta1, opt.beta2, opt.eps, static_cast<double>(opt.step)});
  for (std::size_t i = 0; i < opt.m.size(); ++i) {
    c.put("adam.m." + opt.m.names[i], opt.m.values[i]);
    c.put("adam.v." + opt.v.names[i], opt.v.values[i]);
  }
  return c;
}

Checkpoint Checkpoint::from_container(const Container& c) {
  if (c.meta.count("kind") == 0 || c.get_meta("kind") != "checkpoint") throw DataError("not a checkpoint file");
  Checkpoint k;
  for (const auto& [key, v] : c.meta) {
    if (key.rfind("cfg.", 0) == 0) k.config_echo[key.substr(4)] = v;
  }
  k.phi = HyperNet::load(c, "phi.");
  k.step = static_cast<int>(c.get_scalar("step"));
  k.history_steps = c.get_ints("history_steps");
  k.history_scores = c.get_vec("history_scores");
  const auto h = c.get_vec("adam.hyper");
  k.opt.beta1 = h.at(0);
  k.opt.beta2 = h.at(1);
  k.opt.eps = h.at(2);
  k.opt.step = static_cast<long>(h.at(3));
  if (c.has("adam.m." + k.phi.params.names.front())) {
    k.opt.m = k.phi.params.zeros_like();
    k.opt.v = k.phi.params.zeros_like();
    for (std::size_t i = 0; i < k.opt.m.size(); ++i) {
      k.opt.m.values[i] = c.get_mat("adam.m." + k.opt.m.names[i]);
      k.opt.v.values[i] = c.get_mat("adam.v." + k.opt.v.names[i]);
    }
  }
  return k;
}

MetaTrainResult run_meta_train(HyperNet phi, std::span<const TaskCache> train, std::span<const TaskCache> val,
                               const MetaTrainConfig& cfg, const std::filesystem::path& out_dir,
                               const std::map<std::string, std::string>& echo,
                               const std::function<void(const StepReport&)>& on_step) {
  MetaTrainResult res;
  Checkpoint& state = res.final_state;
  state.config_echo = echo;
  const auto start = std::chrono::steady_clock::now();
  const bool write = !out_dir.empty();
  std::ofstream log, timing;
  if (write) {
    std::filesystem::create_directories(out_dir);
    log.open(out_dir / "metaval.csv");
    log << "step,score,train_loss\n";
    timing.open(out_dir / "timing.csv");
    timing << "step,seconds\n";
  }
  const std::uint64_t val_seed = derive_seed(cfg.seed, 0xfa1);
  double last_loss = std::numeric_limits<double>::quiet_NaN();
  auto evaluate = [&](int step) {
    if (val.empty()) return;
    state.phi = phi;
    state.step = step;
    const double score = meta_validate(phi, val, cfg, val_seed);
    state.history_steps.push_back(step);
    state.history_scores.push_back(score);
    if (!write) return;
    const auto path = out_dir / ("ckpt_step" + std::to_string(step) + ".iltm");
    state.save(path);
    res.checkpoints.push_back(path);
    log << step << ',' << format_double(score) << ',' << format_double(last_loss) << '\n';
    log.flush();
    timing << step << ','
           << std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() << '\n';
  };
  evaluate(0);
  for (int step = 1; step <= cfg.max_steps; ++step) {
    const StepReport rep = meta_step(phi, state.opt, train, cfg, step);
    last_loss = rep.loss;
    res.steps.push_back(rep);
    if (on_step) on_step(rep);
    if ((cfg.val_period > 0 && step % cfg.val_period == 0) || step == cfg.max_steps) evaluate(step);
  }
  state.phi = phi;
  state.step = cfg.max_steps;
  if (!state.history_scores.empty()) {
    res.best_index = select_checkpoint(state.history_scores);
    if (write) res.best_path = res.checkpoints[static_cast<std::size_t>(res.best_index)];
  }
  if (write) {
    const auto final_path = out_dir / "final.iltm";
    state.save(final_path);
    if (res.best_path.empty()) res.best_path = final_path;
  }
  return res;
}

}  // namespace iltm
