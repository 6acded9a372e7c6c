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


#include "iltm/commands.hpp"

#include "iltm/dedupe.hpp"
#include "iltm/gradcheck.hpp"
#include "iltm/hpo.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>

namespace iltm {

namespace fs = std::filesystem;

namespace {

std::vector<ConfigKey> common_keys() {
  return {
      {"out", "iltm_out", "output directory"},
      {"seed", "0", "base random seed"},
      {"threads", "0", "worker count, 0 for ILTM_THREADS or all cores"},
  };
}

std::vector<ConfigKey> gbdt_keys() {
  return {
      {"gbdt_rounds", "100", "boosting rounds"},
      {"gbdt_depth", "0", "tree depth, 0 for the variant default"},
      {"gbdt_lr", "0.1", "boosting learning rate"},
      {"gbdt_patience", "50", "early-stopping rounds"},
  };
}

std::vector<ConfigKey> inference_keys() {
  return {
      {"preprocessing", "RX", "R, X, C, RX or RC"},
      {"batch", "2048", "generation batch and fine-tune mini-batch"},
      {"n_ens", "8", "ensemble members"},
      {"feature_bagging", "true", "random feature subset per member"},
      {"bag_fraction", "0.8", "kept feature fraction under bagging"},
      {"vary_member_seeds", "true", "distinct seeds per member"},
      {"finetune", "true", "fine-tune the generated weights"},
      {"finetune_lr", "0.0001", "fine-tune learning rate"},
      {"finetune_steps", "1024", "fine-tune step cap"},
      {"dropout", "0", "fine-tune dropout rate"},
      {"finetune_patience", "16", "evaluations without improvement"},
      {"finetune_holdout", "0.1", "early-stop fraction of the train split"},
      {"finetune_eval_every", "1", "steps between early-stop evaluations"},
      {"finetune_data", "entire", "entire or bootstrap"},
      {"gbdt_split", "dynamic", "dynamic or entire"},
      {"gbdt_fit_each", "false", "fit the embedding per member"},
      {"retrieval", "true", "mix retrieval logits"},
      {"alpha", "0.5", "retrieval weight"},
      {"tau", "2.0", "retrieval temperature"},
      {"context_cap", "10000", "retrieval context rows"},
      {"regression_retrieval", "false", "retrieval for regression tasks"},
      {"regression_calibration", "true", "least-squares output gain and offset"},
      {"random_features", "32768", "random-feature width"},
      {"scratch", "false", "random-init main network"},
  };
}

std::vector<ConfigKey> concat(std::vector<std::vector<ConfigKey>> parts) {
  std::vector<ConfigKey> out;
  for (auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

int threads_of(const RunConfig& rc) {
  const int t = rc.get_int("threads");
  return t > 0 ? t : worker_count();
}

const std::string& required(const RunConfig& rc, const std::string& key) {
  const std::string& v = rc.get(key);
  if (v.empty()) throw ConfigError(rc.command() + " needs " + key);
  return v;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  out.flush();
  if (!out) throw DataError("cannot write " + path.string());
}

fs::path prepare_out(const RunConfig& rc) {
  const fs::path out = required(rc, "out");
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw DataError("cannot create " + out.string() + ": " + ec.message());
  rc.write_manifest(out / "manifest.txt");
  return out;
}

std::vector<std::shared_ptr<const TabularTask>> load_dir(const fs::path& dir) {
  std::vector<std::shared_ptr<const TabularTask>> out;
  for (const auto& p : list_task_files(dir)) out.push_back(std::make_shared<const TabularTask>(load_task(p)));
  if (out.empty()) throw DataError("no tasks in " + dir.string());
  return out;
}

std::string with_point(double v) {
  std::string s = format_double(v);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

std::vector<TaskCache> caches_for(const std::vector<std::shared_ptr<const TabularTask>>& tasks,
                                  const fs::path& dir, PsiTag tag, const GbdtConfig& g,
                                  std::uint64_t seed, bool build, int threads) {
  std::vector<TaskCache> out(tasks.size());
  parallel_for(static_cast<int>(tasks.size()), threads, [&](int i) {
    out[static_cast<std::size_t>(i)] =
        load_or_build_cache(tasks[static_cast<std::size_t>(i)], dir, tag, g, seed, build, build);
  });
  return out;
}

// ---- commands

void cmd_build_cache(const RunConfig& rc, std::ostream& log) {
  const fs::path out = prepare_out(rc);
  const fs::path dir = required(rc, "data_dir");
  const PsiTag tag = parse_psi_tag(rc.get("preprocessing"));
  const GbdtConfig g = gbdt_config_from(rc, tag);
  const auto tasks = load_dir(dir);
  caches_for(tasks, dir, tag, g, rc.get_u64("seed"), true, threads_of(rc));
  std::string listing;
  for (const auto& t : tasks) listing += cache_file_name(t->name, tag, rc.get_u64("seed"), g) + "\n";
  write_text(out / "caches.txt", listing);
  log << "cached " << tasks.size() << " tasks in " << dir.string() << "\n";
}

void cmd_meta_train(const RunConfig& rc, std::ostream& log) {
  const fs::path out = prepare_out(rc);
  const PsiTag tag = parse_psi_tag(rc.get("preprocessing"));
  const GbdtConfig g = gbdt_config_from(rc, tag);
  const std::uint64_t seed = rc.get_u64("seed");
  const int threads = threads_of(rc);
  const bool build = rc.get_bool("build_cache");
  const fs::path train_dir = required(rc, "train_dir");
  const fs::path val_dir = required(rc, "val_dir");
  const auto train = caches_for(load_dir(train_dir), train_dir, tag, g, seed, build, threads);
  const auto val = caches_for(load_dir(val_dir), val_dir, tag, g, seed, build, threads);

  MetaTrainConfig cfg;
  cfg.accumulation = rc.get_int("accumulation");
  cfg.learning_rate = rc.get_double("learning_rate");
  cfg.max_steps = rc.get_int("max_steps");
  cfg.batch_gen = rc.get_int("batch_gen");
  cfg.batch_grad = rc.get_int("batch_grad");
  const std::string opt = rc.get("optimizer");
  if (opt == "adam") {
    cfg.optimizer = OptimizerKind::kAdam;
  } else if (opt == "sgd") {
    cfg.optimizer = OptimizerKind::kSgd;
  } else {
    throw ConfigError("optimizer must be adam or sgd");
  }
  cfg.seed = seed;
  cfg.val_period = rc.get_int("val_period");
  cfg.retrieval_in_training = rc.get_bool("retrieval_in_training");
  cfg.alpha = rc.get_double("alpha");
  cfg.tau = rc.get_double("tau");
  cfg.random_features = rc.get_int("random_features");
  cfg.hypernet.d_main = rc.get_int("d_main");
  cfg.hypernet.hidden = rc.get_int("hidden");
  cfg.hypernet.k_max = rc.get_int("k_max");
  cfg.hypernet.block_depth = rc.get_int("block_depth");
  cfg.threads = threads;
  if (cfg.accumulation < 1 || cfg.max_steps < 0 || cfg.batch_gen < 2 || cfg.batch_grad < 1 ||
      cfg.val_period < 1 || !(cfg.learning_rate > 0.0)) {
    throw ConfigError("meta-train: accumulation, steps, batches, val_period and learning_rate must be positive");
  }

  std::map<std::string, std::string> echo;
  for (const auto& k : rc.keys()) {
    if (k.name != "out") echo[k.name] = rc.get(k.name);
  }
  const HyperNet phi = HyperNet::init(cfg.hypernet, derive_seed(seed, 0x1f1));
  const auto result = run_meta_train(phi, train, val, cfg, out, echo, [&](const StepReport& s) {
    if (s.step % cfg.val_period == 0) log << "step " << s.step << " loss " << s.loss << "\n";
  });
  log << "checkpoints: " << result.checkpoints.size() << "\n";
  log << "best checkpoint: " << result.best_path.string() << "\n";
}

std::string predictions_csv(const Mat& P, std::span<const int> rows, bool regression) {
  std::string s = "row";
  if (regression) {
    s += ",prediction";
  } else {
    for (Index k = 0; k < P.cols(); ++k) s += ",p" + std::to_string(k + 1);
  }
  s += "\n";
  for (Index i = 0; i < P.rows(); ++i) {
    s += std::to_string(rows[static_cast<std::size_t>(i)]);
    for (Index k = 0; k < P.cols(); ++k) s += "," + format_double(P(i, k));
    s += "\n";
  }
  return s;
}

std::vector<int> eval_rows(const TabularTask& task, const std::string& split) {
  if (split == "all") {
    std::vector<int> all(static_cast<std::size_t>(task.n_rows()));
    for (int i = 0; i < task.n_rows(); ++i) all[static_cast<std::size_t>(i)] = i;
    return all;
  }
  return task.split(split);
}

void cmd_fit_predict(const RunConfig& rc, std::ostream& log) {
  const fs::path out = prepare_out(rc);
  const Checkpoint ck = Checkpoint::load(required(rc, "checkpoint"));
  const TabularTask task = load_task(required(rc, "task"));
  const InferenceConfig ic = inference_config_from(rc);
  log << "alpha=" << with_point(ic.retrieval.alpha) << " tau=" << with_point(ic.retrieval.tau)
      << " retrieval=" << (ic.retrieval.enabled ? "on" : "off") << "\n";

  const auto start = std::chrono::steady_clock::now();
  const EnsembleModel model = fit_task(ck.phi, task, ic);
  const double fit_seconds = seconds_since(start);
  const auto rows = eval_rows(task, rc.get("split"));
  const Mat P = predict(model, take_rows(task.X, rows), ic.threads);
  const Evaluation ev = evaluate_rows(model, task, rows);

  write_text(out / "predictions.csv", predictions_csv(P, rows, model.regression()));
  write_text(out / "metrics.txt", "task=" + task.name + "\nmetric=" + ev.metric +
                                      "\nvalue=" + format_double(ev.value) + "\n");
  write_text(out / "timing.csv", "phase,seconds\nfit," + format_double(fit_seconds) + "\n");
  model.to_container().save(out / "model.iltm");
  if (rc.get_bool("dump_weights")) {
    std::string w = "member,values\n";
    for (std::size_t m = 0; m < model.members.size(); ++m) {
      const Vec flat = model.members[m].theta.flatten();
      w += std::to_string(m);
      for (Index i = 0; i < flat.size(); ++i) w += "," + format_double(flat(i));
      w += "\n";
    }
    write_text(out / "weights.csv", w);
  }
  log << task.name << " " << ev.metric << "=" << format_double(ev.value) << "\n";
}

void cmd_evaluate(const RunConfig& rc, std::ostream& log) {
  const fs::path out = prepare_out(rc);
  const Checkpoint ck = Checkpoint::load(required(rc, "checkpoint"));
  const auto tasks = load_dir(required(rc, "data_dir"));
  const InferenceConfig ic = inference_config_from(rc);
  std::string results = "task,metric,value\n";
  std::string timing = "task,seconds\n";
  for (const auto& t : tasks) {
    const auto start = std::chrono::steady_clock::now();
    const EnsembleModel model = fit_task(ck.phi, *t, ic);
    const double secs = seconds_since(start);
    const Evaluation ev = evaluate_rows(model, *t, eval_rows(*t, rc.get("split")));
    results += csv_escape(t->name) + "," + ev.metric + "," + format_double(ev.value) + "\n";
    timing += csv_escape(t->name) + "," + format_double(secs) + "\n";
    log << t->name << " " << ev.metric << "=" << format_double(ev.value) << "\n";
  }
  write_text(out / "results.csv", results);
  write_text(out / "timing.csv", timing);
}

std::vector<std::string> read_list(const fs::path& path) {
  std::vector<std::string> out;
  const std::string text = read_file(path);
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string line = text.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty() && line.front() != '#') out.push_back(line);
    if (nl == std::string::npos) break;
    pos = nl + 1;
  }
  return out;
}

void cmd_dedupe(const RunConfig& rc, std::ostream& log) {
  const fs::path out = prepare_out(rc);
  DedupeConfig cfg;
  cfg.lambda = rc.get_double("lambda");
  cfg.k = rc.get_int("k");
  cfg.seed = rc.get_u64("seed");
  cfg.threads = threads_of(rc);
  cfg.validate();
  if (!rc.get("explicit_list").empty()) cfg.explicit_eval = read_list(rc.get("explicit_list"));

  std::vector<std::shared_ptr<const TabularTask>> evals;
  if (!rc.get("eval_list").empty()) {
    const fs::path list = rc.get("eval_list");
    for (const auto& entry : read_list(list)) {
      fs::path p = entry;
      if (p.is_relative()) p = list.parent_path() / p;
      try {
        evals.push_back(std::make_shared<const TabularTask>(load_task(p)));
      } catch (const std::exception& e) {
        throw DataError("evaluation task unreadable: " + p.string() + ": " + e.what());
      }
    }
  }
  std::vector<DatasetRef> candidates;
  for (const auto& p : list_task_files(required(rc, "candidates_dir"))) {
    candidates.push_back(DatasetRef::from_file(p));
  }
  const auto records = run_pipeline(candidates, evals, cfg);
  write_text(out / "discard.csv", discard_csv(records));

  std::map<std::string, int> counts;
  int kept = 0;
  for (const auto& r : records) {
    if (r.keep) {
      ++kept;
    } else {
      ++counts[std::string(to_string(r.rule))];
    }
  }
  log << "keep " << kept << "\n";
  for (const auto& [rule, n] : counts) log << "discard " << rule << " " << n << "\n";
}

void cmd_gradcheck(const RunConfig& rc, std::ostream& log) {
  const fs::path out = prepare_out(rc);
  GradcheckOptions o;
  o.d_main = rc.get_int("d_main");
  o.hidden = rc.get_int("hidden");
  o.K = rc.get_int("classes");
  o.n_gen = rc.get_int("n_gen");
  o.n_query = rc.get_int("n_query");
  o.alpha = rc.get_double("alpha");
  o.tau = rc.get_double("tau");
  o.step = rc.get_double("step");
  o.tolerance = rc.get_double("tolerance");
  o.seed = rc.get_u64("seed");
  o.mutate_relu = rc.get_bool("mutate_relu");
  const GradcheckReport rep = run_gradcheck(o);
  std::string report = "check,coordinates,max_rel_error,pass\n";
  for (const auto& e : rep.entries) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3e", e.max_rel_error);
    log << (e.pass ? "PASS " : "FAIL ") << e.name << " coords=" << e.coordinates << " err=" << buf << "\n";
    report += e.name + "," + std::to_string(e.coordinates) + "," + format_double(e.max_rel_error) + "," +
              (e.pass ? "1" : "0") + "\n";
  }
  write_text(out / "gradcheck.csv", report);
  log << "max_rel_error=" << rep.worst() << " seconds=" << rep.seconds << "\n";
  if (!rep.pass()) throw NumericError("gradient check failed: max relative error " + format_double(rep.worst()));
}

void cmd_hpo_sample(const RunConfig& rc, std::ostream& log) {
  const fs::path out = prepare_out(rc);
  const int count = rc.get_int("count");
  if (count < 1) throw ConfigError("count must be at least 1");
  const std::uint64_t seed = rc.get_u64("seed");
  std::string csv;
  for (int i = 0; i < count; ++i) {
    const HpSample s = i == 0 ? HpSample::defaults() : sample_hyperparams(derive_seed(seed, static_cast<std::uint64_t>(i)));
    const auto fields = s.fields();
    if (i == 0) {
      csv += "trial";
      for (const auto& f : fields) csv += "," + f.first;
      csv += "\n";
    }
    csv += std::to_string(i);
    for (const auto& f : fields) csv += "," + f.second;
    csv += "\n";
  }
  write_text(out / "hpo.csv", csv);
  log << csv;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"meta-train", "fit-predict", "evaluate", "dedupe",
                                                 "gradcheck",  "hpo-sample",  "build-cache"};
  return names;
}

std::vector<ConfigKey> command_keys(const std::string& command) {
  if (command == "meta-train") {
    return concat({common_keys(),
                   {{"train_dir", "", "meta-training task directory"},
                    {"val_dir", "", "meta-validation task directory"},
                    {"build_cache", "false", "build missing embedding caches"},
                    {"preprocessing", "RX", "R, X, C, RX or RC"},
                    {"accumulation", "40", "task draws per update"},
                    {"batch_gen", "2048", "generation subset size"},
                    {"batch_grad", "2048", "gradient subset size"},
                    {"learning_rate", "0.0001", "optimizer step size"},
                    {"max_steps", "1000", "meta-steps"},
                    {"optimizer", "adam", "adam or sgd"},
                    {"val_period", "100", "steps between meta-validations"},
                    {"retrieval_in_training", "false", "mix retrieval logits into the meta-loss"},
                    {"alpha", "0.5", "retrieval weight"},
                    {"tau", "2.0", "retrieval temperature"},
                    {"random_features", "32768", "random-feature width"},
                    {"d_main", "512", "main network width"},
                    {"hidden", "1024", "hypernetwork hidden width"},
                    {"k_max", "16", "largest class count"},
                    {"block_depth", "2", "hidden layers per hypernetwork block"}},
                   gbdt_keys()});
  }
  if (command == "fit-predict") {
    return concat({common_keys(),
                   {{"checkpoint", "", "meta-trained checkpoint"},
                    {"task", "", "task CSV"},
                    {"split", "test", "scored split, or all"},
                    {"dump_weights", "false", "write flat main-network weights per member"}},
                   inference_keys(), gbdt_keys()});
  }
  if (command == "evaluate") {
    return concat({common_keys(),
                   {{"checkpoint", "", "meta-trained checkpoint"},
                    {"data_dir", "", "task directory"},
                    {"split", "test", "scored split, or all"}},
                   inference_keys(), gbdt_keys()});
  }
  if (command == "dedupe") {
    return concat({common_keys(),
                   {{"candidates_dir", "", "candidate task directory"},
                    {"eval_list", "", "file listing evaluation task CSVs"},
                    {"explicit_list", "", "file listing names known to be evaluation datasets"},
                    {"lambda", "0.8", "name similarity threshold"},
                    {"k", "5", "sampled evaluation rows"}}});
  }
  if (command == "gradcheck") {
    return concat({{{"out", "iltm_out", "output directory"},
                    {"seed", "7", "random seed"},
                    {"threads", "1", "unused; accepted for uniformity"}},
                   {{"d_main", "8", "main network width"},
                    {"hidden", "16", "hypernetwork hidden width"},
                    {"classes", "3", "class count"},
                    {"n_gen", "12", "generation rows"},
                    {"n_query", "10", "query rows"},
                    {"alpha", "0.5", "retrieval weight"},
                    {"tau", "2.0", "retrieval temperature"},
                    {"step", "1e-05", "central-difference step"},
                    {"tolerance", "1e-05", "largest accepted relative error"},
                    {"mutate_relu", "false", "break the ReLU backward pass"}}});
  }
  if (command == "hpo-sample") {
    return concat({common_keys(), {{"count", "30", "trials, the first one at defaults"}}});
  }
  if (command == "build-cache") {
    return concat({common_keys(),
                   {{"data_dir", "", "task directory"}, {"preprocessing", "RX", "R, X, C, RX or RC"}},
                   gbdt_keys()});
  }
  throw ConfigError("unknown command: " + command);
}

RunConfig make_run_config(const std::string& command) { return RunConfig(command, command_keys(command)); }

GbdtConfig gbdt_config_from(const RunConfig& rc, PsiTag tag) {
  GbdtConfig g = gbdt_flavor(tag);
  g.max_rounds = rc.get_int("gbdt_rounds");
  g.learning_rate = rc.get_double("gbdt_lr");
  g.patience = rc.get_int("gbdt_patience");
  if (rc.get_int("gbdt_depth") > 0) g.depth = rc.get_int("gbdt_depth");
  if (g.max_rounds < 1 || !(g.learning_rate > 0.0) || g.patience < 1 || g.depth < 1) {
    throw ConfigError("GBDT rounds, learning rate, patience and depth must be positive");
  }
  return g;
}

InferenceConfig inference_config_from(const RunConfig& rc) {
  InferenceConfig c;
  c.preprocessing = parse_psi_tag(rc.get("preprocessing"));
  c.batch = rc.get_int("batch");
  c.n_ens = rc.get_int("n_ens");
  c.feature_bagging = rc.get_bool("feature_bagging");
  c.bag_fraction = rc.get_double("bag_fraction");
  c.vary_member_seeds = rc.get_bool("vary_member_seeds");
  c.finetune.enabled = rc.get_bool("finetune");
  c.finetune.learning_rate = rc.get_double("finetune_lr");
  c.finetune.max_steps = rc.get_int("finetune_steps");
  c.finetune.dropout = rc.get_double("dropout");
  c.finetune.patience = rc.get_int("finetune_patience");
  c.finetune.holdout = rc.get_double("finetune_holdout");
  c.finetune.eval_every = rc.get_int("finetune_eval_every");
  c.finetune.batch = c.batch;
  const std::string data = rc.get("finetune_data");
  if (data == "entire") {
    c.finetune.data = FineTuneData::kEntire;
  } else if (data == "bootstrap") {
    c.finetune.data = FineTuneData::kBootstrap;
  } else {
    throw ConfigError("finetune_data must be entire or bootstrap");
  }
  const std::string split = rc.get("gbdt_split");
  if (split == "dynamic") {
    c.gbdt_split = GbdtDataSplit::kDynamic;
  } else if (split == "entire") {
    c.gbdt_split = GbdtDataSplit::kEntire;
  } else {
    throw ConfigError("gbdt_split must be dynamic or entire");
  }
  c.gbdt_fit_each = rc.get_bool("gbdt_fit_each");
  c.gbdt = gbdt_config_from(rc, c.preprocessing);
  c.retrieval.enabled = rc.get_bool("retrieval");
  c.retrieval.alpha = rc.get_double("alpha");
  c.retrieval.tau = rc.get_double("tau");
  c.retrieval.context_cap = rc.get_int("context_cap");
  c.regression_retrieval = rc.get_bool("regression_retrieval");
  c.regression_calibration = rc.get_bool("regression_calibration");
  c.random_features = rc.get_int("random_features");
  c.scratch = rc.get_bool("scratch");
  c.seed = rc.get_u64("seed");
  c.threads = threads_of(rc);
  if (c.batch < 2 || c.n_ens < 1 || c.random_features < 1 || c.finetune.max_steps < 0 ||
      c.finetune.patience < 1 || c.finetune.eval_every < 1 || c.retrieval.context_cap < 1) {
    throw ConfigError("batch, n_ens, random_features, finetune steps/patience/eval_every and context_cap out of range");
  }
  if (!(c.bag_fraction > 0.0 && c.bag_fraction <= 1.0)) throw ConfigError("bag_fraction must lie in (0,1]");
  if (!(c.finetune.dropout >= 0.0 && c.finetune.dropout < 1.0)) throw ConfigError("dropout must lie in [0,1)");
  if (!(c.finetune.holdout > 0.0 && c.finetune.holdout < 1.0)) throw ConfigError("finetune_holdout must lie in (0,1)");
  if (!(c.retrieval.alpha >= 0.0 && c.retrieval.alpha <= 1.0)) throw ConfigError("alpha must lie in [0,1]");
  if (!(c.retrieval.tau > 0.0)) throw ConfigError("tau must be positive");
  return c;
}

void run_command(const RunConfig& rc, std::ostream& log) {
  const std::string& c = rc.command();
  if (c == "meta-train") return cmd_meta_train(rc, log);
  if (c == "fit-predict") return cmd_fit_predict(rc, log);
  if (c == "evaluate") return cmd_evaluate(rc, log);
  if (c == "dedupe") return cmd_dedupe(rc, log);
  if (c == "gradcheck") return cmd_gradcheck(rc, log);
  if (c == "hpo-sample") return cmd_hpo_sample(rc, log);
  if (c == "build-cache") return cmd_build_cache(rc, log);
  throw ConfigError("unknown command: " + c);
}

}  // namespace iltm
