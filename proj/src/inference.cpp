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


#include "iltm/inference.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

namespace iltm {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

Mat softmax_rows(const Mat& z) {
  Mat p(z.rows(), z.cols());
  for (Index r = 0; r < z.rows(); ++r) {
    const double mx = z.row(r).maxCoeff();
    p.row(r) = (z.row(r).array() - mx).exp();
    p.row(r) /= p.row(r).sum();
  }
  return p;
}

double eval_loss(const MainNet& theta, const Mat& x, const Mat& t, bool regression) {
  const Mat out = forward_main(theta, x).logits;
  if (regression) return (out - t).squaredNorm() / static_cast<double>(out.size());
  double loss = 0.0;
  for (Index r = 0; r < out.rows(); ++r) {
    const double mx = out.row(r).maxCoeff();
    const double lse = mx + std::log((out.row(r).array() - mx).exp().sum());
    loss += lse * t.row(r).sum() - t.row(r).dot(out.row(r));
  }
  return loss / static_cast<double>(out.rows());
}

Mat column_of(std::span<const double> v) {
  Mat m(static_cast<Index>(v.size()), 1);
  for (std::size_t i = 0; i < v.size(); ++i) m(static_cast<Index>(i), 0) = v[i];
  return m;
}

std::vector<int> all_indices(int n) {
  std::vector<int> v(static_cast<std::size_t>(n));
  std::iota(v.begin(), v.end(), 0);
  return v;
}

std::vector<Column> subset_features(const std::vector<Column>& all, std::span<const int> cols) {
  std::vector<Column> out;
  for (int c : cols) out.push_back(all[static_cast<std::size_t>(c)]);
  return out;
}

Mat embed_task_rows(const FittedPredictor& m, const Mat& X) {
  return apply_projection(m.projection, build_psi(m.psi, select_columns(X, m.columns)));
}

// Rescales the single output so that a * f(x) + b is the least-squares fit
// of the standardized targets on the generation batch.
void calibrate_output(MainNet& theta, const Mat& x, std::span<const double> y) {
  const Mat pred = forward_main(theta, x).logits;
  const double n = static_cast<double>(y.size());
  double mp = 0.0, my = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    mp += pred(static_cast<Index>(i), 0);
    my += y[i];
  }
  mp /= n;
  my /= n;
  double cov = 0.0, var = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double dp = pred(static_cast<Index>(i), 0) - mp;
    cov += dp * (y[i] - my);
    var += dp * dp;
  }
  const double a = var > 1e-12 ? cov / var : 0.0;
  theta.W3 *= a;
  theta.b3 = theta.b3 * a;
  theta.b3(0, 0) += my - a * mp;
}

}  // namespace

FineTuneTrace fine_tune(MainNet& theta, const Mat& x_train, const Mat& t_train, const Mat& x_hold,
                        const Mat& t_hold, bool regression, const FineTuneConfig& cfg, std::uint64_t seed) {
  const auto start = Clock::now();
  FineTuneTrace tr;
  const bool has_hold = x_hold.rows() > 0;
  tr.initial_loss = has_hold ? eval_loss(theta, x_hold, t_hold, regression) : std::numeric_limits<double>::quiet_NaN();
  tr.best_loss = tr.initial_loss;
  if (!cfg.enabled || cfg.max_steps <= 0 || x_train.rows() == 0) {
    tr.seconds = seconds_since(start);
    return tr;
  }
  Rng rng(seed);
  std::vector<int> rows = all_indices(static_cast<int>(x_train.rows()));
  if (cfg.data == FineTuneData::kBootstrap) {
    std::uniform_int_distribution<int> pick(0, static_cast<int>(x_train.rows()) - 1);
    for (auto& r : rows) r = pick(rng);
  }
  ParamSet params = theta.as_params();
  ParamSet best = params;
  AdamState opt;
  int since_best = 0;
  const std::size_t batch = static_cast<std::size_t>(std::max(1, cfg.batch));
  for (int step = 1; step <= cfg.max_steps; ++step) {
    const std::vector<int> mb = rows.size() <= batch ? rows : sample_without_replacement(rows, batch, rng);
    Tape tape;
    const MainIds ids = mark_main(tape, MainNet::from_params(params));
    const auto [h, out] = forward_main_on_tape(tape, ids, tape.constant(take_rows(x_train, mb)),
                                               DropoutSpec{cfg.dropout, &rng});
    (void)h;
    const Mat target = take_rows(t_train, mb);
    const Tape::Id loss = regression ? tape.mse_loss(out, target) : tape.ce_loss(out, target);
    tape.backward(loss);
    ParamSet g = params.zeros_like();
    tape.accumulate_grads(g);
    optimizer_update(params, g, OptimizerKind::kAdam, cfg.learning_rate, opt);
    tr.steps = step;
    if (!has_hold || step % std::max(1, cfg.eval_every) != 0) continue;
    const double hl = eval_loss(MainNet::from_params(params), x_hold, t_hold, regression);
    if (hl < tr.best_loss) {
      tr.best_loss = hl;
      tr.best_step = step;
      best = params;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }
  theta = MainNet::from_params(has_hold ? best : params);
  if (!theta.finite()) throw NumericError("fine-tuning produced non-finite weights");
  tr.seconds = seconds_since(start);
  return tr;
}

EnsembleModel fit_task(const HyperNet& phi, const TabularTask& task, const InferenceConfig& cfg) {
  if (cfg.n_ens < 1) throw ConfigError("n_ens must be >= 1");
  if (cfg.bag_fraction <= 0.0 || cfg.bag_fraction > 1.0) throw ConfigError("bag_fraction must lie in (0, 1]");
  const std::vector<int> train = task.has_split("train") ? task.split("train") : all_indices(task.n_rows());
  if (train.empty()) throw DataError("task '" + task.name + "' has an empty train split");
  const bool regression = task.K == 0;
  if (!regression && task.K > phi.config.k_max) {
    throw ConfigError("task has " + std::to_string(task.K) + " classes; checkpoint supports " +
                      std::to_string(phi.config.k_max));
  }
  const auto features = task.features();
  const int d = task.n_features();

  // GBDT / generation-pool split, shared by all members.
  std::vector<int> gbdt_rows, pool_rows;
  if (cfg.gbdt_split == GbdtDataSplit::kEntire) {
    gbdt_rows = pool_rows = train;
  } else {
    const FitSplit fs = dynamic_fit_split(static_cast<int>(train.size()), derive_seed(cfg.seed, 0xf17));
    for (int i : fs.gbdt_fit) gbdt_rows.push_back(train[static_cast<std::size_t>(i)]);
    for (int i : fs.hypernet_pool) pool_rows.push_back(train[static_cast<std::size_t>(i)]);
  }

  // Early-stop slice for fine-tuning.
  std::vector<int> ft_rows = train, hold_rows;
  if (cfg.finetune.enabled && cfg.finetune.holdout > 0.0 && train.size() >= 10) {
    Rng rng(derive_seed(cfg.seed, 0x401d));
    auto shuffled = train;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const auto n_hold = static_cast<std::size_t>(std::max(1.0, std::floor(cfg.finetune.holdout * train.size())));
    hold_rows.assign(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(n_hold));
    ft_rows.assign(shuffled.begin() + static_cast<std::ptrdiff_t>(n_hold), shuffled.end());
    std::sort(hold_rows.begin(), hold_rows.end());
    std::sort(ft_rows.begin(), ft_rows.end());
  }

  const bool shared_psi = !cfg.feature_bagging && !cfg.gbdt_fit_each;
  std::optional<PsiVariant> shared;
  if (shared_psi) {
    shared = fit_psi(cfg.preprocessing, take_rows(task.X, gbdt_rows), take(task.y, gbdt_rows), task.K, features,
                     cfg.gbdt, derive_seed(cfg.seed, 0x6bd7));
  }

  EnsembleModel model;
  model.K = task.K;
  model.n_features = d;
  model.retrieval = cfg.retrieval;
  model.regression_retrieval = cfg.regression_retrieval;
  model.members.resize(static_cast<std::size_t>(cfg.n_ens));
  parallel_for(cfg.n_ens, cfg.threads, [&](int mi) {
    const auto start = Clock::now();
    const std::uint64_t ms = derive_seed(cfg.seed, 0x3e3, cfg.vary_member_seeds ? static_cast<std::uint64_t>(mi) : 0);
    Rng rng(ms);
    FittedPredictor m;
    m.columns = all_indices(d);
    if (cfg.feature_bagging) {
      const auto k = static_cast<std::size_t>(std::max(1L, std::lround(cfg.bag_fraction * d)));
      m.columns = sample_without_replacement(m.columns, k, rng);
      std::sort(m.columns.begin(), m.columns.end());
    }
    if (shared) {
      m.psi = *shared;
    } else {
      m.psi = fit_psi(cfg.preprocessing, select_columns(take_rows(task.X, gbdt_rows), m.columns),
                      take(task.y, gbdt_rows), task.K, subset_features(features, m.columns), cfg.gbdt,
                      derive_seed(ms, 0x6bd7));
    }
    const auto n_gen = std::min<std::size_t>(static_cast<std::size_t>(std::max(2, cfg.batch)), pool_rows.size());
    const auto gen = sample_without_replacement(pool_rows, n_gen, rng);
    const SpMat psi_gen = build_psi(m.psi, select_columns(take_rows(task.X, gen), m.columns));
    m.projection = fit_projection(psi_gen, cfg.random_features, phi.config.d_main, derive_seed(ms, 0x0e6a));
    const Mat x_gen = apply_projection(m.projection, psi_gen);
    const auto y_gen = take(task.y, gen);

    if (regression) {
      double mean = 0.0;
      for (double v : y_gen) mean += v;
      mean /= static_cast<double>(y_gen.size());
      double var = 0.0;
      for (double v : y_gen) var += (v - mean) * (v - mean);
      const double sd = std::sqrt(var / static_cast<double>(y_gen.size()));
      m.y_mean = mean;
      m.y_scale = sd > 0.0 ? sd : 1.0;
    }
    auto standardized = [&](std::span<const int> rows) {
      std::vector<double> out;
      for (int r : rows) out.push_back((task.y[static_cast<std::size_t>(r)] - m.y_mean) / m.y_scale);
      return out;
    };
    if (cfg.scratch) {
      m.theta = random_main_net(phi.config.d_main, regression ? 1 : task.K, derive_seed(ms, 0x5c4));
    } else if (regression) {
      const auto y_std = standardized(gen);
      m.theta = adapt_for_regression(phi, x_gen, y_std);
      if (cfg.regression_calibration) calibrate_output(m.theta, x_gen, y_std);
    } else {
      m.theta = generate_weights(phi, x_gen, y_gen, task.K);
    }

    if (cfg.finetune.enabled) {
      auto targets = [&](std::span<const int> rows) {
        return regression ? column_of(standardized(rows)) : one_hot_labels(take(task.y, rows), task.K);
      };
      FineTuneConfig ft = cfg.finetune;
      ft.batch = std::min(ft.batch, cfg.batch);
      m.trace = fine_tune(m.theta, embed_task_rows(m, take_rows(task.X, ft_rows)), targets(ft_rows),
                          embed_task_rows(m, take_rows(task.X, hold_rows)), targets(hold_rows), regression, ft,
                          derive_seed(ms, 0xf7));
    }

    const bool want_context = regression ? cfg.regression_retrieval : cfg.retrieval.enabled;
    if (want_context && cfg.retrieval.alpha > 0.0) {
      const auto n_ctx = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, cfg.retrieval.context_cap)),
                                               train.size());
      const auto ctx = sample_without_replacement(train, n_ctx, rng);
      m.h_context = forward_main(m.theta, embed_task_rows(m, take_rows(task.X, ctx))).H;
      m.y_context = regression ? column_of(standardized(ctx)) : one_hot_labels(take(task.y, ctx), task.K);
    }
    m.fit_seconds = seconds_since(start);
    model.members[static_cast<std::size_t>(mi)] = std::move(m);
  });
  return model;
}

Mat predict_member(const EnsembleModel& model, const FittedPredictor& m, const Mat& X) {
  if (X.cols() != model.n_features) {
    throw DataError("predict: expected " + std::to_string(model.n_features) + " features, got " +
                    std::to_string(X.cols()));
  }
  const MainOutput out = forward_main(m.theta, embed_task_rows(m, X));
  const double alpha = model.retrieval.enabled ? model.retrieval.alpha : 0.0;
  const bool use_ctx = alpha > 0.0 && m.h_context.rows() > 0;
  if (model.regression()) {
    Mat pred = out.logits;
    if (use_ctx && model.regression_retrieval) {
      Mat q = out.H;
      for (Index r = 0; r < q.rows(); ++r) q.row(r) /= q.row(r).norm() + 1e-12;
      Mat c = m.h_context;
      for (Index r = 0; r < c.rows(); ++r) c.row(r) /= c.row(r).norm() + 1e-12;
      const Mat S = q * c.transpose();
      Mat ret = S * m.y_context;
      for (Index r = 0; r < ret.rows(); ++r) {
        const double mass = S.row(r).sum();
        ret(r, 0) = std::abs(mass) > 1e-12 ? ret(r, 0) / mass : 0.0;
      }
      pred = combined_logits(pred, ret, alpha);
    }
    return (pred.array() * m.y_scale + m.y_mean).matrix();
  }
  Mat logits = out.logits;
  if (use_ctx) {
    logits = combined_logits(logits, retrieval_logits(out.H, m.h_context, m.y_context, model.retrieval.tau), alpha);
  }
  return softmax_rows(logits);
}

Mat predict(const EnsembleModel& model, const Mat& X, int threads) {
  if (model.members.empty()) throw DataError("predict: model has no members");
  std::vector<Mat> parts(model.members.size());
  parallel_for(static_cast<int>(parts.size()), threads, [&](int i) {
    parts[static_cast<std::size_t>(i)] = predict_member(model, model.members[static_cast<std::size_t>(i)], X);
  });
  if (parts.size() == 1) return parts.front();
  Mat sum = parts.front();
  for (std::size_t i = 1; i < parts.size(); ++i) sum += parts[i];
  return sum / static_cast<double>(parts.size());
}

Evaluation evaluate_rows(const EnsembleModel& model, const TabularTask& task, std::span<const int> rows) {
  const Mat pred = predict(model, take_rows(task.X, rows));
  const auto y = take(task.y, rows);
  if (model.regression()) {
    std::vector<double> p(pred.data(), pred.data() + pred.rows());
    return {"rmse", rmse(p, y)};
  }
  return {"auc", auc(pred, y)};
}

Container EnsembleModel::to_container() const {
  Container c;
  c.meta["kind"] = "model";
  c.meta["version"] = version_string();
  c.put_scalar("K", K);
  c.put_scalar("n_features", n_features);
  c.put("retrieval", std::vector<double>{retrieval.enabled ? 1.0 : 0.0, retrieval.alpha, retrieval.tau,
                                         static_cast<double>(retrieval.context_cap),
                                         regression_retrieval ? 1.0 : 0.0});
  c.put_scalar("n_members", static_cast<double>(members.size()));
  for (std::size_t i = 0; i < members.size(); ++i) {
    const auto& m = members[i];
    const std::string p = "m" + std::to_string(i) + ".";
    c.put_ints(p + "columns", m.columns);
    m.psi.save(c, p + "psi.");
    m.projection.save(c, p + "proj.");
    m.theta.save(c, p + "theta.");
    c.put(p + "h_context", m.h_context);
    c.put(p + "y_context", m.y_context);
    c.put(p + "y_stats", std::vector<double>{m.y_mean, m.y_scale});
  }
  return c;
}

EnsembleModel EnsembleModel::from_container(const Container& c) {
  if (c.meta.count("kind") == 0 || c.get_meta("kind") != "model") throw DataError("not a fitted model file");
  EnsembleModel e;
  e.K = static_cast<int>(c.get_scalar("K"));
  e.n_features = static_cast<int>(c.get_scalar("n_features"));
  const auto r = c.get_vec("retrieval");
  e.retrieval = {r.at(0) != 0.0, r.at(1), r.at(2), static_cast<int>(r.at(3))};
  e.regression_retrieval = r.at(4) != 0.0;
  const int n = static_cast<int>(c.get_scalar("n_members"));
  for (int i = 0; i < n; ++i) {
    const std::string p = "m" + std::to_string(i) + ".";
    FittedPredictor m;
    m.columns = c.get_ints(p + "columns");
    m.psi = PsiVariant::load(c, p + "psi.");
    m.projection = ProjectionParams::load(c, p + "proj.");
    m.theta = MainNet::load(c, p + "theta.");
    m.h_context = c.get_mat(p + "h_context");
    m.y_context = c.get_mat(p + "y_context");
    const auto ys = c.get_vec(p + "y_stats");
    m.y_mean = ys.at(0);
    m.y_scale = ys.at(1);
    e.members.push_back(std::move(m));
  }
  return e;
}

}  // namespace iltm
