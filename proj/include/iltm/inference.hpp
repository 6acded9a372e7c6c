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


// Fitting the meta-trained hypernetwork to a new task: embedding, weight
// generation, optional fine-tuning, feature-bagged ensembles and the
// regression adaptation.
#pragma once

#include "iltm/meta_train.hpp"

namespace iltm {

enum class FineTuneData { kEntire, kBootstrap };
enum class GbdtDataSplit { kDynamic, kEntire };

struct FineTuneConfig {
  bool enabled = true;
  double learning_rate = 1e-4;
  int max_steps = 1024;
  double dropout = 0.0;
  int patience = 16;        // evaluations without improvement
  double holdout = 0.1;     // early-stop slice of the train split
  int batch = 2048;
  int eval_every = 1;
  FineTuneData data = FineTuneData::kEntire;
};

struct InferenceConfig {
  PsiTag preprocessing = PsiTag::kRX;
  int batch = 2048;  // generation set size and fine-tune mini-batch cap
  int n_ens = 8;
  bool feature_bagging = true;
  double bag_fraction = 0.8;
  bool vary_member_seeds = true;
  FineTuneConfig finetune;
  GbdtDataSplit gbdt_split = GbdtDataSplit::kDynamic;
  bool gbdt_fit_each = false;
  GbdtConfig gbdt;
  RetrievalConfig retrieval;
  bool regression_retrieval = false;
  /// Least-squares gain and offset of the adapted regression output, fitted on
  /// the generation batch.
  bool regression_calibration = true;
  int random_features = kDefaultRandomFeatures;
  bool scratch = false;  // random-init main network instead of generated weights
  std::uint64_t seed = 0;
  int threads = 1;
};

struct FineTuneTrace {
  int steps = 0;
  double initial_loss = 0.0;
  double best_loss = 0.0;
  int best_step = 0;
  double seconds = 0.0;
};

struct FittedPredictor {
  std::vector<int> columns;  // feature-bag mask as column ids
  PsiVariant psi;
  ProjectionParams projection;
  MainNet theta;
  Mat h_context;
  Mat y_context;
  double y_mean = 0.0;
  double y_scale = 1.0;
  FineTuneTrace trace;
  double fit_seconds = 0.0;
};

struct EnsembleModel {
  int K = 0;
  int n_features = 0;
  RetrievalConfig retrieval;
  bool regression_retrieval = false;
  std::vector<FittedPredictor> members;

  bool regression() const { return K == 0; }
  Container to_container() const;
  static EnsembleModel from_container(const Container& c);
};

/// Fine-tunes `theta` in place on (x, targets); x already embedded. Targets
/// are one-hot (classification) or standardized values (regression). The
/// returned trace reports the held-out loss of the kept weights.
FineTuneTrace fine_tune(MainNet& theta, const Mat& x_train, const Mat& t_train, const Mat& x_hold,
                        const Mat& t_hold, bool regression, const FineTuneConfig& cfg, std::uint64_t seed);

EnsembleModel fit_task(const HyperNet& phi, const TabularTask& task, const InferenceConfig& cfg);
/// Probabilities (N x K) or predictions (N x 1).
Mat predict(const EnsembleModel& model, const Mat& X, int threads = 1);
Mat predict_member(const EnsembleModel& model, const FittedPredictor& member, const Mat& X);

/// AUC for classification, RMSE for regression, on the given rows.
struct Evaluation {
  std::string metric;
  double value = 0.0;
};
Evaluation evaluate_rows(const EnsembleModel& model, const TabularTask& task, std::span<const int> rows);

}  // namespace iltm
