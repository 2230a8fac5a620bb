#ifndef EVONET_TRAINING_HPP
#define EVONET_TRAINING_HPP

#include "evonet/model.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace evonet {

struct TrainConfig {
  Scalar learning_rate = 1e-3;
  Scalar lr_decay = 10.0;  // divide the rate by this ...
  int decay_every = 20;    // ... every this many iterations
  int iterations = 100;    // one iteration = one pass over the training set
  Index batch_size = 32;
  std::uint64_t seed = 0;
  int warmup_steps = 1;  // steps s < warmup_steps carry no loss
  Scalar beta1 = 0.9;
  Scalar beta2 = 0.999;
  Scalar epsilon = 1e-8;
  bool final_step_only = false;
  bool class_weighting = false;  // inverse-frequency weights on the two classes

  void validate() const;
};

/// init * decay^(-floor(iteration / decay_every)).
Scalar lr_at(int iteration, const TrainConfig& config);

/// -[y ln p + (1 - y) ln(1 - p)] with p clamped to [1e-12, 1 - 1e-12].
Scalar cross_entropy(Scalar prob_pos, int label);

struct AdamState {
  std::vector<Matrix> m;
  std::vector<Matrix> v;
  long step = 0;
};

/// One bias-corrected Adam update. Throws NumericalError (params untouched)
/// when any gradient is non-finite.
void adam_step(std::vector<NamedParam>& params, const std::vector<Matrix>& grads, AdamState& state, Scalar lr,
               const TrainConfig& config);

/// Steps 1..T-2 of a T-segment sequence are supervised (1..T-1 when the next
/// event is known); step s targets label s+1.
Index supervised_steps(const Sequence& seq);
int step_target(const Sequence& seq, Index step);

/// Mean per-step loss of one sequence on `tape`.
Var sequence_loss(Tape& tape, const Predictor& model, const std::vector<Var>& leaves, const Sequence& seq,
                  const TrainConfig& config, const Scalar class_weight[2]);

/// Mean sequence loss without gradients.
Scalar dataset_loss(const Predictor& model, const std::vector<Sequence>& data, const TrainConfig& config);

struct LossRecord {
  int iteration = 0;
  Scalar train_loss = 0;
  Scalar val_loss = 0;
  Scalar lr = 0;
};

struct TrainResult {
  std::vector<LossRecord> curve;
  int best_iteration = -1;
  Scalar best_val_loss = 0;
  bool diverged = false;
  std::string diagnostic;
};

/// Mini-batch Adam over `train`. After every iteration the model is scored on
/// `val` (on `train` when `val` is empty); the parameters with the lowest score
/// are restored before returning. A NaN aborts training with diverged = true
/// and the last good parameters in place.
TrainResult train(Predictor& model, const std::vector<Sequence>& train, const std::vector<Sequence>& val,
                  const TrainConfig& config);

/// Trains the argmax-state LSTM ablation with the same loop.
WithoutGraph baseline_wog(const ModelConfig& model_config, const std::vector<Sequence>& train,
                          const std::vector<Sequence>& val, const TrainConfig& config, TrainResult* result = nullptr);

struct Metrics {
  Scalar f1 = 0;
  Scalar auc = 0;
  bool auc_defined = true;
  Index tp = 0, fp = 0, tn = 0, fn = 0;
  Scalar threshold = 0.5;
};

/// Rank-statistic AUC with tied scores counting one half. Returns -1 when one class is absent.
Scalar auc_score(const std::vector<Scalar>& scores, const std::vector<int>& labels);

/// F1 and confusion counts at `threshold` (score >= threshold predicts 1), and AUC.
Metrics score_metrics(const std::vector<Scalar>& scores, const std::vector<int>& labels, Scalar threshold);

/// Final-step forecasts of every sequence (the prediction of its last known label).
std::vector<Scalar> final_probabilities(const Predictor& model, const std::vector<Sequence>& data);

Metrics evaluate(const Predictor& model, const std::vector<Sequence>& data, Scalar threshold = 0.5);

std::string metrics_to_json(const Metrics& m);
std::string loss_curve_csv(const std::vector<LossRecord>& curve);

struct Split {
  std::vector<Index> train;
  std::vector<Index> val;
  std::vector<Index> test;
};

/// Chronological split: first floor(0.8 n) samples train+val, the rest test;
/// the latest ceil(10%) of train+val become validation. `times` orders the samples.
Split split(const std::vector<Index>& times);

}  // namespace evonet

#endif  // EVONET_TRAINING_HPP
