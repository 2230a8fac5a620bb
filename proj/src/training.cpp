#include "evonet/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

namespace evonet {

namespace {

constexpr Scalar kProbFloor = 1e-12;

std::string fmt17(Scalar v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void class_weights(const std::vector<Sequence>& data, const TrainConfig& config, Scalar out[2]) {
  out[0] = out[1] = 1.0;
  if (!config.class_weighting) return;
  Index counts[2] = {0, 0};
  for (const Sequence& s : data) {
    const Index steps = supervised_steps(s);
    for (Index k = 1; k <= steps; ++k) {
      if (config.final_step_only && k != steps) continue;
      if (!config.final_step_only && k < config.warmup_steps) continue;
      ++counts[step_target(s, k)];
    }
  }
  const Scalar total = static_cast<Scalar>(counts[0] + counts[1]);
  for (int c = 0; c < 2; ++c) {
    if (counts[c] > 0) out[c] = total / (2.0 * static_cast<Scalar>(counts[c]));
  }
}

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate > 0)) throw ValidationError("train: learning_rate must be positive");
  if (!(lr_decay > 0)) throw ValidationError("train: lr_decay must be positive");
  if (decay_every < 1) throw ValidationError("train: decay_every must be >= 1");
  if (iterations < 1) throw ValidationError("train: iterations must be >= 1");
  if (batch_size < 1) throw ValidationError("train: batch_size must be >= 1");
  if (warmup_steps < 1) throw ValidationError("train: warmup_steps must be >= 1");
  if (!(beta1 > 0 && beta1 < 1) || !(beta2 > 0 && beta2 < 1)) throw ValidationError("train: betas must be in (0, 1)");
  if (!(epsilon > 0)) throw ValidationError("train: epsilon must be positive");
}

Scalar lr_at(int iteration, const TrainConfig& config) {
  if (iteration < 0) throw ValidationError("lr_at: iteration must be non-negative");
  const int drops = iteration / config.decay_every;
  // One division by an exact power; 0.001 * 0.1 would miss the double nearest 1e-4.
  return config.learning_rate / std::pow(config.lr_decay, static_cast<Scalar>(drops));
}

Scalar cross_entropy(Scalar prob_pos, int label) {
  if (label != 0 && label != 1) throw ValidationError("cross_entropy: label must be 0 or 1");
  const Scalar p = std::clamp(prob_pos, kProbFloor, 1.0 - kProbFloor);
  return label == 1 ? -std::log(p) : -std::log(1.0 - p);
}

void adam_step(std::vector<NamedParam>& params, const std::vector<Matrix>& grads, AdamState& state, Scalar lr,
               const TrainConfig& config) {
  if (grads.size() != params.size()) throw ValidationError("adam: gradient count does not match parameters");
  for (size_t k = 0; k < params.size(); ++k) {
    if (grads[k].rows() != params[k].value.rows() || grads[k].cols() != params[k].value.cols()) {
      throw ValidationError("adam: gradient of '" + params[k].name + "' has shape " + shape_string(grads[k]));
    }
    if (!grads[k].allFinite()) {
      throw NumericalError("adam: non-finite gradient for '" + params[k].name + "' at step " +
                           std::to_string(state.step + 1));
    }
  }
  if (state.m.empty()) {
    for (const NamedParam& p : params) {
      state.m.push_back(Matrix::Zero(p.value.rows(), p.value.cols()));
      state.v.push_back(Matrix::Zero(p.value.rows(), p.value.cols()));
    }
  }
  ++state.step;
  const Scalar c1 = 1.0 - std::pow(config.beta1, static_cast<Scalar>(state.step));
  const Scalar c2 = 1.0 - std::pow(config.beta2, static_cast<Scalar>(state.step));
  for (size_t k = 0; k < params.size(); ++k) {
    state.m[k] = config.beta1 * state.m[k] + (1.0 - config.beta1) * grads[k];
    state.v[k] = config.beta2 * state.v[k] + (1.0 - config.beta2) * grads[k].cwiseProduct(grads[k]);
    params[k].value.array() -=
        lr * (state.m[k].array() / c1) / ((state.v[k].array() / c2).sqrt() + config.epsilon);
  }
}

Index supervised_steps(const Sequence& seq) {
  const Index steps = seq.segments() - (seq.next_label >= 0 ? 1 : 2);
  if (steps < 1) {
    throw ValidationError("sequence '" + seq.id + "': need at least 3 segments to train, got " +
                          std::to_string(seq.segments()));
  }
  return steps;
}

int step_target(const Sequence& seq, Index step) {
  const size_t k = static_cast<size_t>(step + 1);
  return k < seq.labels.size() ? seq.labels[k] : seq.next_label;
}

Var sequence_loss(Tape& tape, const Predictor& model, const std::vector<Var>& leaves, const Sequence& seq,
                  const TrainConfig& config, const Scalar class_weight[2]) {
  const Index steps = supervised_steps(seq);
  const Forward f = model.forward(tape, leaves, seq, steps);
  Var total;
  int counted = 0;
  for (Index s = 1; s <= steps; ++s) {
    if (config.final_step_only ? s != steps : s < config.warmup_steps) continue;
    const int y = step_target(seq, s);
    const Var l = binary_cross_entropy(f.probs[static_cast<size_t>(s - 1)], y, class_weight[y]);
    total = counted == 0 ? l : add(total, l);
    ++counted;
  }
  if (counted == 0) {
    throw ValidationError("sequence '" + seq.id + "': warmup_steps leaves no supervised step");
  }
  return scale(total, 1.0 / counted);
}

Scalar dataset_loss(const Predictor& model, const std::vector<Sequence>& data, const TrainConfig& config) {
  if (data.empty()) return 0;
  Scalar w[2];
  class_weights(data, config, w);
  Scalar acc = 0;
  for (const Sequence& seq : data) {
    Tape tape;
    std::vector<Var> leaves;
    for (const NamedParam& p : model.params()) leaves.push_back(tape.constant(p.value));
    acc += sequence_loss(tape, model, leaves, seq, config, w).value()(0, 0);
  }
  return acc / static_cast<Scalar>(data.size());
}

TrainResult train(Predictor& model, const std::vector<Sequence>& train_set, const std::vector<Sequence>& val,
                  const TrainConfig& config) {
  config.validate();
  if (train_set.empty()) throw ValidationError("train: empty training set");
  for (const Sequence& s : train_set) {
    if (config.warmup_steps > supervised_steps(s)) {
      throw ValidationError("train: warmup_steps must be below the number of steps of '" + s.id + "'");
    }
  }
  Scalar weights[2];
  class_weights(train_set, config, weights);

  std::vector<NamedParam>& params = model.params();
  std::vector<NamedParam> best = params;
  AdamState adam;
  TrainResult result;
  result.best_val_loss = std::numeric_limits<Scalar>::infinity();

  std::mt19937_64 rng(derive_seed(config.seed, "batching"));
  std::vector<size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), size_t{0});

  try {
    for (int it = 0; it < config.iterations; ++it) {
      const Scalar lr = lr_at(it, config);
      std::shuffle(order.begin(), order.end(), rng);
      Scalar epoch_loss = 0;
      for (size_t start = 0; start < order.size(); start += static_cast<size_t>(config.batch_size)) {
        const size_t stop = std::min(order.size(), start + static_cast<size_t>(config.batch_size));
        std::vector<Matrix> grads;
        for (const NamedParam& p : params) grads.push_back(Matrix::Zero(p.value.rows(), p.value.cols()));
        for (size_t k = start; k < stop; ++k) {
          Tape tape;
          std::vector<Var> leaves;
          leaves.reserve(params.size());
          for (const NamedParam& p : params) leaves.push_back(tape.leaf(p.value));
          const Var loss = sequence_loss(tape, model, leaves, train_set[order[k]], config, weights);
          epoch_loss += loss.value()(0, 0);
          const Gradients g = tape.backward(loss);
          for (size_t p = 0; p < params.size(); ++p) grads[p] += g.of(leaves[p]);
        }
        const Scalar inv = 1.0 / static_cast<Scalar>(stop - start);
        for (Matrix& g : grads) g *= inv;
        adam_step(params, grads, adam, lr, config);
      }
      LossRecord rec;
      rec.iteration = it;
      rec.lr = lr;
      rec.train_loss = epoch_loss / static_cast<Scalar>(train_set.size());
      rec.val_loss = val.empty() ? dataset_loss(model, train_set, config) : dataset_loss(model, val, config);
      if (!std::isfinite(rec.train_loss) || !std::isfinite(rec.val_loss)) {
        throw NumericalError("train: non-finite loss at iteration " + std::to_string(it));
      }
      result.curve.push_back(rec);
      if (rec.val_loss < result.best_val_loss) {
        result.best_val_loss = rec.val_loss;
        result.best_iteration = it;
        best = params;
      }
    }
  } catch (const NumericalError& e) {
    result.diverged = true;
    result.diagnostic = e.what();
  }
  params = best;
  return result;
}

WithoutGraph baseline_wog(const ModelConfig& model_config, const std::vector<Sequence>& train_set,
                          const std::vector<Sequence>& val, const TrainConfig& config, TrainResult* result) {
  WithoutGraph model(model_config, derive_seed(config.seed, "init"));
  TrainResult r = train(model, train_set, val, config);
  if (result) *result = std::move(r);
  return model;
}

Scalar auc_score(const std::vector<Scalar>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size()) throw ValidationError("auc: scores and labels differ in length");
  const size_t n = scores.size();
  std::vector<size_t> idx(n);
  std::iota(idx.begin(), idx.end(), size_t{0});
  std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return scores[a] < scores[b]; });
  // Mann-Whitney: average ranks over tie groups.
  Scalar rank_sum = 0;
  Index positives = 0;
  for (size_t i = 0; i < n;) {
    size_t j = i;
    while (j < n && scores[idx[j]] == scores[idx[i]]) ++j;
    const Scalar avg_rank = 0.5 * static_cast<Scalar>(i + 1 + j);
    for (size_t k = i; k < j; ++k) {
      if (labels[idx[k]] == 1) {
        rank_sum += avg_rank;
        ++positives;
      }
    }
    i = j;
  }
  const Index negatives = static_cast<Index>(n) - positives;
  if (positives == 0 || negatives == 0) return -1.0;
  const Scalar p = static_cast<Scalar>(positives);
  return (rank_sum - p * (p + 1) / 2) / (p * static_cast<Scalar>(negatives));
}

Metrics score_metrics(const std::vector<Scalar>& scores, const std::vector<int>& labels, Scalar threshold) {
  if (scores.size() != labels.size()) throw ValidationError("metrics: scores and labels differ in length");
  Metrics m;
  m.threshold = threshold;
  for (size_t k = 0; k < scores.size(); ++k) {
    const bool pred = scores[k] >= threshold;
    if (labels[k] != 0 && labels[k] != 1) throw ValidationError("metrics: labels must be 0 or 1");
    if (pred && labels[k] == 1) ++m.tp;
    else if (pred) ++m.fp;
    else if (labels[k] == 1) ++m.fn;
    else ++m.tn;
  }
  const Index denom = 2 * m.tp + m.fp + m.fn;
  m.f1 = denom == 0 ? 0.0 : 2.0 * static_cast<Scalar>(m.tp) / static_cast<Scalar>(denom);
  m.auc = auc_score(scores, labels);
  m.auc_defined = m.auc >= 0;
  return m;
}

std::vector<Scalar> final_probabilities(const Predictor& model, const std::vector<Sequence>& data) {
  std::vector<Scalar> out;
  out.reserve(data.size());
  for (const Sequence& seq : data) out.push_back(model.step_probabilities(seq, supervised_steps(seq)).back());
  return out;
}

Metrics evaluate(const Predictor& model, const std::vector<Sequence>& data, Scalar threshold) {
  if (data.empty()) throw ValidationError("evaluate: empty dataset");
  std::vector<int> labels;
  for (const Sequence& seq : data) labels.push_back(step_target(seq, supervised_steps(seq)));
  return score_metrics(final_probabilities(model, data), labels, threshold);
}

std::string metrics_to_json(const Metrics& m) {
  std::ostringstream out;
  out << "{\n  \"version\": 1,\n  \"f1\": " << fmt17(m.f1) << ",\n  \"auc\": " << fmt17(m.auc)
      << ",\n  \"auc_defined\": " << (m.auc_defined ? "true" : "false") << ",\n  \"tp\": " << m.tp
      << ",\n  \"fp\": " << m.fp << ",\n  \"tn\": " << m.tn << ",\n  \"fn\": " << m.fn
      << ",\n  \"threshold\": " << fmt17(m.threshold) << "\n}\n";
  return out.str();
}

std::string loss_curve_csv(const std::vector<LossRecord>& curve) {
  std::ostringstream out;
  out << "iteration,train_loss,val_loss,lr\n";
  for (const LossRecord& r : curve) {
    out << r.iteration << ',' << fmt17(r.train_loss) << ',' << fmt17(r.val_loss) << ',' << fmt17(r.lr) << '\n';
  }
  return out.str();
}

Split split(const std::vector<Index>& times) {
  const Index n = static_cast<Index>(times.size());
  for (Index k = 1; k < n; ++k) {
    if (times[static_cast<size_t>(k)] < times[static_cast<size_t>(k - 1)]) {
      throw ValidationError("split: samples are not in chronological order (sample " + std::to_string(k) + ")");
    }
  }
  const Index trainval = n * 8 / 10;
  const Index nval = (trainval + 9) / 10;
  const Index ntrain = trainval - nval;
  if (ntrain < 1 || nval < 1 || n - trainval < 1) {
    throw ValidationError("split: " + std::to_string(n) + " samples are too few for train/validation/test");
  }
  Split s;
  for (Index k = 0; k < n; ++k) {
    if (k < ntrain) s.train.push_back(k);
    else if (k < trainval) s.val.push_back(k);
    else s.test.push_back(k);
  }
  return s;
}

}  // namespace evonet
