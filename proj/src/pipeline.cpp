#include "evonet/pipeline.hpp"

#include "evonet/training.hpp"

#include <random>

namespace evonet {

StateModel fit_states(const std::vector<Series>& series, const RunConfig& config) {
  config.validate();
  if (series.empty()) throw ValidationError("fit_states: no series");
  std::vector<Segment> segments;
  std::vector<int> labels;
  for (const Series& s : series) {
    std::vector<Segment> segs = segment(s, config.tau);
    if (config.recognizer == RecognizerKind::kShapelet) {
      const std::vector<int> y = segment_labels(s, config.tau);
      labels.insert(labels.end(), y.begin(), y.end());
    }
    for (Segment& seg : segs) segments.push_back(std::move(seg));
  }
  const std::uint64_t seed = derive_seed(config.seed, "recognition");
  switch (config.recognizer) {
    case RecognizerKind::kKMeans:
      return fit_kmeans(segments, config.num_states, config.kmeans_max_iter, seed, config.kmeans_restarts);
    case RecognizerKind::kShapelet:
      return fit_shapelets(segments, labels, config.num_states, config.shapelet_candidates, seed);
    case RecognizerKind::kSax: {
      Series joined;
      joined.id = "all";
      joined.values.resize(static_cast<Index>(segments.size()) * config.tau, segments.front().cols());
      for (size_t k = 0; k < segments.size(); ++k) {
        joined.values.middleRows(static_cast<Index>(k) * config.tau, config.tau) = segments[k];
      }
      return fit_sax(joined, config.tau, static_cast<int>(config.num_states));
    }
  }
  throw ValidationError("fit_states: unknown recognizer");
}

std::vector<Index> argmax_states(const RecognitionFrame& frame) {
  std::vector<Index> out(static_cast<size_t>(frame.steps()));
  for (Index t = 0; t < frame.steps(); ++t) {
    Index best = 0;
    frame.weights.row(t).maxCoeff(&best);
    out[static_cast<size_t>(t)] = best;
  }
  return out;
}

Sequence make_sequence(const Series& series, const StateModel& states) {
  const std::vector<Segment> segs = segment(series, states.tau);
  const RecognitionFrame frame = recognition_weights(segs, states);
  Sequence seq;
  seq.id = series.id;
  seq.snapshots = build_graph_sequence(frame).snapshots;
  seq.labels = segment_labels(series, states.tau);
  seq.states = argmax_states(frame);
  return seq;
}

std::vector<Sequence> make_sequences(const std::vector<Series>& series, const StateModel& states) {
  std::vector<Sequence> out;
  out.reserve(series.size());
  for (const Series& s : series) out.push_back(make_sequence(s, states));
  return out;
}

GradCheckInstance grad_check_instance(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<Scalar> gauss(0.0, 1.0);
  auto random = [&](Index r, Index c) {
    Matrix m(r, c);
    for (Index i = 0; i < r; ++i) {
      for (Index j = 0; j < c; ++j) m(i, j) = gauss(rng);
    }
    return m;
  };
  StateModel states;
  states.tau = config.tau;
  states.dim = config.dim;
  for (Index v = 0; v < config.num_states; ++v) states.patterns.push_back(random(config.tau, config.dim));
  std::vector<Segment> segs;
  for (int t = 0; t < 3; ++t) segs.push_back(random(config.tau, config.dim));

  const RecognitionFrame frame = recognition_weights(segs, states);
  GradCheckInstance inst;
  inst.sequence.id = "grad-check";
  inst.sequence.snapshots = build_graph_sequence(frame).snapshots;
  inst.sequence.labels = {0, 1, 0};
  inst.sequence.next_label = 1;
  inst.sequence.states = argmax_states(frame);
  inst.initial_nodes = flatten_segments(states.patterns);
  return inst;
}

GradCheckReport model_grad_check(const ModelConfig& config, std::uint64_t seed, Scalar step, Scalar tol) {
  const GradCheckInstance inst = grad_check_instance(config, seed);
  const EvoNet model(config, inst.initial_nodes, derive_seed(seed, "init"));
  const TrainConfig train_config;
  const Scalar weights[2] = {1.0, 1.0};
  const LossBuilder f = [&](Tape& tape, const std::vector<Var>& leaves) {
    return sequence_loss(tape, model, leaves, inst.sequence, train_config, weights);
  };
  return grad_check(f, model.params(), step, tol);
}

}  // namespace evonet
