#include "evonet/graph.hpp"
#include "evonet/pipeline.hpp"
#include "evonet/training.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <json.hpp>

#include <cmath>

using namespace evonet;
using testing::gaussian;
using testing::uniform;

namespace {

// Sequences where the next event follows the state of the current segment.
std::vector<Sequence> toy_data(Index count, std::mt19937_64& rng) {
  std::vector<Sequence> out;
  std::uniform_int_distribution<Index> state(0, 1);
  for (Index i = 0; i < count; ++i) {
    const Index T = 6;
    RecognitionFrame f;
    f.weights = Matrix::Zero(T, 2);
    Sequence seq;
    seq.id = "q" + std::to_string(i);
    std::vector<Index> z;
    for (Index t = 0; t < T; ++t) {
      z.push_back(state(rng));
      f.weights(t, z.back()) = 1.0;
      f.weights(t, 1 - z.back()) = 0.2;
    }
    seq.snapshots = build_graph_sequence(f).snapshots;
    seq.labels.push_back(0);
    for (Index t = 1; t < T; ++t) seq.labels.push_back(z[static_cast<size_t>(t - 1)] == 1);
    seq.states = z;
    out.push_back(seq);
  }
  return out;
}

ModelConfig toy_config() {
  ModelConfig c;
  c.num_states = 2;
  c.tau = 2;
  c.dim = 1;
  c.u_size = 6;
  c.hg_size = 4;
  c.message = MessageKind::kPool;
  return c;
}

Scalar pairwise_auc(const std::vector<Scalar>& s, const std::vector<int>& y) {
  Scalar wins = 0;
  Index pairs = 0;
  for (size_t i = 0; i < s.size(); ++i) {
    for (size_t j = 0; j < s.size(); ++j) {
      if (y[i] != 1 || y[j] != 0) continue;
      ++pairs;
      wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
    }
  }
  return wins / static_cast<Scalar>(pairs);
}

}  // namespace

TEST_CASE("learning rate schedule") {
  TrainConfig c;
  CHECK(lr_at(0, c) == 0.001);
  CHECK(lr_at(19, c) == 0.001);
  CHECK(lr_at(20, c) == 0.0001);
  CHECK(lr_at(40, c) == 0.00001);
  c.lr_decay = 2;
  c.decay_every = 5;
  CHECK(lr_at(12, c) == 0.00025);
}

TEST_CASE("Adam matches a scalar re-implementation") {
  TrainConfig c;
  std::vector<NamedParam> params = {{"w", Matrix::Constant(1, 1, 0.5)}};
  AdamState state;
  const Scalar grads[3] = {0.3, -1.2, 0.05};
  Scalar x = 0.5, m = 0, v = 0;
  for (int t = 1; t <= 3; ++t) {
    adam_step(params, {Matrix::Constant(1, 1, grads[t - 1])}, state, 0.01, c);
    const Scalar g = grads[t - 1];
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    const Scalar mh = m / (1 - std::pow(0.9, t));
    const Scalar vh = v / (1 - std::pow(0.999, t));
    x -= 0.01 * mh / (std::sqrt(vh) + 1e-8);
    CHECK(params[0].value(0, 0) == doctest::Approx(x).epsilon(1e-14));
  }
  CHECK_THROWS_AS(adam_step(params, {Matrix::Constant(1, 1, std::nan(""))}, state, 0.01, c), NumericalError);
  CHECK(params[0].value(0, 0) == doctest::Approx(x).epsilon(1e-14));
}

TEST_CASE("cross entropy") {
  CHECK(cross_entropy(0.5, 1) == doctest::Approx(std::log(2.0)));
  CHECK(cross_entropy(0.9, 0) == doctest::Approx(-std::log(0.1)));
  CHECK(std::isfinite(cross_entropy(0.0, 1)));
}

TEST_CASE("supervised steps and targets") {
  Sequence seq;
  seq.labels = {0, 1, 0, 1};
  seq.snapshots.assign(3, Matrix::Zero(2, 2));
  CHECK(supervised_steps(seq) == 2);
  CHECK(step_target(seq, 1) == 0);
  CHECK(step_target(seq, 2) == 1);
  seq.next_label = 1;
  CHECK(supervised_steps(seq) == 3);
  CHECK(step_target(seq, 3) == 1);
}

TEST_CASE("training loss gradient passes a finite-difference check") {
  for (MessageKind kind : {MessageKind::kPool, MessageKind::kGgnn, MessageKind::kGat}) {
    ModelConfig c;
    c.num_states = 2;
    c.tau = 4;
    c.dim = 1;
    c.u_size = 8;
    c.hg_size = 8;
    c.message = kind;
    CAPTURE(to_string(kind));
    const GradCheckReport r = model_grad_check(c, 3);
    CHECK(r.max_rel_error < 1e-4);
    CHECK(r.worst_per_param.size() == evonet_param_shapes(c).size());
  }
  // With two states every recognition row is one-hot, each node has a single
  // neighbour and the GAT coefficients are constant; three states exercise them.
  ModelConfig gat;
  gat.num_states = 3;
  gat.tau = 4;
  gat.u_size = 8;
  gat.hg_size = 8;
  gat.message = MessageKind::kGat;
  const GradCheckReport r = model_grad_check(gat, 3);
  CHECK(r.max_rel_error < 1e-4);
  CHECK(r.worst_per_param.front().name == "msg.att");
  CHECK(std::abs(r.worst_per_param.front().analytic) > 0);

  // The ablation's loss too.
  std::mt19937_64 rng(1);
  const std::vector<Sequence> data = toy_data(1, rng);
  const WithoutGraph wog(toy_config(), 5);
  const TrainConfig tc;
  const Scalar w[2] = {1.0, 1.0};
  const LossBuilder f = [&](Tape& tape, const std::vector<Var>& leaves) {
    return sequence_loss(tape, wog, leaves, data[0], tc, w);
  };
  CHECK(grad_check(f, wog.params()).passed());
}

TEST_CASE("training reduces the loss, is deterministic and keeps the best iterate") {
  std::mt19937_64 rng(2);
  const std::vector<Sequence> train_set = toy_data(40, rng);
  const std::vector<Sequence> val_set = toy_data(10, rng);
  TrainConfig tc;
  tc.iterations = 15;
  tc.batch_size = 8;
  tc.learning_rate = 0.02;
  tc.seed = 4;
  const Matrix h0 = uniform(2, 2, rng);
  auto run = [&](TrainResult& r) {
    EvoNet net(toy_config(), h0, 9);
    r = train(net, train_set, val_set, tc);
    return net;
  };
  TrainResult r1, r2;
  const EvoNet a = run(r1);
  const EvoNet b = run(r2);
  REQUIRE(r1.curve.size() == 15);
  CHECK_FALSE(r1.diverged);
  CHECK(r1.curve.back().train_loss < r1.curve.front().train_loss);
  Scalar best = r1.curve.front().val_loss;
  for (const LossRecord& rec : r1.curve) best = std::min(best, rec.val_loss);
  CHECK(r1.best_val_loss == best);
  CHECK(dataset_loss(a, val_set, tc) == doctest::Approx(best).epsilon(1e-12));
  for (size_t k = 0; k < a.params().size(); ++k) CHECK(a.params()[k].value == b.params()[k].value);
  CHECK(r1.curve[0].lr == 0.02);
}

TEST_CASE("AUC equals the pairwise oracle") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> level(0, 30);
  std::bernoulli_distribution coin(0.4);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<Scalar> s;
    std::vector<int> y;
    for (int i = 0; i < 200; ++i) {
      s.push_back(level(rng) / 30.0);
      y.push_back(coin(rng));
    }
    CHECK(auc_score(s, y) == pairwise_auc(s, y));
  }
  CHECK(auc_score({0.1, 0.9}, {1, 1}) == -1.0);
}

TEST_CASE("F1 and confusion counts") {
  const Metrics m = score_metrics({0.9, 0.6, 0.4, 0.2, 0.7}, {1, 0, 1, 0, 1}, 0.5);
  CHECK(m.tp == 2);
  CHECK(m.fp == 1);
  CHECK(m.fn == 1);
  CHECK(m.tn == 1);
  CHECK(m.f1 == doctest::Approx(2.0 * 2 / (2.0 * 2 + 1 + 1)));
  const Metrics none = score_metrics({0.1, 0.2}, {0, 0}, 0.5);
  CHECK(none.f1 == 0.0);
  CHECK_FALSE(none.auc_defined);
  const auto doc = nlohmann::json::parse(metrics_to_json(m));
  CHECK(doc["tp"] == 2);
}

TEST_CASE("chronological split sizes") {
  std::vector<Index> t(100);
  for (Index i = 0; i < 100; ++i) t[static_cast<size_t>(i)] = i * 10;
  Split s = split(t);
  CHECK(s.train.size() == 72);
  CHECK(s.val.size() == 8);
  CHECK(s.test.size() == 20);
  CHECK(s.val.front() == 72);
  CHECK(s.test.front() == 80);
  t.resize(10);
  s = split(t);
  CHECK(s.train.size() == 7);
  CHECK(s.val.size() == 1);
  CHECK(s.test.size() == 2);
  CHECK_THROWS_AS(split({3, 1, 2, 4, 5}), ValidationError);
  CHECK_THROWS_AS(split({1, 2}), ValidationError);
}

TEST_CASE("loss curve CSV") {
  const std::string csv = loss_curve_csv({{0, 0.7, 0.69, 0.001}});
  CHECK(csv.rfind("iteration,train_loss,val_loss,lr\n0,", 0) == 0);
}
