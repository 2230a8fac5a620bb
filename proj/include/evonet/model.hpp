#ifndef EVONET_MODEL_HPP
#define EVONET_MODEL_HPP

#include "evonet/core.hpp"
#include "evonet/grad_check.hpp"
#include "evonet/tape.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace evonet {

enum class MessageKind { kPool, kGgnn, kGat };

std::string to_string(MessageKind kind);
MessageKind parse_message_kind(const std::string& name);

struct ModelConfig {
  Index num_states = 0;
  Index tau = 0;
  Index dim = 1;
  Index u_size = 32;
  Index hg_size = 32;
  MessageKind message = MessageKind::kGgnn;
  bool attention = true;
  Scalar gat_epsilon = 1e-3;

  Index h_size() const { return tau * dim; }
  void validate() const;
};

bool operator==(const ModelConfig& a, const ModelConfig& b);

/// One labeled sequence after recognition and graph building.
/// snapshots[s-1] holds the transitions from segment s-1 to segment s, so
/// labels.size() == snapshots.size() + 1. states[t] is the argmax state of segment t.
struct Sequence {
  std::string id;
  std::vector<Matrix> snapshots;
  std::vector<int> labels;
  std::vector<Index> states;
  int next_label = -1;  // event after the last segment, when observed

  Index segments() const { return static_cast<Index>(labels.size()); }
};

/// Per-step outputs of an unrolled forward pass. probs[s-1] (1x2) is the
/// forecast of labels[s+1] made at step s; alphas[s-1] is the attention at step s.
struct Forward {
  std::vector<Var> probs;
  std::vector<Var> alphas;
};

/// Anything trainable by the training loop: named parameters plus a tape forward.
class Predictor {
 public:
  virtual ~Predictor() = default;

  virtual std::string kind() const = 0;
  virtual const std::vector<NamedParam>& params() const = 0;
  virtual std::vector<NamedParam>& params() = 0;

  /// Runs steps 1..steps of `seq`. `leaves` are tape leaves holding params() in order.
  virtual Forward forward(Tape& tape, const std::vector<Var>& leaves, const Sequence& seq, Index steps) const = 0;

  /// Forward on a scratch tape with constant parameters; returns P(event) at each step.
  std::vector<Scalar> step_probabilities(const Sequence& seq, Index steps, std::vector<Scalar>* alphas = nullptr) const;
};

struct ParamShape {
  std::string name;
  Index rows = 0;
  Index cols = 0;
  Index fan_in = 0;  // biases use the fan-in of their weight
};

/// uniform(-s, s) with s = 1/sqrt(fan_in), drawn in row-major order.
Matrix uniform_init(const ParamShape& shape, std::mt19937_64& rng);

/// Fresh parameters for a shape table, drawn in table order.
std::vector<NamedParam> init_params(const std::vector<ParamShape>& shapes, std::uint64_t seed);

/// Checks names and shapes against the table; ValidationError on any mismatch.
void check_params(const std::vector<ParamShape>& shapes, const std::vector<NamedParam>& params);

// ---- tape-level building blocks ------------------------------------------

struct LstmVars {
  Var w_f, w_i, w_c, w_o;
  Var b_f, b_i, b_c, b_o;
};

struct LstmState {
  Var h;
  Var c;
};

/// LSTM cell applied to each row independently with shared weights. input is n x k,
/// prev.h and prev.c are n x hidden, each W is (hidden + k) x hidden.
LstmState lstm_cell(const LstmState& prev, Var input, const LstmVars& w);

/// H = M^T h: row v is the in-edge weighted sum of neighbour rows.
Var message_pool(Var m, Var h);

/// H = (M^T h) W_in + (M h) W_out + b, with the bias added once per node.
Var message_ggnn(Var m, Var h, Var w_in, Var w_out, Var b);

/// Attention-rescaled pooling. The coefficient of neighbour v' for node v is the
/// softmax over N(v) = {v' : m(v', v) >= epsilon} of
/// leaky_relu(a . (h_v ++ h_v')); a is 2|h| x 1.
Var message_gat(Var m, Var h, Var a, Scalar epsilon);

/// Logistic of W_alpha . (U ++ sum_v H_v). u_prev is 1 x |U|, w is (|U| + |h|) x 1.
Var attention_score(Var u_prev, Var aggregated, Var w);

/// tanh(W_fc (U ++ sum_v h_v) + b_fc), then a softmax over two classes.
Var readout(Var u, Var h, Var fc_w, Var fc_b, Var cls_w, Var cls_b);

struct EvoVars {
  Var msg_w_in, msg_w_out, msg_b, msg_att;
  Var attn_w;
  LstmVars node;
  LstmVars graph;
  Var readout_w, readout_b, cls_w, cls_b;
};

struct EvoState {
  LstmState node;   // |V| x |h|
  LstmState graph;  // 1 x |U|
};

/// One EvoBlock step. `alpha` receives the 1x1 attention (constant 1 when disabled).
EvoState evoblock_step(const ModelConfig& config, const EvoVars& vars, Var m, int event, const EvoState& prev,
                       Var* alpha = nullptr);

// ---- models --------------------------------------------------------------

/// Recurrent graph model. h^(0) rows are the flattened state patterns.
class EvoNet final : public Predictor {
 public:
  EvoNet(ModelConfig config, Matrix initial_nodes, std::uint64_t seed);
  EvoNet(ModelConfig config, Matrix initial_nodes, std::vector<NamedParam> params);

  std::string kind() const override { return "evonet"; }
  const std::vector<NamedParam>& params() const override { return params_; }
  std::vector<NamedParam>& params() override { return params_; }
  Forward forward(Tape& tape, const std::vector<Var>& leaves, const Sequence& seq, Index steps) const override;

  const ModelConfig& config() const { return config_; }
  const Matrix& initial_nodes() const { return h0_; }
  EvoVars bind(const std::vector<Var>& leaves) const;

 private:
  ModelConfig config_;
  Matrix h0_;
  std::vector<NamedParam> params_;
};

/// Parameter names and shapes an EvoNet with this config carries, in order.
std::vector<ParamShape> evonet_param_shapes(const ModelConfig& config);

/// Ablation without the graph: one-hot argmax state ++ previous event into a
/// plain LSTM, then the same style of readout and classifier.
class WithoutGraph final : public Predictor {
 public:
  WithoutGraph(ModelConfig config, std::uint64_t seed);
  WithoutGraph(ModelConfig config, std::vector<NamedParam> params);

  std::string kind() const override { return "wog"; }
  const std::vector<NamedParam>& params() const override { return params_; }
  std::vector<NamedParam>& params() override { return params_; }
  Forward forward(Tape& tape, const std::vector<Var>& leaves, const Sequence& seq, Index steps) const override;

  const ModelConfig& config() const { return config_; }

 private:
  ModelConfig config_;
  std::vector<NamedParam> params_;
};

std::vector<ParamShape> wog_param_shapes(const ModelConfig& config);

/// Softmax of the per-step logistic attentions across time, for plots and reports only.
std::vector<Scalar> normalize_attention(const std::vector<Scalar>& alphas);

}  // namespace evonet

#endif  // EVONET_MODEL_HPP
