#include "evonet/model.hpp"

#include <cmath>

namespace evonet {

namespace {

constexpr Scalar kGatSlope = 0.2;

const char* const kGates[] = {"f", "i", "c", "o"};

void add_lstm_shapes(std::vector<ParamShape>& out, const std::string& prefix, Index input, Index hidden) {
  const Index fan_in = hidden + input;
  for (const char* g : kGates) out.push_back({prefix + ".w_" + g, fan_in, hidden, fan_in});
  for (const char* g : kGates) out.push_back({prefix + ".b_" + g, 1, hidden, fan_in});
}

LstmVars bind_lstm(const std::vector<ParamShape>& shapes, const std::vector<Var>& leaves, const std::string& prefix) {
  LstmVars w;
  Var* slots[] = {&w.w_f, &w.w_i, &w.w_c, &w.w_o, &w.b_f, &w.b_i, &w.b_c, &w.b_o};
  const std::string names[] = {prefix + ".w_f", prefix + ".w_i", prefix + ".w_c", prefix + ".w_o",
                               prefix + ".b_f", prefix + ".b_i", prefix + ".b_c", prefix + ".b_o"};
  for (size_t k = 0; k < shapes.size(); ++k) {
    for (int j = 0; j < 8; ++j) {
      if (shapes[k].name == names[j]) *slots[j] = leaves[k];
    }
  }
  return w;
}

void check_leaves(const std::vector<NamedParam>& params, const std::vector<Var>& leaves) {
  if (leaves.size() != params.size()) {
    throw ValidationError("forward: expected " + std::to_string(params.size()) + " parameter leaves, got " +
                          std::to_string(leaves.size()));
  }
}

void check_sequence(const Sequence& seq, Index steps, Index num_states) {
  if (static_cast<Index>(seq.labels.size()) != static_cast<Index>(seq.snapshots.size()) + 1) {
    throw ValidationError("sequence '" + seq.id + "': expected one more label than snapshots");
  }
  if (steps < 1 || steps > static_cast<Index>(seq.snapshots.size())) {
    throw ValidationError("sequence '" + seq.id + "': cannot run " + std::to_string(steps) + " steps over " +
                          std::to_string(seq.snapshots.size()) + " snapshots");
  }
  for (Index s = 0; s < steps; ++s) {
    const Matrix& m = seq.snapshots[static_cast<size_t>(s)];
    if (m.rows() != num_states || m.cols() != num_states) {
      throw ValidationError("sequence '" + seq.id + "': snapshot " + std::to_string(s + 1) + " has shape " +
                            shape_string(m) + ", model expects " + shape_string(num_states, num_states));
    }
  }
}

Var gate(Var x, Var w, Var b) { return add(matmul(x, w), b); }

}  // namespace

std::string to_string(MessageKind kind) {
  switch (kind) {
    case MessageKind::kPool: return "pool";
    case MessageKind::kGgnn: return "ggnn";
    case MessageKind::kGat: return "gat";
  }
  return "?";
}

MessageKind parse_message_kind(const std::string& name) {
  if (name == "pool") return MessageKind::kPool;
  if (name == "ggnn") return MessageKind::kGgnn;
  if (name == "gat") return MessageKind::kGat;
  throw ValidationError("unknown message kind '" + name + "' (expected pool, ggnn or gat)");
}

void ModelConfig::validate() const {
  if (num_states < 1) throw ValidationError("model: num_states must be >= 1");
  if (tau < 1 || dim < 1) throw ValidationError("model: tau and dim must be >= 1");
  if (u_size < 1 || hg_size < 1) throw ValidationError("model: u_size and hg_size must be >= 1");
  if (!(gat_epsilon > 0)) throw ValidationError("model: gat_epsilon must be positive");
}

bool operator==(const ModelConfig& a, const ModelConfig& b) {
  return a.num_states == b.num_states && a.tau == b.tau && a.dim == b.dim && a.u_size == b.u_size &&
         a.hg_size == b.hg_size && a.message == b.message && a.attention == b.attention &&
         a.gat_epsilon == b.gat_epsilon;
}

std::vector<Scalar> Predictor::step_probabilities(const Sequence& seq, Index steps,
                                                  std::vector<Scalar>* alphas) const {
  Tape tape;
  std::vector<Var> leaves;
  leaves.reserve(params().size());
  for (const NamedParam& p : params()) leaves.push_back(tape.constant(p.value));
  const Forward f = forward(tape, leaves, seq, steps);
  std::vector<Scalar> out;
  out.reserve(f.probs.size());
  for (Var p : f.probs) out.push_back(p.value()(0, 1));
  if (alphas) {
    alphas->clear();
    for (Var a : f.alphas) alphas->push_back(a.value()(0, 0));
  }
  return out;
}

Matrix uniform_init(const ParamShape& shape, std::mt19937_64& rng) {
  const Scalar s = 1.0 / std::sqrt(static_cast<Scalar>(shape.fan_in));
  std::uniform_real_distribution<Scalar> dist(-s, s);
  Matrix m(shape.rows, shape.cols);
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) m(r, c) = dist(rng);
  }
  return m;
}

std::vector<NamedParam> init_params(const std::vector<ParamShape>& shapes, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<NamedParam> out;
  out.reserve(shapes.size());
  for (const ParamShape& s : shapes) out.push_back({s.name, uniform_init(s, rng)});
  return out;
}

void check_params(const std::vector<ParamShape>& shapes, const std::vector<NamedParam>& params) {
  if (shapes.size() != params.size()) {
    throw ValidationError("parameters: expected " + std::to_string(shapes.size()) + " tensors, got " +
                          std::to_string(params.size()));
  }
  for (size_t k = 0; k < shapes.size(); ++k) {
    const ParamShape& s = shapes[k];
    const NamedParam& p = params[k];
    if (p.name != s.name) throw ValidationError("parameters: expected '" + s.name + "', got '" + p.name + "'");
    if (p.value.rows() != s.rows || p.value.cols() != s.cols) {
      throw ValidationError("parameters: '" + s.name + "' has shape " + shape_string(p.value) + ", expected " +
                            shape_string(s.rows, s.cols));
    }
    if (!p.value.allFinite()) throw ValidationError("parameters: '" + s.name + "' holds non-finite values");
  }
}

// ---- building blocks -----------------------------------------------------

LstmState lstm_cell(const LstmState& prev, Var input, const LstmVars& w) {
  const Var x = concat(prev.h, input, 1);
  const Var f = sigmoid(gate(x, w.w_f, w.b_f));
  const Var i = sigmoid(gate(x, w.w_i, w.b_i));
  const Var g = tanh(gate(x, w.w_c, w.b_c));
  const Var o = sigmoid(gate(x, w.w_o, w.b_o));
  const Var c = add(mul(f, prev.c), mul(i, g));
  return {mul(o, tanh(c)), c};
}

Var message_pool(Var m, Var h) { return matmul(transpose(m), h); }

Var message_ggnn(Var m, Var h, Var w_in, Var w_out, Var b) {
  const Var in = matmul(matmul(transpose(m), h), w_in);
  const Var out = matmul(matmul(m, h), w_out);
  return add(add(in, out), b);
}

Var message_gat(Var m, Var h, Var a, Scalar epsilon) {
  Tape& tape = *h.tape;
  const Index n = h.rows();
  const Index width = h.cols();
  if (a.rows() != 2 * width || a.cols() != 1) {
    throw ValidationError("message_gat: attention weight " + shape_string(a.value()) + " does not fit node width " +
                          std::to_string(width));
  }
  const Matrix m_in = m.value().transpose();
  const Matrix mask = (m_in.array() >= epsilon).cast<Scalar>();

  const Var zeros = tape.constant(Matrix::Zero(n, width));
  const Var self = matmul(concat(h, zeros, 1), a);      // a_1 . h_v
  const Var other = matmul(concat(zeros, h, 1), a);     // a_2 . h_v'
  const Var ones_row = tape.constant(Matrix::Ones(1, n));
  const Var ones_col = tape.constant(Matrix::Ones(n, 1));
  const Var scores = add(matmul(self, ones_row), matmul(ones_col, transpose(other)));
  const Var coef = masked_softmax_rows(leaky_relu(scores, kGatSlope), mask);
  return matmul(mul(transpose(m), coef), h);
}

Var attention_score(Var u_prev, Var aggregated, Var w) {
  return sigmoid(matmul(concat(u_prev, sum(aggregated, 0), 1), w));
}

Var readout(Var u, Var h, Var fc_w, Var fc_b, Var cls_w, Var cls_b) {
  const Var hg = tanh(gate(concat(u, sum(h, 0), 1), fc_w, fc_b));
  return softmax(gate(hg, cls_w, cls_b), 1);
}

EvoState evoblock_step(const ModelConfig& config, const EvoVars& vars, Var m, int event, const EvoState& prev,
                       Var* alpha) {
  if (event != 0 && event != 1) throw ValidationError("evoblock_step: event label must be 0 or 1");
  Tape& tape = *m.tape;
  const Index n = config.num_states;

  Var aggregated;
  switch (config.message) {
    case MessageKind::kPool: aggregated = message_pool(m, prev.node.h); break;
    case MessageKind::kGgnn:
      aggregated = message_ggnn(m, prev.node.h, vars.msg_w_in, vars.msg_w_out, vars.msg_b);
      break;
    case MessageKind::kGat: aggregated = message_gat(m, prev.node.h, vars.msg_att, config.gat_epsilon); break;
  }

  Var a;
  Var u_part = prev.graph.h;
  if (config.attention) {
    a = attention_score(prev.graph.h, aggregated, vars.attn_w);
    u_part = mul(u_part, a);
  } else {
    a = tape.constant(Matrix::Ones(1, 1));
  }
  const Var u_rows = matmul(tape.constant(Matrix::Ones(n, 1)), u_part);
  const LstmState node = lstm_cell(prev.node, concat(aggregated, u_rows, 1), vars.node);

  Var node_sum = sum(node.h, 0);
  if (config.attention) node_sum = mul(node_sum, a);
  const Var y = tape.constant(Matrix::Constant(1, 1, static_cast<Scalar>(event)));
  const LstmState graph = lstm_cell(prev.graph, concat(y, node_sum, 1), vars.graph);

  if (alpha) *alpha = a;
  return {node, graph};
}

// ---- EvoNet --------------------------------------------------------------

std::vector<ParamShape> evonet_param_shapes(const ModelConfig& config) {
  config.validate();
  const Index h = config.h_size();
  const Index u = config.u_size;
  std::vector<ParamShape> out;
  if (config.message == MessageKind::kGgnn) {
    out.push_back({"msg.w_in", h, h, h});
    out.push_back({"msg.w_out", h, h, h});
    out.push_back({"msg.b", 1, h, h});
  } else if (config.message == MessageKind::kGat) {
    out.push_back({"msg.att", 2 * h, 1, 2 * h});
  }
  if (config.attention) out.push_back({"attn.w", u + h, 1, u + h});
  add_lstm_shapes(out, "node", h + u, h);
  add_lstm_shapes(out, "graph", 1 + h, u);
  out.push_back({"readout.w", u + h, config.hg_size, u + h});
  out.push_back({"readout.b", 1, config.hg_size, u + h});
  out.push_back({"cls.w", config.hg_size, 2, config.hg_size});
  out.push_back({"cls.b", 1, 2, config.hg_size});
  return out;
}

EvoNet::EvoNet(ModelConfig config, Matrix initial_nodes, std::uint64_t seed)
    : EvoNet(config, std::move(initial_nodes), init_params(evonet_param_shapes(config), seed)) {}

EvoNet::EvoNet(ModelConfig config, Matrix initial_nodes, std::vector<NamedParam> params)
    : config_(config), h0_(std::move(initial_nodes)), params_(std::move(params)) {
  config_.validate();
  if (h0_.rows() != config_.num_states || h0_.cols() != config_.h_size()) {
    throw ValidationError("evonet: initial node states " + shape_string(h0_) + " do not match " +
                          shape_string(config_.num_states, config_.h_size()));
  }
  if (!h0_.allFinite()) throw ValidationError("evonet: initial node states hold non-finite values");
  check_params(evonet_param_shapes(config_), params_);
}

EvoVars EvoNet::bind(const std::vector<Var>& leaves) const {
  check_leaves(params_, leaves);
  const std::vector<ParamShape> shapes = evonet_param_shapes(config_);
  EvoVars v;
  for (size_t k = 0; k < shapes.size(); ++k) {
    const std::string& name = shapes[k].name;
    if (name == "msg.w_in") v.msg_w_in = leaves[k];
    else if (name == "msg.w_out") v.msg_w_out = leaves[k];
    else if (name == "msg.b") v.msg_b = leaves[k];
    else if (name == "msg.att") v.msg_att = leaves[k];
    else if (name == "attn.w") v.attn_w = leaves[k];
    else if (name == "readout.w") v.readout_w = leaves[k];
    else if (name == "readout.b") v.readout_b = leaves[k];
    else if (name == "cls.w") v.cls_w = leaves[k];
    else if (name == "cls.b") v.cls_b = leaves[k];
  }
  v.node = bind_lstm(shapes, leaves, "node");
  v.graph = bind_lstm(shapes, leaves, "graph");
  return v;
}

Forward EvoNet::forward(Tape& tape, const std::vector<Var>& leaves, const Sequence& seq, Index steps) const {
  check_sequence(seq, steps, config_.num_states);
  const EvoVars vars = bind(leaves);
  const Index n = config_.num_states;
  EvoState state{{tape.constant(h0_), tape.constant(Matrix::Zero(n, config_.h_size()))},
                 {tape.constant(Matrix::Zero(1, config_.u_size)), tape.constant(Matrix::Zero(1, config_.u_size))}};
  Forward out;
  out.probs.reserve(static_cast<size_t>(steps));
  out.alphas.reserve(static_cast<size_t>(steps));
  for (Index s = 1; s <= steps; ++s) {
    const Var m = tape.constant(seq.snapshots[static_cast<size_t>(s - 1)]);
    Var a;
    state = evoblock_step(config_, vars, m, seq.labels[static_cast<size_t>(s)], state, &a);
    out.probs.push_back(readout(state.graph.h, state.node.h, vars.readout_w, vars.readout_b, vars.cls_w, vars.cls_b));
    out.alphas.push_back(a);
  }
  return out;
}

// ---- without graph -------------------------------------------------------

std::vector<ParamShape> wog_param_shapes(const ModelConfig& config) {
  config.validate();
  const Index u = config.u_size;
  std::vector<ParamShape> out;
  add_lstm_shapes(out, "lstm", config.num_states + 1, u);
  out.push_back({"readout.w", u, config.hg_size, u});
  out.push_back({"readout.b", 1, config.hg_size, u});
  out.push_back({"cls.w", config.hg_size, 2, config.hg_size});
  out.push_back({"cls.b", 1, 2, config.hg_size});
  return out;
}

WithoutGraph::WithoutGraph(ModelConfig config, std::uint64_t seed)
    : WithoutGraph(config, init_params(wog_param_shapes(config), seed)) {}

WithoutGraph::WithoutGraph(ModelConfig config, std::vector<NamedParam> params)
    : config_(config), params_(std::move(params)) {
  config_.validate();
  check_params(wog_param_shapes(config_), params_);
}

Forward WithoutGraph::forward(Tape& tape, const std::vector<Var>& leaves, const Sequence& seq, Index steps) const {
  check_sequence(seq, steps, config_.num_states);
  check_leaves(params_, leaves);
  if (static_cast<Index>(seq.states.size()) <= steps) {
    throw ValidationError("sequence '" + seq.id + "': missing argmax states");
  }
  const std::vector<ParamShape> shapes = wog_param_shapes(config_);
  const LstmVars w = bind_lstm(shapes, leaves, "lstm");
  const size_t tail = shapes.size() - 4;
  const Var fc_w = leaves[tail], fc_b = leaves[tail + 1], cls_w = leaves[tail + 2], cls_b = leaves[tail + 3];

  const Index v = config_.num_states;
  auto input = [&](Index t, int event) {
    Matrix x = Matrix::Zero(1, v + 1);
    const Index state = seq.states[static_cast<size_t>(t)];
    if (state < 0 || state >= v) throw ValidationError("sequence '" + seq.id + "': state index out of range");
    x(0, state) = 1.0;
    x(0, v) = event;
    return tape.constant(x);
  };

  LstmState st{tape.constant(Matrix::Zero(1, config_.u_size)), tape.constant(Matrix::Zero(1, config_.u_size))};
  st = lstm_cell(st, input(0, 0), w);
  Forward out;
  for (Index s = 1; s <= steps; ++s) {
    st = lstm_cell(st, input(s, seq.labels[static_cast<size_t>(s)]), w);
    const Var hg = tanh(gate(st.h, fc_w, fc_b));
    out.probs.push_back(softmax(gate(hg, cls_w, cls_b), 1));
  }
  return out;
}

std::vector<Scalar> normalize_attention(const std::vector<Scalar>& alphas) {
  if (alphas.empty()) return {};
  Scalar top = alphas.front();
  for (Scalar a : alphas) top = std::max(top, a);
  std::vector<Scalar> out(alphas.size());
  Scalar z = 0;
  for (size_t k = 0; k < alphas.size(); ++k) z += out[k] = std::exp(alphas[k] - top);
  for (Scalar& o : out) o /= z;
  return out;
}

}  // namespace evonet
