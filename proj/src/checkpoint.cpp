#include "evonet/checkpoint.hpp"

#include "evonet/dataset.hpp"

#include <json.hpp>

namespace evonet {

namespace {

using nlohmann::json;

constexpr int kCheckpointVersion = 1;

json config_json(const ModelConfig& c) {
  json j;
  j["num_states"] = c.num_states;
  j["tau"] = c.tau;
  j["dim"] = c.dim;
  j["u_size"] = c.u_size;
  j["hg_size"] = c.hg_size;
  j["message_kind"] = to_string(c.message);
  j["attention_enabled"] = c.attention;
  j["gat_epsilon"] = c.gat_epsilon;
  return j;
}

ModelConfig config_from(const json& j) {
  ModelConfig c;
  c.num_states = j.at("num_states").get<Index>();
  c.tau = j.at("tau").get<Index>();
  c.dim = j.at("dim").get<Index>();
  c.u_size = j.at("u_size").get<Index>();
  c.hg_size = j.at("hg_size").get<Index>();
  c.message = parse_message_kind(j.at("message_kind").get<std::string>());
  c.attention = j.at("attention_enabled").get<bool>();
  c.gat_epsilon = j.at("gat_epsilon").get<Scalar>();
  c.validate();
  return c;
}

std::vector<ParamShape> shapes_for(const std::string& kind, const ModelConfig& config) {
  if (kind == "evonet") return evonet_param_shapes(config);
  if (kind == "wog") return wog_param_shapes(config);
  throw ValidationError("checkpoint: unknown model kind '" + kind + "'");
}

}  // namespace

Checkpoint make_checkpoint(const Predictor& model, const ModelConfig& config, const StateModel& states) {
  return Checkpoint{model.kind(), config, model.params(), states};
}

std::string checkpoint_to_json(const Checkpoint& ckpt) {
  json doc;
  doc["version"] = kCheckpointVersion;
  doc["kind"] = ckpt.kind;
  doc["config"] = config_json(ckpt.config);
  json tensors = json::array();
  for (const NamedParam& p : ckpt.params) {
    json t;
    t["name"] = p.name;
    t["shape"] = {p.value.rows(), p.value.cols()};
    std::vector<Scalar> data;
    data.reserve(static_cast<size_t>(p.value.size()));
    for (Index r = 0; r < p.value.rows(); ++r) {
      for (Index c = 0; c < p.value.cols(); ++c) data.push_back(p.value(r, c));
    }
    t["data"] = data;
    tensors.push_back(t);
  }
  doc["tensors"] = tensors;
  doc["state_model"] = json::parse(state_model_to_json(ckpt.states));
  return doc.dump(1) + "\n";
}

Checkpoint checkpoint_from_json(const std::string& text, const ModelConfig* expected) {
  Checkpoint ckpt;
  try {
    const json doc = json::parse(text);
    if (doc.at("version").get<int>() != kCheckpointVersion) {
      throw ValidationError("checkpoint: unsupported version " + doc.at("version").dump());
    }
    ckpt.kind = doc.at("kind").get<std::string>();
    ckpt.config = config_from(doc.at("config"));
    for (const json& t : doc.at("tensors")) {
      const auto shape = t.at("shape").get<std::vector<Index>>();
      const auto data = t.at("data").get<std::vector<Scalar>>();
      if (shape.size() != 2 || shape[0] < 1 || shape[1] < 1 || static_cast<Index>(data.size()) != shape[0] * shape[1]) {
        throw ValidationError("checkpoint: tensor '" + t.at("name").get<std::string>() + "' has a bad shape");
      }
      Matrix m(shape[0], shape[1]);
      for (Index r = 0; r < shape[0]; ++r) {
        for (Index c = 0; c < shape[1]; ++c) m(r, c) = data[static_cast<size_t>(r * shape[1] + c)];
      }
      ckpt.params.push_back({t.at("name").get<std::string>(), std::move(m)});
    }
    ckpt.states = state_model_from_json(doc.at("state_model").dump());
  } catch (const json::exception& e) {
    throw ValidationError(std::string("checkpoint: malformed or truncated document: ") + e.what());
  }
  check_params(shapes_for(ckpt.kind, ckpt.config), ckpt.params);
  if (ckpt.states.num_states() != ckpt.config.num_states || ckpt.states.tau != ckpt.config.tau ||
      ckpt.states.dim != ckpt.config.dim) {
    throw ValidationError("checkpoint: state model does not match the model config");
  }
  if (expected && !(*expected == ckpt.config)) throw ValidationError("checkpoint: config mismatch");
  return ckpt;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  write_file_atomic(path, checkpoint_to_json(ckpt));
}

Checkpoint load_checkpoint(const std::string& path, const ModelConfig* expected) {
  return checkpoint_from_json(read_file(path), expected);
}

std::unique_ptr<Predictor> make_predictor(const Checkpoint& ckpt) {
  if (ckpt.kind == "evonet") {
    return std::make_unique<EvoNet>(ckpt.config, flatten_segments(ckpt.states.patterns), ckpt.params);
  }
  if (ckpt.kind == "wog") return std::make_unique<WithoutGraph>(ckpt.config, ckpt.params);
  throw ValidationError("checkpoint: unknown model kind '" + ckpt.kind + "'");
}

}  // namespace evonet
