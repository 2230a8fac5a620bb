#include "evonet/run_config.hpp"

#include <json.hpp>

#include <set>

namespace evonet {

namespace {

using nlohmann::json;

template <typename T>
void range_check(const char* key, T value, T lo, T hi) {
  if (value < lo || value > hi) {
    throw ValidationError(std::string("config: '") + key + "' = " + std::to_string(value) + " outside [" +
                          std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
}

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& where) {
  for (const auto& item : obj.items()) {
    if (!known.count(item.key())) throw ValidationError("config: unknown key '" + where + item.key() + "'");
  }
}

template <typename T>
void take(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

}  // namespace

void RunConfig::validate() const {
  range_check<Index>("tau", tau, 1, 100000);
  range_check<Index>("num_states", num_states, 1, 4096);
  range_check("kmeans_max_iter", kmeans_max_iter, 1, 1000000);
  range_check("kmeans_restarts", kmeans_restarts, 1, 1000);
  range_check<Index>("shapelet_candidates", shapelet_candidates, 1, 1000000);
  range_check<Index>("u_size", u_size, 1, 4096);
  range_check<Index>("hg_size", hg_size, 1, 4096);
  if (!(gat_epsilon > 0)) throw ValidationError("config: 'gat_epsilon' must be positive");
  if (!(graph_epsilon > 0)) throw ValidationError("config: 'graph_epsilon' must be positive");
  if (!(threshold >= 0 && threshold <= 1)) throw ValidationError("config: 'threshold' must be in [0, 1]");
  if (recognizer == RecognizerKind::kSax) range_check<Index>("num_states", num_states, 2, 20);
  training.validate();
}

ModelConfig RunConfig::model_config(Index dim) const {
  ModelConfig m;
  m.num_states = num_states;
  m.tau = tau;
  m.dim = dim;
  m.u_size = u_size;
  m.hg_size = hg_size;
  m.message = message;
  m.attention = attention;
  m.gat_epsilon = gat_epsilon;
  m.validate();
  return m;
}

TrainConfig RunConfig::train_config() const {
  TrainConfig t = training;
  t.seed = seed;
  return t;
}

RunConfig run_config_from_json(const std::string& text) {
  RunConfig c;
  try {
    const json doc = json::parse(text);
    if (!doc.is_object()) throw ValidationError("config: expected a JSON object");
    reject_unknown(doc,
                   {"version", "tau", "num_states", "recognizer", "kmeans_max_iter", "kmeans_restarts",
                    "shapelet_candidates", "message_kind", "attention_enabled", "u_size", "hg_size", "gat_epsilon",
                    "graph_epsilon", "threshold", "seed", "training"},
                   "");
    if (doc.contains("version") && doc.at("version").get<int>() != 1) {
      throw ValidationError("config: unsupported version");
    }
    take(doc, "tau", c.tau);
    take(doc, "num_states", c.num_states);
    if (doc.contains("recognizer")) c.recognizer = parse_recognizer(doc.at("recognizer").get<std::string>());
    take(doc, "kmeans_max_iter", c.kmeans_max_iter);
    take(doc, "kmeans_restarts", c.kmeans_restarts);
    take(doc, "shapelet_candidates", c.shapelet_candidates);
    if (doc.contains("message_kind")) c.message = parse_message_kind(doc.at("message_kind").get<std::string>());
    take(doc, "attention_enabled", c.attention);
    take(doc, "u_size", c.u_size);
    take(doc, "hg_size", c.hg_size);
    take(doc, "gat_epsilon", c.gat_epsilon);
    take(doc, "graph_epsilon", c.graph_epsilon);
    take(doc, "threshold", c.threshold);
    take(doc, "seed", c.seed);
    if (doc.contains("training")) {
      const json& t = doc.at("training");
      reject_unknown(t,
                     {"learning_rate", "lr_decay", "decay_every", "iterations", "batch_size", "warmup_steps", "beta1",
                      "beta2", "epsilon", "final_step_only", "class_weighting"},
                     "training.");
      take(t, "learning_rate", c.training.learning_rate);
      take(t, "lr_decay", c.training.lr_decay);
      take(t, "decay_every", c.training.decay_every);
      take(t, "iterations", c.training.iterations);
      take(t, "batch_size", c.training.batch_size);
      take(t, "warmup_steps", c.training.warmup_steps);
      take(t, "beta1", c.training.beta1);
      take(t, "beta2", c.training.beta2);
      take(t, "epsilon", c.training.epsilon);
      take(t, "final_step_only", c.training.final_step_only);
      take(t, "class_weighting", c.training.class_weighting);
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: malformed document: ") + e.what());
  }
  c.validate();
  return c;
}

std::string run_config_to_json(const RunConfig& c) {
  json doc;
  doc["version"] = 1;
  doc["tau"] = c.tau;
  doc["num_states"] = c.num_states;
  doc["recognizer"] = to_string(c.recognizer);
  doc["kmeans_max_iter"] = c.kmeans_max_iter;
  doc["kmeans_restarts"] = c.kmeans_restarts;
  doc["shapelet_candidates"] = c.shapelet_candidates;
  doc["message_kind"] = to_string(c.message);
  doc["attention_enabled"] = c.attention;
  doc["u_size"] = c.u_size;
  doc["hg_size"] = c.hg_size;
  doc["gat_epsilon"] = c.gat_epsilon;
  doc["graph_epsilon"] = c.graph_epsilon;
  doc["threshold"] = c.threshold;
  doc["seed"] = c.seed;
  json t;
  t["learning_rate"] = c.training.learning_rate;
  t["lr_decay"] = c.training.lr_decay;
  t["decay_every"] = c.training.decay_every;
  t["iterations"] = c.training.iterations;
  t["batch_size"] = c.training.batch_size;
  t["warmup_steps"] = c.training.warmup_steps;
  t["beta1"] = c.training.beta1;
  t["beta2"] = c.training.beta2;
  t["epsilon"] = c.training.epsilon;
  t["final_step_only"] = c.training.final_step_only;
  t["class_weighting"] = c.training.class_weighting;
  doc["training"] = t;
  return doc.dump(2) + "\n";
}

}  // namespace evonet
