#ifndef EVONET_CHECKPOINT_HPP
#define EVONET_CHECKPOINT_HPP

#include "evonet/model.hpp"
#include "evonet/states.hpp"

#include <memory>
#include <string>

namespace evonet {

/// A trained model plus the state model that produced its inputs.
struct Checkpoint {
  std::string kind;  // "evonet" or "wog"
  ModelConfig config;
  std::vector<NamedParam> params;
  StateModel states;
};

Checkpoint make_checkpoint(const Predictor& model, const ModelConfig& config, const StateModel& states);

/// Versioned JSON: {version, kind, config, tensors: {name: {shape, data}}, state_model}.
std::string checkpoint_to_json(const Checkpoint& ckpt);

/// Rejects unknown versions, truncated documents and tensors that do not fit
/// the config. With `expected`, also rejects a differing config.
Checkpoint checkpoint_from_json(const std::string& text, const ModelConfig* expected = nullptr);

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path, const ModelConfig* expected = nullptr);

std::unique_ptr<Predictor> make_predictor(const Checkpoint& ckpt);

}  // namespace evonet

#endif  // EVONET_CHECKPOINT_HPP
