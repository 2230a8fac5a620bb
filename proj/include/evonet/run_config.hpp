#ifndef EVONET_RUN_CONFIG_HPP
#define EVONET_RUN_CONFIG_HPP

#include "evonet/model.hpp"
#include "evonet/states.hpp"
#include "evonet/training.hpp"

#include <cstdint>
#include <string>

namespace evonet {

/// Everything a pipeline run needs. One seed feeds the named sub-streams.
struct RunConfig {
  Index tau = 8;
  Index num_states = 3;  // also the SAX alphabet size
  RecognizerKind recognizer = RecognizerKind::kKMeans;
  int kmeans_max_iter = 100;
  int kmeans_restarts = 10;
  Index shapelet_candidates = 200;
  MessageKind message = MessageKind::kGgnn;
  bool attention = true;
  Index u_size = 32;
  Index hg_size = 32;
  Scalar gat_epsilon = 1e-3;
  Scalar graph_epsilon = 1e-3;  // centrality pruning
  Scalar threshold = 0.5;
  std::uint64_t seed = 0;
  TrainConfig training;

  void validate() const;
  ModelConfig model_config(Index dim) const;
  /// Training constants with the run seed.
  TrainConfig train_config() const;
};

/// Missing keys keep their defaults; unknown keys are rejected.
RunConfig run_config_from_json(const std::string& text);
std::string run_config_to_json(const RunConfig& config);

}  // namespace evonet

#endif  // EVONET_RUN_CONFIG_HPP
