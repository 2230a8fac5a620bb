#ifndef EVONET_PIPELINE_HPP
#define EVONET_PIPELINE_HPP

#include "evonet/grad_check.hpp"
#include "evonet/graph.hpp"
#include "evonet/model.hpp"
#include "evonet/run_config.hpp"
#include "evonet/states.hpp"

#include <vector>

namespace evonet {

/// Fits the configured recognizer on every segment of `series`.
/// SAX sees the segments as one concatenated series; shapelets need labels.
StateModel fit_states(const std::vector<Series>& series, const RunConfig& config);

/// Row-wise argmax of a recognition frame (first index on ties).
std::vector<Index> argmax_states(const RecognitionFrame& frame);

/// Segment, recognize and build the graph of one labeled series.
Sequence make_sequence(const Series& series, const StateModel& states);
std::vector<Sequence> make_sequences(const std::vector<Series>& series, const StateModel& states);

/// A random T = 3 instance (three segments plus the observed next event) for
/// `config`; the loss covers both of its steps.
struct GradCheckInstance {
  Sequence sequence;
  Matrix initial_nodes;
};
GradCheckInstance grad_check_instance(const ModelConfig& config, std::uint64_t seed);

/// Finite-difference check of the full training loss of an EvoNet on the instance.
GradCheckReport model_grad_check(const ModelConfig& config, std::uint64_t seed, Scalar step = 1e-5,
                                 Scalar tol = 1e-4);

}  // namespace evonet

#endif  // EVONET_PIPELINE_HPP
