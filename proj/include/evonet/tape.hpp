#ifndef EVONET_TAPE_HPP
#define EVONET_TAPE_HPP

#include "evonet/core.hpp"
#include "evonet/tensor.hpp"

#include <cstdint>
#include <string_view>
#include <vector>

namespace evonet {

class Tape;

using NodeId = std::int32_t;

/// Handle to a value recorded on a Tape. Cheap to copy; valid while the tape lives.
struct Var {
  Tape* tape = nullptr;
  NodeId id = -1;

  const Matrix& value() const;
  Index rows() const { return value().rows(); }
  Index cols() const { return value().cols(); }
};

/// Gradients of a scalar loss with respect to every node on a tape.
class Gradients {
 public:
  Gradients() = default;
  explicit Gradients(std::vector<Matrix> grads) : grads_(std::move(grads)) {}

  /// Zero matrix of the node's shape when the loss does not depend on it.
  const Matrix& of(Var v) const;
  const Matrix& of(NodeId id) const { return grads_.at(static_cast<size_t>(id)); }
  size_t size() const { return grads_.size(); }

 private:
  std::vector<Matrix> grads_;
};

enum class OpKind : std::uint8_t {
  kLeaf,
  kConstant,
  kMatMul,
  kAdd,
  kMul,
  kConcat,
  kSum,
  kSigmoid,
  kTanh,
  kSoftmax,
  kScale,
  kTranspose,
  kLeakyRelu,
  kMaskedSoftmax,
  kBinaryCrossEntropy,
};

std::string_view op_name(OpKind op);

/// Define-by-run reverse-mode tape.
///
/// Nodes are appended in evaluation order, so ids are a topological order and
/// backward is a single reverse sweep. Every forward result is checked for
/// NaN/Inf; the first offending op raises NumericalError naming itself.
/// Single owner, single thread.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// A differentiable input (parameter).
  Var leaf(const Matrix& value);
  Var leaf(const Tensor& value) { return leaf(value.matrix()); }
  /// A non-differentiable input; backward never propagates into it.
  Var constant(const Matrix& value);
  Var constant(const Tensor& value) { return constant(value.matrix()); }

  const Matrix& value(NodeId id) const { return nodes_[static_cast<size_t>(id)].value; }
  Tensor tensor(Var v) const { return Tensor(value(v.id)); }
  size_t size() const { return nodes_.size(); }
  OpKind op(NodeId id) const { return nodes_[static_cast<size_t>(id)].op; }

  /// Reverse sweep from a 1x1 node. Accumulators start at zero and sum across fan-out.
  Gradients backward(Var loss) const;

 private:
  struct Node {
    OpKind op = OpKind::kLeaf;
    bool requires_grad = false;
    NodeId a = -1;
    NodeId b = -1;
    int axis = 0;
    Scalar scalar = 0.0;
    Matrix value;
    Matrix aux;
  };

  Var push(Node node);
  const Node& node(NodeId id) const { return nodes_[static_cast<size_t>(id)]; }

  friend Var matmul(Var a, Var b);
  friend Var add(Var a, Var b);
  friend Var mul(Var a, Var b);
  friend Var concat(Var a, Var b, int axis);
  friend Var sum(Var a, int axis);
  friend Var sigmoid(Var a);
  friend Var tanh(Var a);
  friend Var softmax(Var a, int axis);
  friend Var scale(Var a, Scalar s);
  friend Var transpose(Var a);
  friend Var leaky_relu(Var a, Scalar slope);
  friend Var masked_softmax_rows(Var a, const Matrix& mask);
  friend Var binary_cross_entropy(Var probs, int label, Scalar weight);

  std::vector<Node> nodes_;
};

// Operations. All operands must live on the same tape; shape errors raise
// ValidationError naming the op and both shapes.

Var matmul(Var a, Var b);
/// Same shapes, or `b` a 1xn row broadcast over the rows of `a`, or `b` 1x1.
Var add(Var a, Var b);
/// Elementwise; either operand may be 1x1 and is then broadcast.
Var mul(Var a, Var b);
/// axis 0 stacks rows, axis 1 stacks columns.
Var concat(Var a, Var b, int axis);
/// axis 0 -> 1xn column sums, axis 1 -> mx1 row sums, axis -1 -> 1x1 total.
Var sum(Var a, int axis);
Var sigmoid(Var a);
Var tanh(Var a);
/// axis 1 normalizes each row, axis 0 each column.
Var softmax(Var a, int axis);
Var scale(Var a, Scalar s);
Var transpose(Var a);
Var leaky_relu(Var a, Scalar slope);
/// Row softmax over entries where mask != 0; masked entries and fully masked rows give 0.
Var masked_softmax_rows(Var a, const Matrix& mask);
/// `probs` is a 1x2 distribution; returns weight * -[y ln p1 + (1-y) ln(1-p1)] with
/// p1 clamped to [1e-12, 1-1e-12] (zero gradient where the clamp is active).
Var binary_cross_entropy(Var probs, int label, Scalar weight = 1.0);

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator*(Var a, Var b) { return mul(a, b); }

}  // namespace evonet

#endif  // EVONET_TAPE_HPP
