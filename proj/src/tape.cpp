#include "evonet/tape.hpp"

#include <algorithm>
#include <cmath>

namespace evonet {

namespace {

constexpr Scalar kProbFloor = 1e-12;

Tape& same_tape(Var a, Var b, std::string_view op) {
  if (a.tape == nullptr || a.tape != b.tape) {
    throw ValidationError(std::string(op) + ": operands live on different tapes");
  }
  return *a.tape;
}

Tape& tape_of(Var a, std::string_view op) {
  if (a.tape == nullptr) throw ValidationError(std::string(op) + ": operand has no tape");
  return *a.tape;
}

[[noreturn]] void shape_error(std::string_view op, const Matrix& a, const Matrix& b) {
  throw ValidationError(std::string(op) + ": shape mismatch " + shape_string(a) + " vs " +
                        shape_string(b));
}

Matrix sigmoid_of(const Matrix& x) {
  return x.unaryExpr([](Scalar v) {
    if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
    const Scalar e = std::exp(v);
    return e / (1.0 + e);
  });
}

Matrix softmax_rows(const Matrix& x) {
  Matrix y(x.rows(), x.cols());
  for (Index r = 0; r < x.rows(); ++r) {
    const Scalar m = x.row(r).maxCoeff();
    y.row(r) = (x.row(r).array() - m).exp().matrix();
    y.row(r) /= y.row(r).sum();
  }
  return y;
}

// Column sums collapsed to the shape of a broadcast operand.
Matrix reduce_to(const Matrix& g, Index rows, Index cols) {
  if (g.rows() == rows && g.cols() == cols) return g;
  if (rows == 1 && cols == 1) return Matrix::Constant(1, 1, g.sum());
  return g.colwise().sum();
}

}  // namespace

std::string_view op_name(OpKind op) {
  switch (op) {
    case OpKind::kLeaf: return "leaf";
    case OpKind::kConstant: return "constant";
    case OpKind::kMatMul: return "matmul";
    case OpKind::kAdd: return "add";
    case OpKind::kMul: return "mul";
    case OpKind::kConcat: return "concat";
    case OpKind::kSum: return "sum";
    case OpKind::kSigmoid: return "sigmoid";
    case OpKind::kTanh: return "tanh";
    case OpKind::kSoftmax: return "softmax";
    case OpKind::kScale: return "scale";
    case OpKind::kTranspose: return "transpose";
    case OpKind::kLeakyRelu: return "leaky_relu";
    case OpKind::kMaskedSoftmax: return "masked_softmax";
    case OpKind::kBinaryCrossEntropy: return "binary_cross_entropy";
  }
  return "unknown";
}

const Matrix& Var::value() const { return tape->value(id); }

const Matrix& Gradients::of(Var v) const { return of(v.id); }

Var Tape::leaf(const Matrix& value) {
  Node n;
  n.op = OpKind::kLeaf;
  n.requires_grad = true;
  n.value = value;
  return push(std::move(n));
}

Var Tape::constant(const Matrix& value) {
  Node n;
  n.op = OpKind::kConstant;
  n.value = value;
  return push(std::move(n));
}

Var Tape::push(Node node) {
  if (!node.value.allFinite()) {
    throw NumericalError("forward: op '" + std::string(op_name(node.op)) + "' produced non-finite values " +
                         shape_string(node.value));
  }
  if (node.a >= 0) node.requires_grad = node.requires_grad || nodes_[node.a].requires_grad;
  if (node.b >= 0) node.requires_grad = node.requires_grad || nodes_[node.b].requires_grad;
  nodes_.push_back(std::move(node));
  return Var{this, static_cast<NodeId>(nodes_.size() - 1)};
}

Var matmul(Var a, Var b) {
  Tape& t = same_tape(a, b, "matmul");
  const Matrix& x = a.value();
  const Matrix& y = b.value();
  if (x.cols() != y.rows()) shape_error("matmul", x, y);
  Tape::Node n;
  n.op = OpKind::kMatMul;
  n.a = a.id;
  n.b = b.id;
  n.value.noalias() = x * y;
  return t.push(std::move(n));
}

Var add(Var a, Var b) {
  Tape& t = same_tape(a, b, "add");
  const Matrix& x = a.value();
  const Matrix& y = b.value();
  Tape::Node n;
  n.op = OpKind::kAdd;
  n.a = a.id;
  n.b = b.id;
  if (x.rows() == y.rows() && x.cols() == y.cols()) {
    n.value = x + y;
  } else if (y.rows() == 1 && y.cols() == x.cols()) {
    n.value = x.rowwise() + y.row(0);
  } else if (y.size() == 1) {
    n.value = x.array() + y(0, 0);
  } else {
    shape_error("add", x, y);
  }
  return t.push(std::move(n));
}

Var mul(Var a, Var b) {
  Tape& t = same_tape(a, b, "mul");
  const Matrix& x = a.value();
  const Matrix& y = b.value();
  Tape::Node n;
  n.op = OpKind::kMul;
  n.a = a.id;
  n.b = b.id;
  if (x.rows() == y.rows() && x.cols() == y.cols()) {
    n.value = x.cwiseProduct(y);
  } else if (x.size() == 1) {
    n.value = x(0, 0) * y;
  } else if (y.size() == 1) {
    n.value = x * y(0, 0);
  } else {
    shape_error("mul", x, y);
  }
  return t.push(std::move(n));
}

Var concat(Var a, Var b, int axis) {
  Tape& t = same_tape(a, b, "concat");
  const Matrix& x = a.value();
  const Matrix& y = b.value();
  Tape::Node n;
  n.op = OpKind::kConcat;
  n.a = a.id;
  n.b = b.id;
  n.axis = axis;
  if (axis == 0) {
    if (x.cols() != y.cols()) shape_error("concat(axis=0)", x, y);
    n.value.resize(x.rows() + y.rows(), x.cols());
    n.value << x, y;
  } else if (axis == 1) {
    if (x.rows() != y.rows()) shape_error("concat(axis=1)", x, y);
    n.value.resize(x.rows(), x.cols() + y.cols());
    n.value << x, y;
  } else {
    throw ValidationError("concat: axis must be 0 or 1");
  }
  return t.push(std::move(n));
}

Var sum(Var a, int axis) {
  Tape& t = tape_of(a, "sum");
  const Matrix& x = a.value();
  Tape::Node n;
  n.op = OpKind::kSum;
  n.a = a.id;
  n.axis = axis;
  if (axis == 0) {
    n.value = x.colwise().sum();
  } else if (axis == 1) {
    n.value = x.rowwise().sum();
  } else if (axis == -1) {
    n.value = Matrix::Constant(1, 1, x.sum());
  } else {
    throw ValidationError("sum: axis must be -1, 0 or 1");
  }
  return t.push(std::move(n));
}

Var sigmoid(Var a) {
  Tape& t = tape_of(a, "sigmoid");
  Tape::Node n;
  n.op = OpKind::kSigmoid;
  n.a = a.id;
  n.value = sigmoid_of(a.value());
  return t.push(std::move(n));
}

Var tanh(Var a) {
  Tape& t = tape_of(a, "tanh");
  Tape::Node n;
  n.op = OpKind::kTanh;
  n.a = a.id;
  n.value = a.value().array().tanh().matrix();
  return t.push(std::move(n));
}

Var softmax(Var a, int axis) {
  Tape& t = tape_of(a, "softmax");
  Tape::Node n;
  n.op = OpKind::kSoftmax;
  n.a = a.id;
  n.axis = axis;
  if (axis == 1) {
    n.value = softmax_rows(a.value());
  } else if (axis == 0) {
    n.value = softmax_rows(a.value().transpose()).transpose();
  } else {
    throw ValidationError("softmax: axis must be 0 or 1");
  }
  return t.push(std::move(n));
}

Var scale(Var a, Scalar s) {
  Tape& t = tape_of(a, "scale");
  Tape::Node n;
  n.op = OpKind::kScale;
  n.a = a.id;
  n.scalar = s;
  n.value = s * a.value();
  return t.push(std::move(n));
}

Var transpose(Var a) {
  Tape& t = tape_of(a, "transpose");
  Tape::Node n;
  n.op = OpKind::kTranspose;
  n.a = a.id;
  n.value = a.value().transpose();
  return t.push(std::move(n));
}

Var leaky_relu(Var a, Scalar slope) {
  Tape& t = tape_of(a, "leaky_relu");
  Tape::Node n;
  n.op = OpKind::kLeakyRelu;
  n.a = a.id;
  n.scalar = slope;
  n.value = a.value().unaryExpr([slope](Scalar v) { return v > 0 ? v : slope * v; });
  return t.push(std::move(n));
}

Var masked_softmax_rows(Var a, const Matrix& mask) {
  Tape& t = tape_of(a, "masked_softmax");
  const Matrix& x = a.value();
  if (mask.rows() != x.rows() || mask.cols() != x.cols()) shape_error("masked_softmax", x, mask);
  Tape::Node n;
  n.op = OpKind::kMaskedSoftmax;
  n.a = a.id;
  n.aux = mask;
  n.value = Matrix::Zero(x.rows(), x.cols());
  for (Index r = 0; r < x.rows(); ++r) {
    Scalar m = -std::numeric_limits<Scalar>::infinity();
    for (Index c = 0; c < x.cols(); ++c) {
      if (mask(r, c) != 0) m = std::max(m, x(r, c));
    }
    if (!std::isfinite(m)) continue;
    Scalar z = 0;
    for (Index c = 0; c < x.cols(); ++c) {
      if (mask(r, c) != 0) {
        n.value(r, c) = std::exp(x(r, c) - m);
        z += n.value(r, c);
      }
    }
    n.value.row(r) /= z;
  }
  return t.push(std::move(n));
}

Var binary_cross_entropy(Var probs, int label, Scalar weight) {
  Tape& t = tape_of(probs, "binary_cross_entropy");
  const Matrix& p = probs.value();
  if (p.rows() != 1 || p.cols() != 2) {
    throw ValidationError("binary_cross_entropy: expected [1x2] probabilities, got " + shape_string(p));
  }
  if (label != 0 && label != 1) throw ValidationError("binary_cross_entropy: label must be 0 or 1");
  const Scalar q = std::clamp(p(0, 1), kProbFloor, 1.0 - kProbFloor);
  Tape::Node n;
  n.op = OpKind::kBinaryCrossEntropy;
  n.a = probs.id;
  n.axis = label;
  n.scalar = weight;
  n.value = Matrix::Constant(1, 1, -weight * (label == 1 ? std::log(q) : std::log(1.0 - q)));
  return t.push(std::move(n));
}

Gradients Tape::backward(Var loss) const {
  if (loss.tape != this) throw ValidationError("backward: loss node belongs to another tape");
  if (value(loss.id).size() != 1) {
    throw ValidationError("backward: loss must be a scalar, got " + shape_string(value(loss.id)));
  }
  std::vector<Matrix> grads(nodes_.size());
  for (size_t i = 0; i < nodes_.size(); ++i) {
    grads[i].setZero(nodes_[i].value.rows(), nodes_[i].value.cols());
  }
  grads[static_cast<size_t>(loss.id)].setOnes();

  auto accumulate = [&](NodeId id, const auto& g) {
    if (id >= 0 && nodes_[static_cast<size_t>(id)].requires_grad) grads[static_cast<size_t>(id)] += g;
  };

  for (NodeId i = loss.id; i >= 0; --i) {
    const Node& n = nodes_[static_cast<size_t>(i)];
    if (!n.requires_grad || n.op == OpKind::kLeaf) continue;
    const Matrix& g = grads[static_cast<size_t>(i)];
    if (g.isZero(0.0)) continue;
    switch (n.op) {
      case OpKind::kLeaf:
      case OpKind::kConstant:
        break;
      case OpKind::kMatMul:
        if (node(n.a).requires_grad) accumulate(n.a, g * node(n.b).value.transpose());
        if (node(n.b).requires_grad) accumulate(n.b, node(n.a).value.transpose() * g);
        break;
      case OpKind::kAdd: {
        accumulate(n.a, g);
        const Matrix& y = node(n.b).value;
        if (node(n.b).requires_grad) accumulate(n.b, reduce_to(g, y.rows(), y.cols()));
        break;
      }
      case OpKind::kMul: {
        const Matrix& x = node(n.a).value;
        const Matrix& y = node(n.b).value;
        if (x.rows() == y.rows() && x.cols() == y.cols()) {
          if (node(n.a).requires_grad) accumulate(n.a, g.cwiseProduct(y));
          if (node(n.b).requires_grad) accumulate(n.b, g.cwiseProduct(x));
        } else if (x.size() == 1) {
          if (node(n.a).requires_grad) accumulate(n.a, Matrix::Constant(1, 1, g.cwiseProduct(y).sum()));
          if (node(n.b).requires_grad) accumulate(n.b, x(0, 0) * g);
        } else {
          if (node(n.a).requires_grad) accumulate(n.a, y(0, 0) * g);
          if (node(n.b).requires_grad) accumulate(n.b, Matrix::Constant(1, 1, g.cwiseProduct(x).sum()));
        }
        break;
      }
      case OpKind::kConcat: {
        const Matrix& x = node(n.a).value;
        const Matrix& y = node(n.b).value;
        if (n.axis == 0) {
          accumulate(n.a, g.topRows(x.rows()));
          accumulate(n.b, g.bottomRows(y.rows()));
        } else {
          accumulate(n.a, g.leftCols(x.cols()));
          accumulate(n.b, g.rightCols(y.cols()));
        }
        break;
      }
      case OpKind::kSum: {
        const Matrix& x = node(n.a).value;
        if (n.axis == 0) {
          accumulate(n.a, g.replicate(x.rows(), 1));
        } else if (n.axis == 1) {
          accumulate(n.a, g.replicate(1, x.cols()));
        } else {
          accumulate(n.a, Matrix::Constant(x.rows(), x.cols(), g(0, 0)));
        }
        break;
      }
      case OpKind::kSigmoid:
        accumulate(n.a, g.cwiseProduct(n.value.cwiseProduct((1.0 - n.value.array()).matrix())));
        break;
      case OpKind::kTanh:
        accumulate(n.a, g.cwiseProduct((1.0 - n.value.array().square()).matrix()));
        break;
      case OpKind::kSoftmax: {
        const Matrix gy = g.cwiseProduct(n.value);
        if (n.axis == 1) {
          const Vector s = gy.rowwise().sum();
          accumulate(n.a, gy - n.value.cwiseProduct(s.replicate(1, n.value.cols())));
        } else {
          const RowVector s = gy.colwise().sum();
          accumulate(n.a, gy - n.value.cwiseProduct(s.replicate(n.value.rows(), 1)));
        }
        break;
      }
      case OpKind::kMaskedSoftmax: {
        // Masked entries have value 0, so they receive zero gradient.
        const Matrix gy = g.cwiseProduct(n.value);
        const Vector s = gy.rowwise().sum();
        accumulate(n.a, gy - n.value.cwiseProduct(s.replicate(1, n.value.cols())));
        break;
      }
      case OpKind::kScale:
        accumulate(n.a, n.scalar * g);
        break;
      case OpKind::kTranspose:
        accumulate(n.a, g.transpose());
        break;
      case OpKind::kLeakyRelu: {
        const Matrix& x = node(n.a).value;
        const Scalar slope = n.scalar;
        accumulate(n.a, g.binaryExpr(x, [slope](Scalar gv, Scalar xv) { return xv > 0 ? gv : slope * gv; }));
        break;
      }
      case OpKind::kBinaryCrossEntropy: {
        const Scalar p = node(n.a).value(0, 1);
        Matrix d = Matrix::Zero(1, 2);
        if (p > kProbFloor && p < 1.0 - kProbFloor) {
          d(0, 1) = n.axis == 1 ? -n.scalar / p : n.scalar / (1.0 - p);
        }
        accumulate(n.a, g(0, 0) * d);
        break;
      }
    }
  }
  for (size_t i = 0; i < grads.size(); ++i) {
    if (!grads[i].allFinite()) {
      throw NumericalError("backward: non-finite gradient at node " + std::to_string(i) + " (" +
                           std::string(op_name(nodes_[i].op)) + ")");
    }
  }
  return Gradients(std::move(grads));
}

}  // namespace evonet
