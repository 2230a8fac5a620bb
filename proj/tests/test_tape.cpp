#include "evonet/grad_check.hpp"
#include "evonet/tape.hpp"
#include "evonet/tensor.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <cmath>

using namespace evonet;
using testing::gaussian;
using testing::max_abs_diff;
using testing::numeric_gradient;

namespace {

using Builder = std::function<Var(Tape&, const std::vector<Var>&)>;
using Reference = std::function<Matrix(const std::vector<Matrix>&)>;

// Checks the forward value against `ref` and backward() against central
// differences of sum(R o op(xs)) for a random weighting R.
void check_op(const Builder& op, const Reference& ref, const std::vector<Matrix>& xs, std::mt19937_64& rng,
              Scalar fwd_tol = 1e-12, Scalar grad_tol = 1e-6) {
  Tape tape;
  std::vector<Var> leaves;
  for (const Matrix& x : xs) leaves.push_back(tape.leaf(x));
  const Var out = op(tape, leaves);
  const Matrix expected = ref(xs);
  REQUIRE(out.rows() == expected.rows());
  REQUIRE(out.cols() == expected.cols());
  CHECK(max_abs_diff(out.value(), expected) <= fwd_tol);

  const Matrix r = gaussian(out.rows(), out.cols(), rng);
  const Var loss = sum(mul(out, tape.constant(r)), -1);
  const Gradients g = tape.backward(loss);
  const auto numeric = numeric_gradient([&](const std::vector<Matrix>& v) { return (ref(v).array() * r.array()).sum(); }, xs);
  for (size_t k = 0; k < xs.size(); ++k) {
    const Matrix& analytic = g.of(leaves[k]);
    const Scalar scale = std::max<Scalar>(1.0, numeric[k].cwiseAbs().maxCoeff());
    CHECK(max_abs_diff(analytic, numeric[k]) <= grad_tol * scale);
  }
}

Matrix sigmoid_ref(const Matrix& x) { return (1.0 + (-x.array()).exp()).inverse().matrix(); }

Matrix softmax_rows_ref(const Matrix& x) {
  Matrix out(x.rows(), x.cols());
  for (Index i = 0; i < x.rows(); ++i) {
    const Scalar mx = x.row(i).maxCoeff();
    Scalar z = 0;
    for (Index j = 0; j < x.cols(); ++j) z += std::exp(x(i, j) - mx);
    for (Index j = 0; j < x.cols(); ++j) out(i, j) = std::exp(x(i, j) - mx) / z;
  }
  return out;
}

}  // namespace

TEST_CASE("tensor construction and validation") {
  const Tensor t({2, 3}, {1, 2, 3, 4, 5, 6});
  CHECK(t.rank() == 2);
  CHECK(t(1, 0) == 4);
  CHECK(t.row_major() == std::vector<Scalar>{1, 2, 3, 4, 5, 6});
  CHECK(Tensor::vector(Vector::Ones(4)).shape() == std::vector<Index>{4});
  CHECK_THROWS_AS(Tensor({2, 2}, {1, 2, 3}), ValidationError);
  CHECK_THROWS_AS(Tensor({1, 1}, {std::nan("")}), ValidationError);
  CHECK(Tensor::zeros(2, 2) == Tensor({2, 2}, {0, 0, 0, 0}));
}

TEST_CASE("every op matches its reference and finite differences") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<Index> dim(1, 16);
  for (int trial = 0; trial < 6; ++trial) {
    const Index m = dim(rng), n = dim(rng), k = dim(rng);
    CAPTURE(m);
    CAPTURE(n);
    CAPTURE(k);
    check_op([](Tape&, const std::vector<Var>& v) { return matmul(v[0], v[1]); },
             [](const std::vector<Matrix>& x) { return Matrix(x[0] * x[1]); }, {gaussian(m, k, rng), gaussian(k, n, rng)},
             rng, 1e-12);
    check_op([](Tape&, const std::vector<Var>& v) { return add(v[0], v[1]); },
             [](const std::vector<Matrix>& x) { return Matrix(x[0] + x[1]); }, {gaussian(m, n, rng), gaussian(m, n, rng)},
             rng);
    check_op([](Tape&, const std::vector<Var>& v) { return add(v[0], v[1]); },
             [](const std::vector<Matrix>& x) { return Matrix(x[0].rowwise() + x[1].row(0)); },
             {gaussian(m, n, rng), gaussian(1, n, rng)}, rng);
    check_op([](Tape&, const std::vector<Var>& v) { return add(v[0], v[1]); },
             [](const std::vector<Matrix>& x) { return Matrix(x[0].array() + x[1](0, 0)); },
             {gaussian(m, n, rng), gaussian(1, 1, rng)}, rng);
    check_op([](Tape&, const std::vector<Var>& v) { return mul(v[0], v[1]); },
             [](const std::vector<Matrix>& x) { return Matrix(x[0].cwiseProduct(x[1])); },
             {gaussian(m, n, rng), gaussian(m, n, rng)}, rng);
    check_op([](Tape&, const std::vector<Var>& v) { return mul(v[1], v[0]); },
             [](const std::vector<Matrix>& x) { return Matrix(x[0] * x[1](0, 0)); },
             {gaussian(m, n, rng), gaussian(1, 1, rng)}, rng);
    check_op([](Tape&, const std::vector<Var>& v) { return concat(v[0], v[1], 0); },
             [](const std::vector<Matrix>& x) {
               Matrix out(x[0].rows() + x[1].rows(), x[0].cols());
               out << x[0], x[1];
               return out;
             },
             {gaussian(m, n, rng), gaussian(k, n, rng)}, rng);
    check_op([](Tape&, const std::vector<Var>& v) { return concat(v[0], v[1], 1); },
             [](const std::vector<Matrix>& x) {
               Matrix out(x[0].rows(), x[0].cols() + x[1].cols());
               out << x[0], x[1];
               return out;
             },
             {gaussian(m, n, rng), gaussian(m, k, rng)}, rng);
    for (int axis : {-1, 0, 1}) {
      check_op([axis](Tape&, const std::vector<Var>& v) { return sum(v[0], axis); },
               [axis](const std::vector<Matrix>& x) {
                 if (axis == 0) return Matrix(x[0].colwise().sum());
                 if (axis == 1) return Matrix(x[0].rowwise().sum());
                 return Matrix::Constant(1, 1, x[0].sum()).eval();
               },
               {gaussian(m, n, rng)}, rng, 1e-12);
    }
    check_op([](Tape&, const std::vector<Var>& v) { return sigmoid(v[0]); },
             [](const std::vector<Matrix>& x) { return sigmoid_ref(x[0]); }, {gaussian(m, n, rng, 3.0)}, rng);
    check_op([](Tape&, const std::vector<Var>& v) { return tanh(v[0]); },
             [](const std::vector<Matrix>& x) { return Matrix(x[0].array().tanh()); }, {gaussian(m, n, rng, 2.0)}, rng);
    check_op([](Tape&, const std::vector<Var>& v) { return softmax(v[0], 1); },
             [](const std::vector<Matrix>& x) { return softmax_rows_ref(x[0]); }, {gaussian(m, n, rng, 2.0)}, rng);
    check_op([](Tape&, const std::vector<Var>& v) { return softmax(v[0], 0); },
             [](const std::vector<Matrix>& x) { return Matrix(softmax_rows_ref(x[0].transpose()).transpose()); },
             {gaussian(m, n, rng, 2.0)}, rng);
    check_op([](Tape&, const std::vector<Var>& v) { return scale(v[0], -2.5); },
             [](const std::vector<Matrix>& x) { return Matrix(-2.5 * x[0]); }, {gaussian(m, n, rng)}, rng);
    check_op([](Tape&, const std::vector<Var>& v) { return transpose(v[0]); },
             [](const std::vector<Matrix>& x) { return Matrix(x[0].transpose()); }, {gaussian(m, n, rng)}, rng);
    check_op([](Tape&, const std::vector<Var>& v) { return leaky_relu(v[0], 0.2); },
             [](const std::vector<Matrix>& x) { return Matrix(x[0].unaryExpr([](Scalar a) { return a > 0 ? a : 0.2 * a; })); },
             {gaussian(m, n, rng)}, rng);

    Matrix mask = testing::uniform(m, n, rng);
    mask = (mask.array() > 0.3).cast<Scalar>();
    mask.row(0).setZero();  // one fully masked row
    check_op([mask](Tape&, const std::vector<Var>& v) { return masked_softmax_rows(v[0], mask); },
             [mask](const std::vector<Matrix>& x) {
               Matrix out = Matrix::Zero(x[0].rows(), x[0].cols());
               for (Index i = 0; i < x[0].rows(); ++i) {
                 Scalar z = 0;
                 for (Index j = 0; j < x[0].cols(); ++j) {
                   if (mask(i, j) != 0) z += std::exp(x[0](i, j));
                 }
                 for (Index j = 0; j < x[0].cols(); ++j) {
                   if (mask(i, j) != 0) out(i, j) = std::exp(x[0](i, j)) / z;
                 }
               }
               return out;
             },
             {gaussian(m, n, rng)}, rng, 1e-12);
  }
}

TEST_CASE("binary cross entropy value and gradient") {
  std::mt19937_64 rng(5);
  for (int label : {0, 1}) {
    Matrix p(1, 2);
    p << 0.3, 0.7;
    Tape tape;
    const Var probs = tape.leaf(p);
    const Var loss = binary_cross_entropy(probs, label, 2.0);
    const Scalar expected = label ? -2.0 * std::log(0.7) : -2.0 * std::log(0.3);
    CHECK(loss.value()(0, 0) == doctest::Approx(expected).epsilon(1e-14));
    const Matrix g = tape.backward(loss).of(probs);
    CHECK(g(0, 0) == 0.0);
    CHECK(g(0, 1) == doctest::Approx(label ? -2.0 / 0.7 : 2.0 / 0.3).epsilon(1e-12));
  }
  // Zero logits through a softmax give ln 2.
  Tape tape;
  const Var loss = binary_cross_entropy(softmax(tape.leaf(Matrix::Zero(1, 2)), 1), 1);
  CHECK(loss.value()(0, 0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("backward is linear in the loss and accumulates over fan-out") {
  std::mt19937_64 rng(3);
  const Matrix x = gaussian(4, 5, rng);
  const Matrix w = gaussian(5, 3, rng);
  auto grad_of = [&](Scalar a, Scalar b) {
    Tape tape;
    const Var xv = tape.leaf(x);
    const Var wv = tape.leaf(w);
    const Var f = sum(tanh(matmul(xv, wv)), -1);
    const Var g = sum(mul(xv, xv), -1);
    return tape.backward(add(scale(f, a), scale(g, b))).of(xv);
  };
  const Matrix combined = grad_of(2.0, -3.0);
  const Matrix parts = 2.0 * grad_of(1.0, 0.0) - 3.0 * grad_of(0.0, 1.0);
  CHECK(max_abs_diff(combined, parts) < 1e-12);

  // x used twice: d/dx sum(x o x) = 2x.
  Tape tape;
  const Var xv = tape.leaf(x);
  CHECK(max_abs_diff(tape.backward(sum(mul(xv, xv), -1)).of(xv), 2.0 * x) < 1e-15);
}

TEST_CASE("softmax rows sum to one and constants receive no gradient") {
  std::mt19937_64 rng(9);
  Tape tape;
  const Var x = tape.leaf(gaussian(7, 5, rng, 10.0));
  const Var c = tape.constant(gaussian(7, 5, rng));
  const Var s = softmax(add(x, c), 1);
  for (Index i = 0; i < 7; ++i) CHECK(s.value().row(i).sum() == doctest::Approx(1.0).epsilon(1e-14));
  const Gradients g = tape.backward(sum(mul(s, c), -1));
  CHECK(g.of(c).isZero(0.0));
}

TEST_CASE("shape errors and non-finite values are rejected") {
  Tape tape;
  const Var a = tape.leaf(Matrix::Ones(2, 3));
  const Var b = tape.leaf(Matrix::Ones(2, 3));
  CHECK_THROWS_AS(matmul(a, b), ValidationError);
  CHECK_THROWS_AS(add(a, tape.leaf(Matrix::Ones(3, 2))), ValidationError);
  CHECK_THROWS_AS(concat(a, tape.leaf(Matrix::Ones(3, 2)), 1), ValidationError);
  CHECK_THROWS_AS(tape.backward(a), ValidationError);
  CHECK_THROWS_AS(scale(a, std::numeric_limits<Scalar>::infinity()), NumericalError);
}

TEST_CASE("grad_check reports relative errors per parameter") {
  CHECK(relative_error(1.0, 1.0) == 0.0);
  CHECK(relative_error(2.0, 1.0) == doctest::Approx(0.5));
  CHECK(relative_error(0.0, 1e-9) == doctest::Approx(1e-3));
  std::mt19937_64 rng(1);
  const std::vector<NamedParam> params = {{"w", gaussian(3, 2, rng)}, {"x", gaussian(1, 3, rng)}};
  const LossBuilder f = [](Tape&, const std::vector<Var>& p) { return sum(sigmoid(matmul(p[1], p[0])), -1); };
  const GradCheckReport r = grad_check(f, params);
  CHECK(r.passed());
  CHECK(r.worst_per_param.size() == 2);
  CHECK(r.max_rel_error < 1e-7);
}
