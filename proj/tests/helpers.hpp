#ifndef EVONET_TESTS_HELPERS_HPP
#define EVONET_TESTS_HELPERS_HPP

#include "evonet/tape.hpp"

#include <functional>
#include <random>
#include <vector>

namespace testing {

using evonet::Index;
using evonet::Matrix;
using evonet::Scalar;

inline Matrix gaussian(Index r, Index c, std::mt19937_64& rng, Scalar sd = 1.0) {
  std::normal_distribution<Scalar> g(0.0, sd);
  Matrix m(r, c);
  for (Index i = 0; i < r; ++i) {
    for (Index j = 0; j < c; ++j) m(i, j) = g(rng);
  }
  return m;
}

inline Matrix uniform(Index r, Index c, std::mt19937_64& rng, Scalar lo = 0.0, Scalar hi = 1.0) {
  std::uniform_real_distribution<Scalar> u(lo, hi);
  Matrix m(r, c);
  for (Index i = 0; i < r; ++i) {
    for (Index j = 0; j < c; ++j) m(i, j) = u(rng);
  }
  return m;
}

// Scalar function of plain matrices, evaluated without any tape.
using PlainFn = std::function<Scalar(const std::vector<Matrix>&)>;

// Central differences of f at xs, one matrix per input.
inline std::vector<Matrix> numeric_gradient(const PlainFn& f, std::vector<Matrix> xs, Scalar h = 1e-6) {
  std::vector<Matrix> out;
  for (size_t k = 0; k < xs.size(); ++k) {
    Matrix g(xs[k].rows(), xs[k].cols());
    for (Index i = 0; i < xs[k].rows(); ++i) {
      for (Index j = 0; j < xs[k].cols(); ++j) {
        const Scalar keep = xs[k](i, j);
        xs[k](i, j) = keep + h;
        const Scalar up = f(xs);
        xs[k](i, j) = keep - h;
        const Scalar down = f(xs);
        xs[k](i, j) = keep;
        g(i, j) = (up - down) / (2 * h);
      }
    }
    out.push_back(g);
  }
  return out;
}

inline Scalar max_abs_diff(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return 1e300;
  return a.size() == 0 ? 0.0 : (a - b).cwiseAbs().maxCoeff();
}

}  // namespace testing

#endif  // EVONET_TESTS_HELPERS_HPP
