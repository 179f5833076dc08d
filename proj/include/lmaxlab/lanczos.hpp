#pragma once

#include <functional>
#include <vector>

#include "lmaxlab/types.hpp"

namespace lmaxlab {

template <class Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <class Scalar>
using LinearOperator = std::function<void(const Vector<Scalar>& in, Vector<Scalar>& out)>;

struct LanczosOptions {
  double tolerance = 1e-12;  // residual ||A y - t y|| relative to |t|
  int max_iterations = 600;
};

template <class Scalar>
struct EigenPairs {
  std::vector<double> values;  // descending
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> vectors;
  int iterations = 0;
};

/// Top-k eigenpairs of a Hermitian operator by Lanczos with full
/// reorthogonalization. Pairs after the first are found by deflation: the
/// Krylov space is kept orthogonal to the already converged vectors, so
/// repeated eigenvalues are recovered with their multiplicity.
template <class Scalar>
EigenPairs<Scalar> lanczos_top(const LinearOperator<Scalar>& op, Index dim, int k,
                               const LanczosOptions& opts = {});

extern template EigenPairs<double> lanczos_top<double>(const LinearOperator<double>&, Index, int,
                                                       const LanczosOptions&);
extern template EigenPairs<Complex> lanczos_top<Complex>(const LinearOperator<Complex>&, Index,
                                                         int, const LanczosOptions&);

}  // namespace lmaxlab
