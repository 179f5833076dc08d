#include "lmaxlab/lanczos.hpp"

#include <algorithm>
#include <cmath>

#include "lmaxlab/philox.hpp"

namespace lmaxlab {

namespace {

template <class Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <class Scalar>
Vector<Scalar> start_vector(Index dim) {
  const Philox4x32 gen(0x6c616e637a6f73ull);
  Vector<Scalar> v(dim);
  for (Index i = 0; i < dim; ++i) {
    const auto w = gen.cell(static_cast<std::uint32_t>(i), 0, 0);
    if constexpr (std::is_same_v<Scalar, Complex>) {
      v(i) = Complex(open_unit(w[0]) - 0.5, open_unit(w[1]) - 0.5);
    } else {
      v(i) = open_unit(w[0]) - 0.5;
    }
  }
  return v;
}

template <class Scalar>
void orthogonalize(Vector<Scalar>& w, const Matrix<Scalar>& basis, Index count) {
  if (count == 0) return;
  // Two passes of classical Gram-Schmidt.
  for (int pass = 0; pass < 2; ++pass) {
    const Vector<Scalar> coeff = basis.leftCols(count).adjoint() * w;
    w.noalias() -= basis.leftCols(count) * coeff;
  }
}

struct StageResult {
  double value;
  int iterations;
};

// Largest eigenpair of op restricted to the orthogonal complement of the
// first `locked` columns of `lockedv`.
template <class Scalar>
StageResult lanczos_stage(const LinearOperator<Scalar>& op, Index dim, const Matrix<Scalar>& lockedv,
                          Index locked, const LanczosOptions& opts, Vector<Scalar>& ritz) {
  const Index available = dim - locked;
  const Index max_steps = std::min<Index>(available, opts.max_iterations);
  Matrix<Scalar> q(dim, std::min<Index>(max_steps, 64));
  std::vector<double> alpha;
  std::vector<double> beta;

  Vector<Scalar> v = start_vector<Scalar>(dim);
  orthogonalize(v, lockedv, locked);
  double nv = v.norm();
  if (!(nv > 0.0)) {
    v = Vector<Scalar>::Unit(dim, locked % dim);
    orthogonalize(v, lockedv, locked);
    nv = v.norm();
  }
  q.col(0) = v / nv;

  Vector<Scalar> w(dim);
  double scale = 0.0;
  double best_residual = 0.0;
  Eigen::SelfAdjointEigenSolver<RealMatrix> tri;
  for (Index j = 0; j < max_steps; ++j) {
    op(q.col(j), w);
    const double a = std::real(q.col(j).dot(w));
    alpha.push_back(a);
    w -= a * q.col(j);
    if (j > 0) w -= beta.back() * q.col(j - 1);
    orthogonalize(w, q, j + 1);
    orthogonalize(w, lockedv, locked);
    const double b = w.norm();
    scale = std::max({scale, std::abs(a), b});

    const Index m = j + 1;
    RealVector diag = Eigen::Map<const RealVector>(alpha.data(), m);
    RealVector sub = m > 1 ? RealVector(Eigen::Map<const RealVector>(beta.data(), m - 1)) : RealVector();
    tri.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    const double theta = tri.eigenvalues()(m - 1);
    const double residual = b * std::abs(tri.eigenvectors()(m - 1, m - 1));
    best_residual = residual;

    const bool exhausted = b <= 1e-14 * std::max(scale, 1e-300) || m == available;
    if (exhausted || residual <= opts.tolerance * std::max(std::abs(theta), 1e-14 * scale)) {
      const RealVector s = tri.eigenvectors().col(m - 1);
      ritz = q.leftCols(m) * s.cast<Scalar>();
      ritz.normalize();
      return {theta, static_cast<int>(m)};
    }
    beta.push_back(b);
    if (q.cols() <= m) q.conservativeResize(Eigen::NoChange, std::min<Index>(max_steps, 2 * q.cols()));
    q.col(m) = w / b;
  }
  throw ConvergenceError("Lanczos did not converge", best_residual, static_cast<int>(max_steps));
}

}  // namespace

template <class Scalar>
EigenPairs<Scalar> lanczos_top(const LinearOperator<Scalar>& op, Index dim, int k,
                               const LanczosOptions& opts) {
  if (k < 1 || k > dim) throw DomainError("Lanczos: need 1 <= k <= dim");
  EigenPairs<Scalar> out;
  out.vectors.resize(dim, k);
  Vector<Scalar> ritz(dim);
  for (int stage = 0; stage < k; ++stage) {
    const StageResult r = lanczos_stage<Scalar>(op, dim, out.vectors, stage, opts, ritz);
    out.values.push_back(r.value);
    out.vectors.col(stage) = ritz;
    out.iterations += r.iterations;
  }
  return out;
}

template EigenPairs<double> lanczos_top<double>(const LinearOperator<double>&, Index, int,
                                                const LanczosOptions&);
template EigenPairs<Complex> lanczos_top<Complex>(const LinearOperator<Complex>&, Index, int,
                                                  const LanczosOptions&);

}  // namespace lmaxlab
