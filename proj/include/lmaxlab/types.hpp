#pragma once

#include <Eigen/Dense>

#include <complex>
#include <variant>

#include "lmaxlab/errors.hpp"

namespace lmaxlab {

using Index = Eigen::Index;
using Complex = std::complex<double>;
using RealMatrix = Eigen::MatrixXd;
using ComplexMatrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;
using ComplexVector = Eigen::VectorXcd;

/// A dense N x n matrix that is real unless the model or the entry law forces
/// complex arithmetic.
using DenseMatrix = std::variant<RealMatrix, ComplexMatrix>;

inline bool is_complex(const DenseMatrix& m) { return std::holds_alternative<ComplexMatrix>(m); }
inline Index rows(const DenseMatrix& m) {
  return std::visit([](const auto& a) { return a.rows(); }, m);
}
inline Index cols(const DenseMatrix& m) {
  return std::visit([](const auto& a) { return a.cols(); }, m);
}
inline ComplexMatrix to_complex(const DenseMatrix& m) {
  if (const auto* r = std::get_if<RealMatrix>(&m)) return r->cast<Complex>();
  return std::get<ComplexMatrix>(m);
}

/// Square Hermitian matrix, stored real symmetric whenever possible.
///
/// Construction does not validate; use `checked` for untrusted input.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;
  explicit HermitianMatrix(RealMatrix m) : data_(std::move(m)) {}
  explicit HermitianMatrix(ComplexMatrix m) : data_(std::move(m)) {}

  /// Validates squareness and Hermitian symmetry to `tol` (relative to the
  /// largest entry); a complex matrix with negligible imaginary part is kept
  /// complex.
  static HermitianMatrix checked(DenseMatrix m, double tol = 1e-12);

  bool is_complex() const { return std::holds_alternative<ComplexMatrix>(data_); }
  Index dim() const { return lmaxlab::rows(data_); }

  const RealMatrix& real() const;
  const ComplexMatrix& complex() const;
  ComplexMatrix as_complex() const { return lmaxlab::to_complex(data_); }
  const DenseMatrix& data() const { return data_; }

  template <class F>
  decltype(auto) visit(F&& f) const {
    return std::visit(std::forward<F>(f), data_);
  }

 private:
  DenseMatrix data_;
};

}  // namespace lmaxlab
