#include "lmaxlab/types.hpp"

#include <cmath>

namespace lmaxlab {

HermitianMatrix HermitianMatrix::checked(DenseMatrix m, double tol) {
  return std::visit(
      [tol](auto&& a) -> HermitianMatrix {
        if (a.rows() != a.cols()) {
          throw DomainError("matrix is " + std::to_string(a.rows()) + "x" +
                            std::to_string(a.cols()) + ", expected square");
        }
        const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
        const double asym = (a - a.adjoint()).cwiseAbs().maxCoeff();
        if (!std::isfinite(asym) || asym > tol * scale) {
          throw DomainError("matrix is not Hermitian (max |A - A*| = " + std::to_string(asym) + ")");
        }
        return HermitianMatrix(std::move(a));
      },
      std::move(m));
}

const RealMatrix& HermitianMatrix::real() const {
  if (const auto* r = std::get_if<RealMatrix>(&data_)) return *r;
  throw DomainError("complex Hermitian matrix accessed as real");
}

const ComplexMatrix& HermitianMatrix::complex() const {
  if (const auto* c = std::get_if<ComplexMatrix>(&data_)) return *c;
  throw DomainError("real symmetric matrix accessed as complex");
}

}  // namespace lmaxlab
