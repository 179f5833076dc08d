#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lmaxlab/covariance_models.hpp"
#include "lmaxlab/types.hpp"

namespace lmaxlab {

/// Regularly varying sequence R(h) = gamma(floor|h|) of index rho = 2d - 1.
struct KernelSpec {
  AutocovarianceSpec autocov;

  double rho() const { return autocov.rho(); }
  double R(double h) const;
  void validate() const;
};

/// Top-k eigenvalues of T_N(c) / (N R(N)), i.e. of the step-kernel operator
/// K_N acting on L^2(0, 1).
std::vector<double> widom_shampine_eigs(const KernelSpec& spec, Index N, int k);

/// Galerkin discretization of |x - y|^rho on [0, 1] with `grid` cells; entries are
/// exact cell-pair averages. Symmetric Toeplitz, returned as its first column.
RealVector nystrom_symbol(double rho, Index grid);

struct NystromEigen {
  std::vector<double> values;  // descending
  RealMatrix vectors;          // grid x k, cell values (orthonormal in R^grid)
};

NystromEigen nystrom_limit(double rho, Index grid, int k);
std::vector<double> nystrom_limit_eigs(double rho, Index grid, int k);

enum class CertificationStatus { certified, inconclusive };
std::string to_string(CertificationStatus s);

struct KernelEigenEstimate {
  double rho = 0.0;
  std::vector<Index> grids;
  std::vector<std::vector<double>> per_grid;  // [grid][k]
  std::vector<double> a;                      // extrapolated limits, descending
  std::vector<double> error_estimate;         // per eigenvalue
  std::vector<double> fitted_order;           // per eigenvalue
  bool extrapolated = false;
  double gap_ratio = 0.0;
  double gap_ratio_error = 0.0;
  CertificationStatus status = CertificationStatus::inconclusive;

  nlohmann::json to_json() const;
};

/// Richardson extrapolation in 1/grid with the order fitted from the last
/// three grids (each twice the previous). Certified iff
/// a_1 - a_2 > 10 (err_1 + err_2) and a_2 >= -err_2.
KernelEigenEstimate gap_ratio_estimate(double rho, std::vector<Index> grids = {256, 512, 1024, 2048},
                                       int k = 2);

struct OperatorBoundOptions {
  int y_samples_per_cell = 4;
};

/// esssup_y int_0^1 |R(floor(Nx) - floor(Ny))/R(N) - |x - y|^rho| dx, the x
/// integral exact per cell and the sup taken over y samples in every cell.
double operator_distance_bound(const KernelSpec& spec, Index N, const OperatorBoundOptions& opts = {});

/// 2^{-rho} / (1 + rho), the L^p norm bound of the limit operator.
double limit_operator_norm_bound(double rho);

}  // namespace lmaxlab
