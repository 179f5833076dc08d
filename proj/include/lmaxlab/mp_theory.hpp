#pragma once

#include <optional>
#include <span>
#include <vector>

#include "lmaxlab/sampling.hpp"
#include "lmaxlab/spectral_analysis.hpp"
#include "lmaxlab/types.hpp"

namespace lmaxlab {

/// Marchenko-Pastur law with aspect ratio r = N/n.
struct MPParams {
  double r = 1.0;

  double lower_edge() const;  // (1 - sqrt r)^2
  double upper_edge() const;  // (1 + sqrt r)^2
  void validate() const;
};

/// Mass of the atom at 0: (1 - 1/r)_+.
double mp_atom(const MPParams& params);
/// Absolutely continuous density; 0 outside [lambda-, lambda+]. Requires lambda > 0.
double mp_density(const MPParams& params, double lambda);

struct FixedPointOptions {
  double tolerance = 1e-10;
  int max_iterations = 10000;
  double damping = 0.5;
};

/// m = m_mu(z) = int dmu(s) / (z - s) for the companion limit measure.
struct FixedPointSolution {
  Complex z;
  Complex m;
  int iterations = 0;
  double residual = 0.0;
};

/// Solves z = 1/m + r int s dnu(s) / (1 - s m).
///
/// Non-real z: damped Picard from m = 1/z, switching to complex Newton on
/// stagnation. Real z: the real branch through x_N(y) = z with x_N'(y) < 0;
/// z inside the support is a DomainError.
FixedPointSolution solve_fixed_point(const DiscreteMeasure& nu, double r, Complex z,
                                     const FixedPointOptions& opts = {});

/// Residual |z - 1/m - r int s dnu/(1 - s m)|.
double fixed_point_residual(const DiscreteMeasure& nu, double r, Complex z, Complex m);

struct SupportQuery {
  double y = 0.0;
  double x = 0.0;
  double x_prime = 0.0;
};

/// x_N(y) = 1/y + r_N (1/N) sum lambda_k / (1 - lambda_k y) and its derivative.
SupportQuery x_of_y(std::span<const double> eigs, double r_N, double y);

struct SupportWitness {
  bool outside = false;
  std::optional<SupportQuery> witness;  // y with x_N(y) = x, x_N'(y) < 0
};

/// x lies outside the support of the companion limit measure iff some y in
/// B_N has x_N(y) = x and x_N'(y) < 0.
SupportWitness support_complement(std::span<const double> eigs, double r_N, double x);

/// Right end of the support: min of x_N over (0, 1/lambda_max).
SupportQuery support_right_edge(std::span<const double> eigs, double r_N);

/// beta_N = (1/n) sum_{k>=2} lambda_k / (lambda_1 - lambda_k). Scale invariant.
double beta_N(std::span<const double> eigs, Index n);

/// theta_N = 1 + (1/n) sum_{k>=2} lambda_k / (1 - lambda_k) on a spectrum normalized
/// to lambda_1 = 1.
double theta_N(std::span<const double> normalized_eigs, Index n);

/// E|Z|^4 - 1.
double sigma_squared(EntryLaw law);

}  // namespace lmaxlab
