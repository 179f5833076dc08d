#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "lmaxlab/types.hpp"

namespace lmaxlab {

/// Slowly varying factor L of a long-memory autocovariance.
///
/// Closed family so experiment files stay serializable. New families are added
/// by extending `Family` plus `operator()` and the config parser.
struct SlowlyVarying {
  enum class Family { constant, log_power };

  Family family = Family::constant;
  double c = 1.0;  // constant level (Family::constant)
  double p = 0.0;  // exponent of log(2 + |h|) (Family::log_power)

  static SlowlyVarying constant(double c = 1.0) { return {Family::constant, c, 0.0}; }
  static SlowlyVarying log_power(double p) { return {Family::log_power, 1.0, p}; }

  double operator()(double h) const;
  void validate() const;
};

std::string to_string(SlowlyVarying::Family f);
SlowlyVarying::Family parse_slowly_varying(const std::string& name);

/// gamma(h) = L(h) / (1 + |h|)^(1 - 2d) * exp(i h theta).
struct AutocovarianceSpec {
  double d = 0.125;
  SlowlyVarying L{};
  double theta = 0.0;  // phase modulation, (-pi, pi]

  double rho() const { return 2.0 * d - 1.0; }
  void validate() const;
};

Complex autocovariance(const AutocovarianceSpec& spec, std::int64_t h);
/// Real part of the autocovariance with the phase dropped, i.e. L(|h|)/(1+|h|)^(1-2d).
double autocovariance_modulus(const AutocovarianceSpec& spec, std::int64_t h);

struct ExplicitModel {
  HermitianMatrix matrix;
  std::filesystem::path source;  // empty when built in memory
};
struct DiagonalModel {
  std::vector<double> eigenvalues;
};
struct ToeplitzModel {
  AutocovarianceSpec spec;
  Index N = 0;
};
struct SpikedModel {
  std::vector<double> spikes;
  double bulk = 1.0;
  Index N = 0;
};

using PopulationModel = std::variant<ExplicitModel, DiagonalModel, ToeplitzModel, SpikedModel>;

Index dimension(const PopulationModel& model);
std::string kind_name(const PopulationModel& model);
/// Same model at another dimension. Only Toeplitz and Spiked models are resizable.
PopulationModel with_dimension(const PopulationModel& model, Index N);

HermitianMatrix build_population(const PopulationModel& model);

/// Eigendecomposition Gamma = U diag(lambda) U*, eigenvalues descending.
struct SpectralDecomposition {
  RealVector eigenvalues;
  DenseMatrix eigenvectors;

  Index dim() const { return eigenvalues.size(); }
  bool is_complex() const { return lmaxlab::is_complex(eigenvectors); }
  HermitianMatrix reconstruct() const;
  /// Gamma^{1/2} = U diag(sqrt(lambda)) U*.
  HermitianMatrix sqrt() const;
};

/// Eigenvalues in (-1e-9 * lambda_1, 0) are clamped to 0; anything more
/// negative is a DomainError.
SpectralDecomposition decompose(const HermitianMatrix& gamma);

/// lambda_2 / lambda_1.
double spectral_gap_ratio(const SpectralDecomposition& dec);

/// Sigma Gamma Sigma* with Sigma = diag(exp(i k theta)), k = 1..N.
HermitianMatrix phase_conjugate(const HermitianMatrix& gamma, double theta);

// SPLM dense matrix files: "SPLM", u32 rows, u32 cols, u32 flags, then
// row-major little-endian doubles (flags bit 0: complex, interleaved re/im).
void write_splm(const std::filesystem::path& path, const DenseMatrix& m);
DenseMatrix read_splm(const std::filesystem::path& path);

}  // namespace lmaxlab
