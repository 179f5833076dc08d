#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "lmaxlab/covariance_models.hpp"
#include "lmaxlab/types.hpp"

namespace lmaxlab {

/// Entry distributions for Z. All have mean 0 and E|Z|^2 = 1.
enum class EntryLaw { real_gaussian, complex_gaussian, std_exponential, symmetric_bernoulli };

std::string_view to_string(EntryLaw law);
EntryLaw parse_entry_law(std::string_view name);
/// E|Z|^4: 3, 2, 9, 1 respectively.
double fourth_moment(EntryLaw law);
bool is_complex(EntryLaw law);
bool is_gaussian(EntryLaw law);

struct SampleConfig {
  Index N = 1;
  Index n = 1;
  std::uint64_t seed = 0;
  std::uint64_t replicate_index = 0;

  /// n = floor(N / r).
  static SampleConfig with_ratio(Index N, double r, std::uint64_t seed, std::uint64_t replicate);
  double ratio() const { return static_cast<double>(N) / static_cast<double>(n); }
  void validate() const;
};

/// One Monte-Carlo replicate of the fluctuation statistic.
struct FluctuationRecord {
  double lambda_max = 0.0;        // lambda_max(S_N)
  double lambda_max_gamma = 0.0;  // lambda_max(Gamma_N)
  double theta_N = 0.0;
  double beta_N = 0.0;
  double F_N = 0.0;
  Index n = 0;
  std::uint64_t seed = 0;
  std::uint64_t replicate_index = 0;
};

/// N x n matrix of i.i.d. draws. Entry (i, j) depends only on
/// (seed, replicate, i, j), so smaller draws are top-left blocks of larger ones.
DenseMatrix draw_entries(EntryLaw law, const SampleConfig& cfg);

/// A single entry of the infinite array behind `draw_entries`.
Complex entry_at(EntryLaw law, std::uint64_t seed, std::uint64_t replicate, std::uint32_t i,
                 std::uint32_t j);

/// (1/n) Gamma^{1/2} Z Z* Gamma^{1/2}, symmetrized.
HermitianMatrix sample_covariance(const HermitianMatrix& gamma_half, const DenseMatrix& Z);

/// (1/n) Z* Gamma Z.
HermitianMatrix companion(const HermitianMatrix& gamma, const DenseMatrix& Z);

/// Columns i.i.d. N(0, T) (or circular complex Gaussian), as T^{1/2} Z.
DenseMatrix gaussian_process_matrix(const SpectralDecomposition& T, EntryLaw law,
                                    const SampleConfig& cfg);

/// Gamma^{1/2} cached once per population; diagonal form when the population
/// is replaced by its eigenvalues.
class PopulationRoot {
 public:
  static PopulationRoot diagonal(const RealVector& eigenvalues);
  static PopulationRoot dense(const SpectralDecomposition& dec);

  Index dim() const;
  bool is_diagonal() const { return diagonal_; }
  bool is_complex() const;
  /// Gamma^{1/2} Z.
  DenseMatrix apply(const DenseMatrix& Z) const;
  HermitianMatrix matrix() const;

 private:
  bool diagonal_ = true;
  RealVector diag_;
  HermitianMatrix dense_;
};

/// (1/n) X X* for X = Gamma^{1/2} Z, computed through the cached root.
HermitianMatrix sample_covariance(const PopulationRoot& root, const DenseMatrix& Z);

}  // namespace lmaxlab
