#include "lmaxlab/sampling.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "lmaxlab/philox.hpp"

namespace lmaxlab {

std::string_view to_string(EntryLaw law) {
  switch (law) {
    case EntryLaw::real_gaussian:
      return "real_gaussian";
    case EntryLaw::complex_gaussian:
      return "complex_gaussian";
    case EntryLaw::std_exponential:
      return "std_exponential";
    case EntryLaw::symmetric_bernoulli:
      return "symmetric_bernoulli";
  }
  return "?";
}

EntryLaw parse_entry_law(std::string_view name) {
  for (auto law : {EntryLaw::real_gaussian, EntryLaw::complex_gaussian, EntryLaw::std_exponential,
                   EntryLaw::symmetric_bernoulli}) {
    if (name == to_string(law)) return law;
  }
  throw ConfigError("unknown entry law '" + std::string(name) +
                    "' (real_gaussian | complex_gaussian | std_exponential | symmetric_bernoulli)");
}

double fourth_moment(EntryLaw law) {
  switch (law) {
    case EntryLaw::real_gaussian:
      return 3.0;
    case EntryLaw::complex_gaussian:
      return 2.0;
    case EntryLaw::std_exponential:
      return 9.0;
    case EntryLaw::symmetric_bernoulli:
      return 1.0;
  }
  return 0.0;
}

bool is_complex(EntryLaw law) { return law == EntryLaw::complex_gaussian; }
bool is_gaussian(EntryLaw law) {
  return law == EntryLaw::real_gaussian || law == EntryLaw::complex_gaussian;
}

SampleConfig SampleConfig::with_ratio(Index N, double r, std::uint64_t seed, std::uint64_t replicate) {
  if (!(r > 0.0) || !std::isfinite(r)) throw ConfigError("target ratio must be positive and finite");
  return {N, static_cast<Index>(std::floor(static_cast<double>(N) / r)), seed, replicate};
}

void SampleConfig::validate() const {
  if (N < 1 || n < 1) {
    throw ConfigError("sample dimensions must be >= 1 (N=" + std::to_string(N) +
                      ", n=" + std::to_string(n) + ")");
  }
  constexpr auto kMax = static_cast<Index>(std::numeric_limits<std::uint32_t>::max());
  if (N > kMax || n > kMax) throw ConfigError("sample dimensions exceed the 32-bit counter range");
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline double real_entry(EntryLaw law, const std::array<std::uint64_t, 2>& w) {
  switch (law) {
    case EntryLaw::real_gaussian:
      return std::sqrt(-2.0 * std::log(open_unit(w[0]))) * std::cos(kTwoPi * open_unit(w[1]));
    case EntryLaw::std_exponential:
      return -std::log(open_unit(w[0])) - 1.0;
    case EntryLaw::symmetric_bernoulli:
      return (w[0] >> 63) ? 1.0 : -1.0;
    case EntryLaw::complex_gaussian:
      break;
  }
  return 0.0;
}

inline Complex complex_entry(const std::array<std::uint64_t, 2>& w) {
  // Real and imaginary parts N(0, 1/2): radius sqrt(-log u) instead of sqrt(-2 log u).
  return std::polar(std::sqrt(-std::log(open_unit(w[0]))), kTwoPi * open_unit(w[1]));
}

}  // namespace

Complex entry_at(EntryLaw law, std::uint64_t seed, std::uint64_t replicate, std::uint32_t i,
                 std::uint32_t j) {
  const auto w = Philox4x32(seed).cell(i, j, replicate);
  if (law == EntryLaw::complex_gaussian) return complex_entry(w);
  return {real_entry(law, w), 0.0};
}

DenseMatrix draw_entries(EntryLaw law, const SampleConfig& cfg) {
  cfg.validate();
  const Philox4x32 gen(cfg.seed);
  if (law == EntryLaw::complex_gaussian) {
    ComplexMatrix z(cfg.N, cfg.n);
    for (Index j = 0; j < cfg.n; ++j)
      for (Index i = 0; i < cfg.N; ++i)
        z(i, j) = complex_entry(gen.cell(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j),
                                         cfg.replicate_index));
    return z;
  }
  RealMatrix z(cfg.N, cfg.n);
  for (Index j = 0; j < cfg.n; ++j)
    for (Index i = 0; i < cfg.N; ++i)
      z(i, j) = real_entry(law, gen.cell(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j),
                                         cfg.replicate_index));
  return z;
}

namespace {

// (1/n) X X*, exactly Hermitian.
template <class Matrix>
Matrix gram(const Matrix& x) {
  const Index n = x.cols();
  Matrix s = Matrix::Zero(x.rows(), x.rows());
  s.template selfadjointView<Eigen::Lower>().rankUpdate(x, 1.0 / static_cast<double>(n));
  s.template triangularView<Eigen::StrictlyUpper>() = s.adjoint();
  return s;
}

HermitianMatrix gram_of(const DenseMatrix& x) {
  return std::visit([](const auto& a) { return HermitianMatrix(gram(a)); }, x);
}

DenseMatrix multiply(const HermitianMatrix& a, const DenseMatrix& z) {
  if (!a.is_complex() && !is_complex(z)) return DenseMatrix(RealMatrix(a.real() * std::get<RealMatrix>(z)));
  return DenseMatrix(ComplexMatrix(a.as_complex() * to_complex(z)));
}

void check_rows(Index gamma_dim, const DenseMatrix& z) {
  if (gamma_dim != rows(z)) {
    throw DomainError("dimension mismatch: Gamma is " + std::to_string(gamma_dim) + "x" +
                      std::to_string(gamma_dim) + ", Z has " + std::to_string(rows(z)) + " rows");
  }
  if (cols(z) < 1) throw DomainError("Z needs at least one column");
}

}  // namespace

HermitianMatrix sample_covariance(const HermitianMatrix& gamma_half, const DenseMatrix& Z) {
  check_rows(gamma_half.dim(), Z);
  return gram_of(multiply(gamma_half, Z));
}

HermitianMatrix companion(const HermitianMatrix& gamma, const DenseMatrix& Z) {
  check_rows(gamma.dim(), Z);
  const auto n = static_cast<double>(cols(Z));
  if (!gamma.is_complex() && !is_complex(Z)) {
    const auto& z = std::get<RealMatrix>(Z);
    RealMatrix s = z.transpose() * gamma.real() * z / n;
    return HermitianMatrix(RealMatrix((s + s.transpose()) / 2.0));
  }
  const ComplexMatrix z = to_complex(Z);
  ComplexMatrix s = z.adjoint() * gamma.as_complex() * z / n;
  return HermitianMatrix(ComplexMatrix((s + s.adjoint()) / 2.0));
}

DenseMatrix gaussian_process_matrix(const SpectralDecomposition& T, EntryLaw law,
                                    const SampleConfig& cfg) {
  if (!is_gaussian(law)) {
    throw DomainError("the T^{1/2} Z representation holds only for Gaussian processes; got " +
                      std::string(to_string(law)));
  }
  if (T.dim() != cfg.N) throw DomainError("covariance dimension does not match N");
  return multiply(T.sqrt(), draw_entries(law, cfg));
}

PopulationRoot PopulationRoot::diagonal(const RealVector& eigenvalues) {
  PopulationRoot r;
  r.diagonal_ = true;
  r.diag_ = eigenvalues.cwiseMax(0.0).cwiseSqrt();
  return r;
}

PopulationRoot PopulationRoot::dense(const SpectralDecomposition& dec) {
  PopulationRoot r;
  r.diagonal_ = false;
  r.dense_ = dec.sqrt();
  return r;
}

Index PopulationRoot::dim() const { return diagonal_ ? diag_.size() : dense_.dim(); }
bool PopulationRoot::is_complex() const { return !diagonal_ && dense_.is_complex(); }

DenseMatrix PopulationRoot::apply(const DenseMatrix& Z) const {
  check_rows(dim(), Z);
  if (!diagonal_) return multiply(dense_, Z);
  return std::visit(
      [this](const auto& z) -> DenseMatrix {
        using M = std::decay_t<decltype(z)>;
        return M(diag_.asDiagonal() * z);
      },
      Z);
}

HermitianMatrix PopulationRoot::matrix() const {
  if (!diagonal_) return dense_;
  return HermitianMatrix(RealMatrix(diag_.asDiagonal()));
}

HermitianMatrix sample_covariance(const PopulationRoot& root, const DenseMatrix& Z) {
  return gram_of(root.apply(Z));
}

}  // namespace lmaxlab
