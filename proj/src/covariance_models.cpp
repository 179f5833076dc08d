#include "lmaxlab/covariance_models.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>

namespace lmaxlab {

namespace {

constexpr double kPsdClamp = 1e-9;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

double SlowlyVarying::operator()(double h) const {
  switch (family) {
    case Family::constant:
      return c;
    case Family::log_power:
      return std::pow(std::log(2.0 + std::abs(h)), p);
  }
  return c;
}

void SlowlyVarying::validate() const {
  if (family == Family::constant && !(c > 0.0)) {
    throw ConfigError("slowly varying constant must be > 0, got " + std::to_string(c));
  }
  if (!std::isfinite(p)) throw ConfigError("slowly varying log power must be finite");
}

std::string to_string(SlowlyVarying::Family f) {
  return f == SlowlyVarying::Family::constant ? "constant" : "log_power";
}

SlowlyVarying::Family parse_slowly_varying(const std::string& name) {
  if (name == "constant") return SlowlyVarying::Family::constant;
  if (name == "log_power") return SlowlyVarying::Family::log_power;
  throw ConfigError("unknown slowly varying family '" + name + "' (constant | log_power)");
}

void AutocovarianceSpec::validate() const {
  if (!(d > 0.0 && d < 0.5)) {
    throw ConfigError("memory exponent d must lie in (0, 1/2), got " + std::to_string(d));
  }
  if (!(theta > -std::numbers::pi && theta <= std::numbers::pi)) {
    throw ConfigError("phase theta must lie in (-pi, pi], got " + std::to_string(theta));
  }
  L.validate();
}

double autocovariance_modulus(const AutocovarianceSpec& spec, std::int64_t h) {
  const double ah = std::abs(static_cast<double>(h));
  return spec.L(ah) / std::pow(1.0 + ah, 1.0 - 2.0 * spec.d);
}

Complex autocovariance(const AutocovarianceSpec& spec, std::int64_t h) {
  const double g = autocovariance_modulus(spec, h);
  if (spec.theta == 0.0) return {g, 0.0};
  return std::polar(g, static_cast<double>(h) * spec.theta);
}

Index dimension(const PopulationModel& model) {
  return std::visit(overloaded{
                        [](const ExplicitModel& m) { return m.matrix.dim(); },
                        [](const DiagonalModel& m) { return static_cast<Index>(m.eigenvalues.size()); },
                        [](const ToeplitzModel& m) { return m.N; },
                        [](const SpikedModel& m) { return m.N; },
                    },
                    model);
}

std::string kind_name(const PopulationModel& model) {
  static constexpr std::array<const char*, 4> names{"explicit", "diagonal", "toeplitz", "spiked"};
  return names[model.index()];
}

PopulationModel with_dimension(const PopulationModel& model, Index N) {
  if (const auto* t = std::get_if<ToeplitzModel>(&model)) return ToeplitzModel{t->spec, N};
  if (const auto* s = std::get_if<SpikedModel>(&model)) return SpikedModel{s->spikes, s->bulk, N};
  if (dimension(model) == N) return model;
  throw ConfigError(kind_name(model) + " population has fixed dimension " +
                    std::to_string(dimension(model)) + ", cannot resize to " + std::to_string(N));
}

HermitianMatrix build_population(const PopulationModel& model) {
  return std::visit(
      overloaded{
          [](const ExplicitModel& m) -> HermitianMatrix {
            return HermitianMatrix::checked(m.matrix.data());
          },
          [](const DiagonalModel& m) -> HermitianMatrix {
            if (m.eigenvalues.empty()) throw ConfigError("diagonal population needs eigenvalues");
            RealVector v(static_cast<Index>(m.eigenvalues.size()));
            for (Index i = 0; i < v.size(); ++i) {
              const double e = m.eigenvalues[static_cast<std::size_t>(i)];
              if (!(e >= 0.0) || !std::isfinite(e)) {
                throw DomainError("diagonal entry " + std::to_string(i) + " is negative or not finite");
              }
              v(i) = e;
            }
            return HermitianMatrix(RealMatrix(v.asDiagonal()));
          },
          [](const ToeplitzModel& m) -> HermitianMatrix {
            m.spec.validate();
            if (m.N < 1) throw ConfigError("Toeplitz population needs N >= 1");
            if (m.spec.theta == 0.0) {
              RealVector col(m.N);
              for (Index h = 0; h < m.N; ++h) col(h) = autocovariance_modulus(m.spec, h);
              RealMatrix t(m.N, m.N);
              for (Index j = 0; j < m.N; ++j)
                for (Index i = 0; i < m.N; ++i) t(i, j) = col(std::abs(i - j));
              return HermitianMatrix(std::move(t));
            }
            ComplexVector col(2 * m.N - 1);
            for (Index h = -(m.N - 1); h < m.N; ++h) col(h + m.N - 1) = autocovariance(m.spec, h);
            ComplexMatrix t(m.N, m.N);
            for (Index j = 0; j < m.N; ++j)
              for (Index i = 0; i < m.N; ++i) t(i, j) = col(i - j + m.N - 1);
            return HermitianMatrix(std::move(t));
          },
          [](const SpikedModel& m) -> HermitianMatrix {
            if (m.N < static_cast<Index>(m.spikes.size()) || m.N < 1) {
              throw ConfigError("spiked population: N smaller than the number of spikes");
            }
            if (!(m.bulk >= 0.0)) throw DomainError("spiked population: negative bulk value");
            RealVector v = RealVector::Constant(m.N, m.bulk);
            for (std::size_t i = 0; i < m.spikes.size(); ++i) {
              if (!(m.spikes[i] >= 0.0)) throw DomainError("spiked population: negative spike");
              v(static_cast<Index>(i)) = m.spikes[i];
            }
            return HermitianMatrix(RealMatrix(v.asDiagonal()));
          },
      },
      model);
}

namespace {

template <class Matrix>
SpectralDecomposition decompose_impl(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a);
  if (solver.info() != Eigen::Success) {
    throw ConvergenceError("symmetric eigensolver failed", 0.0, 0);
  }
  const Index n = a.rows();
  SpectralDecomposition dec;
  dec.eigenvalues = solver.eigenvalues().reverse();
  dec.eigenvectors = Matrix(solver.eigenvectors().rowwise().reverse());
  const double top = n > 0 ? dec.eigenvalues(0) : 0.0;
  const double tau = kPsdClamp * std::max(top, 0.0);
  for (Index i = 0; i < n; ++i) {
    double& e = dec.eigenvalues(i);
    if (e >= 0.0) continue;
    if (e > -tau) {
      e = 0.0;
    } else {
      throw DomainError("matrix is not positive semidefinite (eigenvalue " + std::to_string(e) + ")");
    }
  }
  return dec;
}

}  // namespace

SpectralDecomposition decompose(const HermitianMatrix& gamma) {
  return gamma.visit([](const auto& a) { return decompose_impl(a); });
}

HermitianMatrix SpectralDecomposition::reconstruct() const {
  return std::visit(
      [this](const auto& u) {
        using M = std::decay_t<decltype(u)>;
        M r = u * eigenvalues.asDiagonal() * u.adjoint();
        return HermitianMatrix(M((r + r.adjoint()) / 2.0));
      },
      eigenvectors);
}

HermitianMatrix SpectralDecomposition::sqrt() const {
  const RealVector root = eigenvalues.cwiseMax(0.0).cwiseSqrt();
  return std::visit(
      [&root](const auto& u) {
        using M = std::decay_t<decltype(u)>;
        M r = u * root.asDiagonal() * u.adjoint();
        return HermitianMatrix(M((r + r.adjoint()) / 2.0));
      },
      eigenvectors);
}

double spectral_gap_ratio(const SpectralDecomposition& dec) {
  if (dec.dim() < 2) throw DomainError("spectral gap ratio needs N >= 2");
  const double l1 = dec.eigenvalues(0);
  if (!(l1 > 0.0)) throw DomainError("spectral gap ratio needs lambda_1 > 0");
  return std::clamp(dec.eigenvalues(1) / l1, 0.0, 1.0);
}

HermitianMatrix phase_conjugate(const HermitianMatrix& gamma, double theta) {
  if (!(theta > -std::numbers::pi && theta <= std::numbers::pi)) {
    throw DomainError("phase theta must lie in (-pi, pi]");
  }
  if (theta == 0.0) return gamma;
  const Index n = gamma.dim();
  if (theta == std::numbers::pi && !gamma.is_complex()) {
    RealMatrix out = gamma.real();
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < n; ++i)
        if ((i - j) % 2 != 0) out(i, j) = -out(i, j);
    return HermitianMatrix(std::move(out));
  }
  ComplexVector phase(n);
  for (Index k = 0; k < n; ++k) phase(k) = std::polar(1.0, static_cast<double>(k + 1) * theta);
  ComplexMatrix out = phase.asDiagonal() * gamma.as_complex() * phase.conjugate().asDiagonal();
  return HermitianMatrix(ComplexMatrix((out + out.adjoint()) / 2.0));
}

namespace {

void put_u32(std::ostream& os, std::uint32_t v) {
  const std::array<char, 4> b{static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                              static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  os.write(b.data(), 4);
}

void put_f64(std::ostream& os, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  std::array<char, 8> b;
  for (int i = 0; i < 8; ++i) b[static_cast<std::size_t>(i)] = static_cast<char>((bits >> (8 * i)) & 0xff);
  os.write(b.data(), 8);
}

std::uint32_t get_u32(std::istream& is) {
  std::array<unsigned char, 4> b{};
  is.read(reinterpret_cast<char*>(b.data()), 4);
  return std::uint32_t{b[0]} | (std::uint32_t{b[1]} << 8) | (std::uint32_t{b[2]} << 16) |
         (std::uint32_t{b[3]} << 24);
}

double get_f64(std::istream& is) {
  std::array<unsigned char, 8> b{};
  is.read(reinterpret_cast<char*>(b.data()), 8);
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= std::uint64_t{b[static_cast<std::size_t>(i)]} << (8 * i);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

}  // namespace

void write_splm(const std::filesystem::path& path, const DenseMatrix& m) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open " + path.string() + " for writing");
  os.write("SPLM", 4);
  put_u32(os, static_cast<std::uint32_t>(rows(m)));
  put_u32(os, static_cast<std::uint32_t>(cols(m)));
  put_u32(os, is_complex(m) ? 1u : 0u);
  std::visit(
      [&os](const auto& a) {
        for (Index i = 0; i < a.rows(); ++i) {
          for (Index j = 0; j < a.cols(); ++j) {
            if constexpr (std::is_same_v<std::decay_t<decltype(a)>, ComplexMatrix>) {
              put_f64(os, a(i, j).real());
              put_f64(os, a(i, j).imag());
            } else {
              put_f64(os, a(i, j));
            }
          }
        }
      },
      m);
  if (!os) throw ConfigError("write to " + path.string() + " failed");
}

DenseMatrix read_splm(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open matrix file " + path.string());
  std::array<char, 4> magic{};
  is.read(magic.data(), 4);
  if (!is || std::memcmp(magic.data(), "SPLM", 4) != 0) {
    throw ConfigError(path.string() + " is not an SPLM matrix file");
  }
  const Index r = get_u32(is);
  const Index c = get_u32(is);
  const std::uint32_t flags = get_u32(is);
  if (!is) throw ConfigError(path.string() + ": truncated header");
  DenseMatrix out;
  if (flags & 1u) {
    ComplexMatrix a(r, c);
    for (Index i = 0; i < r; ++i)
      for (Index j = 0; j < c; ++j) {
        const double re = get_f64(is);
        a(i, j) = Complex(re, get_f64(is));
      }
    out = std::move(a);
  } else {
    RealMatrix a(r, c);
    for (Index i = 0; i < r; ++i)
      for (Index j = 0; j < c; ++j) a(i, j) = get_f64(is);
    out = std::move(a);
  }
  if (!is) throw ConfigError(path.string() + ": truncated data");
  return out;
}

}  // namespace lmaxlab
