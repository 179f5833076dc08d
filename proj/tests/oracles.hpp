#pragma once

// Independent reference computations for the test suite. Nothing here calls
// into the library's solvers.

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using cd = std::complex<double>;

// Companion Stieltjes transform for a point-mass population at 1:
// roots of z m^2 - (z + 1 - r) m + 1 = 0, branch with Im m * Im z < 0.
inline cd mp_companion_delta1(cd z, double r) {
  const cd b = -(z + 1.0 - r);
  const cd disc = std::sqrt(b * b - 4.0 * z);
  const cd m1 = (-b + disc) / (2.0 * z);
  const cd m2 = (-b - disc) / (2.0 * z);
  if (z.imag() != 0.0) return m1.imag() * z.imag() < 0.0 ? m1 : m2;
  return std::abs(m1) < std::abs(m2) ? m1 : m2;
}

// Eigenvalues ascending, via the general complex eigensolver rather than the
// self-adjoint one the library uses.
inline std::vector<double> dense_eigs(const Eigen::MatrixXcd& a) {
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> s(a, false);
  std::vector<double> out;
  for (Eigen::Index i = 0; i < a.rows(); ++i) out.push_back(s.eigenvalues()(i).real());
  std::sort(out.begin(), out.end());
  return out;
}

// sum_{k>=2} lambda_k / (lambda_1 - lambda_k) / n in long double.
inline double beta_direct(std::vector<double> eigs, long n) {
  std::sort(eigs.begin(), eigs.end(), std::greater<>());
  long double acc = 0.0L;
  for (std::size_t k = 1; k < eigs.size(); ++k) {
    acc += static_cast<long double>(eigs[k]) / (static_cast<long double>(eigs[0]) - eigs[k]);
  }
  return static_cast<double>(acc / n);
}

// Standard normal CDF.
inline double phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Minimum of a unimodal f on [lo, hi] by golden-section search.
template <class F>
double golden_min(F f, double lo, double hi, int iters = 200) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - g * (b - a), d = a + g * (b - a);
  for (int i = 0; i < iters; ++i) {
    if (f(c) < f(d)) {
      b = d;
    } else {
      a = c;
    }
    c = b - g * (b - a);
    d = a + g * (b - a);
  }
  return f(0.5 * (a + b));
}

// Philox4x32-10 reference vectors (Random123 known-answer tests).
struct PhiloxKat {
  unsigned ctr[4];
  unsigned key[2];
  unsigned out[4];
};

inline const PhiloxKat kPhiloxKats[] = {
    {{0u, 0u, 0u, 0u}, {0u, 0u}, {0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}},
    {{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
     {0xffffffffu, 0xffffffffu},
     {0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}},
    {{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
     {0xa4093822u, 0x299f31d0u},
     {0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}},
};

// Cell-average of |x - y|^rho over [i h, (i+1) h] x [j h, (j+1) h] by a
// tensor Gauss-Legendre rule on the off-diagonal cells (smooth there).
inline double cell_average_offdiag(double rho, long grid, long i, long j) {
  static const double xs[] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                              0.9061798459386640};
  static const double ws[] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665,
                              0.2369268850561891};
  const double h = 1.0 / static_cast<double>(grid);
  double acc = 0.0;
  for (int a = 0; a < 5; ++a)
    for (int b = 0; b < 5; ++b) {
      const double x = (i + 0.5 + 0.5 * xs[a]) * h;
      const double y = (j + 0.5 + 0.5 * xs[b]) * h;
      acc += ws[a] * ws[b] * std::pow(std::abs(x - y), rho);
    }
  return acc * 0.25 * h;  // (1/h) * h^2/4 * sum
}

}  // namespace oracle
