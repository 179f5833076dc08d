#include "lmaxlab/spectral_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "lmaxlab/lanczos.hpp"

namespace lmaxlab {

namespace {
constexpr double kMassTolerance = 1e-12;
constexpr Index kDenseCutoff = 48;
}  // namespace

DiscreteMeasure::DiscreteMeasure(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
  double mass = 0.0;
  for (const auto& a : atoms_) {
    if (!std::isfinite(a.location)) throw DomainError("measure atom location is not finite");
    if (!(a.weight >= 0.0)) throw DomainError("measure atom weight is negative");
    mass += a.weight;
  }
  if (std::abs(mass - 1.0) > kMassTolerance) {
    throw DomainError("measure weights sum to " + std::to_string(mass) + ", expected 1");
  }
}

DiscreteMeasure DiscreteMeasure::uniform(const std::vector<double>& locations) {
  if (locations.empty()) throw DomainError("uniform measure needs at least one atom");
  const double w = 1.0 / static_cast<double>(locations.size());
  std::vector<Atom> atoms;
  atoms.reserve(locations.size());
  for (double x : locations) atoms.push_back({x, w});
  return DiscreteMeasure(std::move(atoms));
}

double DiscreteMeasure::total_mass() const {
  double s = 0.0;
  for (const auto& a : atoms_) s += a.weight;
  return s;
}

double DiscreteMeasure::integrate(const std::function<double(double)>& f) const {
  double s = 0.0;
  for (const auto& a : atoms_) s += a.weight * f(a.location);
  return s;
}

DiscreteMeasure DiscreteMeasure::merged(double rel_tol) const {
  std::vector<Atom> sorted = atoms_;
  std::sort(sorted.begin(), sorted.end(),
            [](const Atom& a, const Atom& b) { return a.location < b.location; });
  double scale = 0.0;
  for (const auto& a : sorted) scale = std::max(scale, std::abs(a.location));
  const double tol = scale > 0.0 ? rel_tol * scale : rel_tol;
  std::vector<Atom> out;
  for (const auto& a : sorted) {
    if (!out.empty() && a.location - out.back().location <= tol) {
      // Keep the weighted mean location so first moments are preserved.
      const double w = out.back().weight + a.weight;
      if (w > 0.0) out.back().location = (out.back().location * out.back().weight + a.location * a.weight) / w;
      out.back().weight = w;
    } else {
      out.push_back(a);
    }
  }
  return DiscreteMeasure(std::move(out));
}

void DiscreteMeasure::write_csv(std::ostream& os) const {
  os << "location,weight\n";
  char buf[64];
  for (const auto& a : atoms_) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", a.location, a.weight);
    os << buf;
  }
}

DiscreteMeasure esd(const SpectralDecomposition& dec) {
  return DiscreteMeasure::uniform(std::vector<double>(dec.eigenvalues.begin(), dec.eigenvalues.end()));
}

DiscreteMeasure companion_esd(const DiscreteMeasure& m, double r_N) {
  if (!(r_N > 0.0) || !std::isfinite(r_N)) throw DomainError("companion_esd needs r_N > 0");
  std::vector<Atom> atoms;
  atoms.reserve(m.size() + 1);
  double scale = 0.0;
  for (const auto& a : m.atoms()) scale = std::max(scale, std::abs(a.location));
  // Numerically zero eigenvalues count as the atom at 0.
  const double zero_tol = 1e-10 * scale;
  double zero_mass = 1.0 - r_N;
  for (const auto& a : m.atoms()) {
    if (std::abs(a.location) <= zero_tol) {
      zero_mass += r_N * a.weight;
    } else {
      atoms.push_back({a.location, r_N * a.weight});
    }
  }
  if (zero_mass < -kMassTolerance) {
    throw DomainError("r_N > 1 but the measure has too little mass at 0 for the companion relation");
  }
  if (zero_mass > kMassTolerance) atoms.insert(atoms.begin(), Atom{0.0, zero_mass});
  return DiscreteMeasure(std::move(atoms));
}

TopTwo top_two(const SpectralDecomposition& dec) {
  if (dec.dim() < 2) throw DomainError("top_two needs N >= 2");
  return {dec.eigenvalues(0), dec.eigenvalues(1)};
}

std::vector<double> top_eigenvalues(const HermitianMatrix& a, int k, EigenPath path) {
  const Index n = a.dim();
  if (k < 1 || k > n) throw DomainError("requested " + std::to_string(k) + " eigenvalues of a " +
                                        std::to_string(n) + "x" + std::to_string(n) + " matrix");
  if (path == EigenPath::full || n <= kDenseCutoff) {
    return a.visit([k](const auto& m) {
      Eigen::SelfAdjointEigenSolver<std::decay_t<decltype(m)>> s(m, Eigen::EigenvaluesOnly);
      if (s.info() != Eigen::Success) throw ConvergenceError("symmetric eigensolver failed", 0.0, 0);
      std::vector<double> out;
      for (int i = 0; i < k; ++i) out.push_back(s.eigenvalues()(m.rows() - 1 - i));
      return out;
    });
  }
  return a.visit([k, n](const auto& m) {
    using Scalar = typename std::decay_t<decltype(m)>::Scalar;
    const LinearOperator<Scalar> op = [&m](const Vector<Scalar>& in, Vector<Scalar>& out) {
      out.noalias() = m.template selfadjointView<Eigen::Lower>() * in;
    };
    return lanczos_top<Scalar>(op, n, k).values;
  });
}

TopTwo top_two(const HermitianMatrix& a, EigenPath path) {
  if (a.dim() < 2) throw DomainError("top_two needs N >= 2");
  const auto v = top_eigenvalues(a, 2, path);
  return {v[0], v[1]};
}

double largest_eigenvalue(const HermitianMatrix& a) { return top_eigenvalues(a, 1)[0]; }

}  // namespace lmaxlab
