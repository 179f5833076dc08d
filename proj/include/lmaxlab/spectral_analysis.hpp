#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "lmaxlab/covariance_models.hpp"
#include "lmaxlab/types.hpp"

namespace lmaxlab {

struct Atom {
  double location = 0.0;
  double weight = 0.0;
};

/// Finite probability measure: weights >= 0 summing to 1 (within 1e-12).
class DiscreteMeasure {
 public:
  DiscreteMeasure() = default;
  explicit DiscreteMeasure(std::vector<Atom> atoms);

  static DiscreteMeasure uniform(const std::vector<double>& locations);
  static DiscreteMeasure dirac(double location) { return DiscreteMeasure({{location, 1.0}}); }

  const std::vector<Atom>& atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  double total_mass() const;
  double integrate(const std::function<double(double)>& f) const;
  /// Sorted by location, atoms within `rel_tol` (relative to the largest
  /// |location|, absolute when that is 0) merged.
  DiscreteMeasure merged(double rel_tol = 1e-10) const;

  void write_csv(std::ostream& os) const;

 private:
  std::vector<Atom> atoms_;
};

/// Uniform weights 1/N on the eigenvalues, unmerged.
DiscreteMeasure esd(const SpectralDecomposition& dec);

/// (1 - r) delta_0 + r m. For r > 1 the zero mass of m absorbs the negative
/// weight; a DomainError is raised when m has too little mass at 0.
DiscreteMeasure companion_esd(const DiscreteMeasure& m, double r_N);

struct TopTwo {
  double first = 0.0;
  double second = 0.0;
};

enum class EigenPath { full, iterative };

TopTwo top_two(const SpectralDecomposition& dec);
TopTwo top_two(const HermitianMatrix& a, EigenPath path = EigenPath::iterative);

/// lambda_max by Lanczos (dense solve below a small size cutoff).
double largest_eigenvalue(const HermitianMatrix& a);

/// Top-k eigenvalues, descending.
std::vector<double> top_eigenvalues(const HermitianMatrix& a, int k,
                                    EigenPath path = EigenPath::iterative);

}  // namespace lmaxlab
