#include "lmaxlab/mp_theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace lmaxlab {

double MPParams::lower_edge() const {
  const double s = 1.0 - std::sqrt(r);
  return s * s;
}

double MPParams::upper_edge() const {
  const double s = 1.0 + std::sqrt(r);
  return s * s;
}

void MPParams::validate() const {
  if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("aspect ratio r must be positive and finite");
}

double mp_atom(const MPParams& params) {
  params.validate();
  return std::max(0.0, 1.0 - 1.0 / params.r);
}

double mp_density(const MPParams& params, double lambda) {
  params.validate();
  if (!(lambda > 0.0)) throw DomainError("mp_density needs lambda > 0 (the atom at 0 is mp_atom)");
  const double prod = (params.upper_edge() - lambda) * (lambda - params.lower_edge());
  if (prod <= 0.0) return 0.0;
  return std::sqrt(prod) / (2.0 * std::numbers::pi * params.r * lambda);
}

namespace {

// Distinct nonzero support points with their masses; zero atoms do not enter
// x_N or the fixed-point integral.
struct Poles {
  std::vector<double> s;  // descending, > 0
  std::vector<double> w;
  std::vector<double> s_neg;  // negative atoms (only meaningful for signed measures)
  std::vector<double> w_neg;
};

Poles group_atoms(const std::vector<Atom>& atoms) {
  std::vector<Atom> sorted = atoms;
  std::sort(sorted.begin(), sorted.end(), [](const Atom& a, const Atom& b) { return a.location > b.location; });
  Poles p;
  for (const auto& a : sorted) {
    if (a.location == 0.0 || a.weight == 0.0) continue;
    auto& s = a.location > 0.0 ? p.s : p.s_neg;
    auto& w = a.location > 0.0 ? p.w : p.w_neg;
    if (!s.empty() && std::abs(s.back() - a.location) <= 1e-14 * std::abs(a.location)) {
      w.back() += a.weight;
    } else {
      s.push_back(a.location);
      w.push_back(a.weight);
    }
  }
  return p;
}

std::vector<Atom> uniform_atoms(std::span<const double> eigs) {
  if (eigs.empty()) throw DomainError("empty eigenvalue list");
  std::vector<Atom> atoms;
  const double w = 1.0 / static_cast<double>(eigs.size());
  for (double e : eigs) {
    if (!std::isfinite(e)) throw DomainError("eigenvalue is not finite");
    atoms.push_back({e, w});
  }
  return atoms;
}

struct XEval {
  double x;
  double xp;
};

// Unguarded x_N(y), x_N'(y).
XEval eval_x(const Poles& p, double r, double y) {
  double sum = 0.0;
  double sum2 = 0.0;
  auto add = [&](const std::vector<double>& s, const std::vector<double>& w) {
    for (std::size_t k = 0; k < s.size(); ++k) {
      const double d = 1.0 - s[k] * y;
      sum += w[k] * s[k] / d;
      sum2 += w[k] * s[k] * s[k] / (d * d);
    }
  };
  add(p.s, p.w);
  add(p.s_neg, p.w_neg);
  return {1.0 / y + r * sum, -1.0 / (y * y) + r * sum2};
}

struct Interval {
  double lo;  // -inf allowed
  double hi;  // +inf allowed
};

// y(t) on an open interval, clustering geometrically at both ends.
double map_to(const Interval& iv, double t) {
  const bool lo_inf = std::isinf(iv.lo);
  const bool hi_inf = std::isinf(iv.hi);
  if (lo_inf && hi_inf) return t;
  if (lo_inf) return iv.hi - std::exp(-t);
  if (hi_inf) return iv.lo + std::exp(t);
  return iv.lo + (iv.hi - iv.lo) / (1.0 + std::exp(-t));
}

std::vector<Interval> b_n_intervals(const Poles& p) {
  // Poles of x_N: y = 0 and y = 1/s for every nonzero atom s.
  std::vector<double> poles{0.0};
  for (double s : p.s) poles.push_back(1.0 / s);
  for (double s : p.s_neg) poles.push_back(1.0 / s);
  std::sort(poles.begin(), poles.end());
  std::vector<Interval> out;
  const double inf = std::numeric_limits<double>::infinity();
  out.push_back({-inf, poles.front()});
  for (std::size_t i = 1; i < poles.size(); ++i) out.push_back({poles[i - 1], poles[i]});
  out.push_back({poles.back(), inf});
  return out;
}

constexpr double kTMax = 25.0;
constexpr int kGrid = 241;

// Bisection in t for a sign change of g(t) between t0 (sign s0) and t1.
template <class G>
double bisect_t(const G& g, double t0, double t1, bool negative_at_t0) {
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (t0 + t1);
    if (mid == t0 || mid == t1) break;
    if ((g(mid) < 0.0) == negative_at_t0) {
      t0 = mid;
    } else {
      t1 = mid;
    }
  }
  return 0.5 * (t0 + t1);
}

std::optional<SupportQuery> find_witness(const Poles& p, double r, double x) {
  for (const auto& iv : b_n_intervals(p)) {
    auto xp_at = [&](double t) { return eval_x(p, r, map_to(iv, t)).xp; };
    std::vector<double> ts(kGrid);
    std::vector<double> xps(kGrid);
    for (int i = 0; i < kGrid; ++i) {
      ts[i] = -kTMax + 2.0 * kTMax * i / (kGrid - 1);
      xps[i] = xp_at(ts[i]);
    }
    int i = 0;
    while (i < kGrid) {
      if (!(xps[i] < 0.0)) {
        ++i;
        continue;
      }
      int j = i;
      while (j + 1 < kGrid && xps[j + 1] < 0.0) ++j;
      // Decreasing piece [tl, tr], with the edges pushed to the sign changes of x'.
      const double tl = i > 0 ? bisect_t(xp_at, ts[i], ts[i - 1], true) : ts[i];
      const double tr = j + 1 < kGrid ? bisect_t(xp_at, ts[j], ts[j + 1], true) : ts[j];
      const double xl = eval_x(p, r, map_to(iv, tl)).x;
      const double xr = eval_x(p, r, map_to(iv, tr)).x;
      if (xr <= x && x <= xl) {
        // x decreasing in t on [tl, tr]: find x(t) = x.
        auto g = [&](double t) { return x - eval_x(p, r, map_to(iv, t)).x; };
        double t = bisect_t(g, tl, tr, true);
        double y = map_to(iv, t);
        // Polish in y with Newton steps that stay inside the piece.
        const double ylo = std::min(map_to(iv, tl), map_to(iv, tr));
        const double yhi = std::max(map_to(iv, tl), map_to(iv, tr));
        for (int k = 0; k < 3; ++k) {
          const XEval e = eval_x(p, r, y);
          if (!(e.xp < 0.0)) break;
          const double next = y - (e.x - x) / e.xp;
          if (!(next >= ylo && next <= yhi)) break;
          if (std::abs(eval_x(p, r, next).x - x) > std::abs(e.x - x)) break;
          y = next;
        }
        const XEval e = eval_x(p, r, y);
        if (e.xp < 0.0) return SupportQuery{y, e.x, e.xp};
      }
      i = j + 1;
    }
  }
  return std::nullopt;
}

}  // namespace

SupportQuery x_of_y(std::span<const double> eigs, double r_N, double y) {
  if (!(r_N > 0.0)) throw DomainError("x_of_y needs r_N > 0");
  if (y == 0.0 || !std::isfinite(y)) throw DomainError("x_of_y: y must be nonzero and finite");
  for (double s : eigs) {
    if (s != 0.0 && std::abs(1.0 - s * y) < 1e-12) {
      throw DomainError("x_of_y: 1/y collides with eigenvalue " + std::to_string(s));
    }
  }
  const XEval e = eval_x(group_atoms(uniform_atoms(eigs)), r_N, y);
  return {y, e.x, e.xp};
}

SupportWitness support_complement(std::span<const double> eigs, double r_N, double x) {
  if (!(r_N > 0.0)) throw DomainError("support_complement needs r_N > 0");
  auto w = find_witness(group_atoms(uniform_atoms(eigs)), r_N, x);
  return {w.has_value(), w};
}

SupportQuery support_right_edge(std::span<const double> eigs, double r_N) {
  if (!(r_N > 0.0)) throw DomainError("support_right_edge needs r_N > 0");
  const Poles p = group_atoms(uniform_atoms(eigs));
  if (p.s.empty()) throw DomainError("support_right_edge needs a positive eigenvalue");
  // x_N is convex on (0, 1/lambda_max): bisect x_N' = 0.
  double lo = 0.0;
  double hi = 1.0 / p.s.front();
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (eval_x(p, r_N, mid).xp < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double y = 0.5 * (lo + hi);
  const XEval e = eval_x(p, r_N, y);
  return {y, e.x, e.xp};
}

double fixed_point_residual(const DiscreteMeasure& nu, double r, Complex z, Complex m) {
  Complex sum = 0.0;
  for (const auto& a : nu.atoms()) sum += a.weight * a.location / (1.0 - a.location * m);
  return std::abs(z - 1.0 / m - r * sum);
}

FixedPointSolution solve_fixed_point(const DiscreteMeasure& nu, double r, Complex z,
                                     const FixedPointOptions& opts) {
  if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("fixed point needs r > 0");
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw DomainError("z must be finite");

  if (z.imag() == 0.0) {
    const auto w = find_witness(group_atoms(nu.atoms()), r, z.real());
    if (!w) {
      throw DomainError("real z = " + std::to_string(z.real()) + " lies inside the estimated support");
    }
    const Complex m(w->y, 0.0);
    return {z, m, 0, fixed_point_residual(nu, r, z, m)};
  }

  const auto& atoms = nu.atoms();
  auto f = [&](Complex m) {
    Complex sum = 0.0;
    for (const auto& a : atoms) sum += a.weight * a.location / (1.0 - a.location * m);
    return z - 1.0 / m - r * sum;
  };
  auto fprime = [&](Complex m) {
    Complex sum = 0.0;
    for (const auto& a : atoms) {
      const Complex d = 1.0 - a.location * m;
      sum += a.weight * a.location * a.location / (d * d);
    }
    return 1.0 / (m * m) - r * sum;
  };
  auto picard = [&](Complex m) {
    Complex sum = 0.0;
    for (const auto& a : atoms) sum += a.weight * a.location / (1.0 - a.location * m);
    return 1.0 / (z - r * sum);
  };
  auto right_half = [&](Complex m) { return m.imag() * z.imag() < 0.0; };

  // Newton step with backtracking; false if no decrease was possible.
  auto newton = [&](Complex& m, double& res) {
    const Complex step = f(m) / fprime(m);
    if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) return false;
    double t = 1.0;
    for (int h = 0; h < 40; ++h, t *= 0.5) {
      const Complex cand = m - t * step;
      if (!right_half(cand)) continue;
      const double cres = std::abs(f(cand));
      if (cres < res) {
        m = cand;
        res = cres;
        return true;
      }
    }
    return false;
  };

  Complex m = 1.0 / z;
  double res = std::abs(f(m));
  int it = 0;
  bool use_newton = false;
  double checkpoint = res;
  while (res >= opts.tolerance && it < opts.max_iterations) {
    ++it;
    if (use_newton) {
      if (!newton(m, res)) use_newton = false;
      continue;
    }
    const Complex next = (1.0 - opts.damping) * m + opts.damping * picard(m);
    if (right_half(next)) m = next;
    res = std::abs(f(m));
    if (it % 50 == 0) {
      if (res > 0.5 * checkpoint) use_newton = true;  // stagnating
      checkpoint = res;
    }
  }
  if (res >= opts.tolerance) throw ConvergenceError("fixed-point solver did not converge", res, it);
  // Polish: extra Newton steps only while they reduce the residual.
  for (int k = 0; k < 3 && res > 0.0; ++k) {
    if (!newton(m, res)) break;
  }
  return {z, m, it, res};
}

double beta_N(std::span<const double> eigs, Index n) {
  if (n < 1) throw DomainError("beta_N needs n >= 1");
  if (eigs.size() < 1) throw DomainError("beta_N needs eigenvalues");
  const auto top = std::max_element(eigs.begin(), eigs.end());
  const double l1 = *top;
  if (!(l1 > 0.0)) throw DomainError("beta_N needs lambda_1 > 0");
  // Neumaier compensated summation.
  double sum = 0.0;
  double comp = 0.0;
  for (auto it = eigs.begin(); it != eigs.end(); ++it) {
    if (it == top) continue;
    const double lk = *it;
    if (!(lk < l1)) throw DomainError("beta_N: spectral gap violated (lambda_1 = lambda_2)");
    const double term = lk / (l1 - lk);
    const double t = sum + term;
    comp += std::abs(sum) >= std::abs(term) ? (sum - t) + term : (term - t) + sum;
    sum = t;
  }
  return (sum + comp) / static_cast<double>(n);
}

double theta_N(std::span<const double> normalized_eigs, Index n) {
  if (n < 1) throw DomainError("theta_N needs n >= 1");
  if (normalized_eigs.empty()) throw DomainError("theta_N needs eigenvalues");
  const auto top = std::max_element(normalized_eigs.begin(), normalized_eigs.end());
  if (std::abs(*top - 1.0) > 1e-12) throw DomainError("theta_N needs a spectrum normalized to lambda_1 = 1");
  // x-hat_N(1) = 1 + (1/n) sum_{k>=2} lambda_k / (1 - lambda_k y) at y = 1.
  double sum = 0.0;
  double comp = 0.0;
  for (auto it = normalized_eigs.begin(); it != normalized_eigs.end(); ++it) {
    if (it == top) continue;
    if (!(*it < 1.0)) throw DomainError("theta_N: normalization violated (lambda_2 >= 1)");
    const double y = 1.0;
    const double term = *it / (1.0 - *it * y);
    const double t = sum + term;
    comp += std::abs(sum) >= std::abs(term) ? (sum - t) + term : (term - t) + sum;
    sum = t;
  }
  return 1.0 + (sum + comp) / static_cast<double>(n);
}

double sigma_squared(EntryLaw law) { return fourth_moment(law) - 1.0; }

}  // namespace lmaxlab
