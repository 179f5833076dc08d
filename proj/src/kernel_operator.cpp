#include "lmaxlab/kernel_operator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "lmaxlab/lanczos.hpp"

namespace lmaxlab {

namespace {

constexpr Index kDenseCutoff = 48;

void check_rho(double rho) {
  if (!(rho > -1.0 && rho < 0.0)) throw DomainError("rho must lie in (-1, 0), got " + std::to_string(rho));
}

// y = T x for the symmetric Toeplitz matrix with first column c.
void toeplitz_apply(const RealVector& c, const RealVector& x, RealVector& y) {
  const Index n = c.size();
  y.setZero(n);
  for (Index i = 0; i < n; ++i) {
    double acc = 0.0;
    const double* xp = x.data();
    for (Index j = 0; j < i; ++j) acc += c(i - j) * xp[j];
    for (Index j = i; j < n; ++j) acc += c(j - i) * xp[j];
    y(i) = acc;
  }
}

NystromEigen toeplitz_top(const RealVector& c, int k) {
  const Index n = c.size();
  if (k < 1 || k > n) throw DomainError("requested " + std::to_string(k) + " eigenvalues of order " + std::to_string(n));
  NystromEigen out;
  if (n <= kDenseCutoff) {
    RealMatrix t(n, n);
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < n; ++i) t(i, j) = c(std::abs(i - j));
    Eigen::SelfAdjointEigenSolver<RealMatrix> s(t);
    if (s.info() != Eigen::Success) throw ConvergenceError("symmetric eigensolver failed", 0.0, 0);
    out.vectors.resize(n, k);
    for (int i = 0; i < k; ++i) {
      out.values.push_back(s.eigenvalues()(n - 1 - i));
      out.vectors.col(i) = s.eigenvectors().col(n - 1 - i);
    }
    return out;
  }
  const LinearOperator<double> op = [&c](const RealVector& in, RealVector& res) { toeplitz_apply(c, in, res); };
  auto pairs = lanczos_top<double>(op, n, k);
  out.values = std::move(pairs.values);
  out.vectors = std::move(pairs.vectors);
  return out;
}

// int_{u0}^{u1} |c - u^rho| du for 0 <= u0 <= u1, with U(u) = u^{1+rho}/(1+rho)
// supplied at the endpoints and at the crossing u* = c^{1/rho}.
double abs_gap_integral(double c, double u0, double u1, double U0, double U1,
                        double ustar, double Ustar) {
  if (u1 <= u0) return 0.0;
  if (u1 <= ustar) return (U1 - U0) - c * (u1 - u0);  // u^rho >= c throughout
  if (u0 >= ustar) return c * (u1 - u0) - (U1 - U0);
  return (Ustar - U0) - c * (ustar - u0) + c * (u1 - ustar) - (U1 - Ustar);
}

}  // namespace

double KernelSpec::R(double h) const {
  return autocovariance_modulus(autocov, static_cast<std::int64_t>(std::floor(std::abs(h))));
}

void KernelSpec::validate() const {
  autocov.validate();
  check_rho(rho());
}

std::vector<double> widom_shampine_eigs(const KernelSpec& spec, Index N, int k) {
  spec.validate();
  if (N < 1) throw DomainError("widom_shampine_eigs needs N >= 1");
  const double scale = static_cast<double>(N) * spec.R(static_cast<double>(N));
  RealVector c(N);
  for (Index h = 0; h < N; ++h) c(h) = spec.R(static_cast<double>(h)) / scale;
  return toeplitz_top(c, k).values;
}

RealVector nystrom_symbol(double rho, Index grid) {
  check_rho(rho);
  if (grid < 1) throw DomainError("grid must be >= 1");
  const double h = 1.0 / static_cast<double>(grid);
  const double q = rho + 2.0;
  const double pre = std::pow(h, rho + 1.0) / ((rho + 1.0) * (rho + 2.0));
  RealVector c(grid);
  for (Index m = 0; m < grid; ++m) {
    const double dm = static_cast<double>(m);
    const double second = std::pow(dm + 1.0, q) - 2.0 * std::pow(dm, q) + std::pow(std::abs(dm - 1.0), q);
    c(m) = pre * second;
  }
  return c;
}

NystromEigen nystrom_limit(double rho, Index grid, int k) {
  if (k > grid) throw DomainError("nystrom_limit needs grid >= k");
  NystromEigen e = toeplitz_top(nystrom_symbol(rho, grid), k);
  for (Index j = 0; j < e.vectors.cols(); ++j) {
    if (e.vectors.col(j).sum() < 0.0) e.vectors.col(j) *= -1.0;
  }
  return e;
}

std::vector<double> nystrom_limit_eigs(double rho, Index grid, int k) { return nystrom_limit(rho, grid, k).values; }

std::string to_string(CertificationStatus s) {
  return s == CertificationStatus::certified ? "certified" : "inconclusive";
}

nlohmann::json KernelEigenEstimate::to_json() const {
  nlohmann::json j;
  j["rho"] = rho;
  j["grids"] = grids;
  j["a"] = a;
  j["gap_ratio"] = gap_ratio;
  j["gap_ratio_error"] = gap_ratio_error;
  j["error_estimate"] = error_estimate;
  j["fitted_order"] = fitted_order;
  j["extrapolated"] = extrapolated;
  j["per_grid"] = per_grid;
  j["status"] = to_string(status);
  return j;
}

KernelEigenEstimate gap_ratio_estimate(double rho, std::vector<Index> grids, int k) {
  check_rho(rho);
  if (k < 2) throw DomainError("gap_ratio_estimate needs k >= 2");
  if (grids.empty()) throw DomainError("gap_ratio_estimate needs at least one grid");
  std::sort(grids.begin(), grids.end());
  for (std::size_t i = 1; i < grids.size(); ++i) {
    if (grids[i] != 2 * grids[i - 1]) throw DomainError("grids must double at every step");
  }
  KernelEigenEstimate est;
  est.rho = rho;
  est.grids = grids;
  for (Index g : grids) est.per_grid.push_back(nystrom_limit_eigs(rho, g, k));

  const std::size_t G = grids.size();
  est.extrapolated = G >= 3;
  for (int i = 0; i < k; ++i) {
    const double last = est.per_grid[G - 1][i];
    if (G == 1) {
      est.a.push_back(last);
      est.error_estimate.push_back(std::numeric_limits<double>::infinity());
      est.fitted_order.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    const double prev = est.per_grid[G - 2][i];
    if (G == 2) {
      est.a.push_back(last);
      est.error_estimate.push_back(std::abs(last - prev));
      est.fitted_order.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    const double first = est.per_grid[G - 3][i];
    const double d1 = prev - first;
    const double d2 = last - prev;
    const double ratio = d1 / d2;
    if (!(ratio > 1.0) || !std::isfinite(ratio)) {
      // No geometric convergence visible: keep the finest value, charge the last step.
      est.extrapolated = false;
      est.a.push_back(last);
      est.error_estimate.push_back(std::max(std::abs(d2), std::abs(d1)));
      est.fitted_order.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    const double p = std::log2(ratio);
    const double limit = last + d2 / (ratio - 1.0);
    est.a.push_back(limit);
    est.error_estimate.push_back(std::abs(limit - last));
    est.fitted_order.push_back(p);
  }
  const double a1 = est.a[0];
  const double a2 = est.a[1];
  const double e1 = est.error_estimate[0];
  const double e2 = est.error_estimate[1];
  est.gap_ratio = a2 / a1;
  est.gap_ratio_error = (e2 + std::abs(est.gap_ratio) * e1) / std::abs(a1);
  const bool certified = a1 > 0.0 && a1 - a2 > 10.0 * (e1 + e2) && a2 >= -e2;
  est.status = certified ? CertificationStatus::certified : CertificationStatus::inconclusive;
  return est;
}

double operator_distance_bound(const KernelSpec& spec, Index N, const OperatorBoundOptions& opts) {
  spec.validate();
  if (N < 1) throw DomainError("operator_distance_bound needs N >= 1");
  if (opts.y_samples_per_cell < 1) throw DomainError("y_samples_per_cell must be >= 1");
  const double rho = spec.rho();
  const double dN = static_cast<double>(N);
  const double RN = spec.R(dN);
  const double e = 1.0 + rho;
  auto U = [e](double u) { return std::pow(u, e) / e; };

  // Cell levels c_m = R(m)/R(N) and the crossings u*_m where |u|^rho = c_m.
  std::vector<double> c(N), ustar(N), Ustar(N);
  for (Index m = 0; m < N; ++m) {
    c[m] = spec.R(static_cast<double>(m)) / RN;
    ustar[m] = std::pow(c[m], 1.0 / rho);
    Ustar[m] = U(ustar[m]);
  }

  std::vector<double> Ub(N + 1);
  double best = 0.0;
  const int S = opts.y_samples_per_cell;
  for (Index j = 0; j < N; ++j) {
    for (int s = 0; s < S; ++s) {
      const double y = (static_cast<double>(j) + (s + 0.5) / S) / dN;
      for (Index i = 0; i <= N; ++i) Ub[i] = U(std::abs(static_cast<double>(i) / dN - y));
      const double Uy = 0.0;
      double total = 0.0;
      for (Index i = 0; i < N; ++i) {
        const Index m = std::abs(i - j);
        const double lo = static_cast<double>(i) / dN;
        const double hi = static_cast<double>(i + 1) / dN;
        if (i == j) {
          // Cell containing y: two pieces in u = |x - y| starting from 0.
          total += abs_gap_integral(c[m], 0.0, y - lo, Uy, Ub[i], ustar[m], Ustar[m]);
          total += abs_gap_integral(c[m], 0.0, hi - y, Uy, Ub[i + 1], ustar[m], Ustar[m]);
        } else if (i < j) {
          total += abs_gap_integral(c[m], y - hi, y - lo, Ub[i + 1], Ub[i], ustar[m], Ustar[m]);
        } else {
          total += abs_gap_integral(c[m], lo - y, hi - y, Ub[i], Ub[i + 1], ustar[m], Ustar[m]);
        }
      }
      best = std::max(best, total);
    }
  }
  return best;
}

double limit_operator_norm_bound(double rho) {
  check_rho(rho);
  return std::pow(2.0, -rho) / (1.0 + rho);
}

}  // namespace lmaxlab
