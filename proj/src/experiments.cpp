#include "lmaxlab/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <numeric>
#include <ostream>
#include <thread>

#include "lmaxlab/mp_theory.hpp"
#include "lmaxlab/spectral_analysis.hpp"

namespace lmaxlab {

namespace {

constexpr double kGapMargin = 0.05;
constexpr int kMaxBins = 1000;

bool is_diagonal(const HermitianMatrix& m) {
  return m.visit([](const auto& a) {
    for (Index j = 0; j < a.cols(); ++j)
      for (Index i = 0; i < a.rows(); ++i)
        if (i != j && a(i, j) != 0.0) return false;
    return true;
  });
}

struct Prepared {
  HermitianMatrix gamma;
  SpectralDecomposition dec;
  PopulationRoot root;
  bool diagonal = false;
};

Prepared prepare(const ExperimentConfig& cfg, Index N) {
  const PopulationModel model = N == dimension(cfg.population) ? cfg.population : with_dimension(cfg.population, N);
  Prepared p;
  p.gamma = build_population(model);
  if (is_diagonal(p.gamma)) {
    // No eigensolver needed: sort the diagonal, eigenvectors are a permutation.
    const RealVector diag = p.gamma.visit([](const auto& a) -> RealVector { return a.diagonal().real(); });
    std::vector<Index> order(static_cast<std::size_t>(N));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return diag(a) > diag(b); });
    p.dec.eigenvalues.resize(N);
    RealMatrix perm = RealMatrix::Zero(N, N);
    for (Index k = 0; k < N; ++k) {
      p.dec.eigenvalues(k) = diag(order[k]);
      perm(order[k], k) = 1.0;
    }
    if (p.dec.eigenvalues(N - 1) < 0.0) throw DomainError("diagonal population has a negative entry");
    p.dec.eigenvectors = std::move(perm);
    p.diagonal = true;
    p.root = PopulationRoot::diagonal(cfg.diagonalize_population ? p.dec.eigenvalues : diag);
    return p;
  }
  p.dec = decompose(p.gamma);
  p.diagonal = cfg.diagonalize_population;
  p.root = cfg.diagonalize_population ? PopulationRoot::diagonal(p.dec.eigenvalues) : PopulationRoot::dense(p.dec);
  return p;
}

void dump_replicate(const std::filesystem::path& dir, Index N, const ExperimentConfig& cfg, const Prepared& prep,
                    const DenseMatrix& Z, const HermitianMatrix& S) {
  std::filesystem::create_directories(dir);
  const std::string tag = "N" + std::to_string(N);
  const DenseMatrix gamma =
      cfg.diagonalize_population ? DenseMatrix(RealMatrix(prep.dec.eigenvalues.asDiagonal())) : prep.gamma.data();
  write_splm(dir / ("gamma_" + tag + ".splm"), gamma);
  write_splm(dir / ("Z_" + tag + "_rep0.splm"), Z);
  write_splm(dir / ("S_" + tag + "_rep0.splm"), S.data());
}

double quantile_sorted(const std::vector<double>& s, double q) {
  const double pos = q * static_cast<double>(s.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, s.size() - 1);
  return s[lo] + (pos - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

}  // namespace

std::vector<Index> ExperimentConfig::ladder() const {
  if (N_ladder.empty()) return {dimension(population)};
  return N_ladder;
}

void ExperimentConfig::validate() const {
  if (replicates < 1) throw ConfigError("experiment.replicates must be >= 1");
  if (n_rule.num < 1 || n_rule.den < 1) throw ConfigError("experiment.n_rule must be a positive ratio");
  if (histogram_bins < 0) throw ConfigError("experiment.histogram_bins must be >= 0");
  for (Index N : ladder()) {
    if (N < 2) throw ConfigError("every N in the ladder must be >= 2, got " + std::to_string(N));
    if (n_rule.n_for(N) < 1) throw ConfigError("n rule gives n < 1 at N = " + std::to_string(N));
    if (N > 0xffffffffLL || n_rule.n_for(N) > 0xffffffffLL) throw ConfigError("N and n must fit in 32 bits");
    if (N != dimension(population)) (void)with_dimension(population, N);
  }
}

void parallel_for(Index count, int workers, const std::function<void(Index)>& body) {
  if (count <= 0) return;
  const Index threads = std::min<Index>(std::max(workers, 1), count);
  if (threads == 1) {
    for (Index i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
  std::atomic<Index> next{0};
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (;;) {
      if (failed.load()) return;
      const Index i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
        failed.store(true);
      }
    }
  };
  std::vector<std::thread> pool;
  for (Index t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  // Indices are claimed in order, so everything below a failure has run.
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::vector<ConvergenceRow> run_convergence(const ExperimentConfig& cfg, const RunOptions& opts) {
  cfg.validate();
  std::vector<ConvergenceRow> rows;
  for (Index N : cfg.ladder()) {
    const Index n = cfg.n_rule.n_for(N);
    const Prepared prep = prepare(cfg, N);
    const double lambda_gamma = prep.dec.eigenvalues(0);
    std::vector<ConvergenceRow> step(static_cast<std::size_t>(cfg.replicates));
    parallel_for(cfg.replicates, opts.workers, [&](Index r) {
      const SampleConfig sc{N, n, cfg.seed, static_cast<std::uint64_t>(r)};
      const DenseMatrix Z = draw_entries(cfg.law, sc);
      const HermitianMatrix S = sample_covariance(prep.root, Z);
      const double lmax = largest_eigenvalue(S);
      step[static_cast<std::size_t>(r)] = {N, n, r, lmax, lambda_gamma, lmax / lambda_gamma};
      if (r == 0 && opts.dump_dir) dump_replicate(*opts.dump_dir, N, cfg, prep, Z, S);
    });
    rows.insert(rows.end(), step.begin(), step.end());
    if (opts.log) {
      std::vector<double> ratios;
      for (const auto& row : step) ratios.push_back(row.ratio);
      std::sort(ratios.begin(), ratios.end());
      opts.log("N=" + std::to_string(N) + " n=" + std::to_string(n) + " replicates=" +
               std::to_string(cfg.replicates) + " median_ratio=" + format_double(quantile_sorted(ratios, 0.5)));
    }
  }
  return rows;
}

FluctuationRecord compute_F_N(double lambda_max_S, const SpectralDecomposition& population, Index n) {
  if (population.dim() < 2) throw DomainError("F_N needs N >= 2");
  const std::vector<double> eigs(population.eigenvalues.data(), population.eigenvalues.data() + population.dim());
  const double l1 = *std::max_element(eigs.begin(), eigs.end());
  FluctuationRecord rec;
  rec.lambda_max = lambda_max_S;
  rec.lambda_max_gamma = l1;
  rec.n = n;
  rec.beta_N = beta_N(eigs, n);
  std::vector<double> normalized(eigs.size());
  std::transform(eigs.begin(), eigs.end(), normalized.begin(), [l1](double v) { return v / l1; });
  rec.theta_N = theta_N(normalized, n);
  rec.F_N = std::sqrt(static_cast<double>(n)) * (lambda_max_S / l1 - 1.0 - rec.beta_N);
  return rec;
}

nlohmann::json HistogramSummary::to_json() const {
  nlohmann::json j;
  j["bin_edges"] = bin_edges;
  j["counts"] = counts;
  j["mean"] = mean;
  j["variance"] = variance;
  j["ks_to_normal"] = ks_to_normal ? nlohmann::json(*ks_to_normal) : nlohmann::json(nullptr);
  j["count"] = count;
  return j;
}

double ks_to_normal(std::span<const double> samples, double sigma2) {
  if (!(sigma2 > 0.0)) throw DomainError("ks_to_normal needs sigma^2 > 0");
  if (samples.size() < 2) throw DomainError("ks_to_normal needs at least 2 samples");
  std::vector<double> s(samples.begin(), samples.end());
  std::sort(s.begin(), s.end());
  const double sigma = std::sqrt(sigma2);
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double cdf = 0.5 * std::erfc(-s[i] / (sigma * std::sqrt(2.0)));
    d = std::max({d, static_cast<double>(i + 1) / n - cdf, cdf - static_cast<double>(i) / n});
  }
  return d;
}

HistogramSummary summarize(std::span<const double> samples, double sigma2, int bins) {
  if (samples.empty()) throw DomainError("summarize needs samples");
  if (bins < 0) throw DomainError("bin count must be >= 0");
  HistogramSummary h;
  h.count = static_cast<Index>(samples.size());
  double sum = 0.0;
  for (double v : samples) sum += v;
  h.mean = sum / static_cast<double>(h.count);
  double ss = 0.0;
  for (double v : samples) ss += (v - h.mean) * (v - h.mean);
  h.variance = h.count > 1 ? ss / static_cast<double>(h.count - 1) : 0.0;
  if (sigma2 > 0.0 && h.count >= 2) h.ks_to_normal = ks_to_normal(samples, sigma2);

  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  double lo = sorted.front();
  double hi = sorted.back();
  if (lo == hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  int nb = bins;
  if (nb == 0) {
    const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
    const double width = 2.0 * iqr / std::cbrt(static_cast<double>(h.count));
    nb = width > 0.0 ? static_cast<int>(std::ceil((hi - lo) / width)) : 1;
    nb = std::clamp(nb, 1, kMaxBins);
  }
  const double w = (hi - lo) / nb;
  for (int b = 0; b <= nb; ++b) h.bin_edges.push_back(b == nb ? hi : lo + b * w);
  h.counts.assign(static_cast<std::size_t>(nb), 0);
  for (double v : samples) {
    auto b = static_cast<Index>(std::floor((v - lo) / w));
    b = std::clamp<Index>(b, 0, nb - 1);
    ++h.counts[static_cast<std::size_t>(b)];
  }
  return h;
}

FluctuationRun run_fluctuations(const ExperimentConfig& cfg, const RunOptions& opts) {
  cfg.validate();
  const auto ladder = cfg.ladder();
  if (ladder.size() != 1) throw ConfigError("fluctuation runs take a single N");
  FluctuationRun run;
  run.N = ladder.front();
  run.n = cfg.n_rule.n_for(run.N);
  const Prepared prep = prepare(cfg, run.N);
  run.lambda_max_gamma = prep.dec.eigenvalues(0);
  run.population_gap_ratio = spectral_gap_ratio(prep.dec);
  run.sigma2 = sigma_squared(cfg.law);
  if (run.population_gap_ratio >= 1.0 - kGapMargin) {
    run.warnings.push_back("spectral gap ratio " + format_double(run.population_gap_ratio) +
                           " is within the margin of 1; the top eigenvalue is not isolated");
  }
  if (!prep.diagonal && !is_gaussian(cfg.law)) {
    run.warnings.push_back("non-diagonal population with non-Gaussian entries (" + std::string(to_string(cfg.law)) +
                           "); the N(0, sigma^2) limit is not covered here");
  }
  const FluctuationRecord centre = compute_F_N(run.lambda_max_gamma, prep.dec, run.n);
  run.beta_N = centre.beta_N;

  run.records.resize(static_cast<std::size_t>(cfg.replicates));
  parallel_for(cfg.replicates, opts.workers, [&](Index r) {
    const SampleConfig sc{run.N, run.n, cfg.seed, static_cast<std::uint64_t>(r)};
    const DenseMatrix Z = draw_entries(cfg.law, sc);
    const HermitianMatrix S = sample_covariance(prep.root, Z);
    FluctuationRecord rec = compute_F_N(largest_eigenvalue(S), prep.dec, run.n);
    rec.seed = cfg.seed;
    rec.replicate_index = static_cast<std::uint64_t>(r);
    run.records[static_cast<std::size_t>(r)] = rec;
    if (r == 0 && opts.dump_dir) dump_replicate(*opts.dump_dir, run.N, cfg, prep, Z, S);
  });
  std::vector<double> F;
  for (const auto& rec : run.records) F.push_back(rec.F_N);
  run.summary = summarize(F, run.sigma2, cfg.histogram_bins);
  if (opts.log) {
    opts.log("N=" + std::to_string(run.N) + " n=" + std::to_string(run.n) + " replicates=" +
             std::to_string(cfg.replicates) + " mean_F=" + format_double(run.summary.mean) +
             " var_F=" + format_double(run.summary.variance));
  }
  return run;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_convergence_csv(std::ostream& os, std::span<const ConvergenceRow> rows) {
  os << "N,n,replicate,lambda_max_S,lambda_max_gamma,ratio\n";
  for (const auto& r : rows) {
    os << r.N << ',' << r.n << ',' << r.replicate << ',' << format_double(r.lambda_max_S) << ','
       << format_double(r.lambda_max_gamma) << ',' << format_double(r.ratio) << '\n';
  }
}

void write_fluctuations_csv(std::ostream& os, std::span<const FluctuationRecord> records) {
  os << "replicate,lambda_max_S,beta_N,F_N\n";
  for (const auto& r : records) {
    os << r.replicate_index << ',' << format_double(r.lambda_max) << ',' << format_double(r.beta_N) << ','
       << format_double(r.F_N) << '\n';
  }
}

}  // namespace lmaxlab
