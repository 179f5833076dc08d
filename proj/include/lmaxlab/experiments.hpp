#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lmaxlab/covariance_models.hpp"
#include "lmaxlab/sampling.hpp"

namespace lmaxlab {

/// n = floor(num * N / den).
struct NRule {
  Index num = 5;
  Index den = 4;

  Index n_for(Index N) const { return (num * N) / den; }
};

struct ExperimentConfig {
  PopulationModel population;
  EntryLaw law = EntryLaw::real_gaussian;
  std::vector<Index> N_ladder;  // empty: the population's own dimension
  NRule n_rule{};
  Index replicates = 1;
  std::uint64_t seed = 1;
  bool diagonalize_population = false;
  int histogram_bins = 0;  // 0: Freedman-Diaconis

  std::vector<Index> ladder() const;
  void validate() const;
};

struct RunOptions {
  int workers = 1;
  std::optional<std::filesystem::path> dump_dir;  // SPLM dumps of replicate 0
  std::function<void(const std::string&)> log;    // one line per ladder step
};

/// Runs body(i) for i in [0, count) on `workers` threads. Exceptions are
/// rethrown from the lowest failing index.
void parallel_for(Index count, int workers, const std::function<void(Index)>& body);

struct ConvergenceRow {
  Index N = 0;
  Index n = 0;
  Index replicate = 0;
  double lambda_max_S = 0.0;
  double lambda_max_gamma = 0.0;
  double ratio = 0.0;
};

/// One row per (N, replicate). Replicate r uses the same infinite entry array
/// at every N, so ladder steps are paired.
std::vector<ConvergenceRow> run_convergence(const ExperimentConfig& cfg, const RunOptions& opts = {});

/// Record with beta_N and F_N = sqrt(n) (lambda_max_S / lambda_1 - 1 - beta_N).
FluctuationRecord compute_F_N(double lambda_max_S, const SpectralDecomposition& population, Index n);

struct HistogramSummary {
  std::vector<double> bin_edges;
  std::vector<Index> counts;
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  std::optional<double> ks_to_normal;
  Index count = 0;

  nlohmann::json to_json() const;
};

/// sup_x |F_emp(x) - Phi(x / sigma)|.
double ks_to_normal(std::span<const double> samples, double sigma2);

HistogramSummary summarize(std::span<const double> samples, double sigma2, int bins = 0);

struct FluctuationRun {
  std::vector<FluctuationRecord> records;
  HistogramSummary summary;
  double sigma2 = 0.0;
  double population_gap_ratio = 0.0;
  double beta_N = 0.0;
  double lambda_max_gamma = 0.0;
  Index N = 0;
  Index n = 0;
  std::vector<std::string> warnings;
};

/// Assumption violations (gap, structure) are reported in `warnings`.
FluctuationRun run_fluctuations(const ExperimentConfig& cfg, const RunOptions& opts = {});

// Output writers; floats use 17 significant digits.
std::string format_double(double v);
void write_convergence_csv(std::ostream& os, std::span<const ConvergenceRow> rows);
void write_fluctuations_csv(std::ostream& os, std::span<const FluctuationRecord> records);

}  // namespace lmaxlab
