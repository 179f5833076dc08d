#include "lmaxlab/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "lmaxlab/mp_theory.hpp"
#include "lmaxlab/spectral_analysis.hpp"

namespace lmaxlab {

namespace {

using nlohmann::json;

json defaults() {
  return json{
      {"population",
       {{"kind", nullptr},
        {"N", 0},
        {"d", 0.125},
        {"slowly_varying", "constant"},
        {"L_c", 1.0},
        {"L_p", 0.0},
        {"theta", 0.0},
        {"spikes", json::array()},
        {"bulk", 1.0},
        {"matrix_path", ""},
        {"eigenvalues", json::array()}}},
      {"law", {{"kind", nullptr}}},
      {"experiment",
       {{"N_ladder", json::array()},
        {"n_num", 5},
        {"n_den", 4},
        {"replicates", 1},
        {"seed", 1},
        {"diagonalize_population", false},
        {"histogram_bins", 0}}},
      {"kernel", {{"rho", -0.75}, {"grids", {256, 512, 1024, 2048}}, {"k", 2}}},
      {"scan",
       {{"r", nullptr},
        {"x_min", 0.0},
        {"x_max", nullptr},
        {"x_points", 201},
        {"y_min", -5.0},
        {"y_max", 5.0},
        {"y_points", 401},
        {"z_re_min", 0.0},
        {"z_re_max", nullptr},
        {"z_re_points", 50},
        {"z_im", {1e-3, 1e-1}}}},
  };
}

void merge_table(json& target, const json& source, const std::string& where) {
  if (!source.is_object()) throw ConfigError("'" + where + "' must be a table");
  for (const auto& [key, value] : source.items()) {
    if (!target.contains(key)) throw ConfigError("unknown config key '" + where + "." + key + "'");
    target[key] = value;
  }
}

json parse_override_value(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error&) {
    return text;
  }
}

template <class T>
T get(const json& cfg, const std::string& table, const std::string& key) {
  const json& v = cfg.at(table).at(key);
  try {
    return v.get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("config key '" + table + "." + key + "' has the wrong type: " + v.dump());
  }
}

std::string required_string(const json& cfg, const std::string& table, const std::string& key) {
  if (cfg.at(table).at(key).is_null()) throw ConfigError("config key '" + table + "." + key + "' is required");
  return get<std::string>(cfg, table, key);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot write " + path.string());
  os << text;
}

template <class Writer>
void write_file(const std::filesystem::path& path, Writer&& writer) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot write " + path.string());
  writer(os);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

struct Outcome {
  json results = json::object();
  std::vector<std::string> warnings;
  ExitCode code = ExitCode::success;
};

RunOptions run_options(const Invocation& inv) {
  RunOptions opts;
  opts.workers = inv.workers;
  if (inv.dump_matrices) opts.dump_dir = inv.out_dir / "matrices";
  opts.log = [](const std::string& line) { std::cerr << line << '\n'; };
  return opts;
}

Outcome simulate_convergence(const json& cfg, const Invocation& inv) {
  const ExperimentConfig ec = experiment_from_json(cfg);
  const auto rows = run_convergence(ec, run_options(inv));
  write_file(inv.out_dir / "convergence.csv", [&](std::ostream& os) { write_convergence_csv(os, rows); });
  Outcome out;
  json steps = json::array();
  for (Index N : ec.ladder()) {
    std::vector<double> ratios;
    double lgamma = 0.0;
    for (const auto& r : rows) {
      if (r.N != N) continue;
      ratios.push_back(r.ratio);
      lgamma = r.lambda_max_gamma;
    }
    steps.push_back({{"N", N},
                     {"n", ec.n_rule.n_for(N)},
                     {"lambda_max_gamma", lgamma},
                     {"median_ratio", median(ratios)},
                     {"min_ratio", *std::min_element(ratios.begin(), ratios.end())},
                     {"max_ratio", *std::max_element(ratios.begin(), ratios.end())}});
  }
  out.results["ladder"] = steps;
  return out;
}

Outcome simulate_fluctuations(const json& cfg, const Invocation& inv) {
  const ExperimentConfig ec = experiment_from_json(cfg);
  const FluctuationRun run = run_fluctuations(ec, run_options(inv));
  write_file(inv.out_dir / "fluctuations.csv", [&](std::ostream& os) { write_fluctuations_csv(os, run.records); });
  Outcome out;
  out.results = {{"N", run.N},
                 {"n", run.n},
                 {"sigma2", run.sigma2},
                 {"beta_N", run.beta_N},
                 {"lambda_max_gamma", run.lambda_max_gamma},
                 {"population_gap_ratio", run.population_gap_ratio},
                 {"histogram", run.summary.to_json()}};
  out.warnings = run.warnings;
  return out;
}

Outcome toeplitz_spectrum(const json& cfg, const Invocation& inv) {
  const PopulationModel pop = population_from_json(cfg);
  const auto* tm = std::get_if<ToeplitzModel>(&pop);
  if (!tm) throw ConfigError("toeplitz-spectrum needs population.kind = toeplitz");
  std::vector<Index> ladder = get<std::vector<Index>>(cfg, "experiment", "N_ladder");
  if (ladder.empty()) ladder.push_back(tm->N);
  const KernelSpec ks{tm->spec};
  ks.validate();
  std::ostringstream csv;
  csv << "N,lambda_1,lambda_2,gap_ratio,a_1_N,a_2_N\n";
  json rows = json::array();
  for (Index N : ladder) {
    if (N < 2) throw ConfigError("toeplitz-spectrum needs every N >= 2");
    // Phase modulation is a unitary similarity, so the modulus symbol has the same spectrum.
    const auto a = widom_shampine_eigs(ks, N, 2);
    const double scale = static_cast<double>(N) * ks.R(static_cast<double>(N));
    csv << N << ',' << format_double(a[0] * scale) << ',' << format_double(a[1] * scale) << ','
        << format_double(a[1] / a[0]) << ',' << format_double(a[0]) << ',' << format_double(a[1]) << '\n';
    rows.push_back({{"N", N}, {"a_1_N", a[0]}, {"a_2_N", a[1]}, {"gap_ratio", a[1] / a[0]}});
    std::cerr << "N=" << N << " gap_ratio=" << format_double(a[1] / a[0]) << '\n';
  }
  write_text(inv.out_dir / "toeplitz_spectrum.csv", csv.str());
  Outcome out;
  out.results["ladder"] = rows;
  return out;
}

Outcome kernel_limit(const json& cfg, const Invocation& inv) {
  const double rho = get<double>(cfg, "kernel", "rho");
  const auto grids = get<std::vector<Index>>(cfg, "kernel", "grids");
  const int k = get<int>(cfg, "kernel", "k");
  if (!(rho > -1.0 && rho < 0.0)) throw ConfigError("kernel.rho must lie in (-1, 0)");
  if (k < 2) throw ConfigError("kernel.k must be >= 2");
  if (grids.empty()) throw ConfigError("kernel.grids must not be empty");
  for (Index g : grids)
    if (g < k) throw ConfigError("every kernel grid must be >= kernel.k");
  const KernelEigenEstimate est = gap_ratio_estimate(rho, grids, k);
  write_text(inv.out_dir / "kernel_limit.json", est.to_json().dump(2) + "\n");
  Outcome out;
  out.results = est.to_json();
  if (est.status != CertificationStatus::certified) out.code = ExitCode::inconclusive;
  return out;
}

Outcome support_scan(const json& cfg, const Invocation& inv) {
  const PopulationModel pop = population_from_json(cfg);
  const SpectralDecomposition dec = decompose(build_population(pop));
  const std::vector<double> eigs(dec.eigenvalues.begin(), dec.eigenvalues.end());
  const Index N = dec.dim();

  const json& scan = cfg.at("scan");
  double r = 0.0;
  if (scan.at("r").is_null()) {
    const Index n = (get<Index>(cfg, "experiment", "n_num") * N) / get<Index>(cfg, "experiment", "n_den");
    if (n < 1) throw ConfigError("n rule gives n < 1");
    r = static_cast<double>(N) / static_cast<double>(n);
  } else {
    r = get<double>(cfg, "scan", "r");
  }
  if (!(r > 0.0)) throw ConfigError("scan.r must be > 0");
  const double edge = support_right_edge(eigs, r).x;

  auto span_or = [&](const char* key, double fallback) {
    return scan.at(key).is_null() ? fallback : get<double>(cfg, "scan", key);
  };
  auto points = [&](const char* key) {
    const int p = get<int>(cfg, "scan", key);
    if (p < 2) throw ConfigError(std::string("scan.") + key + " must be >= 2");
    return p;
  };
  auto grid = [](double lo, double hi, int p, int i) { return lo + (hi - lo) * i / (p - 1); };

  const double x_min = get<double>(cfg, "scan", "x_min");
  const double x_max = span_or("x_max", 1.5 * edge);
  const int x_points = points("x_points");
  std::ostringstream comp;
  comp << "x,outside,witness_y\n";
  for (int i = 0; i < x_points; ++i) {
    const double x = grid(x_min, x_max, x_points, i);
    const auto w = support_complement(eigs, r, x);
    comp << format_double(x) << ',' << (w.outside ? "true" : "false") << ','
         << (w.witness ? format_double(w.witness->y) : "") << '\n';
  }
  write_text(inv.out_dir / "support_complement.csv", comp.str());

  const double y_min = get<double>(cfg, "scan", "y_min");
  const double y_max = get<double>(cfg, "scan", "y_max");
  const int y_points = points("y_points");
  std::ostringstream curve;
  curve << "y,x,x_prime\n";
  for (int i = 0; i < y_points; ++i) {
    const double y = grid(y_min, y_max, y_points, i);
    try {
      const SupportQuery q = x_of_y(eigs, r, y);
      curve << format_double(q.y) << ',' << format_double(q.x) << ',' << format_double(q.x_prime) << '\n';
    } catch (const DomainError&) {
      // y = 0 or a pole.
    }
  }
  write_text(inv.out_dir / "x_curve.csv", curve.str());

  const DiscreteMeasure nu = esd(dec);
  const double zr_min = get<double>(cfg, "scan", "z_re_min");
  const double zr_max = span_or("z_re_max", 1.5 * edge);
  const int zr_points = points("z_re_points");
  const auto z_im = get<std::vector<double>>(cfg, "scan", "z_im");
  std::ostringstream fp;
  fp << "re_z,im_z,re_m,im_m,residual,iterations\n";
  for (double im : z_im) {
    if (im == 0.0) throw ConfigError("scan.z_im entries must be nonzero");
    for (int i = 0; i < zr_points; ++i) {
      const Complex z(grid(zr_min, zr_max, zr_points, i), im);
      const FixedPointSolution s = solve_fixed_point(nu, r, z);
      fp << format_double(z.real()) << ',' << format_double(z.imag()) << ',' << format_double(s.m.real()) << ','
         << format_double(s.m.imag()) << ',' << format_double(s.residual) << ',' << s.iterations << '\n';
    }
  }
  write_text(inv.out_dir / "fixed_point.csv", fp.str());

  Outcome out;
  out.results = {{"N", N}, {"r", r}, {"right_edge", edge}, {"lambda_max_gamma", eigs.front()}};
  return out;
}

}  // namespace

std::string to_string(Command c) {
  switch (c) {
    case Command::simulate_convergence:
      return "simulate-convergence";
    case Command::simulate_fluctuations:
      return "simulate-fluctuations";
    case Command::toeplitz_spectrum:
      return "toeplitz-spectrum";
    case Command::kernel_limit:
      return "kernel-limit";
    case Command::support_scan:
      return "support-scan";
  }
  return "unknown";
}

Command parse_command(const std::string& name) {
  for (Command c : {Command::simulate_convergence, Command::simulate_fluctuations, Command::toeplitz_spectrum,
                    Command::kernel_limit, Command::support_scan}) {
    if (to_string(c) == name) return c;
  }
  throw ConfigError("unknown command '" + name + "'");
}

json resolve_config(const Invocation& inv) {
  json cfg = defaults();
  if (inv.config_path) {
    std::ifstream is(*inv.config_path);
    if (!is) throw ConfigError("cannot open config " + inv.config_path->string());
    json file;
    try {
      file = json::parse(is);
    } catch (const json::parse_error& e) {
      throw ConfigError("config " + inv.config_path->string() + " is not valid JSON: " + e.what());
    }
    if (!file.is_object()) throw ConfigError("config must be a JSON object");
    if (file.contains("config")) file = file.at("config");  // replay from summary.json
    for (const auto& [table, value] : file.items()) {
      if (!cfg.contains(table)) throw ConfigError("unknown config table '" + table + "'");
      merge_table(cfg[table], value, table);
    }
  }
  for (const auto& ov : inv.overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + ov + "' is not key=value");
    const std::string key = ov.substr(0, eq);
    const auto dot = key.find('.');
    if (dot == std::string::npos) throw ConfigError("override key '" + key + "' must be table.key");
    const std::string table = key.substr(0, dot);
    const std::string field = key.substr(dot + 1);
    if (!cfg.contains(table) || !cfg[table].contains(field)) throw ConfigError("unknown config key '" + key + "'");
    cfg[table][field] = parse_override_value(ov.substr(eq + 1));
  }
  if (inv.seed) cfg["experiment"]["seed"] = *inv.seed;
  return cfg;
}

PopulationModel population_from_json(const json& cfg) {
  const std::string kind = required_string(cfg, "population", "kind");
  const auto N = get<Index>(cfg, "population", "N");
  if (kind == "toeplitz") {
    AutocovarianceSpec spec;
    spec.d = get<double>(cfg, "population", "d");
    spec.theta = get<double>(cfg, "population", "theta");
    spec.L.family = parse_slowly_varying(get<std::string>(cfg, "population", "slowly_varying"));
    spec.L.c = get<double>(cfg, "population", "L_c");
    spec.L.p = get<double>(cfg, "population", "L_p");
    spec.validate();
    return ToeplitzModel{spec, N};
  }
  if (kind == "identity") {
    if (N < 1) throw ConfigError("identity population needs population.N >= 1");
    return DiagonalModel{std::vector<double>(static_cast<std::size_t>(N), 1.0)};
  }
  if (kind == "diagonal") {
    auto eigs = get<std::vector<double>>(cfg, "population", "eigenvalues");
    if (eigs.empty()) throw ConfigError("diagonal population needs population.eigenvalues");
    return DiagonalModel{std::move(eigs)};
  }
  if (kind == "spiked") {
    return SpikedModel{get<std::vector<double>>(cfg, "population", "spikes"), get<double>(cfg, "population", "bulk"),
                       N};
  }
  if (kind == "explicit") {
    const std::filesystem::path path = get<std::string>(cfg, "population", "matrix_path");
    if (path.empty()) throw ConfigError("explicit population needs population.matrix_path");
    try {
      return ExplicitModel{HermitianMatrix::checked(read_splm(path)), path};
    } catch (const DomainError& e) {
      throw ConfigError(std::string("population.matrix_path: ") + e.what());
    }
  }
  throw ConfigError("unknown population.kind '" + kind + "' (toeplitz | identity | diagonal | spiked | explicit)");
}

ExperimentConfig experiment_from_json(const json& cfg) {
  ExperimentConfig ec;
  ec.population = population_from_json(cfg);
  ec.law = parse_entry_law(required_string(cfg, "law", "kind"));
  ec.N_ladder = get<std::vector<Index>>(cfg, "experiment", "N_ladder");
  ec.n_rule = {get<Index>(cfg, "experiment", "n_num"), get<Index>(cfg, "experiment", "n_den")};
  ec.replicates = get<Index>(cfg, "experiment", "replicates");
  ec.seed = get<std::uint64_t>(cfg, "experiment", "seed");
  ec.diagonalize_population = get<bool>(cfg, "experiment", "diagonalize_population");
  ec.histogram_bins = get<int>(cfg, "experiment", "histogram_bins");
  ec.validate();
  return ec;
}

ExitCode run(const Invocation& inv) {
  json cfg;
  try {
    if (inv.workers < 1) throw ConfigError("--workers must be >= 1");
    cfg = resolve_config(inv);
    std::filesystem::create_directories(inv.out_dir);
  } catch (const Error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return ExitCode::config_error;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return ExitCode::config_error;
  }

  json summary{{"command", to_string(inv.command)},
               {"code_version", kCodeVersion},
               {"seed", cfg["experiment"]["seed"]},
               {"config", cfg}};
  ExitCode code = ExitCode::success;
  try {
    Outcome out;
    switch (inv.command) {
      case Command::simulate_convergence:
        out = simulate_convergence(cfg, inv);
        break;
      case Command::simulate_fluctuations:
        out = simulate_fluctuations(cfg, inv);
        break;
      case Command::toeplitz_spectrum:
        out = toeplitz_spectrum(cfg, inv);
        break;
      case Command::kernel_limit:
        out = kernel_limit(cfg, inv);
        break;
      case Command::support_scan:
        out = support_scan(cfg, inv);
        break;
    }
    summary["results"] = out.results;
    summary["warnings"] = out.warnings;
    for (const auto& w : out.warnings) std::cerr << "warning: " << w << '\n';
    code = out.code;
    summary["status"] = code == ExitCode::inconclusive ? "inconclusive" : "ok";
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    summary["status"] = "config_error";
    summary["error"] = e.what();
    code = ExitCode::config_error;
  } catch (const ConvergenceError& e) {
    std::cerr << "non-convergence: " << e.what() << '\n';
    summary["status"] = "nonconvergence";
    summary["error"] = e.what();
    code = ExitCode::nonconvergence;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    summary["status"] = "domain_error";
    summary["error"] = e.what();
    code = ExitCode::config_error;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    summary["status"] = "error";
    summary["error"] = e.what();
    code = ExitCode::failure;
  }
  try {
    write_text(inv.out_dir / "summary.json", summary.dump(2) + "\n");
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    if (code == ExitCode::success) code = ExitCode::failure;
  }
  return code;
}

}  // namespace lmaxlab
