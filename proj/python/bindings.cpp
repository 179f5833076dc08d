#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "lmaxlab/cli.hpp"
#include "lmaxlab/mp_theory.hpp"
#include "lmaxlab/spectral_analysis.hpp"

namespace py = pybind11;
using namespace lmaxlab;

namespace {

py::object to_python(const DenseMatrix& m) {
  return std::visit([](const auto& a) { return py::cast(a); }, m);
}

py::object json_to_python(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

HermitianMatrix hermitian_from(const ComplexMatrix& m) {
  if (m.imag().isZero(0.0)) return HermitianMatrix::checked(RealMatrix(m.real()));
  return HermitianMatrix::checked(m);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Largest-eigenvalue experiments for sample covariance matrices";
  m.attr("__version__") = kCodeVersion;

  auto base = py::register_exception<Error>(m, "LmaxlabError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<ConvergenceError>(m, "ConvergenceError", base.ptr());

  m.def("fourth_moment", [](const std::string& law) { return fourth_moment(parse_entry_law(law)); }, py::arg("law"));
  m.def("sigma_squared", [](const std::string& law) { return sigma_squared(parse_entry_law(law)); }, py::arg("law"));

  m.def(
      "draw_entries",
      [](const std::string& law, Index N, Index n, std::uint64_t seed, std::uint64_t replicate) {
        return to_python(draw_entries(parse_entry_law(law), {N, n, seed, replicate}));
      },
      py::arg("law"), py::arg("N"), py::arg("n"), py::arg("seed"), py::arg("replicate") = 0,
      "N x n matrix of standardized i.i.d. entries.");

  m.def(
      "toeplitz_population",
      [](Index N, double d, double theta) {
        return to_python(build_population(ToeplitzModel{{d, {}, theta}, N}).data());
      },
      py::arg("N"), py::arg("d") = 0.125, py::arg("theta") = 0.0);

  m.def(
      "autocovariance", [](std::int64_t h, double d) { return autocovariance({d, {}, 0.0}, h).real(); },
      py::arg("h"), py::arg("d") = 0.125);

  m.def(
      "sample_covariance",
      [](const ComplexMatrix& gamma, const ComplexMatrix& Z) {
        const HermitianMatrix root = decompose(hermitian_from(gamma)).sqrt();
        const DenseMatrix z = Z.imag().isZero(0.0) ? DenseMatrix(RealMatrix(Z.real())) : DenseMatrix(Z);
        return to_python(sample_covariance(root, z).data());
      },
      py::arg("gamma"), py::arg("Z"));

  m.def(
      "largest_eigenvalue", [](const ComplexMatrix& a) { return largest_eigenvalue(hermitian_from(a)); },
      py::arg("a"));

  m.def(
      "beta_N", [](const std::vector<double>& eigs, Index n) { return beta_N(eigs, n); }, py::arg("eigenvalues"),
      py::arg("n"));
  m.def(
      "theta_N", [](const std::vector<double>& eigs, Index n) { return theta_N(eigs, n); },
      py::arg("normalized_eigenvalues"), py::arg("n"));

  m.def(
      "mp_edges",
      [](double r) {
        const MPParams p{r};
        p.validate();
        return std::make_pair(p.lower_edge(), p.upper_edge());
      },
      py::arg("r"));

  m.def(
      "solve_fixed_point",
      [](const std::vector<double>& locations, const std::vector<double>& weights, double r, Complex z) {
        if (locations.size() != weights.size()) throw ConfigError("locations and weights differ in length");
        std::vector<Atom> atoms;
        for (std::size_t i = 0; i < locations.size(); ++i) atoms.push_back({locations[i], weights[i]});
        return solve_fixed_point(DiscreteMeasure(atoms), r, z).m;
      },
      py::arg("locations"), py::arg("weights"), py::arg("r"), py::arg("z"),
      "Companion Stieltjes transform m(z) for population measure nu.");

  m.def(
      "support_right_edge", [](const std::vector<double>& eigs, double r) { return support_right_edge(eigs, r).x; },
      py::arg("eigenvalues"), py::arg("r"));
  m.def(
      "support_complement",
      [](const std::vector<double>& eigs, double r, double x) {
        const auto w = support_complement(eigs, r, x);
        return py::make_tuple(w.outside, w.witness ? py::cast(w.witness->y) : py::none());
      },
      py::arg("eigenvalues"), py::arg("r"), py::arg("x"), "(outside, witness y or None)");

  m.def(
      "widom_shampine_eigs",
      [](double d, Index N, int k) { return widom_shampine_eigs(KernelSpec{{d, {}, 0.0}}, N, k); }, py::arg("d"),
      py::arg("N"), py::arg("k") = 2);
  m.def(
      "gap_ratio_estimate",
      [](double rho, std::vector<Index> grids, int k) {
        return json_to_python(gap_ratio_estimate(rho, std::move(grids), k).to_json());
      },
      py::arg("rho"), py::arg("grids") = std::vector<Index>{256, 512, 1024, 2048}, py::arg("k") = 2);

  m.def(
      "ks_to_normal", [](const std::vector<double>& x, double sigma2) { return ks_to_normal(x, sigma2); },
      py::arg("samples"), py::arg("sigma2"));

  m.def(
      "run",
      [](const std::string& command, std::optional<std::filesystem::path> config, std::vector<std::string> overrides,
         std::filesystem::path out_dir, int workers, std::optional<std::uint64_t> seed) {
        Invocation inv;
        inv.command = parse_command(command);
        inv.config_path = std::move(config);
        inv.overrides = std::move(overrides);
        inv.out_dir = std::move(out_dir);
        inv.workers = workers;
        inv.seed = seed;
        py::gil_scoped_release release;
        return static_cast<int>(run(inv));
      },
      py::arg("command"), py::arg("config") = py::none(), py::arg("overrides") = std::vector<std::string>{},
      py::arg("out_dir") = ".", py::arg("workers") = 1, py::arg("seed") = py::none(),
      "Runs a command-line command in process and returns its exit code.");
}
