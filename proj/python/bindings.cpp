#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "oslab/bmv.hpp"
#include "oslab/derivatives.hpp"
#include "oslab/error.hpp"
#include "oslab/experiment.hpp"
#include "oslab/moi.hpp"
#include "oslab/ssf.hpp"
#include "oslab/truncation.hpp"

namespace py = pybind11;
using namespace oslab;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const Array& a) {
  if (a.ndim() != 2) throw InvalidArgument("expected a 2-D array");
  Matrix m(a.shape(0), a.shape(1));
  auto r = a.unchecked<2>();
  for (py::ssize_t i = 0; i < a.shape(0); ++i)
    for (py::ssize_t j = 0; j < a.shape(1); ++j) m(i, j) = r(i, j);
  return m;
}

SymmetricOperator to_operator(const Array& a) { return SymmetricOperator(to_matrix(a)); }

Array to_array(const Matrix& m) {
  Array out({m.rows(), m.cols()});
  auto w = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) w(i, j) = m(i, j);
  return out;
}

// Functions come in as {"name": ..., "params": {...}} dicts or bare names.
SmoothFunction to_function(const py::object& spec) {
  if (py::isinstance<py::str>(spec)) return builtin(spec.cast<std::string>());
  const auto json_text = py::module_::import("json").attr("dumps")(spec).cast<std::string>();
  return builtin_from_spec(nlohmann::json::parse(json_text));
}

py::dict fit_to_dict(const FitResult& fit) {
  py::list atoms;
  for (const auto& a : fit.pair.atoms) atoms.append(py::make_tuple(a.s, a.w));
  py::dict d;
  d["b"] = fit.pair.b;
  d["sign"] = fit.pair.sign;
  d["atoms"] = atoms;
  d["residual_rel"] = fit.residual_rel;
  d["cell_log_width"] = fit.cell_log_width;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "oslab native core";

  static py::exception<Error> base(m, "OslabError");
  static py::exception<DomainError> domain(m, "DomainError", base.ptr());
  static py::exception<ConvergenceError> convergence(m, "ConvergenceError", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const DomainError& e) {
      py::set_error(domain, e.what());
    } catch (const ConvergenceError& e) {
      py::set_error(convergence, e.what());
    } catch (const InvalidArgument& e) {
      py::set_error(PyExc_ValueError, e.what());
    } catch (const Error& e) {
      py::set_error(base, e.what());
    }
  });

  m.def(
      "eigh",
      [](const Array& a) {
        const auto sys = eigendecompose(to_matrix(a));
        return py::make_tuple(sys.values, to_array(sys.vectors));
      },
      py::arg("a"), "Ascending eigenvalues and orthonormal eigenvectors (columns).");

  m.def(
      "operator_derivative",
      [](const py::object& f, const Array& h, const Array& v, int k, double s) {
        return to_array(operator_derivative(to_function(f), to_operator(h), to_operator(v), k, s));
      },
      py::arg("f"), py::arg("h"), py::arg("v"), py::arg("k"), py::arg("s") = 0.0);

  m.def(
      "derivative_trace",
      [](const py::object& f, const Array& h, const Array& v, int n, double s) {
        return derivative_trace(to_function(f), to_operator(h), to_operator(v), n, s);
      },
      py::arg("f"), py::arg("h"), py::arg("v"), py::arg("n"), py::arg("s") = 0.0);

  m.def(
      "moi_trace",
      [](const py::object& f, const std::vector<Array>& bases, const std::vector<Array>& perts) {
        MoiProblem p;
        p.symbol = to_function(f);
        for (const auto& b : bases) p.bases.push_back(to_operator(b));
        for (const auto& v : perts) p.perturbations.push_back(to_matrix(v));
        return moi_trace(p);
      },
      py::arg("f"), py::arg("bases"), py::arg("perturbations"));

  m.def(
      "taylor_remainder_trace",
      [](const py::object& f, const Array& h, const Array& v, int n) {
        return taylor_remainder_direct_trace(to_function(f), to_operator(h), to_operator(v), n);
      },
      py::arg("f"), py::arg("h"), py::arg("v"), py::arg("n"));

  m.def(
      "ssf_cdf", [](const Array& h, const Array& v, int n, double lambda) {
        return ssf_cdf(to_operator(h), to_operator(v), n, lambda);
      },
      py::arg("h"), py::arg("v"), py::arg("n"), py::arg("lam"));

  m.def(
      "ssf_density",
      [](const Array& h, const Array& v, int n, int grid_size) {
        const auto est = ssf_density(to_operator(h), to_operator(v), n, grid_size);
        py::dict d;
        d["grid"] = est.grid;
        d["cdf"] = est.cdf;
        d["density"] = est.density;
        d["hull"] = py::make_tuple(est.hull.lo, est.hull.hi);
        d["verdict"] = to_string(est.verdict);
        d["mass"] = ssf_mass(est);
        return d;
      },
      py::arg("h"), py::arg("v"), py::arg("n"), py::arg("grid_size") = 400);

  m.def(
      "ssf_moments",
      [](const Array& h, const Array& v, int n, int m_max) {
        return ssf_moments(to_operator(h), to_operator(v), n, m_max);
      },
      py::arg("h"), py::arg("v"), py::arg("n"), py::arg("m_max"));

  m.def(
      "phi_samples",
      [](const py::object& f, const Array& h, const Array& v, const std::vector<double>& t) {
        return phi_samples(to_function(f), to_operator(h), to_operator(v), t);
      },
      py::arg("f"), py::arg("h"), py::arg("v"), py::arg("t"));

  m.def(
      "bernstein_fit",
      [](const std::vector<double>& t, const std::vector<double>& y) { return fit_to_dict(bernstein_fit(t, y)); },
      py::arg("t"), py::arg("samples"));

  m.def(
      "cm_fit",
      [](const std::vector<double>& t, const std::vector<double>& y, int sign) {
        return fit_to_dict(cm_fit(t, y, sign));
      },
      py::arg("t"), py::arg("samples"), py::arg("sign") = 1);

  m.def(
      "truncation_study",
      [](int n, const std::vector<int>& p_list, double gamma, double rho, const std::string& kernel, int grid_size,
         int jobs) {
        DiagonalModel model;
        model.gamma = gamma;
        model.rho = rho;
        model.kernel = kernel_from_string(kernel);
        model.validate();
        const auto s = ssf_convergence_study(model, n, p_list, grid_size, jobs);
        py::list rows;
        for (const auto& r : s.rows) rows.append(py::make_tuple(r.p, r.l1_error, r.psi_min, r.bound_rhs));
        py::dict d;
        d["rows"] = rows;
        d["mass"] = s.mass;
        d["decreasing"] = s.decreasing;
        d["small_enough"] = s.small_enough;
        return d;
      },
      py::arg("n"), py::arg("p_list"), py::arg("gamma") = 1.0, py::arg("rho") = 0.5,
      py::arg("kernel") = "decaying_factor", py::arg("grid_size") = 2000, py::arg("jobs") = 1);

  m.def(
      "run_config",
      [](const std::string& config_json, const std::filesystem::path& out_dir, int jobs) {
        RunOptions o;
        o.out_dir = out_dir;
        o.jobs = jobs;
        std::filesystem::create_directories(out_dir);
        std::ostringstream err;
        const int code = run(nlohmann::json::parse(config_json), o, err);
        return py::make_tuple(code, err.str());
      },
      py::arg("config_json"), py::arg("out_dir"), py::arg("jobs") = 1,
      "Runs a JSON config; returns (exit_code, messages).");
}
