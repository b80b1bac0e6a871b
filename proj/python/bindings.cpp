#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "nsfp/harness.hpp"
#include "nsfp/parallel.hpp"

namespace py = pybind11;
using namespace nsfp;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

// (n, n) array indexed [j, i] <-> flat j * n + i
ScalarField from_array(const Array& a, int& n)
{
  if (a.ndim() != 2 || a.shape(0) != a.shape(1))
    throw Error("expected a square 2D array");
  n = static_cast<int>(a.shape(0));
  return ScalarField(a.data(), a.data() + a.size());
}

Array to_array(const ScalarField& f, int n)
{
  Array a({n, n});
  std::copy(f.begin(), f.end(), a.mutable_data());
  return a;
}

} // namespace

PYBIND11_MODULE(_core, m)
{
  m.doc() = "Compressible Navier-Stokes / FENE Fokker-Planck solver";
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);

  py::class_<Params>(m, "Params")
      .def(py::init<>())
      .def_readwrite("epsilon", &Params::epsilon)
      .def_readwrite("gamma", &Params::gamma)
      .def_readwrite("c_p", &Params::c_p)
      .def_readwrite("mu_s", &Params::mu_s)
      .def_readwrite("mu_b", &Params::mu_b)
      .def_readwrite("beta_comp", &Params::beta_comp)
      .def_readwrite("delta", &Params::delta)
      .def_readwrite("xi_bar", &Params::xi_bar)
      .def_readwrite("rho_bar", &Params::rho_bar)
      .def_readwrite("K", &Params::K)
      .def_readwrite("b", &Params::b)
      .def_readwrite("A", &Params::A)
      .def_readwrite("dim", &Params::dim_x)
      .def("pressure_derivative", &Params::pressure_derivative);

  m.def("validate", [](const Params& p) { return validate(p).violations; },
        "List of violated constraints; empty when the parameters are admissible.");
  m.def("rouse_min_eigenvalue", &rouse_min_eigenvalue);
  m.def("fene_eval", [](double s, double b) {
    const auto v = fene_eval(s, b);
    return py::make_tuple(v.U, v.dU);
  });
  m.def(
      "maxwellian",
      [](double b, int nr, int ntheta) {
        const SpringPotential pot{b};
        const Maxwellian mx = build_maxwellian(pot, QGrid(nr, ntheta, pot.radius()));
        py::dict d;
        d["Z"] = mx.Z;
        d["mass"] = mx.mass();
        d["r"] = mx.grid.r;
        d["M"] = mx.node;
        return d;
      },
      py::arg("b"), py::arg("nr") = 24, py::arg("ntheta") = 16);
  m.def("pressure_potential", py::overload_cast<double, const Params&>(&pressure_potential));

  m.def(
      "helmholtz_project",
      [](const Array& vx, const Array& vy) {
        int n = 0, n2 = 0;
        VectorField v;
        v.x = from_array(vx, n);
        v.y = from_array(vy, n2);
        if (n != n2)
          throw Error("component shapes differ");
        const Grid2D g(n);
        const Projection p = helmholtz_project(v, SpectralBasis(g, 0));
        return py::make_tuple(to_array(p.H.x, n), to_array(p.H.y, n), to_array(p.phi, n));
      },
      "Returns (Hx, Hy, phi) of a cell-centred field on the unit square.");
  m.def("divergence", [](const Array& vx, const Array& vy) {
    int n = 0;
    VectorField v;
    v.x = from_array(vx, n);
    v.y = from_array(vy, n);
    return to_array(div_c(Grid2D(n), v), n);
  });
  m.def("fit_frequency", &fit_frequency);

  py::class_<RunConfig>(m, "RunConfig")
      .def_readwrite("params", &RunConfig::params)
      .def_readwrite("nx", &RunConfig::nx)
      .def_readwrite("q_radial", &RunConfig::q_radial)
      .def_readwrite("q_angular", &RunConfig::q_angular)
      .def_readwrite("final_time", &RunConfig::final_time)
      .def_readwrite("samples", &RunConfig::samples)
      .def_readwrite("epsilon_list", &RunConfig::epsilon_list)
      .def_readwrite("output_dir", &RunConfig::output_dir)
      .def("echo", &RunConfig::echo);
  m.def("parse_config_string", &parse_config_string);
  m.def("parse_config", &parse_config);

  m.def(
      "simulate",
      [](const RunConfig& cfg, double eps, const std::string& out_dir) {
        RunResult r;
        {
          py::gil_scoped_release release;
          r = run_simulation(cfg, eps, nullptr, out_dir, "eps" + format_epsilon(eps));
        }
        py::dict d;
        d["ok"] = r.ok;
        d["reason"] = r.reason;
        d["sup_rho_dev"] = r.sup_rho_dev;
        d["div_l2l2"] = r.div_l2l2;
        d["omega_fit"] = r.omega_fit;
        d["omega_theory"] = r.omega_theory;
        d["energy_monitor"] = r.energy_monitor;
        d["mass_drift"] = r.mass_drift;
        d["psi_mass_drift"] = r.psi_mass_drift;
        d["steps"] = r.steps;
        std::vector<double> t, e, D;
        for (const auto& s : r.ledger.samples) {
          t.push_back(s.t);
          e.push_back(s.energy());
          D.push_back(s.cumulative);
        }
        d["t"] = t;
        d["energy"] = e;
        d["cumulative_dissipation"] = D;
        return d;
      },
      py::arg("config"), py::arg("epsilon"), py::arg("output_dir") = "");
  m.def("verify", [](const RunConfig& cfg) {
    std::vector<py::tuple> out;
    for (const auto& c : run_verify(cfg))
      out.push_back(py::make_tuple(c.name, c.value, c.limit, c.pass));
    return out;
  });
  m.def("set_threads", &set_threads);
}
