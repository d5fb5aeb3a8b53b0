#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "wpmec/harness.hpp"
#include "wpmec/subproblem.hpp"

namespace py = pybind11;
using namespace wpmec;

namespace {

py::array_t<std::complex<double>> to_numpy(const HermitianMatrix& m) {
  const auto n = static_cast<py::ssize_t>(m.dim());
  py::array_t<std::complex<double>> out({n, n});
  auto v = out.mutable_unchecked<2>();
  for (py::ssize_t i = 0; i < n; ++i)
    for (py::ssize_t j = 0; j < n; ++j) v(i, j) = m(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  return out;
}

py::dict allocation_dict(const Allocation& a) {
  py::dict d;
  std::vector<double> harvested, residual;
  for (const auto& e : a.energy) harvested.push_back(e.harvested), residual.push_back(e.residual());
  d["objective"] = a.objective;
  d["time"] = a.time;
  d["offloaded"] = a.offloaded;
  d["frequency"] = a.frequency;
  d["harvested"] = harvested;
  d["residual"] = residual;
  d["covariance"] = to_numpy(a.covariance);
  return d;
}

SolveOptions options(double tol) {
  SolveOptions o;
  o.dual.tol = tol;
  return o;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Wireless powered multiuser MEC: joint offloading and energy beamforming";

  py::register_exception<InvalidParameters>(m, "InvalidParameters", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<InfeasibleProblem>(m, "InfeasibleProblem");

  py::class_<UserParams>(m, "UserParams")
      .def(py::init<>())
      .def_readwrite("task_bits", &UserParams::task_bits)
      .def_readwrite("cycles_per_bit", &UserParams::cycles_per_bit)
      .def_readwrite("capacitance", &UserParams::capacitance)
      .def_readwrite("circuit_power", &UserParams::circuit_power)
      .def_readwrite("max_frequency", &UserParams::max_frequency)
      .def_readwrite("distance", &UserParams::distance);

  py::class_<SystemParams>(m, "SystemParams")
      .def(py::init<>())
      .def_static("homogeneous", &SystemParams::homogeneous, py::arg("num_users"), py::arg("block_length") = 0.5,
                  py::arg("task_bits") = 1e4)
      .def_readwrite("antennas", &SystemParams::antennas)
      .def_readwrite("block_length", &SystemParams::block_length)
      .def_readwrite("bandwidth", &SystemParams::bandwidth)
      .def_readwrite("noise_power", &SystemParams::noise_power)
      .def_readwrite("eh_efficiency", &SystemParams::eh_efficiency)
      .def_readwrite("energy_per_bit", &SystemParams::energy_per_bit)
      .def_readwrite("users", &SystemParams::users)
      .def_property_readonly("num_users", &SystemParams::num_users)
      .def("validate", &SystemParams::validate);

  m.def("scheme_ids", [] {
    std::vector<std::string> ids;
    for (auto s : kSchemeIds) ids.emplace_back(s);
    return ids;
  });

  m.def(
      "solve",
      [](const SystemParams& p, std::uint64_t seed, std::size_t realization, double tol) {
        const auto ch = gen_channels(realization_seed(seed, realization), p);
        const auto rep = solve_joint(p, ch, options(tol));
        auto d = allocation_dict(rep.allocation);
        d["dual_value"] = rep.dual_value;
        d["relative_gap"] = rep.relative_gap;
        d["status"] = std::string(to_string(rep.status));
        d["lambda"] = rep.dual.point.lambda;
        d["mu"] = rep.dual.point.mu;
        d["iterations"] = rep.dual.iterations;
        d["max_kkt_product"] = rep.kkt.max_product();
        return d;
      },
      py::arg("params"), py::arg("seed") = 1, py::arg("realization") = 0, py::arg("tol") = 1e-10,
      "Joint design on one seeded channel realization.");

  m.def(
      "run_scheme",
      [](const std::string& id, const SystemParams& p, std::uint64_t seed, std::size_t realization, double tol) {
        const auto ch = gen_channels(realization_seed(seed, realization), p);
        const auto r = run_scheme(id, p, ch, options(tol));
        auto d = r.feasible ? allocation_dict(r.allocation) : py::dict();
        d["scheme"] = r.scheme;
        d["objective"] = r.objective;
        d["feasible"] = r.feasible;
        d["status"] = std::string(to_string(r.status));
        d["dual_value"] = r.dual_value;
        return d;
      },
      py::arg("scheme"), py::arg("params"), py::arg("seed") = 1, py::arg("realization") = 0, py::arg("tol") = 1e-10);

  m.def(
      "sweep",
      [](const std::string& config_text) {
        std::istringstream in(config_text);
        const auto cfg = parse_config(in);
        std::ostringstream csv, summary;
        SweepOutcome out;
        {
          py::gil_scoped_release release;
          out = run_sweep(cfg, csv, &summary);
        }
        py::dict d;
        d["csv"] = csv.str();
        d["summary_csv"] = summary.str();
        d["dominance_violations"] = out.dominance_violations;
        d["flagged"] = out.flagged;
        return d;
      },
      py::arg("config_text"), "Runs a sweep from config text; returns the CSV payloads.");

  m.def(
      "oracle_check",
      [](std::size_t instances, std::uint64_t seed) {
        py::list rows;
        for (const auto& c : oracle_cross_check(instances, seed)) {
          py::dict d;
          d["antennas"] = c.params.antennas;
          d["joint"] = c.joint;
          d["oracle"] = c.oracle;
          d["relative"] = c.relative;
          rows.append(d);
        }
        return rows;
      },
      py::arg("instances") = 20, py::arg("seed") = 1);

  m.def(
      "selftest",
      [](std::uint64_t seed) {
        std::ostringstream log;
        const bool ok = run_selftest(log, seed);
        return py::make_tuple(ok, log.str());
      },
      py::arg("seed") = 1);

  m.def("lambert_w0", &lambert_w0, py::arg("x"));
  m.def("beta", &beta, py::arg("rate"), py::arg("noise_power"), py::arg("bandwidth"));
  m.def("inverse_beta_gap", &inverse_beta_gap, py::arg("y"), py::arg("noise_power"), py::arg("bandwidth"));
}
