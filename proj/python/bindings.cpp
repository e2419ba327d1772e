#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "walkbounds/boundary.hpp"
#include "walkbounds/bounds.hpp"
#include "walkbounds/chebyshev.hpp"
#include "walkbounds/pipeline.hpp"
#include "walkbounds/special_functions.hpp"
#include "walkbounds/walk.hpp"

namespace py = pybind11;
using namespace walkbounds;

namespace {

Quantity as_quantity(const py::handle& h) {
  if (py::isinstance<py::tuple>(h)) {
    auto t = h.cast<py::tuple>();
    return Quantity::estimated(t[0].cast<double>(), t[1].cast<double>(), "python");
  }
  return Quantity::exact(h.cast<double>(), "python");
}

// Inputs: h, rho, ell, v as floats (exact) or (value, error) tuples
// (estimated); M2 and k as floats.
std::string check_bounds(const py::dict& inputs, bool symmetric) {
  BoundInputs in;
  in.symmetric = symmetric;
  for (auto [key, value] : inputs) {
    const auto k = key.cast<std::string>();
    if (k == "h") in.h = as_quantity(value);
    else if (k == "rho") in.rho = as_quantity(value);
    else if (k == "ell") in.ell = as_quantity(value);
    else if (k == "v") in.v = as_quantity(value);
    else if (k == "M2") in.moments[2.0] = as_quantity(value);
    else if (k == "k") in.support_radius = value.cast<double>();
    else throw InvalidInput("unknown bound input '" + k + "'");
  }
  const auto rep = evaluate_bounds(in);
  Json rows = Json::array();
  for (const auto& r : rep.rows) {
    rows.push_back(Json{{"name", r.name}, {"lhs", r.lhs}, {"rhs", r.rhs}, {"slack", r.slack},
                        {"sigma", r.sigma}, {"verdict", to_string(r.verdict)}, {"reason", r.reason}});
  }
  return rows.dump();
}

std::string run(const std::string& text, std::optional<std::uint64_t> seed,
                std::optional<std::vector<std::string>> stages) {
  RunOverrides ov;
  ov.seed = seed;
  if (stages) ov.stages = std::set<std::string>(stages->begin(), stages->end());
  ov.timestamp = false;
  const auto res = run_pipeline(parse_config(text), ov);
  return Json{{"report", res.report}, {"bounds_md", res.bounds_md}, {"series_csv", res.series_csv},
              {"exit_code", res.exit_code}}
      .dump();
}

}  // namespace

PYBIND11_MODULE(_walkbounds, m) {
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);

  m.def("F", &F);
  m.def("G", &G);
  m.def("FG_inv", &FG_inv);
  m.def("FG_inv_series", &FG_inv_series, py::arg("x"), py::arg("n"));
  m.def("fg_inv_coefficients", &fg_inv_coefficients);
  m.def("A_carne", &A_carne);
  m.def("A_ledr", &A_ledr);
  m.def("chebyshev_value", &chebyshev_value);
  m.def("chernov_tail_bound", &chernov_tail_bound);

  m.def("theorem1_bounds", [](double v, double M2) {
    const auto g = theorem1_bounds(v, M2);
    return py::dict(py::arg("ell_max") = g.ell_max, py::arg("h_max") = g.h_max,
                    py::arg("rho_min") = g.rho_min);
  });
  m.def("implied_lower_bounds", [](double rho_upper, double v) {
    const auto b = implied_lower_bounds(rho_upper, v);
    return py::dict(py::arg("h_min") = b.h_min, py::arg("ell_min") = b.ell_min);
  });
  m.def("_check_bounds", &check_bounds, py::arg("inputs"), py::arg("symmetric") = true);

  m.def("sphere_sizes", [](int rank, int radius) {
    return ball_census(Group(GroupSpec::free(rank)), radius).sphere_sizes;
  });
  m.def("free_group_estimates", [](int rank, int n) {
    const auto s = asymptotic_estimates(uniform_on_generators(Group(GroupSpec::free(rank))), n);
    return py::dict(py::arg("h") = s.h.value, py::arg("ell") = s.ell.value,
                    py::arg("rho") = s.rho.value);
  });
  m.def("free_group_hitting", [](int rank) {
    return solve_hitting_tree(uniform_on_generators(Group(GroupSpec::free(rank)))).syllable(0, 1);
  });
  m.def("boundary_entropy_free", &boundary_entropy_free);

  m.def("_run", &run, py::arg("config_text"), py::arg("seed") = py::none(),
        py::arg("stages") = py::none());
}
