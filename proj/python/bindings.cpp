#include "spdgeom/airm.hpp"
#include "spdgeom/cli.hpp"
#include "spdgeom/error.hpp"
#include "spdgeom/frechet_mean.hpp"
#include "spdgeom/synthetic.hpp"
#include "spdgeom/tangent.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace spdgeom;

namespace {

SpdMatrix to_spd(const Matrix& m) { return spd_validate(SymMatrix::from_raw(m)); }

std::vector<SpdMatrix> to_spd_set(const std::vector<Matrix>& ms) {
  std::vector<SpdMatrix> out;
  out.reserve(ms.size());
  for (const Matrix& m : ms) out.push_back(to_spd(m));
  return out;
}

Embedding variant_of(const std::string& s) { return parse_embedding(s); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Affine-invariant geometry of SPD matrices";

  static py::exception<Error> error_type(m, "SpdGeomError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const std::string msg = std::string(to_string(e.kind())) + ": " + e.what();
      py::set_error(error_type, msg.c_str());
    }
  });

  m.def("spd_validate", [](const Matrix& a, bool repair) { return spd_validate(SymMatrix::from_raw(a), repair).mat(); },
        py::arg("a"), py::arg("repair") = false);
  m.def("airm_distance", [](const Matrix& a, const Matrix& b) { return airm_distance(to_spd(a), to_spd(b)); });
  m.def("geodesic", [](const Matrix& a, const Matrix& b, double t) { return geodesic(to_spd(a), to_spd(b), t).mat(); },
        py::arg("a"), py::arg("b"), py::arg("t"));
  m.def("log_map", [](const Matrix& base, const Matrix& b) { return log_map(BasePoint(to_spd(base)), to_spd(b)).mat(); });
  m.def("exp_map", [](const Matrix& base, const Matrix& t) {
    return exp_map(BasePoint(to_spd(base)), SymMatrix::from_raw(t)).mat();
  });
  m.def("log_map_whitened",
        [](const Matrix& base, const Matrix& b) { return log_map_whitened(BasePoint(to_spd(base)), to_spd(b)).mat(); });
  m.def("exp_map_whitened", [](const Matrix& base, const Matrix& w) {
    return exp_map_whitened(BasePoint(to_spd(base)), SymMatrix::from_raw(w)).mat();
  });
  m.def("matrix_log", [](const Matrix& a) { return matrix_log(to_spd(a)).mat(); });
  m.def("matrix_exp", [](const Matrix& s) { return matrix_exp(SymMatrix::from_raw(s)).mat(); });

  py::class_<MeanResult>(m, "MeanResult")
      .def_property_readonly("mean", [](const MeanResult& r) { return r.mean.mat(); })
      .def_readonly("iterations", &MeanResult::iterations)
      .def_readonly("final_grad_norm", &MeanResult::final_grad_norm)
      .def_readonly("scale", &MeanResult::scale)
      .def_readonly("converged", &MeanResult::converged)
      .def_readonly("objective_history", &MeanResult::objective_history);

  m.def(
      "karcher_mean",
      [](const std::vector<Matrix>& set, int max_iters, double grad_tol) {
        MeanConfig cfg;
        cfg.max_iters = max_iters;
        cfg.grad_tol = grad_tol;
        return karcher_mean(to_spd_set(set), cfg);
      },
      py::arg("matrices"), py::arg("max_iters") = 100, py::arg("grad_tol") = 1e-10);
  m.def("log_euclidean_mean", [](const std::vector<Matrix>& set) { return log_euclidean_mean(to_spd_set(set)).mat(); });
  m.def("euclidean_mean", [](const std::vector<Matrix>& set) { return euclidean_mean(to_spd_set(set)).mat(); });

  m.def("sym_vec", [](const Matrix& s) { return sym_vec(SymMatrix::from_raw(s)); });
  m.def("sym_unvec", [](const Vector& v, std::size_t n) { return sym_unvec(v, n).mat(); });

  m.def(
      "embed",
      [](const std::vector<Matrix>& set, std::optional<Matrix> base, const std::string& variant) {
        std::optional<SpdMatrix> b;
        if (base) b = to_spd(*base);
        const TangentDataset ds = embed(to_spd_set(set), {}, b, variant_of(variant));
        return py::make_tuple(ds.vectors, ds.base.point().mat());
      },
      py::arg("matrices"), py::arg("base") = py::none(), py::arg("variant") = "ambient",
      "Returns (vectors N x D, base point).");

  py::class_<PgaModel>(m, "PgaModel")
      .def_property_readonly("base", [](const PgaModel& p) { return p.base.point().mat(); })
      .def_readonly("center", &PgaModel::center)
      .def_readonly("axes", &PgaModel::axes)
      .def_readonly("explained_variance", &PgaModel::explained_variance)
      .def_property_readonly("variant", [](const PgaModel& p) { return std::string(to_string(p.variant)); })
      .def("project", [](const PgaModel& p, const Matrix& a) { return pga_project(p, to_spd(a)); })
      .def("reconstruct", [](const PgaModel& p, const Vector& s) { return pga_reconstruct(p, s).mat(); })
      .def("to_json", &pga_to_json)
      .def_static("from_json", [](const std::string& text) { return pga_from_json(text); });

  m.def(
      "pga_fit",
      [](const std::vector<Matrix>& set, std::size_t k, const std::string& variant) {
        return pga_fit(embed(to_spd_set(set), {}, std::nullopt, variant_of(variant)), k);
      },
      py::arg("matrices"), py::arg("k") = kDefaultComponents, py::arg("variant") = "ambient");

  m.def(
      "random_spd", [](std::size_t n, double lo, double hi, std::uint64_t seed) { return random_spd(n, lo, hi, seed).mat(); },
      py::arg("n"), py::arg("lo"), py::arg("hi"), py::arg("seed"));

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = cli::run(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs a CLI subcommand; returns (exit_code, stdout, stderr).");
}
