#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "parkmc/errors.hpp"
#include "parkmc/estimators.hpp"
#include "parkmc/experiment.hpp"
#include "parkmc/kmc.hpp"
#include "parkmc/lattice.hpp"
#include "parkmc/models.hpp"
#include "parkmc/oracle.hpp"
#include "parkmc/splitting.hpp"

namespace py = pybind11;
using namespace parkmc;

namespace {

SpinConfiguration to_config(const std::vector<int>& spins) {
  std::vector<std::uint8_t> v(spins.begin(), spins.end());
  return SpinConfiguration(std::move(v));
}

std::vector<int> from_config(const SpinConfiguration& s) { return {s.spins().begin(), s.spins().end()}; }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Lattice KMC under operator splitting: sampling and exact entropy production";
  m.attr("__version__") = PARKMC_VERSION;

  static py::exception<Error> error(m, "ParkmcError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, (e.kind() + ": " + e.what()).c_str());
    }
  });

  py::class_<Lattice>(m, "Lattice")
      .def(py::init<int, int, int>(), py::arg("width"), py::arg("height"), py::arg("interaction_range") = 1)
      .def_property_readonly("width", &Lattice::width)
      .def_property_readonly("height", &Lattice::height)
      .def_property_readonly("size", &Lattice::size)
      .def("index", &Lattice::index)
      .def("coords", &Lattice::coords)
      .def("neighbors", [](const Lattice& l, int s) {
        auto n = l.neighbors(s);
        return std::vector<int>(n.begin(), n.end());
      });

  py::class_<Decomposition>(m, "Decomposition")
      .def_static("build",
                  [](const Lattice& l, const std::string& kind, int width) {
                    return Decomposition::build(l, decomposition_kind_from_string(kind), width);
                  },
                  py::arg("lattice"), py::arg("kind"), py::arg("width"))
      .def("group_of", &Decomposition::group_of)
      .def_property_readonly("width", &Decomposition::width)
      .def_property_readonly("boundary_sites", [](const Decomposition& d) {
        auto b = d.boundary_sites();
        return std::vector<int>(b.begin(), b.end());
      })
      .def("boundary_pairs", [](const Decomposition& d, int k) { return boundary_pairs(d, k); });

  py::class_<RateModel>(m, "RateModel")
      .def_static("adsorption_desorption",
                  [](const Lattice& l, double c1, double c2, double beta, double J0, double h) {
                    return RateModel::adsorption_desorption(l, {c1, c2, beta, J0, h});
                  },
                  py::arg("lattice"), py::arg("c1") = 1.0, py::arg("c2") = 1.0, py::arg("beta") = 2.0,
                  py::arg("J0") = 0.3, py::arg("h") = 0.9)
      .def_static("diffusion",
                  [](const Lattice& l, double hop) { return RateModel::diffusion(l, {hop}); },
                  py::arg("lattice"), py::arg("hop_rate") = 0.25)
      .def_property_readonly("move_count", &RateModel::move_count)
      .def("flip_rate",
           [](const RateModel& model, const std::vector<int>& spins, int site) {
             return model.rate(to_config(spins), Move{MoveKind::SpinFlip, site, -1});
           })
      .def("swap_rate", [](const RateModel& model, const std::vector<int>& spins, int x, int y) {
        return model.rate(to_config(spins), Move{MoveKind::Swap, x, y});
      });

  py::class_<DenseChain>(m, "DenseChain")
      .def_static("build", &DenseChain::build, py::arg("model"), py::arg("decomposition"),
                  py::arg("particles") = -1, py::arg("cap") = kDefaultStateCap)
      .def_property_readonly("size", &DenseChain::size)
      .def_property_readonly("L", [](const DenseChain& c) { return Matrix(c.L); })
      .def_property_readonly("L1", [](const DenseChain& c) { return Matrix(c.L1); })
      .def_property_readonly("L2", [](const DenseChain& c) { return Matrix(c.L2); })
      .def("code", [](const DenseChain& c, std::size_t i) { return c.states.code(i); });

  auto scheme_of = [](const std::string& kind, double dt) {
    return SchemeSpec{scheme_kind_from_string(kind), dt, false};
  };

  m.def("transition_exact", &transition_exact, py::arg("chain"), py::arg("dt"));
  m.def("transition_scheme",
        [=](const DenseChain& c, const std::string& kind, double dt) { return transition_scheme(c, scheme_of(kind, dt)); },
        py::arg("chain"), py::arg("scheme"), py::arg("dt"));
  m.def("commutator_matrix",
        [=](const DenseChain& c, const std::string& kind) { return Matrix(commutator_matrix(c, scheme_of(kind, 0.0))); },
        py::arg("chain"), py::arg("scheme"));
  m.def("stationary", &stationary, py::arg("P"));
  m.def("epr_exact", &epr_exact, py::arg("Pb"), py::arg("mu"), py::arg("dt"));
  m.def("rer_exact", &rer_exact, py::arg("Pb"), py::arg("Po"), py::arg("mu"), py::arg("dt"));
  m.def("discrepancy_exact", &discrepancy_exact, py::arg("Pb"), py::arg("Po"), py::arg("mu"), py::arg("dt"));
  m.def("ep_paths", &ep_paths, py::arg("Pb"), py::arg("mu"), py::arg("m"));
  m.def("epr_order_fit",
        [](const DenseChain& c, const std::string& kind, const std::vector<double>& grid) {
          OrderFit f = epr_order_fit(c, scheme_kind_from_string(kind), grid);
          return py::make_tuple(f.fitted, f.slope, f.epr);
        },
        py::arg("chain"), py::arg("scheme"), py::arg("dt_grid"));
  m.def("exact_coefficients",
        [=](const DenseChain& c, const std::string& kind, double dt, const Vector& mu) {
          auto r = exact_coefficients(c, scheme_of(kind, dt), mu);
          return py::make_tuple(r.A, r.D);
        },
        py::arg("chain"), py::arg("scheme"), py::arg("dt"), py::arg("mu"));

  m.def("sample_chain",
        [=](const RateModel& model, const Decomposition& dec, const std::string& kind, double dt,
            const std::vector<int>& initial, long n_steps, long burn_in, std::uint64_t seed) {
          ChainOptions opts{n_steps, burn_in, seed};
          auto sample = sample_chain(scheme_of(kind, dt), model, dec, to_config(initial), opts);
          std::vector<std::vector<int>> out;
          out.reserve(sample.states.size());
          for (const auto& s : sample.states) out.push_back(from_config(s));
          return out;
        },
        py::arg("model"), py::arg("decomposition"), py::arg("scheme"), py::arg("dt"), py::arg("initial"),
        py::arg("n_steps"), py::arg("burn_in"), py::arg("seed"));

  m.def("estimate_epr",
        [=](const RateModel& model, const Decomposition& dec, const std::string& kind, double dt,
            const std::vector<int>& initial, long n_steps, long burn_in, std::uint64_t seed, bool normalize) {
          SchemeSpec scheme = scheme_of(kind, dt);
          EprAccumulator acc(model, dec, scheme);
          sample_chain_visit(scheme, model, dec, to_config(initial), ChainOptions{n_steps, burn_in, seed},
                             [&](long, const SpinConfiguration& s) { acc.add(s); });
          EprReport r = acc.report(burn_in);
          if (normalize) r = normalize_per_site(r);
          py::dict d;
          d["A"] = r.A.value;
          d["A_se"] = r.A.se;
          d["D"] = r.D.value;
          d["D_se"] = r.D.se;
          d["epr_leading"] = r.epr_leading.value;
          d["epr_se"] = r.epr_leading.se;
          d["n_samples"] = r.n_samples;
          return d;
        },
        py::arg("model"), py::arg("decomposition"), py::arg("scheme"), py::arg("dt"), py::arg("initial"),
        py::arg("n_steps"), py::arg("burn_in"), py::arg("seed"), py::arg("normalize") = true);

  m.def("csv_header", &csv_header);
  m.def("run_config_text",
        [](const std::string& text, const std::string& out_dir) {
          std::istringstream in(text);
          auto out = run_and_write(parse_config(in), out_dir);
          return py::make_tuple(out.csv_path, out.manifest_path);
        },
        py::arg("text"), py::arg("out_dir"));
}
