#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qcap/bounds.hpp"
#include "qcap/experiment.hpp"

namespace py = pybind11;
using namespace qcap;

namespace {

std::vector<DensityMatrix> densities(const std::vector<DenseMatrix>& ms) {
  std::vector<DensityMatrix> out;
  out.reserve(ms.size());
  for (const auto& m : ms) out.emplace_back(m);
  return out;
}

std::vector<DenseMatrix> dense_list(const std::vector<DensityMatrix>& ds) {
  std::vector<DenseMatrix> out;
  for (const auto& d : ds) out.push_back(d.dense());
  return out;
}

// +inf for a support violation, as the library reports it
double nats(const DivergenceValue& v) { return v.value; }

Ensemble make_ensemble(std::vector<double> probs, const std::vector<DenseMatrix>& states) {
  Ensemble e{std::move(probs), densities(states)};
  e.validate();
  return e;
}

SolverConfig solver_config(double tol, int max_iters, int probes, std::uint64_t seed) {
  SolverConfig c;
  c.tol = tol;
  c.max_iters = max_iters;
  c.probes = probes;
  c.seed = seed;
  return c;
}

}  // namespace

PYBIND11_MODULE(_qcap, m) {
  m.doc() = "Holevo capacity solver and converse-bound checks";

  static py::exception<Error> error(m, "QcapError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error.ptr())(e.what());
      exc.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(error.ptr(), exc.ptr());
    }
  });

  py::class_<QuantumChannel>(m, "Channel")
      .def_property_readonly("dim_in", &QuantumChannel::dim_in)
      .def_property_readonly("dim_out", &QuantumChannel::dim_out)
      .def_property_readonly("copies", &QuantumChannel::copies)
      .def_property_readonly("kraus", [](const QuantumChannel& c) { return c.kraus(); })
      .def("apply", [](const QuantumChannel& c, const DenseMatrix& x) { return apply_channel(c, x); }, py::arg("x"))
      .def("adjoint", [](const QuantumChannel& c, const DenseMatrix& y) { return apply_adjoint(c, y); }, py::arg("y"))
      .def("tensor_power", [](const QuantumChannel& c, std::size_t k) { return channel_tensor_power(c, k); },
           py::arg("k"));

  m.def("channel_from_kraus", [](std::vector<DenseMatrix> k) { return validate_channel(std::move(k)); },
        py::arg("kraus"));
  m.def("identity_channel", &identity_channel, py::arg("d"));
  m.def("depolarizing", &depolarizing, py::arg("d"), py::arg("p"));
  m.def("cq_channel", [](const std::vector<DenseMatrix>& signals) { return cq_channel(densities(signals)); },
        py::arg("signals"));

  m.def("von_neumann_entropy", [](const DenseMatrix& rho) { return von_neumann_entropy(DensityMatrix(rho)); },
        py::arg("rho"));
  m.def("relative_entropy",
        [](const DenseMatrix& rho, const DenseMatrix& sigma) {
          return nats(relative_entropy(DensityMatrix(rho), DensityMatrix(sigma)));
        },
        py::arg("rho"), py::arg("sigma"));
  m.def("petz_renyi_divergence",
        [](double alpha, const DenseMatrix& rho, const DenseMatrix& sigma) {
          return nats(petz_renyi_divergence(alpha, DensityMatrix(rho), DensityMatrix(sigma)));
        },
        py::arg("alpha"), py::arg("rho"), py::arg("sigma"));
  m.def("measured_renyi_divergence",
        [](double alpha, const DenseMatrix& rho, const DenseMatrix& sigma) {
          return measured_renyi_divergence(alpha, DensityMatrix(rho), DensityMatrix(sigma)).value;
        },
        py::arg("alpha"), py::arg("rho"), py::arg("sigma"));
  m.def("holevo_quantity",
        [](const std::vector<double>& probs, const std::vector<DenseMatrix>& states, const QuantumChannel& c) {
          return holevo_quantity(make_ensemble(probs, states), c);
        },
        py::arg("probs"), py::arg("states"), py::arg("channel"));

  py::class_<CapacityResult>(m, "CapacityResult")
      .def_readonly("chi", &CapacityResult::chi)
      .def_readonly("certificate_gap", &CapacityResult::certificate_gap)
      .def_readonly("iterations", &CapacityResult::iterations)
      .def_readonly("converged", &CapacityResult::converged)
      .def_readonly("history", &CapacityResult::history)
      .def_property_readonly("omega_bar", [](const CapacityResult& r) { return r.omega_bar.dense(); })
      .def_property_readonly("probs", [](const CapacityResult& r) { return r.ensemble.probs; })
      .def_property_readonly("states", [](const CapacityResult& r) { return dense_list(r.ensemble.states); });

  m.def("holevo_capacity",
        [](const QuantumChannel& c, double tol, int max_iters, int probes, std::uint64_t seed) {
          py::gil_scoped_release release;
          return holevo_capacity(c, solver_config(tol, max_iters, probes, seed));
        },
        py::arg("channel"), py::arg("tol") = 1e-7, py::arg("max_iters") = 5000, py::arg("probes") = 10000,
        py::arg("seed") = 0);
  m.def("certificate_gap",
        [](const QuantumChannel& c, double chi, const DenseMatrix& omega, int probes, std::uint64_t seed) {
          return lemma2_certificate(c, chi, DensityMatrix(omega), probes, seed).gap;
        },
        py::arg("channel"), py::arg("chi"), py::arg("omega"), py::arg("probes") = 10000, py::arg("seed") = 0);
  m.def("uniqueness_distance",
        [](const QuantumChannel& c, int restarts, std::uint64_t seed) {
          py::gil_scoped_release release;
          return uniqueness_probe(c, restarts, seed).max_distance;
        },
        py::arg("channel"), py::arg("restarts") = 20, py::arg("seed") = 0);

  py::class_<ClassicalQuantumCode>(m, "Code")
      .def_property_readonly("blocklength", &ClassicalQuantumCode::blocklength)
      .def_property_readonly("num_messages", &ClassicalQuantumCode::num_messages)
      .def("codeword", [](const ClassicalQuantumCode& c, std::size_t i) { return c.codeword(i).dense(); })
      .def("evaluate",
           [](const ClassicalQuantumCode& c, const QuantumChannel& n) {
             const auto perf = evaluate_code(c, n);
             return py::dict(py::arg("max_error") = perf.max_error, py::arg("avg_error") = perf.avg_error,
                             py::arg("per_message") = perf.per_message);
           },
           py::arg("channel"));

  m.def("random_pgm_code",
        [](const QuantumChannel& c, const std::vector<double>& probs, const std::vector<DenseMatrix>& states,
           std::size_t n, std::size_t messages, std::uint64_t seed) {
          return random_pgm_code(c, make_ensemble(probs, states), n, messages, seed);
        },
        py::arg("channel"), py::arg("probs"), py::arg("states"), py::arg("n"), py::arg("messages"),
        py::arg("seed") = 0);
  m.def("messages_for_rate", &messages_for_rate, py::arg("chi"), py::arg("rate"), py::arg("n"));

  py::class_<BoundReport>(m, "BoundReport")
      .def_readonly("name", &BoundReport::name)
      .def_readonly("lhs", &BoundReport::lhs)
      .def_readonly("rhs", &BoundReport::rhs)
      .def_readonly("slack", &BoundReport::slack)
      .def_readonly("holds", &BoundReport::holds)
      .def_readonly("components", &BoundReport::components)
      .def_readonly("flags", &BoundReport::flags)
      .def("__repr__", [](const BoundReport& r) {
        return "<BoundReport " + r.name + " slack=" + std::to_string(r.slack) + (r.holds ? " holds>" : " FAILS>");
      });

  m.def("theorem1_check", &theorem1_check, py::arg("code"), py::arg("channel"), py::arg("capacity"));
  m.def("second_order_converse_check", &second_order_converse_check, py::arg("code"), py::arg("channel"));
  m.def("lemma5_check", &lemma5_check, py::arg("code"), py::arg("channel"), py::arg("capacity"));
  m.def("proof_chain_verify",
        [](const ClassicalQuantumCode& code, const QuantumChannel& c, double alpha, double t, double delta) {
          ProofChainConfig cfg;
          cfg.delta = delta;
          return proof_chain_verify(code, c, alpha, t, cfg);
        },
        py::arg("code"), py::arg("channel"), py::arg("alpha"), py::arg("t"), py::arg("delta") = 1e-9);
  m.def("second_order_rhs", &second_order_rhs, py::arg("mutual_information"), py::arg("eps"), py::arg("n"),
        py::arg("d_out"));

  m.def("run_experiment",
        [](const std::string& task, const std::string& config_json, const std::string& base_dir) {
          const auto cfg = parse_experiment_config(io::Json::parse(config_json), task_from_string(task), base_dir);
          ExperimentOutcome out;
          {
            py::gil_scoped_release release;
            out = run_experiment(cfg);
          }
          return py::make_tuple(out.report.dump(), summary_csv(out.rows), out.checks, out.failures);
        },
        py::arg("task"), py::arg("config_json"), py::arg("base_dir") = ".");
}
