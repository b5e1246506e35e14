#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "nlst/bitfunction.hpp"
#include "nlst/error.hpp"
#include "nlst/npa.hpp"
#include "nlst/nsattack.hpp"
#include "nlst/nsimpossible.hpp"
#include "nlst/protocol.hpp"
#include "nlst/systems.hpp"

namespace py = pybind11;
using namespace nlst;

namespace {

BitFunction key_function(const std::string& text, int nbits) {
  return text.empty() ? BitFunction::mask(1, nbits) : BitFunction::parse(text, nbits);
}

int output_bits(const System& s) {
  int bits = 0;
  while ((1 << bits) < s.scenario().outputs(0)) ++bits;
  return bits;
}

}  // namespace

PYBIND11_MODULE(_nlst, m) {
  m.doc() = "Non-signalling and quantum key distribution analyses";

  static py::exception<Error> error(m, "NlstError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      PyErr_SetString(error.ptr(), (std::string(to_string(e.kind())) + ": " + e.what()).c_str());
    }
  });

  py::class_<Scenario>(m, "Scenario")
      .def(py::init<std::vector<int>, std::vector<int>>(), py::arg("inputs"), py::arg("outputs"))
      .def_static("binary", &Scenario::binary, py::arg("parties") = 2)
      .def_static("bipartite", &Scenario::bipartite)
      .def_property_readonly("inputs", [](const Scenario& s) { return s.inputs(); })
      .def_property_readonly("outputs", [](const Scenario& s) { return s.outputs(); })
      .def("__len__", &Scenario::size)
      .def("__eq__", &Scenario::operator==);

  py::class_<System>(m, "System")
      .def(py::init<Scenario, std::vector<double>, double>(), py::arg("scenario"), py::arg("table"),
           py::arg("tol") = 1e-9)
      .def_property_readonly("scenario", &System::scenario)
      .def_property_readonly("table", &System::table)
      .def("at", &System::at, py::arg("inputs"), py::arg("outputs"))
      .def("__len__", &System::size)
      .def("to_json", [](const System& s) { return system_to_json(s); })
      .def_static("from_json", [](const std::string& t) { return system_from_json(t); });

  m.def("pr_box", &pr_box);
  m.def("unbiased_pr_box", &unbiased_pr_box, py::arg("eps"));
  m.def("tsirelson_system", &tsirelson_system);
  m.def("noisy_singlet_system", &noisy_singlet_system, py::arg("rho"));
  m.def("chained_pr_box", &chained_pr_box, py::arg("n"));
  m.def("tensor", &tensor);
  m.def("chsh_value", &chsh_value);
  m.def("braunstein_caves_value", &braunstein_caves_value, py::arg("system"), py::arg("n"));
  m.def(
      "is_nonsignalling",
      [](const System& s, double tol) {
        auto r = is_nonsignalling(s, tol);
        return py::make_tuple(r.ok, r.violations);
      },
      py::arg("system"), py::arg("tol") = 1e-9);

  m.def(
      "ns_distance",
      [](const System& s, const std::string& f, std::vector<int> inputs) {
        if (inputs.empty()) inputs.assign(s.scenario().parties(), 0);
        auto r = distance_from_uniform_lp(s, key_function(f, output_bits(s)), inputs);
        py::dict d;
        d["distance"] = r.distance;
        d["certified"] = r.certified;
        d["p"] = r.p;
        return d;
      },
      py::arg("system"), py::arg("function") = "", py::arg("inputs") = std::vector<int>{},
      "Distance from uniform of a key bit against a non-signalling adversary");
  m.def("local_part", [](const System& s) { return local_part(s).value; }, py::arg("system"));
  m.def(
      "xor_bound",
      [](int n, double eps) { return xor_bound(tensor_power(lambda1_star(), n), tensor_power(unbiased_pr_box(eps), n)); },
      py::arg("n"), py::arg("eps"), "lambda1* tensor-power bound on the XOR of n eps-boxes");
  m.def(
      "lambda1_star_value", [](const System& s) { return certified_value(lambda1_star(), s); },
      py::arg("system"));

  m.def(
      "guessing_probability",
      [](const System& s, int level, const std::string& f) {
        auto g = f.empty() ? guessing_probability_sdp(s, std::vector<int>{}, level)
                           : guessing_probability_sdp(s, key_function(f, output_bits(s)), level);
        return g.value;
      },
      py::arg("system"), py::arg("level") = 2, py::arg("function") = "");
  m.def(
      "bit_distance",
      [](const System& s, int level, const std::string& f) {
        return bit_distance_sdp(s, key_function(f, output_bits(s)), level).distance;
      },
      py::arg("system"), py::arg("level") = 2, py::arg("function") = "");
  m.def("max_chsh", [](int level) { return max_chsh(level).value; }, py::arg("level") = 1);

  m.def(
      "attack_distance",
      [](int n, double eps, const std::string& f) {
        return attack_distance(n, eps, f.empty() ? BitFunction::xor_all(n) : BitFunction::parse(f, n));
      },
      py::arg("n"), py::arg("eps"), py::arg("function") = "xor");
  m.def("xor_attack_distance_closed_form", &xor_attack_distance_closed_form);
  m.def("xor_attack_polynomial", &xor_attack_polynomial);
  m.def("general_lower_bound", &general_lower_bound, py::arg("eps"));

  m.def("binary_entropy", &binary_entropy);
  m.def("ns_key_rate", &ns_key_rate, py::arg("eps_cert"), py::arg("delta"));
  m.def("ns_key_rate_curve", &ns_key_rate_curve, py::arg("rho"));
  m.def("ns_key_rate_zero", &ns_key_rate_zero);
  m.def("q_key_rate", &q_key_rate, py::arg("pguess"), py::arg("delta"));
  m.def(
      "q_key_rate_curve", [](double rho, int level) { return q_key_rate_curve(rho, level).rate; },
      py::arg("rho"), py::arg("level") = 2);
  m.def("ir_failure_bound", &ir_failure_bound, py::arg("n"), py::arg("delta_prime"), py::arg("m"));

  m.def(
      "simulate",
      [](std::size_t n, double rho, std::uint64_t seed, const std::string& adversary) {
        if (adversary != "ns" && adversary != "quantum")
          throw Error(ErrorKind::Domain, "adversary must be 'ns' or 'quantum'");
        ProtocolParams pp;
        pp.n = n;
        auto r = simulate_ekert(pp, rho, adversary == "ns" ? Adversary::NonSignalling : Adversary::Quantum, seed);
        return report_to_json(r.report);
      },
      py::arg("n") = 10000, py::arg("rho") = 0.0, py::arg("seed") = 0, py::arg("adversary") = "ns",
      "Seeded protocol run on the Ekert-type source; returns the report as JSON");
}
