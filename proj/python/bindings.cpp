#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fibergap/bounds.hpp"
#include "fibergap/config.hpp"
#include "fibergap/kramers.hpp"
#include "fibergap/runner.hpp"

namespace py = pybind11;
using namespace fibergap;

namespace {

Vec3 to_vec(const std::array<double, 3>& p) { return {p[0], p[1], p[2]}; }

py::dict report_dict(const SpectrumReport& r) {
    py::dict d;
    d["P"] = std::array<double, 3>{r.P(0), r.P(1), r.P(2)};
    d["E"] = r.E;
    d["E1"] = r.E1 ? py::cast(*r.E1) : py::none();
    d["ground_multiplicity"] = r.ground_multiplicity;
    d["delta"] = r.delta;
    d["sigma_minus"] = r.sigma_minus;
    d["count_below"] = r.eigencount_below_sigma;
    d["residuals"] = r.residuals;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Truncated-Fock fiber Hamiltonian toolkit";

    py::enum_<DirectionSet>(m, "DirectionSet")
        .value("pair2", DirectionSet::pair2)
        .value("axes6", DirectionSet::axes6)
        .value("lebedev14", DirectionSet::lebedev14);

    py::class_<GridSpec>(m, "GridSpec")
        .def(py::init<>())
        .def_readwrite("n_shells", &GridSpec::n_shells)
        .def_readwrite("directions", &GridSpec::directions)
        .def_readwrite("radial_floor", &GridSpec::radial_floor)
        .def_readwrite("smooth_envelope", &GridSpec::smooth_envelope);

    py::class_<ModelParams>(m, "ModelParams")
        .def(py::init<>())
        .def_readwrite("e", &ModelParams::e)
        .def_readwrite("gamma", &ModelParams::gamma)
        .def_readwrite("M", &ModelParams::M)
        .def_readwrite("m_ph", &ModelParams::m_ph)
        .def_readwrite("Lambda", &ModelParams::Lambda)
        .def_readwrite("grid", &ModelParams::grid)
        .def_readwrite("N_max", &ModelParams::N_max)
        .def_readwrite("max_fock_dim", &ModelParams::max_fock_dim)
        .def("validate", &ModelParams::validate)
        .def("gap_hypotheses", &ModelParams::gap_hypotheses);

    py::class_<CouplingNorms>(m, "CouplingNorms")
        .def_readonly("n_half", &CouplingNorms::n_half)
        .def_readonly("n_one", &CouplingNorms::n_one)
        .def_readonly("n_kin", &CouplingNorms::n_kin)
        .def_readonly("n_curl", &CouplingNorms::n_curl);

    py::class_<BoundConstants>(m, "BoundConstants")
        .def_readonly("eC1", &BoundConstants::eC1)
        .def_readonly("eC2", &BoundConstants::eC2)
        .def_readonly("eC3", &BoundConstants::eC3)
        .def_readonly("e2C4", &BoundConstants::e2C4)
        .def_readonly("eC_iso", &BoundConstants::eC_iso)
        .def("sigma_minus", &BoundConstants::sigma_minus, py::arg("params"), py::arg("P_abs"));

    py::class_<FiberModel>(m, "FiberModel")
        .def(py::init([](const ModelParams& p) { return FiberModel::build(p); }), py::arg("params"))
        .def_readonly("params", &FiberModel::params)
        .def_readonly("norms", &FiberModel::norms)
        .def_property_readonly("fock_dim", &FiberModel::fock_dim)
        .def_property_readonly("n_modes", [](const FiberModel& f) { return f.modes.size(); })
        .def_property_readonly("mode_k",
                               [](const FiberModel& f) {
                                   Eigen::MatrixXd k(static_cast<Eigen::Index>(f.modes.size()), 3);
                                   for (std::size_t i = 0; i < f.modes.size(); ++i)
                                       k.row(static_cast<Eigen::Index>(i)) = f.modes[i].k.transpose();
                                   return k;
                               })
        .def_property_readonly("omega", [](const FiberModel& f) { return f.table.omega; })
        .def("constants", [](const FiberModel& f) { return BoundConstants::from(f.params, f.norms); })
        .def("H", [](const FiberModel& f, std::array<double, 3> P) { return build_H(f, to_vec(P)).matrix; },
             py::arg("P"))
        .def("H0", [](const FiberModel& f, std::array<double, 3> P) { return build_H0(f, to_vec(P)).matrix; },
             py::arg("P"))
        .def("T",
             [](const FiberModel& f, std::array<double, 3> P, bool expanded) {
                 return build_T(f, to_vec(P), expanded ? TForm::expanded : TForm::direct).matrix;
             },
             py::arg("P"), py::arg("expanded") = false)
        .def("D", [](const FiberModel& f, std::array<double, 3> P) { return build_D(f, to_vec(P)).matrix; },
             py::arg("P"))
        .def("free_diagonal",
             [](const FiberModel& f, std::array<double, 3> P) { return free_fiber_diagonal(f, to_vec(P)); },
             py::arg("P"))
        .def("ground_energy", [](const FiberModel& f, std::array<double, 3> P) { return ground_energy(f, to_vec(P)); },
             py::arg("P"))
        .def("interaction_norm",
             [](const FiberModel& f, std::array<double, 3> P) { return interaction_norm(f, to_vec(P)); },
             py::arg("P"))
        .def("report",
             [](const FiberModel& f, std::array<double, 3> P) {
                 return report_dict(compute_spectrum_report(f, BoundConstants::from(f.params, f.norms), to_vec(P),
                                                            Tolerances{}));
             },
             py::arg("P"))
        .def("kramers",
             [](const FiberModel& f, std::array<double, 3> P) {
                 const auto c = kramers_certificate(f, to_vec(P), BoundConstants::from(f.params, f.norms));
                 py::dict d;
                 d["status"] = to_string(c.status);
                 d["ground_multiplicity"] = c.ground_multiplicity;
                 d["count_below_sigma"] = c.count_below_sigma;
                 d["pairing_residual"] = c.pairing_residual;
                 d["commutation_residual"] = c.commutation_residual;
                 return d;
             },
             py::arg("P"))
        .def("sandwich",
             [](const FiberModel& f, double P_abs) {
                 const auto pa = analyze_point(f, P_abs, BoundConstants::from(f.params, f.norms));
                 py::dict d;
                 d["lower_min_eig"] = pa.lower.min_eig;
                 d["upper_min_eig"] = pa.upper.min_eig;
                 d["scale"] = std::max(pa.lower.scale, pa.upper.scale);
                 d["count_H"] = pa.count_H;
                 d["count_L"] = pa.count_L;
                 d["E"] = pa.E;
                 d["sigma_minus"] = pa.sigma_minus;
                 return d;
             },
             py::arg("P_abs"));

    m.def("dispersion", [](std::array<double, 3> k, double m_ph) { return dispersion(to_vec(k), m_ph); });
    m.def("op_sqrt_eig", [](const CMatrix& h) { return op_sqrt_eig(h); });
    m.def("op_sqrt_quad", &op_sqrt_quad, py::arg("x"), py::arg("tol") = 1e-10);
    m.def("apply_theta", &apply_theta);
    m.def("check_theta_commutes", &check_theta_commutes);
    m.def("sqrt_monotone_test",
          [](int dim, int trials, std::uint64_t seed) {
              const auto r = sqrt_monotone_test(dim, trials, seed);
              return py::make_tuple(r.passed, r.worst_margin);
          },
          py::arg("dim"), py::arg("trials"), py::arg("seed") = 1);

    m.def("default_config", [] { return to_json(default_config()).dump(); });
    m.def("verify",
          [](const std::string& config_json) {
              const RunConfig cfg = config_json.empty() ? default_config() : parse_config(config_json);
              VerifyReport rep;
              {
                  py::gil_scoped_release release;
                  rep = verify_suite(cfg);
              }
              return to_json(rep).dump();
          },
          py::arg("config_json") = "");

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
}
