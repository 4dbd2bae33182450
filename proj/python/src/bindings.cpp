#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "jointmeas/config.hpp"

namespace py = pybind11;
using namespace jmeas;

namespace {

py::array_t<cplx> stack(const std::vector<Mat4>& mats) {
    py::array_t<cplx> out({static_cast<py::ssize_t>(mats.size()), py::ssize_t{4}, py::ssize_t{4}});
    auto v = out.mutable_unchecked<3>();
    for (std::size_t k = 0; k < mats.size(); ++k)
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c) v(k, r, c) = mats[k](r, c);
    return out;
}

py::array_t<double> array(const std::vector<double>& v) { return py::array_t<double>(v.size(), v.data()); }

py::dict record_dict(const TrajectoryRecord& rec) {
    py::dict d;
    d["seed"] = rec.seed;
    d["times"] = array(rec.times);
    d["s"] = array(rec.s);
    d["theta_ac"] = array(rec.theta_ac);
    d["rho"] = stack(rec.rho);
    d["current"] = array(rec.current);
    d["aborted"] = rec.aborted;
    d["diagnostic"] = rec.diagnostic;
    return d;
}

py::dict stats_dict(const EnsembleStats& st) {
    py::dict d;
    d["s_th"] = st.s_th;
    d["s0"] = st.s0;
    d["success_probability"] = st.success_probability;
    d["n_plus"] = st.n_plus;
    d["n_minus"] = st.n_minus;
    d["fidelity_plus"] = st.fidelity_plus;
    d["fidelity_minus"] = st.fidelity_minus;
    d["concurrence_plus"] = st.concurrence_plus;
    d["concurrence_minus"] = st.concurrence_minus;
    d["fbar"] = st.fbar;
    d["cbar"] = st.cbar;
    d["partial"] = st.partial();
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Two-qubit joint homodyne measurement simulator";
    m.attr("__version__") = library_version();

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<ContractViolation>(m, "ContractViolation", PyExc_ValueError);

    py::enum_<Drive::Shape>(m, "DriveShape")
        .value("constant", Drive::Shape::constant)
        .value("tanh_ramp", Drive::Shape::tanh_ramp);

    py::class_<Drive>(m, "Drive")
        .def(py::init<>())
        .def_readwrite("shape", &Drive::shape)
        .def_readwrite("amplitude", &Drive::amplitude)
        .def_readwrite("sigma", &Drive::sigma)
        .def("at", &Drive::at);

    py::class_<SystemParams>(m, "SystemParams")
        .def(py::init<>())
        .def_static("fig1", &SystemParams::fig1)
        .def_static("fig2", &SystemParams::fig2)
        .def_readwrite("kappa", &SystemParams::kappa)
        .def_readwrite("g", &SystemParams::g)
        .def_readwrite("delta_qc", &SystemParams::delta_qc)
        .def_readwrite("delta_r", &SystemParams::delta_r)
        .def_readwrite("gamma1", &SystemParams::gamma1)
        .def_readwrite("gammaphi", &SystemParams::gammaphi)
        .def_readwrite("eta", &SystemParams::eta)
        .def_readwrite("phi_lo", &SystemParams::phi_lo)
        .def_readwrite("drive", &SystemParams::drive)
        .def("validate", &SystemParams::validate)
        .def("warnings", &SystemParams::warnings);

    m.def("preset_params", [](const std::string& name) { return preset_config(name).params; }, py::arg("name"));
    m.def("load_params", [](const std::string& path) {
        const RunConfig c = load_config(path);
        c.validate();
        return c.params;
    });

    auto st = m.def_submodule("states", "Named two-qubit states as 4-vectors in the |gg>,|ge>,|eg>,|ee> basis");
    st.def("phi_plus", &states::phi_plus);
    st.def("psi_plus", &states::psi_plus);
    st.def("plus_plus", &states::plus_plus);
    st.def("projector", &states::projector);

    m.def("concurrence", &concurrence, py::arg("rho"));
    m.def("fidelity", &fidelity, py::arg("rho"), py::arg("psi"));
    m.def("purity", &purity, py::arg("rho"));
    m.def("trace_distance", [](const Mat4& a, const Mat4& b) { return trace_distance(a, b); });

    m.def("steady_alphas", [](const SystemParams& p) { return steady_alphas(p).alpha; });
    m.def(
        "steady_rates",
        [](const SystemParams& p) {
            const auto snap = snapshot(steady_alphas(p), p);
            py::dict d;
            d["gamma01"] = snap.rate(Component::k01);
            d["gamma10"] = snap.rate(Component::k10);
            d["gamma11"] = snap.rate(Component::k11);
            d["gamma_d"] = snap.gamma_d;
            d["a_c"] = snap.a_c;
            return d;
        },
        "Steady-state rates at params.phi_lo and the dephasing/ac-Stark tables.");

    m.def(
        "evolve_me",
        [](const Mat4& rho0, const SystemParams& p, double t_final, double dt, double cadence) {
            p.validate();
            const MeResult r = evolve_me(rho0, p, {.t_final = t_final, .dt = dt, .cadence = cadence});
            std::vector<double> t;
            std::vector<Mat4> rho;
            for (const auto& s : r.samples) {
                t.push_back(s.t);
                rho.push_back(s.rho);
            }
            return py::make_tuple(array(t), stack(rho));
        },
        py::arg("rho0"), py::arg("params"), py::arg("t_final") = 10.0, py::arg("dt") = 1e-3,
        py::arg("cadence") = 0.1, "Reduced master equation; returns (times, rho[n,4,4]).");

    m.def(
        "run_trajectory",
        [](const Mat4& rho0, const SystemParams& p, double t_final, double dt, std::uint64_t seed, double cadence) {
            p.validate();
            py::gil_scoped_release release;
            TrajectoryRecord rec =
                run_trajectory(rho0, p, {.t_final = t_final, .dt = dt, .seed = seed, .cadence = cadence});
            py::gil_scoped_acquire acquire;
            return record_dict(rec);
        },
        py::arg("rho0"), py::arg("params"), py::arg("t_final") = 10.0, py::arg("dt") = 1e-3, py::arg("seed") = 0,
        py::arg("cadence") = 0.1);

    py::class_<EnsembleResult>(m, "Ensemble")
        .def_property_readonly("times", [](const EnsembleResult& e) { return array(e.times); })
        .def_property_readonly("mean_rho", [](const EnsembleResult& e) { return stack(e.mean_rho); })
        .def_property_readonly("mean_concurrence", [](const EnsembleResult& e) { return array(e.mean_concurrence); })
        .def_property_readonly("n_completed", [](const EnsembleResult& e) { return e.n_completed; })
        .def_property_readonly("n_aborted", [](const EnsembleResult& e) { return e.n_aborted; })
        .def("s_at", [](const EnsembleResult& e, double t) {
            std::vector<double> s;
            for (const auto& r : e.records)
                if (!r.aborted) s.push_back(r.s[r.sample_index(t)]);
            return array(s);
        })
        .def("record", [](const EnsembleResult& e, std::size_t i) { return record_dict(e.records.at(i)); });

    m.def(
        "run_ensemble",
        [](const Mat4& rho0, const SystemParams& p, std::size_t n_traj, double t_final, double dt,
           std::uint64_t master_seed, double cadence, unsigned workers) {
            p.validate();
            EnsembleOptions o;
            o.n_traj = n_traj;
            o.t_final = t_final;
            o.dt = dt;
            o.master_seed = master_seed;
            o.cadence = cadence;
            o.workers = workers;
            py::gil_scoped_release release;
            return run_ensemble(rho0, p, o);
        },
        py::arg("rho0"), py::arg("params"), py::arg("n_traj") = 1000, py::arg("t_final") = 10.0,
        py::arg("dt") = 1e-3, py::arg("master_seed") = kDefaultMasterSeed, py::arg("cadence") = 0.1,
        py::arg("workers") = 0);

    m.def(
        "sweep_threshold",
        [](const EnsembleResult& e, double t, const std::vector<double>& thresholds) {
            py::list out;
            for (const auto& s : sweep_threshold(e.records, t, thresholds)) out.append(stats_dict(s));
            return out;
        },
        py::arg("ensemble"), py::arg("t"), py::arg("thresholds"));
}
