#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "shockline/experiments.hpp"

namespace py = pybind11;
using namespace shockline;

namespace {

// config dict -> resolved spec, through the same schema as the CLI
ExperimentSpec spec_from_dict(const py::dict& cfg, RunMode mode) {
    std::vector<std::string> overrides;
    for (auto item : cfg) {
        std::ostringstream kv;
        kv << py::str(item.first).cast<std::string>() << " = "
           << py::str(item.second).cast<std::string>();
        overrides.push_back(kv.str());
    }
    return parse_config("", overrides, mode, "out");
}

py::dict record_series(const std::vector<DiagRecord>& records) {
    auto col = [&](auto proj) {
        std::vector<double> v;
        v.reserve(records.size());
        for (const DiagRecord& r : records) v.push_back(proj(r));
        return v;
    };
    py::dict d;
    d["t"] = col([](const DiagRecord& r) { return r.t; });
    d["E"] = col([](const DiagRecord& r) { return r.E; });
    d["Gnew"] = col([](const DiagRecord& r) { return r.Gnew; });
    d["GS"] = col([](const DiagRecord& r) { return r.GS; });
    d["Gbd"] = col([](const DiagRecord& r) { return r.Gbd; });
    d["Drho"] = col([](const DiagRecord& r) { return r.Drho; });
    d["Du1"] = col([](const DiagRecord& r) { return r.Du1; });
    d["Du2"] = col([](const DiagRecord& r) { return r.Du2; });
    d["P"] = col([](const DiagRecord& r) { return r.P; });
    d["supnorm_phi"] = col([](const DiagRecord& r) { return r.supnorm_phi; });
    d["supnorm_psi"] = col([](const DiagRecord& r) { return r.supnorm_psi; });
    d["l2_phi"] = col([](const DiagRecord& r) { return r.l2_phi; });
    d["l2_psi"] = col([](const DiagRecord& r) { return r.l2_psi; });
    d["h1_phi"] = col([](const DiagRecord& r) { return r.h1_phi; });
    d["h1_psi"] = col([](const DiagRecord& r) { return r.h1_psi; });
    d["Xdot"] = col([](const DiagRecord& r) { return r.Xdot; });
    d["y0"] = col([](const DiagRecord& r) { return r.y0; });
    d["tail_truncation_bound"] =
        col([](const DiagRecord& r) { return r.tail_truncation_bound; });
    return d;
}

}  // namespace

PYBIND11_MODULE(shockline, m) {
    m.doc() = "viscous 2-shock laboratory for the barotropic outflow problem";
    m.attr("__version__") = version_string();

    py::class_<GasParams>(m, "GasParams")
        .def(py::init([](double gamma) {
                 GasParams g;
                 g.gamma = gamma;
                 g.validate();
                 return g;
             }),
             py::arg("gamma") = 2.0)
        .def_readonly("gamma", &GasParams::gamma)
        .def("pressure", &GasParams::pressure)
        .def("dpressure", &GasParams::dpressure);

    py::class_<EndState>(m, "EndState")
        .def(py::init<double, double>(), py::arg("rho"), py::arg("u"))
        .def_readwrite("rho", &EndState::rho)
        .def_readwrite("u", &EndState::u)
        .def("__repr__", [](const EndState& s) {
            std::ostringstream os;
            os << "EndState(rho=" << s.rho << ", u=" << s.u << ")";
            return os.str();
        });

    py::enum_<StateClass>(m, "StateClass")
        .value("SUBSONIC_MINUS", StateClass::SubsonicMinus)
        .value("TRANSONIC_MINUS", StateClass::TransonicMinus)
        .value("SUPERSONIC_MINUS", StateClass::SupersonicMinus)
        .value("NOT_IN_SCOPE", StateClass::NotInScope);

    py::class_<ShockConnection>(m, "ShockConnection")
        .def_readonly("right", &ShockConnection::right)
        .def_readonly("left", &ShockConnection::left)
        .def_readonly("sigma", &ShockConnection::sigma)
        .def_readonly("delta", &ShockConnection::delta)
        .def("mass_flux", &ShockConnection::mass_flux);

    py::class_<LaxReport>(m, "LaxReport")
        .def_readonly("admissible", &LaxReport::admissible)
        .def_readonly("margin_plus", &LaxReport::margin_plus)
        .def_readonly("margin_minus", &LaxReport::margin_minus);

    m.def("sound_speed", &sound_speed, py::arg("state"), py::arg("gas"));
    m.def("lambda2", &lambda2, py::arg("state"), py::arg("gas"));
    m.def("classify_state", &classify_state, py::arg("state"), py::arg("gas"),
          py::arg("tol_sonic") = 1e-10);
    m.def(
        "solve_hugoniot",
        [](const EndState& right, double u_minus, const GasParams& gas) {
            return solve_hugoniot(right, u_minus, gas);
        },
        py::arg("right"), py::arg("u_minus"), py::arg("gas"));
    m.def("rh_residual", &rh_residual);
    m.def("lax_check", &lax_check);

    py::class_<ShockProfile::Point>(m, "ProfilePoint")
        .def_readonly("rho", &ShockProfile::Point::rho)
        .def_readonly("u", &ShockProfile::Point::u)
        .def_readonly("drho", &ShockProfile::Point::drho)
        .def_readonly("du", &ShockProfile::Point::du)
        .def_readonly("ddu", &ShockProfile::Point::ddu);

    py::class_<ShockProfile>(m, "ShockProfile")
        .def_readonly("xi", &ShockProfile::xi)
        .def_readonly("u", &ShockProfile::u)
        .def_readonly("rho", &ShockProfile::rho)
        .def_readonly("du", &ShockProfile::du)
        .def_readonly("drho", &ShockProfile::drho)
        .def_readonly("ddu", &ShockProfile::ddu)
        .def_readonly("tail_rate_left", &ShockProfile::tail_rate_left)
        .def_readonly("tail_rate_right", &ShockProfile::tail_rate_right)
        .def("eval", &ShockProfile::eval, py::arg("xi"))
        .def("xi_min", &ShockProfile::xi_min)
        .def("xi_max", &ShockProfile::xi_max);

    m.def(
        "integrate_profile",
        [](const ShockConnection& conn, double tail_eps) {
            ProfileOptions opts;
            opts.tail_eps = tail_eps;
            return integrate_profile(conn, opts);
        },
        py::arg("conn"), py::arg("tail_eps") = 1e-8);

    m.def("density_from_velocity", &density_from_velocity);
    m.def("profile_rhs", &profile_rhs);
    m.def("jacobian_lemma_check", &jacobian_lemma_check);

    py::class_<ProfileResiduals>(m, "ProfileResiduals")
        .def_readonly("max_eq1", &ProfileResiduals::max_eq1)
        .def_readonly("max_eq2", &ProfileResiduals::max_eq2)
        .def_readonly("first_integral_drift",
                      &ProfileResiduals::first_integral_drift)
        .def_readonly("remark_bound_max", &ProfileResiduals::remark_bound_max);
    m.def("profile_residuals", &profile_residuals);

    py::class_<TailReport>(m, "TailReport")
        .def_readonly("rate_left", &TailReport::rate_left)
        .def_readonly("rate_right", &TailReport::rate_right)
        .def_readonly("r2_left", &TailReport::r2_left)
        .def_readonly("r2_right", &TailReport::r2_right)
        .def_readonly("second_derivative_ratio",
                      &TailReport::second_derivative_ratio);
    m.def("verify_tails", &verify_tails);

    m.def(
        "weight_at",
        [](const ShockProfile& p, double xi) {
            const WeightValue v = weight_at(Weight{&p, p.conn.delta}, xi);
            return py::make_tuple(v.a, v.da);
        },
        py::arg("profile"), py::arg("xi"));

    m.def("relative_pressure", &relative_pressure);
    py::class_<RelativeQuantities>(m, "RelativeQuantities")
        .def_readonly("eta", &RelativeQuantities::eta)
        .def_readonly("q", &RelativeQuantities::q)
        .def_readonly("f_rel", &RelativeQuantities::f_rel);
    m.def("relative_quantities", &relative_quantities);

    m.def(
        "poincare_check",
        [](const std::vector<double>& y, const std::vector<double>& f,
           const std::vector<double>& df, double tol) {
            const PoincareResult r = poincare_check(y, f, df, tol);
            return py::make_tuple(r.lhs, r.rhs, r.holds);
        },
        py::arg("y"), py::arg("f"), py::arg("df") = std::vector<double>{},
        py::arg("tol") = 1e-9);

    m.def("choose_beta", &choose_beta, py::arg("profile"), py::arg("target"),
          py::arg("h"));

    m.def(
        "simulate",
        [](const py::dict& cfg) {
            const ExperimentSpec spec = spec_from_dict(cfg, RunMode::Run);
            const RunResult rr = run(spec.base);
            py::dict out;
            out["sigma"] = rr.conn.sigma;
            out["delta"] = rr.conn.delta;
            out["rho_minus"] = rr.conn.left.rho;
            out["beta"] = rr.beta;
            out["steps"] = rr.steps;
            out["mass_balance_rel"] = rr.mass_balance_rel;
            out["records"] = record_series(rr.records);
            py::dict shift;
            shift["t"] = rr.shift.t_hist;
            shift["X"] = rr.shift.X_hist;
            shift["Xdot"] = rr.shift.Xdot_hist;
            out["shift"] = shift;
            out["final_rho"] = rr.final_field.rho;
            out["final_mom"] = rr.final_field.mom;
            return out;
        },
        py::arg("config"),
        "Run the outflow problem for a config dict with the same keys as the "
        "CLI config files; returns the diagnostic series in memory.");
}
