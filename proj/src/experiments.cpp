#include "shockline/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "shockline/csv.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace shockline {

std::string version_string() { return "shockline 0.1.0"; }

RunMode parse_mode(const std::string& name) {
    if (name == "run") return RunMode::Run;
    if (name == "sweep-delta") return RunMode::SweepDelta;
    if (name == "sweep-beta") return RunMode::SweepBeta;
    if (name == "validate-profile") return RunMode::ValidateProfile;
    if (name == "validate-poincare") return RunMode::ValidatePoincare;
    if (name == "validate-jacobian") return RunMode::ValidateJacobian;
    if (name == "convergence-study") return RunMode::ConvergenceStudy;
    throw ConfigError("unknown mode '" + name + "'");
}

std::string mode_name(RunMode mode) {
    switch (mode) {
        case RunMode::Run: return "run";
        case RunMode::SweepDelta: return "sweep-delta";
        case RunMode::SweepBeta: return "sweep-beta";
        case RunMode::ValidateProfile: return "validate-profile";
        case RunMode::ValidatePoincare: return "validate-poincare";
        case RunMode::ValidateJacobian: return "validate-jacobian";
        case RunMode::ConvergenceStudy: return "convergence-study";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// config file: key = value lines with optional [section] headers; '#' starts
// a comment; flags override the file
// ---------------------------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

void parse_kv_line(const std::string& line, const std::string& section,
                   std::map<std::string, std::string>& kv) {
    std::string body = line;
    if (const auto hash = body.find('#'); hash != std::string::npos)
        body = body.substr(0, hash);
    body = trim(body);
    if (body.empty()) return;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
        throw ConfigError("malformed line (expected key = value): '" + body + "'");
    std::string key = trim(body.substr(0, eq));
    std::string val = trim(body.substr(eq + 1));
    if (val.size() >= 2 && val.front() == '"' && val.back() == '"')
        val = val.substr(1, val.size() - 2);
    if (key.empty() || val.empty())
        throw ConfigError("malformed line: '" + body + "'");
    if (!section.empty()) key = section + "." + key;
    kv[key] = val;
}

double to_double(const std::string& key, const std::string& val) {
    size_t pos = 0;
    double out;
    try {
        out = std::stod(val, &pos);
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected a number, got '" + val + "'");
    }
    if (pos != val.size())
        throw ConfigError("key '" + key + "': expected a number, got '" + val + "'");
    return out;
}

long long to_int(const std::string& key, const std::string& val) {
    size_t pos = 0;
    long long out;
    try {
        out = std::stoll(val, &pos);
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected an integer, got '" + val + "'");
    }
    if (pos != val.size())
        throw ConfigError("key '" + key + "': expected an integer, got '" + val + "'");
    return out;
}

std::vector<double> to_list(const std::string& key, const std::string& val) {
    std::vector<double> out;
    std::stringstream ss(val);
    std::string item;
    while (std::getline(ss, item, ','))
        out.push_back(to_double(key, trim(item)));
    if (out.empty()) throw ConfigError("key '" + key + "': empty list");
    return out;
}

}  // namespace

ExperimentSpec parse_config(const std::string& path,
                            const std::vector<std::string>& overrides,
                            RunMode mode, const std::string& out_dir) {
    std::map<std::string, std::string> kv;
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file '" + path + "'");
        std::string line, section;
        while (std::getline(in, line)) {
            const std::string t = trim(line);
            if (!t.empty() && t.front() == '[') {
                if (t.back() != ']')
                    throw ConfigError("malformed section header: '" + t + "'");
                section = trim(t.substr(1, t.size() - 2));
                continue;
            }
            parse_kv_line(line, section, kv);
        }
    }
    for (const std::string& ov : overrides) parse_kv_line(ov, "", kv);

    ExperimentSpec spec;
    spec.mode = mode;
    spec.out_dir = out_dir;
    SimConfig& c = spec.base;

    auto take = [&](const char* name) -> const std::string* {
        // accept both the flat key and any section-qualified spelling of it
        for (auto it = kv.begin(); it != kv.end(); ++it) {
            const std::string& full = it->first;
            const auto dot = full.rfind('.');
            const std::string leaf = dot == std::string::npos ? full : full.substr(dot + 1);
            if (leaf == name) {
                static thread_local std::string held;
                held = it->second;
                kv.erase(it);
                return &held;
            }
        }
        return nullptr;
    };

    if (const auto* v = take("gamma")) c.gas.gamma = to_double("gamma", *v);
    if (const auto* v = take("rho_plus")) c.rho_plus = to_double("rho_plus", *v);
    if (const auto* v = take("u_plus")) c.u_plus = to_double("u_plus", *v);
    if (const auto* v = take("u_minus")) c.u_minus = to_double("u_minus", *v);
    if (const auto* v = take("beta")) c.beta = to_double("beta", *v);
    if (const auto* v = take("beta_target")) c.beta_target = to_double("beta_target", *v);
    if (const auto* v = take("L")) c.L = to_double("L", *v);
    if (const auto* v = take("N")) c.N = static_cast<int>(to_int("N", *v));
    if (const auto* v = take("cfl")) c.cfl = to_double("cfl", *v);
    if (const auto* v = take("t_final")) c.t_final = to_double("t_final", *v);
    if (const auto* v = take("fixed_dt")) c.fixed_dt = to_double("fixed_dt", *v);
    if (const auto* v = take("epsilon")) c.pert.epsilon = to_double("epsilon", *v);
    if (const auto* v = take("pert_shape")) {
        if (*v == "bump") c.pert.shape = PerturbationSpec::Shape::Bump;
        else if (*v == "random") c.pert.shape = PerturbationSpec::Shape::RandomBumps;
        else if (*v == "none") c.pert.shape = PerturbationSpec::Shape::None;
        else throw ConfigError("key 'pert_shape': expected bump|random|none");
    }
    if (const auto* v = take("pert_center")) c.pert.center = to_double("pert_center", *v);
    if (const auto* v = take("pert_width")) c.pert.width = to_double("pert_width", *v);
    if (const auto* v = take("pert_count")) c.pert.count = static_cast<int>(to_int("pert_count", *v));
    if (const auto* v = take("seed")) c.seed = static_cast<std::uint64_t>(to_int("seed", *v));
    if (const auto* v = take("cadence")) c.records_per_crossing = to_double("cadence", *v);
    if (const auto* v = take("snapshot_stride")) c.snapshot_stride = static_cast<int>(to_int("snapshot_stride", *v));
    if (const auto* v = take("bc_mode")) {
        if (*v == "physical") c.bc = BcMode::Physical;
        else if (*v == "exact-profile") c.bc = BcMode::ExactProfile;
        else throw ConfigError("key 'bc_mode': expected physical|exact-profile");
    }
    if (const auto* v = take("shift_mode")) {
        if (*v == "yg") c.shift_mode = ShiftMode::YgConsistent;
        else if (*v == "as-printed") c.shift_mode = ShiftMode::AsPrinted;
        else throw ConfigError("key 'shift_mode': expected yg|as-printed");
    }
    if (const auto* v = take("tail_eps")) c.tail_eps = to_double("tail_eps", *v);
    if (const auto* v = take("delta_warn")) c.delta_warn = to_double("delta_warn", *v);
    if (const auto* v = take("rho_floor")) c.rho_floor = to_double("rho_floor", *v);
    if (const auto* v = take("sweep_delta")) spec.sweep_delta = to_list("sweep_delta", *v);
    if (const auto* v = take("sweep_beta")) spec.sweep_beta = to_list("sweep_beta", *v);
    if (const auto* v = take("grids")) {
        spec.grid_list.clear();
        for (double g : to_list("grids", *v))
            spec.grid_list.push_back(static_cast<int>(g));
    }
    if (const auto* v = take("conv_t_final")) spec.conv_t_final = to_double("conv_t_final", *v);
    if (const auto* v = take("poincare_trials")) spec.poincare_trials = static_cast<int>(to_int("poincare_trials", *v));

    if (!kv.empty())
        throw ConfigError("unknown key '" + kv.begin()->first + "'");

    // invariants that do not need the connection
    if (!(c.gas.gamma > 1.0)) throw ConfigError("key 'gamma': must exceed 1");
    if (!(c.rho_plus > 0.0)) throw ConfigError("key 'rho_plus': must be positive");
    const bool needs_states = mode != RunMode::ValidatePoincare;
    if (needs_states) {
        if (!(c.u_plus < c.u_minus)) throw ConfigError("requires u_plus < u_minus");
        if (!(c.u_minus < 0.0)) throw ConfigError("requires u_minus < 0");
    }
    const bool needs_grid = mode == RunMode::Run || mode == RunMode::SweepBeta ||
                            mode == RunMode::ConvergenceStudy;
    if (needs_grid) {
        if (!(c.L > 0.0)) throw ConfigError("key 'L': must be positive");
        if (c.N < 16) throw ConfigError("key 'N': must be at least 16");
        if (!(c.t_final >= 0.0)) throw ConfigError("key 't_final': must be nonnegative");
        if (!(c.cfl > 0.0 && c.cfl <= 1.0)) throw ConfigError("key 'cfl': must lie in (0,1]");
    }
    if (mode == RunMode::SweepDelta || mode == RunMode::ValidateJacobian) {
        for (double d : spec.sweep_delta)
            if (!(d > 0.0) || !(c.u_plus + d < 0.0))
                throw ConfigError("key 'sweep_delta': each delta needs u_plus + delta < 0");
    }
    if (spec.sweep_beta.empty()) throw ConfigError("key 'sweep_beta': empty");
    if (spec.grid_list.empty()) throw ConfigError("key 'grids': empty");
    return spec;
}

double choose_beta(const ShockProfile& profile, double target, double h) {
    if (!(target > 0.0)) throw std::domain_error("choose_beta: target must be positive");
    const double amp = profile.tail_amp_left;
    const double rate = profile.tail_rate_left;
    const double raw = amp > target ? std::log(amp / target) / rate : 0.0;
    return std::max(raw, 10.0 * h);
}

// ---------------------------------------------------------------------------
// report helpers
// ---------------------------------------------------------------------------

namespace {

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (size_t k = 0; k < x.size(); ++k) {
        const double lx = std::log(x[k]);
        const double ly = std::log(y[k]);
        sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

json config_echo(const SimConfig& c) {
    json j;
    j["gamma"] = c.gas.gamma;
    j["rho_plus"] = c.rho_plus;
    j["u_plus"] = c.u_plus;
    j["u_minus"] = c.u_minus;
    j["beta"] = c.beta;
    j["beta_target"] = c.beta_target;
    j["L"] = c.L;
    j["N"] = c.N;
    j["cfl"] = c.cfl;
    j["t_final"] = c.t_final;
    j["fixed_dt"] = c.fixed_dt;
    j["epsilon"] = c.pert.epsilon;
    j["pert_shape"] = c.pert.shape == PerturbationSpec::Shape::Bump     ? "bump"
                      : c.pert.shape == PerturbationSpec::Shape::RandomBumps ? "random"
                                                                             : "none";
    j["pert_center"] = c.pert.center;
    j["pert_width"] = c.pert.width;
    j["pert_count"] = c.pert.count;
    j["seed"] = c.seed;
    j["cadence"] = c.records_per_crossing;
    j["snapshot_stride"] = c.snapshot_stride;
    j["bc_mode"] = c.bc == BcMode::Physical ? "physical" : "exact-profile";
    j["shift_mode"] = c.shift_mode == ShiftMode::YgConsistent ? "yg" : "as-printed";
    j["tail_eps"] = c.tail_eps;
    j["delta_warn"] = c.delta_warn;
    j["rho_floor"] = c.rho_floor;
    return j;
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

}  // namespace

// ---------------------------------------------------------------------------
// reusable experiment engines (also driven by the acceptance suite)
// ---------------------------------------------------------------------------

json profile_sweep_report(const SimConfig& base, const std::vector<double>& deltas) {
    json per;
    std::vector<double> dv, remark, jac, rate_l, rate_r, extent, sgap, curv;
    for (double d : deltas) {
        SimConfig c = base;
        c.u_minus = c.u_plus + d;
        Setup su;
        HugoniotOptions hopt;
        hopt.delta_warn = c.delta_warn;
        ShockConnection conn =
            solve_hugoniot({c.rho_plus, c.u_plus}, c.u_minus, c.gas, hopt);
        ProfileOptions popt;
        popt.tail_eps = c.tail_eps;
        ShockProfile p = integrate_profile(conn, popt);
        const ProfileResiduals res = profile_residuals(p);
        const TailReport tails = verify_tails(p);
        const double dev = jacobian_lemma_check(p);
        const LaxReport lax = lax_check(conn);

        json row;
        row["delta"] = d;
        row["sigma"] = conn.sigma;
        row["rho_minus"] = conn.left.rho;
        row["remark_bound_max"] = res.remark_bound_max;
        row["jacobian_deviation"] = dev;
        row["tail_rate_left"] = tails.rate_left;
        row["tail_rate_right"] = tails.rate_right;
        row["extent"] = p.xi_max() - p.xi_min();
        row["sigma_gap"] = lax.margin_plus;
        row["second_derivative_ratio"] = tails.second_derivative_ratio;
        row["max_eq_residual"] = std::max(res.max_eq1, res.max_eq2);
        row["first_integral_drift"] = res.first_integral_drift;
        per.push_back(row);

        dv.push_back(d);
        remark.push_back(res.remark_bound_max);
        jac.push_back(dev);
        rate_l.push_back(tails.rate_left);
        rate_r.push_back(tails.rate_right);
        extent.push_back(p.xi_max() - p.xi_min());
        sgap.push_back(lax.margin_plus);
        curv.push_back(tails.second_derivative_ratio);
    }
    json rep;
    rep["per_delta"] = per;
    rep["remark_bound_slope"] = loglog_slope(dv, remark);
    rep["jacobian_slope"] = loglog_slope(dv, jac);
    rep["sigma_gap_slope"] = loglog_slope(dv, sgap);
    rep["tail_rate_left_slope"] = loglog_slope(dv, rate_l);
    rep["tail_rate_right_slope"] = loglog_slope(dv, rate_r);
    rep["extent_slope"] = loglog_slope(dv, extent);
    rep["curvature_ratio_slope"] = loglog_slope(dv, curv);

    const double rs = rep["remark_bound_slope"];
    const double js = rep["jacobian_slope"];
    const double ss = rep["sigma_gap_slope"];
    const double cs = rep["curvature_ratio_slope"];
    rep["pass"] = rs >= 0.8 && rs <= 1.2 && js >= 1.7 && js <= 2.3 &&
                  ss >= 0.9 && ss <= 1.1 && std::abs(cs) <= 0.3;
    return rep;
}

json jacobian_sweep_report(const SimConfig& base, const std::vector<double>& deltas) {
    json per;
    std::vector<double> dv, dev;
    for (double d : deltas) {
        SimConfig c = base;
        c.u_minus = c.u_plus + d;
        ShockConnection conn =
            solve_hugoniot({c.rho_plus, c.u_plus}, c.u_minus, c.gas, {});
        ProfileOptions popt;
        popt.tail_eps = c.tail_eps;
        ShockProfile p = integrate_profile(conn, popt);
        const double m = jacobian_lemma_check(p);
        json row;
        row["delta"] = d;
        row["max_deviation"] = m;
        row["deviation_over_delta2"] = m / (d * d);
        per.push_back(row);
        dv.push_back(d);
        dev.push_back(m);
    }
    json rep;
    rep["per_delta"] = per;
    const double slope = loglog_slope(dv, dev);
    rep["slope"] = slope;
    bool monotone = true;
    for (size_t k = 1; k < dev.size(); ++k)
        if (dv[k] < dv[k - 1] && !(dev[k] < dev[k - 1])) monotone = false;
    rep["monotone_in_delta"] = monotone;
    rep["pass"] = slope >= 1.7 && slope <= 2.3 && monotone;
    return rep;
}

PoincareTrialSummary poincare_trials(int n_trials, std::uint64_t seed, double tol) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ua(-2.0, 2.0);
    std::uniform_real_distribution<double> ulen(0.5, 3.0);
    std::uniform_real_distribution<double> uc(-1.0, 1.0);
    std::uniform_int_distribution<int> udeg(2, 6);
    std::uniform_int_distribution<int> ukind(0, 1);

    const int n = 4001;
    std::vector<double> y(n), f(n), df(n);
    PoincareTrialSummary out{n_trials, 0, 0.0};
    for (int trial = 0; trial < n_trials; ++trial) {
        const double a = ua(rng);
        const double b = a + ulen(rng);
        for (int i = 0; i < n; ++i) y[i] = a + (b - a) * i / (n - 1.0);
        if (ukind(rng) == 0) {
            const int deg = udeg(rng);
            std::vector<double> coef(deg + 1);
            for (double& ck : coef) ck = uc(rng);
            for (int i = 0; i < n; ++i) {
                const double s = (y[i] - a) / (b - a);
                double v = 0, dv = 0;
                for (int k = deg; k >= 1; --k) {
                    v = v * s + coef[k];
                    dv = dv * s + k * coef[k];
                }
                v = v * s + coef[0];
                f[i] = v;
                df[i] = dv / (b - a);
            }
        } else {
            double alpha[4], betac[4];
            for (int k = 0; k < 4; ++k) {
                alpha[k] = uc(rng);
                betac[k] = uc(rng);
            }
            const double pi = 3.14159265358979323846;
            for (int i = 0; i < n; ++i) {
                const double s = (y[i] - a) / (b - a);
                double v = 0, dv = 0;
                for (int k = 1; k <= 4; ++k) {
                    v += alpha[k - 1] * std::sin(k * pi * s) +
                         betac[k - 1] * std::cos(k * pi * s);
                    dv += k * pi *
                          (alpha[k - 1] * std::cos(k * pi * s) -
                           betac[k - 1] * std::sin(k * pi * s)) / (b - a);
                }
                f[i] = v;
                df[i] = dv;
            }
        }
        const PoincareResult r = poincare_check(y, f, df, tol);
        if (!r.holds) {
            ++out.violations;
            out.worst_excess = std::max(out.worst_excess, r.lhs / r.rhs - 1.0);
        }
    }
    return out;
}

double poincare_extremal_ratio() {
    const int n = 4001;
    std::vector<double> y(n), f(n), df(n, 1.0);
    for (int i = 0; i < n; ++i) {
        y[i] = i / (n - 1.0);
        f[i] = y[i];
    }
    const PoincareResult r = poincare_check(y, f, df);
    return r.lhs / r.rhs;
}

json poincare_report(int trials, std::uint64_t seed) {
    const PoincareTrialSummary sum = poincare_trials(trials, seed);
    const double ratio = poincare_extremal_ratio();
    json rep;
    rep["trials"] = sum.trials;
    rep["violations"] = sum.violations;
    rep["worst_excess"] = sum.worst_excess;
    rep["extremal_ratio"] = ratio;
    rep["pass"] = sum.violations == 0 && std::abs(ratio - 1.0) <= 1e-6;
    return rep;
}

json convergence_report(const SimConfig& base, const std::vector<int>& grids,
                        double t_final) {
    json per;
    std::vector<double> hv, ev;
    for (int n : grids) {
        SimConfig c = base;
        c.N = n;
        c.t_final = t_final;
        c.pert.epsilon = 0.0;
        c.pert.shape = PerturbationSpec::Shape::None;
        c.bc = BcMode::ExactProfile;
        c.snapshot_stride = 0;
        RunResult rr = run(c);
        // L2 distance to the exact traveling wave at the final time
        const Grid grid = rr.grid;
        const double pos = rr.conn.sigma * c.t_final + rr.beta;
        Setup su = make_setup(c);
        double e2 = 0.0;
        for (int i = 0; i < grid.N; ++i) {
            const auto pt = su.profile.eval(grid.x(i) - pos);
            const double dr = rr.final_field.rho[i] - pt.rho;
            const double duv = rr.final_field.u(i) - pt.u;
            e2 += (dr * dr + duv * duv) * grid.h;
        }
        const double err = std::sqrt(e2);
        json row;
        row["N"] = n;
        row["h"] = grid.h;
        row["l2_error"] = err;
        row["mass_balance_rel"] = rr.mass_balance_rel;
        per.push_back(row);
        hv.push_back(grid.h);
        ev.push_back(err);
    }
    json rep;
    rep["per_grid"] = per;
    const double order = loglog_slope(hv, ev);
    rep["observed_order"] = order;
    rep["pass"] = order >= 1.8;
    return rep;
}

json beta_sweep_report(const SimConfig& base, const std::vector<double>& betas) {
    json per;
    std::vector<double> peak_cum;
    for (double b : betas) {
        SimConfig c = base;
        c.beta = b;
        c.snapshot_stride = 0;
        RunResult rr = run(c);
        double cum = 0.0, peak = 0.0, final_cum = 0.0;
        for (size_t k = 1; k < rr.records.size(); ++k) {
            const double dt = rr.records[k].t - rr.records[k - 1].t;
            cum += 0.5 * dt * (rr.records[k - 1].P + rr.records[k].P);
            peak = std::max(peak, std::abs(cum));
        }
        final_cum = cum;
        json row;
        row["beta"] = b;
        row["cum_P_final"] = final_cum;
        row["cum_P_peak_abs"] = peak;
        row["mass_balance_rel"] = rr.mass_balance_rel;
        per.push_back(row);
        peak_cum.push_back(peak);
    }
    bool decreasing = true;
    for (size_t k = 1; k < peak_cum.size(); ++k)
        if (!(peak_cum[k] < peak_cum[k - 1])) decreasing = false;
    json rep;
    rep["per_beta"] = per;
    rep["cum_P_decreasing_in_beta"] = decreasing;
    rep["pass"] = decreasing;
    return rep;
}

json profile_validation_report(const SimConfig& base, std::uint64_t seed,
                               const std::string& csv_path) {
    Setup su;
    {
        SimConfig c = base;
        HugoniotOptions hopt;
        hopt.delta_warn = c.delta_warn;
        su.conn = solve_hugoniot({c.rho_plus, c.u_plus}, c.u_minus, c.gas, hopt);
        ProfileOptions popt;
        popt.tail_eps = c.tail_eps;
        su.profile = integrate_profile(su.conn, popt);
    }
    const ShockProfile& p = su.profile;
    const ProfileResiduals res = profile_residuals(p);
    const TailReport tails = verify_tails(p);

    bool monotone = true;
    for (size_t k = 1; k < p.u.size(); ++k)
        if (!(p.u[k] < p.u[k - 1]) || !(p.rho[k] < p.rho[k - 1])) monotone = false;

    bool sigma_gap_positive = true;
    for (size_t k = 0; k < p.u.size(); ++k)
        if (!(su.conn.sigma - p.u[k] > 0.0)) sigma_gap_positive = false;

    // weight bounds at nodes and at random interpolated points
    const double sq = std::sqrt(su.conn.delta);
    const Weight w{&p, su.conn.delta};
    bool weight_ok = true;
    double a_min = 2.0, a_max = 0.0;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uxi(p.xi_min() - 50.0, p.xi_max() + 50.0);
    auto check_a = [&](double xi) {
        const WeightValue v = weight_at(w, xi);
        a_min = std::min(a_min, v.a);
        a_max = std::max(a_max, v.a);
        if (v.a < 1.0 - 1e-12 || v.a > 1.0 + sq + 1e-12 || !(v.da >= 0.0))
            weight_ok = false;
    };
    for (double xi : p.xi) check_a(xi);
    bool interp_in_range = true;
    for (int k = 0; k < 10000; ++k) {
        const double xi = uxi(rng);
        check_a(xi);
        const auto pt = p.eval(xi);
        if (pt.u < su.conn.right.u || pt.u > su.conn.left.u) interp_in_range = false;
    }

    if (!csv_path.empty()) {
        std::ofstream out(csv_path, std::ios::binary);
        write_profile_csv(p, out);
    }

    json rep;
    rep["delta"] = su.conn.delta;
    rep["sigma"] = su.conn.sigma;
    rep["rho_minus"] = su.conn.left.rho;
    rep["max_eq1_residual"] = res.max_eq1;
    rep["max_eq2_residual"] = res.max_eq2;
    rep["first_integral_drift"] = res.first_integral_drift;
    rep["remark_bound_max"] = res.remark_bound_max;
    rep["monotone"] = monotone;
    rep["sigma_gap_positive"] = sigma_gap_positive;
    rep["tail_rate_left"] = tails.rate_left;
    rep["tail_rate_right"] = tails.rate_right;
    rep["tail_r2_left"] = tails.r2_left;
    rep["tail_r2_right"] = tails.r2_right;
    rep["second_derivative_ratio"] = tails.second_derivative_ratio;
    rep["weight_min"] = a_min;
    rep["weight_max"] = a_max;
    rep["weight_bounds_ok"] = weight_ok;
    rep["interpolant_in_range"] = interp_in_range;
    rep["nodes"] = p.u.size();
    rep["pass"] = res.max_eq1 <= 1e-8 && res.max_eq2 <= 1e-8 &&
                  res.first_integral_drift <= 1e-10 && monotone &&
                  sigma_gap_positive && tails.rate_left > 0 &&
                  tails.rate_right > 0 && tails.r2_left >= 0.99 &&
                  tails.r2_right >= 0.99 && weight_ok && interp_in_range;
    return rep;
}

// ---------------------------------------------------------------------------
// the orchestrated single run with its output bundle
// ---------------------------------------------------------------------------

namespace {

json run_with_bundle(const ExperimentSpec& spec, const fs::path& dir) {
    const SimConfig& cfg = spec.base;

    std::ofstream diag(dir / "diag.csv", std::ios::binary);
    std::ofstream shift_csv(dir / "shift.csv", std::ios::binary);
    csv::header(diag, {"t", "E", "Gnew", "GS", "Gbd", "Drho", "Du1", "Du2", "P",
                       "supnorm_phi", "supnorm_psi", "l2_phi", "l2_psi",
                       "h1_phi", "h1_psi", "Xdot", "y0",
                       "tail_truncation_bound"});
    csv::header(shift_csv, {"t", "X", "Xdot"});
    fs::create_directories(dir / "snapshots");

    RunSinks sinks;
    sinks.on_record = [&](const DiagRecord& r) {
        csv::row(diag, {r.t, r.E, r.Gnew, r.GS, r.Gbd, r.Drho, r.Du1, r.Du2,
                        r.P, r.supnorm_phi, r.supnorm_psi, r.l2_phi, r.l2_psi,
                        r.h1_phi, r.h1_psi, r.Xdot, r.y0,
                        r.tail_truncation_bound});
    };
    sinks.on_snapshot = [&](int idx, const FluidField& f, const SnapshotAux& aux) {
        char name[32];
        std::snprintf(name, sizeof name, "%04d.csv", idx);
        std::ofstream snap(dir / "snapshots" / name, std::ios::binary);
        csv::header(snap, {"x", "rho", "u", "rho_tilde_shifted",
                           "u_tilde_shifted", "phi", "psi"});
        const Grid grid(cfg.L, cfg.N);
        for (int i = 0; i < grid.N; ++i) {
            const double uu = f.u(i);
            csv::row(snap, {grid.x(i), f.rho[i], uu, aux.rho_tilde[i],
                            aux.u_tilde[i], f.rho[i] - aux.rho_tilde[i],
                            uu - aux.u_tilde[i]});
        }
    };

    RunResult rr = run(cfg, sinks);
    for (size_t k = 0; k < rr.shift.t_hist.size(); ++k)
        csv::row(shift_csv, {rr.shift.t_hist[k], rr.shift.X_hist[k],
                             rr.shift.Xdot_hist[k]});

    // run-level checks
    const BalanceCheck bal = entropy_balance_check(rr.records);
    double min_functional = 0.0;
    bool y0_in_range = true;
    for (const DiagRecord& r : rr.records) {
        min_functional = std::min({min_functional, r.E, r.Gnew, r.GS, r.Gbd,
                                   r.Drho, r.Du1, r.Du2});
        if (!(r.y0 > 0.0 && r.y0 < 1.0)) y0_in_range = false;
    }
    const bool mass_ok = rr.mass_balance_rel <= 1e-10;
    const bool nonneg_ok = min_functional >= -1e-13;

    json rep;
    rep["sigma"] = rr.conn.sigma;
    rep["delta"] = rr.conn.delta;
    rep["rho_minus"] = rr.conn.left.rho;
    rep["beta"] = rr.beta;
    rep["steps"] = rr.steps;
    rep["records"] = rr.records.size();
    rep["E_initial"] = rr.records.front().E;
    rep["E_final"] = rr.records.back().E;
    rep["supnorm_initial"] =
        std::max(rr.records.front().supnorm_phi, rr.records.front().supnorm_psi);
    rep["supnorm_final"] =
        std::max(rr.records.back().supnorm_phi, rr.records.back().supnorm_psi);
    rep["X_final"] = rr.shift.X;
    rep["init_l2_right"] = rr.init.l2_right;
    rep["init_l2_left"] = rr.init.l2_left;
    rep["init_h1_semi"] = rr.init.h1_semi;
    rep["min_rho"] = rr.min_rho;
    rep["max_rho"] = rr.max_rho;
    rep["lipschitz_C0"] = rr.lipschitz_C0;
    rep["checks"]["mass_balance_rel"] = rr.mass_balance_rel;
    rep["checks"]["mass_balance_ok"] = mass_ok;
    rep["checks"]["functionals_nonnegative"] = nonneg_ok;
    rep["checks"]["y0_in_unit_interval"] = y0_in_range;
    rep["checks"]["entropy_balance"] = bal.pass;
    rep["checks"]["entropy_balance_budget"] = bal.budget;
    rep["pass"] = mass_ok && nonneg_ok && y0_in_range && bal.pass;
    return rep;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec) {
    ExperimentResult out;
    const fs::path dir(spec.out_dir);
    try {
        fs::create_directories(dir);
        json meta;
        meta["version"] = version_string();
        meta["mode"] = mode_name(spec.mode);
        meta["scheme"] = "muscl-minmod-llf + heun + explicit viscous";
        meta["config"] = config_echo(spec.base);
        meta["sweep_delta"] = spec.sweep_delta;
        meta["sweep_beta"] = spec.sweep_beta;
        meta["grids"] = spec.grid_list;
        meta["poincare_trials"] = spec.poincare_trials;
        meta["conv_t_final"] = spec.conv_t_final;

        json rep;
        switch (spec.mode) {
            case RunMode::Run:
                rep = run_with_bundle(spec, dir);
                break;
            case RunMode::SweepDelta:
                rep = profile_sweep_report(spec.base, spec.sweep_delta);
                break;
            case RunMode::SweepBeta:
                rep = beta_sweep_report(spec.base, spec.sweep_beta);
                break;
            case RunMode::ValidateProfile:
                rep = profile_validation_report(spec.base, spec.base.seed,
                                                (dir / "profile.csv").string());
                break;
            case RunMode::ValidatePoincare:
                rep = poincare_report(spec.poincare_trials, spec.base.seed);
                break;
            case RunMode::ValidateJacobian:
                rep = jacobian_sweep_report(spec.base, spec.sweep_delta);
                break;
            case RunMode::ConvergenceStudy:
                rep = convergence_report(spec.base, spec.grid_list,
                                         spec.conv_t_final);
                break;
        }
        out.report = rep;
        out.exit_code = rep.value("pass", true) ? 0 : 1;
        write_text(dir / "meta.json", meta.dump(2) + "\n");
        write_text(dir / "report.json", rep.dump(2) + "\n");
    } catch (const ConfigError& e) {
        out.exit_code = 2;
        out.report = {{"error", e.what()}, {"kind", "config"}};
        write_text(dir / "report.json", out.report.dump(2) + "\n");
    } catch (const SimulationAbort& e) {
        out.exit_code = 3;
        out.report = {{"error", e.what()}, {"kind", "abort"}, {"t", e.t}, {"cell", e.cell}};
        write_text(dir / "report.json", out.report.dump(2) + "\n");
    } catch (const std::domain_error& e) {
        out.exit_code = 2;
        out.report = {{"error", e.what()}, {"kind", "config"}};
        write_text(dir / "report.json", out.report.dump(2) + "\n");
    } catch (const std::exception& e) {
        out.exit_code = 3;
        out.report = {{"error", e.what()}, {"kind", "runtime"}};
        write_text(dir / "report.json", out.report.dump(2) + "\n");
    }
    return out;
}

}  // namespace shockline
