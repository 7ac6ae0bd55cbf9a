#include "shockline/run.hpp"

#include <algorithm>
#include <cmath>

#include "shockline/experiments.hpp"

namespace shockline {

Setup make_setup(const SimConfig& cfg) {
    cfg.gas.validate();
    if (!(cfg.rho_plus > 0.0))
        throw ConfigError("rho_plus must be positive");
    if (!(cfg.u_plus < cfg.u_minus))
        throw ConfigError("requires u_plus < u_minus");
    if (!(cfg.u_minus < 0.0))
        throw ConfigError("requires u_minus < 0");

    Setup su;
    HugoniotOptions hopt;
    hopt.delta_warn = cfg.delta_warn;
    su.conn = solve_hugoniot({cfg.rho_plus, cfg.u_plus}, cfg.u_minus, cfg.gas, hopt);
    ProfileOptions popt;
    popt.tail_eps = cfg.tail_eps;
    su.profile = integrate_profile(su.conn, popt);
    su.grid = Grid(cfg.L, cfg.N);
    su.beta = cfg.beta >= 0.0 ? cfg.beta
                              : choose_beta(su.profile, cfg.beta_target, su.grid.h);
    return su;
}

RunResult run(const SimConfig& cfg, const RunSinks& sinks) {
    Setup su = make_setup(cfg);
    const ShockConnection& conn = su.conn;
    const Grid& grid = su.grid;

    // the wave must not exit the domain and the far Dirichlet cell must sit
    // in the tail: L > beta + sigma t_final + 20/rate
    const double margin = 20.0 / su.profile.tail_rate_right;
    if (!(cfg.L > su.beta + conn.sigma * cfg.t_final + margin))
        throw ConfigError("domain too short: L must exceed beta + sigma t_final + " +
                          std::to_string(margin));

    RunResult out;
    out.conn = conn;
    out.beta = su.beta;
    out.grid = grid;

    FluidField f = init_data(cfg, su.profile, grid, su.beta, &out.init);
    ShiftState s(conn, su.beta);
    BoundaryContext bc{&su.profile, conn.sigma, su.beta};

    double dt_rec = cfg.t_final;
    if (conn.sigma * cfg.records_per_crossing > 0.0)
        dt_rec = std::min(cfg.t_final,
                          1.0 / (cfg.records_per_crossing * conn.sigma));
    if (!(dt_rec > 0.0)) dt_rec = 1.0;

    double mass0 = 0.0;
    for (double r : f.rho) mass0 += r;
    mass0 *= grid.h;
    double cum_left = 0.0, cum_right = 0.0;
    out.min_rho = out.max_rho = f.rho[0];

    int snap_idx = 0;
    auto emit = [&](int rec_idx) {
        DiagRecord r = functionals(f, su.profile, s, grid, f.t, cfg.shift_mode);
        s.Xdot = r.Xdot;
        s.record(f.t);
        out.records.push_back(r);
        if (sinks.on_record) sinks.on_record(r);
        for (double rho : f.rho) {
            out.min_rho = std::min(out.min_rho, rho);
            out.max_rho = std::max(out.max_rho, rho);
        }
        const double sup = r.supnorm_phi + r.supnorm_psi;
        if (sup > 0.0)
            out.lipschitz_C0 = std::max(out.lipschitz_C0, std::abs(r.Xdot) / sup);
        if (cfg.snapshot_stride > 0 && rec_idx % cfg.snapshot_stride == 0 &&
            sinks.on_snapshot) {
            SnapshotAux aux;
            aux.rho_tilde.resize(grid.N);
            aux.u_tilde.resize(grid.N);
            const double pos = conn.sigma * f.t + s.X + su.beta;
            for (int i = 0; i < grid.N; ++i) {
                const auto pt = su.profile.eval(grid.x(i) - pos);
                aux.rho_tilde[i] = pt.rho;
                aux.u_tilde[i] = pt.u;
            }
            sinks.on_snapshot(snap_idx++, f, aux);
        }
    };

    emit(0);

    int rec_idx = 0;
    double k0 = 0.0, k1 = 0.0, x_pred = 0.0;
    double dt = 0.0;
    const StageHook hook = [&](int stage, const FluidField& sf) {
        if (stage == 0) {
            k0 = shift_rhs(sf, su.profile, s, grid, sf.t, cfg.shift_mode);
            x_pred = s.X + dt * k0;
        } else {
            ShiftState probe;  // light pose, no history
            probe.X = x_pred;
            probe.M = s.M;
            probe.beta = s.beta;
            k1 = shift_rhs(sf, su.profile, probe, grid, sf.t, cfg.shift_mode);
        }
    };

    while (f.t < cfg.t_final) {
        ++rec_idx;
        const double t_target = std::min(rec_idx * dt_rec, cfg.t_final);
        while (f.t < t_target - 1e-12 * std::max(1.0, t_target)) {
            dt = cfl_dt(f, cfg, grid);
            if (cfg.fixed_dt > 0.0) dt = std::min(cfg.fixed_dt, dt);
            if (f.t + dt > t_target) dt = t_target - f.t;

            const StepFluxes fx = step(f, dt, cfg, grid, bc, hook);
            s.X = 0.5 * (s.X + x_pred + dt * k1);
            s.Xdot = k1;
            cum_left += fx.mass_left;
            cum_right += fx.mass_right;
            ++out.steps;

            const double wave_pos = conn.sigma * f.t + s.X + su.beta;
            if (wave_pos > cfg.L - margin)
                throw SimulationAbort("wave reached the far-field margin", f.t, grid.N - 1);
        }
        f.t = t_target;  // suppress accumulated round-off in the clock
        emit(rec_idx);
        if (f.t >= cfg.t_final) break;
    }

    double mass1 = 0.0;
    for (double r : f.rho) mass1 += r;
    mass1 *= grid.h;
    out.mass_balance_rel =
        std::abs(mass1 - mass0 + (cum_right - cum_left)) / std::max(1.0, mass0);

    out.shift = std::move(s);
    out.final_field = std::move(f);
    return out;
}

}  // namespace shockline
