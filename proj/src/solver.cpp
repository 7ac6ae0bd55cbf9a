#include "shockline/solver.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace shockline {

Flux2 physical_flux(const EndState& w, const GasParams& gas) {
    const double m = w.rho * w.u;
    return {m, m * w.u + gas.pressure(w.rho)};
}

Flux2 flux(const EndState& left, const EndState& right, const GasParams& gas) {
    if (!(left.rho > 0.0) || !(right.rho > 0.0))
        throw std::domain_error("flux: vacuum input state");
    const Flux2 fl = physical_flux(left, gas);
    const Flux2 fr = physical_flux(right, gas);
    const double al = std::abs(left.u) + std::sqrt(gas.dpressure(left.rho));
    const double ar = std::abs(right.u) + std::sqrt(gas.dpressure(right.rho));
    const double alpha = std::max(al, ar);
    Flux2 out;
    out.mass = 0.5 * (fl.mass + fr.mass) - 0.5 * alpha * (right.rho - left.rho);
    out.mom = 0.5 * (fl.mom + fr.mom) -
              0.5 * alpha * (right.rho * right.u - left.rho * left.u);
    return out;
}

double viscous_term(std::span<const double> u_pad, int i, double h) {
    return (u_pad[i] - 2.0 * u_pad[i + 1] + u_pad[i + 2]) / (h * h);
}

std::pair<GhostCells, GhostCells> apply_boundary(const FluidField& field,
                                                 const SimConfig& cfg,
                                                 const BoundaryContext& bc) {
    GhostCells left{}, right{};
    if (cfg.bc == BcMode::Physical) {
        // reflect u about u- so the face value at x = 0 is exact; density is
        // free at an outflow boundary, zeroth-order extrapolation
        const double r0 = field.rho[0];
        left.rho[0] = r0;
        left.mom[0] = r0 * (2.0 * cfg.u_minus - field.u(0));
        left.rho[1] = r0;
        left.mom[1] = r0 * (2.0 * cfg.u_minus - field.u(1));
        right.rho[0] = right.rho[1] = cfg.rho_plus;
        right.mom[0] = right.mom[1] = cfg.rho_plus * cfg.u_plus;
    } else {
        // ghosts sampled from the moving wave at the field's own time
        const double h = cfg.L / cfg.N;
        const double shift_pos = bc.sigma * field.t + bc.beta;
        for (int k = 0; k < 2; ++k) {
            const double xl = -(k + 0.5) * h;
            const auto pl = bc.profile->eval(xl - shift_pos);
            left.rho[k] = pl.rho;
            left.mom[k] = pl.rho * pl.u;
            const double xr = cfg.L + (k + 0.5) * h;
            const auto pr = bc.profile->eval(xr - shift_pos);
            right.rho[k] = pr.rho;
            right.mom[k] = pr.rho * pr.u;
        }
    }
    return {left, right};
}

double cfl_dt(const FluidField& field, const SimConfig& cfg, const Grid& grid) {
    double speed = 0.0;
    for (int i = 0; i < field.size(); ++i) {
        if (!(field.rho[i] > 0.0))
            throw std::domain_error("cfl_dt: non-positive density");
        const double c = std::sqrt(cfg.gas.dpressure(field.rho[i]));
        speed = std::max(speed, std::abs(field.u(i)) + c);
    }
    return cfg.cfl * std::min(grid.h / speed, 0.5 * grid.h * grid.h);
}

namespace {

inline double minmod(double a, double b) {
    if (a * b <= 0.0) return 0.0;
    return std::abs(a) < std::abs(b) ? a : b;
}

struct Workspace {
    std::vector<double> rho_pad, mom_pad, u_pad;  // N + 4
    std::vector<double> srho, smom;               // limited slopes, N + 4
    std::vector<double> fmass, fmom;              // N + 1 interface fluxes
    std::vector<double> drho, dmom;               // stage rates, N
    FluidField stage;
};

thread_local Workspace ws;

struct StageFluxes {
    double mass_left, mass_right;
};

// One semi-discrete right-hand side: MUSCL/minmod limited reconstruction of
// the conservative variables, local Lax-Friedrichs interface fluxes, central
// viscous term on u = mom/rho.
StageFluxes eval_rhs(const std::vector<double>& rho, const std::vector<double>& mom,
                     const SimConfig& cfg, const Grid& grid,
                     const GhostCells& gl, const GhostCells& gr,
                     std::vector<double>& drho, std::vector<double>& dmom) {
    const int n = grid.N;
    auto& rp = ws.rho_pad;
    auto& mp = ws.mom_pad;
    rp.resize(n + 4);
    mp.resize(n + 4);
    rp[0] = gl.rho[1]; mp[0] = gl.mom[1];
    rp[1] = gl.rho[0]; mp[1] = gl.mom[0];
    std::copy(rho.begin(), rho.end(), rp.begin() + 2);
    std::copy(mom.begin(), mom.end(), mp.begin() + 2);
    rp[n + 2] = gr.rho[0]; mp[n + 2] = gr.mom[0];
    rp[n + 3] = gr.rho[1]; mp[n + 3] = gr.mom[1];

    auto& up = ws.u_pad;
    up.resize(n + 4);
    for (int k = 0; k < n + 4; ++k) up[k] = mp[k] / rp[k];

    auto& sr = ws.srho;
    auto& sm = ws.smom;
    sr.resize(n + 4);
    sm.resize(n + 4);
    for (int k = 1; k <= n + 2; ++k) {
        sr[k] = minmod(rp[k + 1] - rp[k], rp[k] - rp[k - 1]);
        sm[k] = minmod(mp[k + 1] - mp[k], mp[k] - mp[k - 1]);
    }

    auto& fm = ws.fmass;
    auto& fq = ws.fmom;
    fm.resize(n + 1);
    fq.resize(n + 1);
    for (int f = 0; f <= n; ++f) {
        const int kl = f + 1, kr = f + 2;  // padded cells adjacent to face f
        const double rl = rp[kl] + 0.5 * sr[kl];
        const double ml = mp[kl] + 0.5 * sm[kl];
        const double rr = rp[kr] - 0.5 * sr[kr];
        const double mr = mp[kr] - 0.5 * sm[kr];
        if (!(rl > 0.0) || !(rr > 0.0))
            throw SimulationAbort("reconstructed vacuum state at a face", 0.0, f);
        const Flux2 fx = flux({rl, ml / rl}, {rr, mr / rr}, cfg.gas);
        fm[f] = fx.mass;
        fq[f] = fx.mom;
    }

    const double inv_h = 1.0 / grid.h;
    const double inv_h2 = inv_h * inv_h;
    drho.resize(n);
    dmom.resize(n);
    for (int i = 0; i < n; ++i) {
        const int k = i + 2;
        drho[i] = -(fm[i + 1] - fm[i]) * inv_h;
        const double uxx = (up[k - 1] - 2.0 * up[k] + up[k + 1]) * inv_h2;
        dmom[i] = -(fq[i + 1] - fq[i]) * inv_h + GasParams::mu * uxx;
    }
    return {fm[0], fm[n]};
}

void assert_positive(const std::vector<double>& rho, double floor, double t) {
    for (int i = 0; i < static_cast<int>(rho.size()); ++i) {
        if (!(rho[i] > floor)) {
            std::ostringstream msg;
            msg << "density " << rho[i] << " below floor " << floor
                << " at t=" << t << " cell " << i;
            throw SimulationAbort(msg.str(), t, i);
        }
    }
}

}  // namespace

StepFluxes step(FluidField& field, double dt, const SimConfig& cfg,
                const Grid& grid, const BoundaryContext& bc,
                const StageHook& hook) {
    const int n = grid.N;
    const double t0 = field.t;

    if (hook) hook(0, field);
    const auto [gl0, gr0] = apply_boundary(field, cfg, bc);
    const StageFluxes s0 =
        eval_rhs(field.rho, field.mom, cfg, grid, gl0, gr0, ws.drho, ws.dmom);

    FluidField& stage = ws.stage;
    stage.t = t0 + dt;
    stage.rho.resize(n);
    stage.mom.resize(n);
    for (int i = 0; i < n; ++i) {
        stage.rho[i] = field.rho[i] + dt * ws.drho[i];
        stage.mom[i] = field.mom[i] + dt * ws.dmom[i];
    }
    assert_positive(stage.rho, cfg.rho_floor, stage.t);
    if (hook) hook(1, stage);

    const auto [gl1, gr1] = apply_boundary(stage, cfg, bc);
    const StageFluxes s1 =
        eval_rhs(stage.rho, stage.mom, cfg, grid, gl1, gr1, ws.drho, ws.dmom);

    for (int i = 0; i < n; ++i) {
        field.rho[i] = 0.5 * (field.rho[i] + stage.rho[i] + dt * ws.drho[i]);
        field.mom[i] = 0.5 * (field.mom[i] + stage.mom[i] + dt * ws.dmom[i]);
    }
    field.t = t0 + dt;
    assert_positive(field.rho, cfg.rho_floor, field.t);

    StepFluxes out;
    out.mass_left = 0.5 * dt * (s0.mass_left + s1.mass_left);
    out.mass_right = 0.5 * dt * (s0.mass_right + s1.mass_right);
    return out;
}

FluidField init_data(const SimConfig& cfg, const ShockProfile& profile,
                     const Grid& grid, double beta, InitReport* report) {
    FluidField f;
    f.t = 0.0;
    f.rho.resize(grid.N);
    f.mom.resize(grid.N);

    std::vector<double> u(grid.N);
    for (int i = 0; i < grid.N; ++i) {
        const auto pt = profile.eval(grid.x(i) - beta);
        f.rho[i] = pt.rho;
        u[i] = pt.u;
    }

    auto bump = [](double s) {
        return std::abs(s) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - s * s)) : 0.0;
    };
    const PerturbationSpec& pert = cfg.pert;
    const double center = pert.center >= 0.0 ? pert.center : beta;
    if (pert.epsilon != 0.0 && pert.shape == PerturbationSpec::Shape::Bump) {
        if (!(center - pert.width > 0.0))
            throw std::domain_error(
                "init_data: velocity perturbation must vanish at x = 0");
        for (int i = 0; i < grid.N; ++i) {
            const double b = pert.epsilon * bump((grid.x(i) - center) / pert.width);
            f.rho[i] += b;
            u[i] += b;
        }
    } else if (pert.epsilon != 0.0 &&
               pert.shape == PerturbationSpec::Shape::RandomBumps) {
        std::mt19937_64 rng(cfg.seed);
        std::uniform_real_distribution<double> amp(-1.0, 1.0);
        std::uniform_real_distribution<double> wid(2.0, 8.0);
        for (int kb = 0; kb < pert.count; ++kb) {
            const double w = wid(rng);
            std::uniform_real_distribution<double> pos(
                std::max(w + grid.h, center - 30.0),
                std::min(cfg.L - w - 10.0 * grid.h, center + 30.0));
            const double c = pos(rng);
            const double a = pert.epsilon * amp(rng);
            for (int i = 0; i < grid.N; ++i) {
                const double b = a * bump((grid.x(i) - c) / w);
                f.rho[i] += b;
                u[i] += b;
            }
        }
    }

    for (int i = 0; i < grid.N; ++i) {
        if (!(f.rho[i] > 0.0))
            throw std::domain_error("init_data: perturbation violates positivity");
        f.mom[i] = f.rho[i] * u[i];
    }

    if (report) {
        double l2r = 0, l2l = 0, h1 = 0, mn = f.rho[0];
        for (int i = 0; i < grid.N; ++i) {
            const double x = grid.x(i);
            if (x > beta) {
                const double dr = f.rho[i] - cfg.rho_plus;
                const double dv = u[i] - cfg.u_plus;
                l2r += (dr * dr + dv * dv) * grid.h;
            } else {
                const double dr = f.rho[i] - profile.conn.left.rho;
                const double dv = u[i] - cfg.u_minus;
                l2l += (dr * dr + dv * dv) * grid.h;
            }
            mn = std::min(mn, f.rho[i]);
        }
        for (int i = 1; i + 1 < grid.N; ++i) {
            const double drx = (f.rho[i + 1] - f.rho[i - 1]) / (2.0 * grid.h);
            const double dux = (u[i + 1] - u[i - 1]) / (2.0 * grid.h);
            h1 += (drx * drx + dux * dux) * grid.h;
        }
        report->l2_right = std::sqrt(l2r);
        report->l2_left = std::sqrt(l2l);
        report->h1_semi = std::sqrt(h1);
        report->min_rho = mn;
    }
    return f;
}

}  // namespace shockline
