#include "shockline/shift.hpp"

#include <algorithm>
#include <cmath>

namespace shockline {

void sample_profile(const ShockProfile& profile, const Grid& grid,
                    double shift_pos, ProfileSamples& out) {
    const int n = grid.N;
    out.resize(n);
    const ShockConnection& conn = profile.conn;
    const double sq = std::sqrt(conn.delta);
    const double u_plus = conn.right.u;
    const double u_minus = conn.left.u;
    const double h = grid.h;
    const double xi0 = grid.x(0) - shift_pos;

    auto store = [&](int i, double u_val) {
        const auto pt = point_from_velocity(u_val, conn);
        out.rho[i] = pt.rho;
        out.u[i] = pt.u;
        out.drho[i] = pt.drho;
        out.du[i] = pt.du;
        out.ddu[i] = pt.ddu;
        out.a[i] = 1.0 + sq + (u_plus - pt.u) / sq;
        out.da[i] = -pt.du / sq;
    };

    // zone split: the sample abscissae xi0 + i h are uniform, so the tail
    // exponential advances by a constant factor per cell
    auto zone_index = [&](double xi_edge) {
        const double raw = std::ceil((xi_edge - xi0) / h);
        return std::clamp(static_cast<int>(raw), 0, n);
    };
    int ia = zone_index(profile.xi_min());
    int ib = zone_index(profile.xi_max());
    while (ia > 0 && xi0 + (ia - 1) * h >= profile.xi_min()) --ia;
    while (ia < n && xi0 + ia * h < profile.xi_min()) ++ia;
    while (ib > 0 && xi0 + (ib - 1) * h >= profile.xi_max()) --ib;
    while (ib < n && xi0 + ib * h < profile.xi_max()) ++ib;

    if (ia > 0) {
        const double amp = u_minus - profile.u.front();
        const double fac = std::exp(-profile.tail_rate_left * h);
        double e = std::exp(profile.tail_rate_left *
                            (xi0 + (ia - 1) * h - profile.xi_min()));
        for (int i = ia - 1; i >= 0; --i) {
            store(i, u_minus - amp * e);
            e *= fac;
            if (e < 1e-320) e = 0.0;
        }
    }
    std::size_t hint = 0;
    for (int i = ia; i < ib; ++i)
        store(i, profile.eval_hinted(xi0 + i * h, hint).u);
    if (ib < n) {
        const double amp = profile.u.back() - u_plus;
        const double fac = std::exp(-profile.tail_rate_right * h);
        double e = std::exp(-profile.tail_rate_right *
                            (xi0 + ib * h - profile.xi_max()));
        for (int i = ib; i < n; ++i) {
            store(i, u_plus + amp * e);
            e *= fac;
            if (e < 1e-320) e = 0.0;
        }
    }
}

double shift_rhs_sampled(const FluidField& field, const ProfileSamples& ps,
                         const ShiftState& s, const Grid& grid,
                         const ShockConnection& conn, ShiftMode mode) {
    const int n = grid.N;
    const bool use_dp = (mode == ShiftMode::YgConsistent);
    double i1 = 0.0, i2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double psi = field.mom[i] / field.rho[i] - ps.u[i];
        const double k = use_dp ? conn.gas.dpressure(ps.rho[i])
                                : conn.gas.pressure(ps.rho[i]);
        i1 += ps.a[i] * k / (conn.sigma - ps.u[i]) * ps.drho[i] * psi;
        i2 += ps.a[i] * ps.rho[i] * psi * ps.du[i];
    }
    return -(s.M / conn.delta) * (i1 + i2) * grid.h;
}

double shift_rhs(const FluidField& field, const ShockProfile& profile,
                 const ShiftState& s, const Grid& grid, double t,
                 ShiftMode mode) {
    thread_local ProfileSamples ps;
    const double shift_pos = profile.conn.sigma * t + s.X + s.beta;
    sample_profile(profile, grid, shift_pos, ps);
    return shift_rhs_sampled(field, ps, s, grid, profile.conn, mode);
}

void advance_shift(ShiftState& s, double t, double dt, const ShiftRhsFn& rhs) {
    const double k0 = rhs(0, t, s.X);
    const double x1 = s.X + dt * k0;
    const double k1 = rhs(1, t + dt, x1);
    s.X = 0.5 * (s.X + x1 + dt * k1);
    s.Xdot = k1;
}

ShiftSelftestResult shift_selftest(const ShockProfile& profile, const Grid& grid,
                                   double beta, double t_final, double dt,
                                   double pert_amplitude, ShiftMode mode) {
    const ShockConnection& conn = profile.conn;
    ShiftState s(conn, beta);

    // synthetic velocity perturbation, a Gaussian drifting to the right
    auto pert = [&](double x, double t) {
        if (pert_amplitude == 0.0) return 0.0;
        const double c = beta + 5.0 + 0.3 * t;
        const double z = (x - c) / 8.0;
        return pert_amplitude * std::exp(-z * z);
    };

    FluidField f;
    f.rho.resize(grid.N);
    f.mom.resize(grid.N);
    thread_local ProfileSamples ps;

    auto stage_rhs = [&](int, double t, double X) {
        const double shift_pos = conn.sigma * t + X + beta;
        sample_profile(profile, grid, shift_pos, ps);
        for (int i = 0; i < grid.N; ++i) {
            f.rho[i] = ps.rho[i];
            f.mom[i] = ps.rho[i] * (ps.u[i] + pert(grid.x(i), t));
        }
        ShiftState probe;
        probe.X = X;
        probe.M = s.M;
        probe.beta = s.beta;
        return shift_rhs_sampled(f, ps, probe, grid, conn, mode);
    };

    ShiftSelftestResult out{0.0, 0.0, 0};
    double t = 0.0;
    while (t < t_final - 0.5 * dt) {
        advance_shift(s, t, dt, stage_rhs);
        t += dt;
        ++out.steps;
        out.max_abs_X = std::max(out.max_abs_X, std::abs(s.X));
    }
    out.X_final = s.X;
    return out;
}

}  // namespace shockline
