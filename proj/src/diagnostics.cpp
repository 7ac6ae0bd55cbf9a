#include "shockline/diagnostics.hpp"

#include <algorithm>
#include <cmath>

namespace shockline {

double relative_pressure(double rho, double rho_tilde, const GasParams& gas) {
    if (!(rho > 0.0) || !(rho_tilde > 0.0))
        throw std::domain_error("relative_pressure: non-positive density");
    return gas.pressure(rho) - gas.pressure(rho_tilde) -
           gas.dpressure(rho_tilde) * (rho - rho_tilde);
}

RelativeQuantities relative_quantities(const EndState& U, const EndState& Ut,
                                       const GasParams& gas) {
    const double psi = U.u - Ut.u;
    const double prel = relative_pressure(U.rho, Ut.rho, gas);
    const double gm1 = gas.gamma - 1.0;
    RelativeQuantities out;
    out.eta = 0.5 * U.rho * psi * psi + prel / gm1;
    out.q = 0.5 * U.rho * U.u * psi * psi + U.u * prel / gm1 +
            (gas.pressure(U.rho) - gas.pressure(Ut.rho)) * psi;
    out.f_rel = U.rho * psi * psi + prel;
    return out;
}

double y_coordinate(double u_tilde_val, double u_minus, double delta) {
    if (!(delta > 0.0)) throw std::domain_error("y_coordinate: delta must be positive");
    return (u_minus - u_tilde_val) / delta;
}

namespace {

// derivative of cell samples, second order: central inside, one-sided at the
// first and last cells
inline double d_cells(const std::vector<double>& f, int i, double h) {
    const int n = static_cast<int>(f.size());
    if (i == 0) return (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
    if (i == n - 1)
        return (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
    return (f[i + 1] - f[i - 1]) / (2.0 * h);
}

// trace of cell-centered samples at the x = 0 face (quadratic extrapolation)
inline double face_value(double f0, double f1, double f2) {
    return (15.0 * f0 - 10.0 * f1 + 3.0 * f2) / 8.0;
}

// derivative trace at the x = 0 face from the first three cell centers
inline double face_derivative(double f0, double f1, double f2, double h) {
    return (-2.0 * f0 + 3.0 * f1 - f2) / h;
}

struct BoundaryTraces {
    double rho0, u0, rho_t0, u_t0, a0, psi0, dpsi0, dphi0;
};

BoundaryTraces boundary_traces(const FluidField& field, const ShockProfile& profile,
                               const ShiftState& s, const Grid& grid, double t) {
    const ShockConnection& conn = profile.conn;
    const double shift_pos = conn.sigma * t + s.X + s.beta;
    BoundaryTraces tr;
    tr.rho0 = face_value(field.rho[0], field.rho[1], field.rho[2]);
    tr.u0 = face_value(field.u(0), field.u(1), field.u(2));
    const auto pt = profile.eval(-shift_pos);
    tr.rho_t0 = pt.rho;
    tr.u_t0 = pt.u;
    const double sq = std::sqrt(conn.delta);
    tr.a0 = 1.0 + sq + (conn.right.u - pt.u) / sq;
    double phi[3], psi[3];
    for (int i = 0; i < 3; ++i) {
        const auto p = profile.eval(grid.x(i) - shift_pos);
        phi[i] = field.rho[i] - p.rho;
        psi[i] = field.u(i) - p.u;
    }
    tr.psi0 = tr.u0 - tr.u_t0;
    tr.dpsi0 = face_derivative(psi[0], psi[1], psi[2], grid.h);
    tr.dphi0 = face_derivative(phi[0], phi[1], phi[2], grid.h);
    return tr;
}

}  // namespace

double boundary_production(const FluidField& field, const ShockProfile& profile,
                           const ShiftState& s, const Grid& grid, double t) {
    const BoundaryTraces tr = boundary_traces(field, profile, s, grid, t);
    const RelativeQuantities rq = relative_quantities(
        {tr.rho0, tr.u0}, {tr.rho_t0, tr.u_t0}, profile.conn.gas);
    return tr.a0 * rq.q - tr.a0 * tr.psi0 * tr.dpsi0;
}

DiagRecord functionals(const FluidField& field, const ShockProfile& profile,
                       const ShiftState& s, const Grid& grid, double t,
                       ShiftMode mode) {
    const ShockConnection& conn = profile.conn;
    const GasParams& gas = conn.gas;
    const int n = grid.N;
    const double h = grid.h;
    const double shift_pos = conn.sigma * t + s.X + s.beta;

    thread_local ProfileSamples ps;
    sample_profile(profile, grid, shift_pos, ps);

    std::vector<double> phi(n), psi(n);
    for (int i = 0; i < n; ++i) {
        phi[i] = field.rho[i] - ps.rho[i];
        psi[i] = field.u(i) - ps.u[i];
    }

    DiagRecord r;
    r.t = t;
    const double gm = gas.gamma;

    double sum_dphi2 = 0.0, sum_dpsi2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double a = ps.a[i];
        const double da = ps.da[i];
        const double su = conn.sigma - ps.u[i];
        const RelativeQuantities rq = relative_quantities(
            {field.rho[i], field.u(i)}, {ps.rho[i], ps.u[i]}, gas);
        r.E += a * rq.eta;

        const double diag = phi[i] - ps.rho[i] / su * psi[i];
        const double rho_pow = gm == 2.0 ? 1.0 : std::pow(ps.rho[i], gm - 2.0);
        r.Gnew += da * 0.5 * su * gm * rho_pow * diag * diag;
        r.GS += std::abs(ps.du[i]) * psi[i] * psi[i];

        const double dphi = d_cells(phi, i, h);
        const double dpsi = d_cells(psi, i, h);
        r.Drho += gas.dpressure(field.rho[i]) / field.rho[i] * dphi * dphi;
        r.Du1 += a * dpsi * dpsi;
        sum_dphi2 += dphi * dphi;
        sum_dpsi2 += dpsi * dpsi;

        if (i > 0 && i + 1 < n) {
            const double uxx =
                (field.u(i - 1) - 2.0 * field.u(i) + field.u(i + 1)) / (h * h);
            const double psixx = uxx - ps.ddu[i];
            r.Du2 += psixx * psixx;
        }

        r.supnorm_phi = std::max(r.supnorm_phi, std::abs(phi[i]));
        r.supnorm_psi = std::max(r.supnorm_psi, std::abs(psi[i]));
        r.l2_phi += phi[i] * phi[i];
        r.l2_psi += psi[i] * psi[i];
    }
    r.E *= h;
    r.Gnew *= h;
    r.GS *= h;
    r.Drho *= h;
    r.Du1 *= h;
    r.Du2 *= h;
    r.l2_phi = std::sqrt(r.l2_phi * h);
    r.l2_psi = std::sqrt(r.l2_psi * h);
    r.h1_phi = std::sqrt(r.l2_phi * r.l2_phi + sum_dphi2 * h);
    r.h1_psi = std::sqrt(r.l2_psi * r.l2_psi + sum_dpsi2 * h);

    const BoundaryTraces tr = boundary_traces(field, profile, s, grid, t);
    r.Gbd = -0.5 * conn.left.u * (tr.dphi0 / tr.rho0) * (tr.dphi0 / tr.rho0);
    const RelativeQuantities rq0 = relative_quantities(
        {tr.rho0, tr.u0}, {tr.rho_t0, tr.u_t0}, gas);
    r.P = tr.a0 * rq0.q - tr.a0 * tr.psi0 * tr.dpsi0;

    r.Xdot = shift_rhs_sampled(field, ps, s, grid, conn, mode);
    r.y0 = y_coordinate(tr.u_t0, conn.left.u, conn.delta);

    // remainder bound of the truncated shift integrals: the wave variation
    // beyond x = L times the largest coefficient and the weight bound
    {
        const auto far = profile.eval(grid.L - shift_pos);
        const double coef1 =
            gas.dpressure(conn.left.rho) / (conn.sigma - conn.left.u);
        const double var = coef1 * (far.rho - conn.right.rho) +
                           conn.left.rho * (far.u - conn.right.u);
        r.tail_truncation_bound = (s.M / conn.delta) *
                                  (1.0 + std::sqrt(conn.delta)) *
                                  r.supnorm_psi * std::abs(var);
    }
    return r;
}

BalanceCheck entropy_balance_check(const std::vector<DiagRecord>& records,
                                   double budget_abs, double budget_rel) {
    BalanceCheck out;
    if (records.size() < 2) {
        out.pass = false;
        return out;
    }
    const double E0 = records.front().E;
    out.budget = budget_abs + budget_rel * E0;
    out.pass = true;
    double cum_p_plus = 0.0;
    out.residual.resize(records.size());
    out.residual[0] = records[0].E - E0 - out.budget;
    for (size_t k = 1; k < records.size(); ++k) {
        const double dt = records[k].t - records[k - 1].t;
        cum_p_plus += 0.5 * dt * (std::max(records[k - 1].P, 0.0) +
                                  std::max(records[k].P, 0.0));
        out.residual[k] = records[k].E - E0 - cum_p_plus - out.budget;
        if (out.residual[k] > 0.0) out.pass = false;
    }
    return out;
}

double jacobian_lemma_check(const ShockProfile& profile) {
    const ShockConnection& conn = profile.conn;
    const double target = 0.5 * (conn.gas.gamma + 1.0) * conn.right.rho * conn.delta;
    double max_dev = 0.0;
    const size_t n = profile.u.size();
    for (size_t k = 1; k + 1 < n; ++k) {
        const double y = y_coordinate(profile.u[k], conn.left.u, conn.delta);
        const double dy_dx = -profile.du[k] / conn.delta;
        const double ratio = dy_dx / (y * (1.0 - y));
        max_dev = std::max(max_dev, std::abs(ratio - target));
    }
    return max_dev;
}

PoincareResult poincare_check(std::span<const double> y,
                              std::span<const double> f,
                              std::span<const double> df, double tol_q) {
    const size_t n = y.size();
    if (n < 3 || f.size() != n || (!df.empty() && df.size() != n))
        throw std::domain_error("poincare_check: bad sample arrays");
    const double a = y.front(), b = y.back();

    std::vector<double> dfv;
    if (df.empty()) {
        dfv.resize(n);
        dfv[0] = (f[1] - f[0]) / (y[1] - y[0]);
        dfv[n - 1] = (f[n - 1] - f[n - 2]) / (y[n - 1] - y[n - 2]);
        for (size_t i = 1; i + 1 < n; ++i)
            dfv[i] = (f[i + 1] - f[i - 1]) / (y[i + 1] - y[i - 1]);
        df = dfv;
    }

    auto trapezoid = [&](auto&& g) {
        double s = 0.0;
        for (size_t i = 0; i + 1 < n; ++i)
            s += 0.5 * (y[i + 1] - y[i]) * (g(i) + g(i + 1));
        return s;
    };

    const double mean = trapezoid([&](size_t i) { return f[i]; }) / (b - a);
    PoincareResult out;
    out.lhs = trapezoid([&](size_t i) {
        const double d = f[i] - mean;
        return d * d;
    });
    out.rhs = 0.5 * trapezoid([&](size_t i) {
        return (y[i] - a) * (b - y[i]) * df[i] * df[i];
    });
    // absolute slack at the round-off floor of the quadrature
    double fmax = 0.0;
    for (size_t i = 0; i < n; ++i) fmax = std::max(fmax, std::abs(f[i]));
    const double floor = 4.0 * (1e-15 * fmax) * (1e-15 * fmax) * (b - a);
    out.holds = out.lhs <= out.rhs * (1.0 + tol_q) + floor;
    return out;
}

PerturbationSources perturbation_sources(double phi, double psi, double rho,
                                         const ShockProfile::Point& wave,
                                         const GasParams& gas) {
    PerturbationSources out;
    out.F = -psi * wave.drho - phi * wave.du;
    out.G = wave.drho * (phi * gas.dpressure(wave.rho) / wave.rho -
                         (gas.dpressure(rho) - gas.dpressure(wave.rho))) -
            rho * psi * wave.du - phi / wave.rho * wave.ddu;
    return out;
}

}  // namespace shockline
