#include "shockline/profile.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "shockline/csv.hpp"

namespace shockline {

double density_from_velocity(double u_val, const ShockConnection& conn) {
    if (!(u_val < conn.sigma))
        throw std::domain_error(
            "density_from_velocity: requires u < sigma (mass flux sonic line)");
    return conn.mass_flux() / (u_val - conn.sigma);
}

// Same formula without the interval guard; used inside the integrator where
// Runge-Kutta stages may poke marginally past an endpoint.
static double rhs_raw(double u_val, const ShockConnection& conn) {
    const double j = conn.mass_flux();
    const double rho = j / (u_val - conn.sigma);
    return (u_val - conn.right.u) * j +
           conn.gas.pressure(rho) - conn.gas.pressure(conn.right.rho);
}

double profile_rhs(double u_val, const ShockConnection& conn) {
    if (u_val < conn.right.u || u_val > conn.left.u)
        throw std::domain_error("profile_rhs: u outside [u+, u-]");
    return rhs_raw(u_val, conn);
}

// d(u')/du, for the curvature column u'' = (du'/du) u'.
static double rhs_slope(double u_val, const ShockConnection& conn) {
    const double j = conn.mass_flux();
    const double rho = j / (u_val - conn.sigma);
    return j + conn.gas.dpressure(rho) * rho / (conn.sigma - u_val);
}

// ---------------------------------------------------------------------------
// adaptive Cash-Karp RK45 on the scalar autonomous equation
// ---------------------------------------------------------------------------

namespace {

struct RkStep {
    double u_new;
    double error;
};

RkStep cash_karp(double u, double h, const ShockConnection& conn) {
    constexpr double b21 = 1.0 / 5.0;
    constexpr double b31 = 3.0 / 40.0, b32 = 9.0 / 40.0;
    constexpr double b41 = 3.0 / 10.0, b42 = -9.0 / 10.0, b43 = 6.0 / 5.0;
    constexpr double b51 = -11.0 / 54.0, b52 = 5.0 / 2.0, b53 = -70.0 / 27.0,
                     b54 = 35.0 / 27.0;
    constexpr double b61 = 1631.0 / 55296.0, b62 = 175.0 / 512.0,
                     b63 = 575.0 / 13824.0, b64 = 44275.0 / 110592.0,
                     b65 = 253.0 / 4096.0;
    constexpr double c1 = 37.0 / 378.0, c3 = 250.0 / 621.0, c4 = 125.0 / 594.0,
                     c6 = 512.0 / 1771.0;
    constexpr double d1 = c1 - 2825.0 / 27648.0, d3 = c3 - 18575.0 / 48384.0,
                     d4 = c4 - 13525.0 / 55296.0, d5 = -277.0 / 14336.0,
                     d6 = c6 - 1.0 / 4.0;

    const double k1 = rhs_raw(u, conn);
    const double k2 = rhs_raw(u + h * b21 * k1, conn);
    const double k3 = rhs_raw(u + h * (b31 * k1 + b32 * k2), conn);
    const double k4 = rhs_raw(u + h * (b41 * k1 + b42 * k2 + b43 * k3), conn);
    const double k5 =
        rhs_raw(u + h * (b51 * k1 + b52 * k2 + b53 * k3 + b54 * k4), conn);
    const double k6 = rhs_raw(
        u + h * (b61 * k1 + b62 * k2 + b63 * k3 + b64 * k4 + b65 * k5), conn);

    RkStep out;
    out.u_new = u + h * (c1 * k1 + c3 * k3 + c4 * k4 + c6 * k6);
    out.error = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6);
    return out;
}

// Integrate from (0, u0) in the given direction until |u - u_target| drops
// below the threshold; returns (xi, u) nodes excluding the start.
void integrate_side(const ShockConnection& conn, double u0, int direction,
                    double u_target, double stop_gap, const ProfileOptions& opts,
                    std::vector<double>& xis, std::vector<double>& us) {
    const double cap = opts.max_step_scale / conn.delta;
    double xi = 0.0, u = u0;
    double h = direction * std::min(cap, 1e-3 * conn.delta /
                                             std::abs(rhs_raw(u0, conn)));
    long guard = 0;
    while (std::abs(u - u_target) > stop_gap) {
        if (++guard > 2'000'000)
            throw std::runtime_error("integrate_profile: node budget exhausted");
        if (std::abs(h) > cap) h = direction * cap;
        const RkStep trial = cash_karp(u, h, conn);
        const double tol =
            opts.abs_tol_scale * conn.delta + opts.rel_tol * std::abs(u);
        if (std::abs(trial.error) > tol) {
            const double shrink = std::max(
                0.2, 0.9 * std::pow(tol / std::abs(trial.error), 0.25));
            h *= shrink;
            if (std::abs(h) < 1e-14 * std::max(1.0, std::abs(xi))) {
                std::ostringstream msg;
                msg << "integrate_profile: step underflow at xi=" << xi
                    << " u=" << u << " h=" << h;
                throw std::runtime_error(msg.str());
            }
            continue;
        }
        xi += h;
        u = trial.u_new;
        xis.push_back(xi);
        us.push_back(u);
        const double grow =
            trial.error == 0.0
                ? 5.0
                : std::min(5.0, 0.9 * std::pow(tol / std::abs(trial.error), 0.2));
        h *= grow;
    }
}

struct TailFit {
    double rate, amp_at_zero, r2;
};

// Linear regression of log residual against xi over the trailing window.
TailFit fit_tail(const std::vector<double>& xi, const std::vector<double>& res,
                 size_t begin, size_t end, int sign) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0, n = 0;
    for (size_t k = begin; k < end; ++k) {
        const double y = std::log(res[k]);
        sx += xi[k];
        sy += y;
        sxx += xi[k] * xi[k];
        sxy += xi[k] * y;
        n += 1;
    }
    const double denom = n * sxx - sx * sx;
    const double slope = (n * sxy - sx * sy) / denom;
    const double icept = (sy - slope * sx) / n;
    double ss_res = 0, ss_tot = 0;
    const double mean = sy / n;
    for (size_t k = begin; k < end; ++k) {
        const double y = std::log(res[k]);
        const double fit = icept + slope * xi[k];
        ss_res += (y - fit) * (y - fit);
        ss_tot += (y - mean) * (y - mean);
    }
    TailFit out;
    out.rate = sign * slope;  // decay rate as a positive number
    out.amp_at_zero = std::exp(icept);
    out.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 0.0;
    return out;
}

// Shape-preserving cubic slopes (Fritsch-Carlson weighted harmonic mean).
std::vector<double> pchip_slopes(const std::vector<double>& x,
                                 const std::vector<double>& y) {
    const size_t n = x.size();
    std::vector<double> m(n, 0.0);
    if (n < 2) return m;
    std::vector<double> d(n - 1), h(n - 1);
    for (size_t k = 0; k + 1 < n; ++k) {
        h[k] = x[k + 1] - x[k];
        d[k] = (y[k + 1] - y[k]) / h[k];
    }
    for (size_t k = 1; k + 1 < n; ++k) {
        if (d[k - 1] * d[k] <= 0.0) {
            m[k] = 0.0;
        } else {
            const double w1 = 2.0 * h[k] + h[k - 1];
            const double w2 = h[k] + 2.0 * h[k - 1];
            m[k] = (w1 + w2) / (w1 / d[k - 1] + w2 / d[k]);
        }
    }
    auto end_slope = [](double h0, double h1, double d0, double d1) {
        double m0 = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if (m0 * d0 <= 0.0)
            m0 = 0.0;
        else if (d0 * d1 < 0.0 && std::abs(m0) > 3.0 * std::abs(d0))
            m0 = 3.0 * d0;
        return m0;
    };
    if (n == 2) {
        m[0] = m[1] = d[0];
    } else {
        m[0] = end_slope(h[0], h[1], d[0], d[1]);
        m[n - 1] = end_slope(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
    }
    return m;
}

}  // namespace

ShockProfile integrate_profile(const ShockConnection& conn,
                               const ProfileOptions& opts) {
    const double j = conn.mass_flux();
    const double rho_mid = 0.5 * (conn.left.rho + conn.right.rho);
    const double u0 = conn.sigma + j / rho_mid;  // rho(u0) = rho_mid exactly
    const double stop_gap = opts.tail_eps * conn.delta;

    std::vector<double> xi_fwd, u_fwd, xi_bwd, u_bwd;
    integrate_side(conn, u0, +1, conn.right.u, stop_gap, opts, xi_fwd, u_fwd);
    integrate_side(conn, u0, -1, conn.left.u, stop_gap, opts, xi_bwd, u_bwd);

    ShockProfile p;
    p.conn = conn;
    p.tail_eps = opts.tail_eps;
    const size_t n = xi_bwd.size() + 1 + xi_fwd.size();
    p.xi.reserve(n);
    p.u.reserve(n);
    for (size_t k = xi_bwd.size(); k-- > 0;) {
        p.xi.push_back(xi_bwd[k]);
        p.u.push_back(u_bwd[k]);
    }
    p.xi.push_back(0.0);
    p.u.push_back(u0);
    for (size_t k = 0; k < xi_fwd.size(); ++k) {
        p.xi.push_back(xi_fwd[k]);
        p.u.push_back(u_fwd[k]);
    }

    p.rho.resize(n);
    p.du.resize(n);
    p.drho.resize(n);
    p.ddu.resize(n);
    for (size_t k = 0; k < n; ++k) {
        const double u = p.u[k];
        p.rho[k] = j / (u - conn.sigma);
        p.du[k] = rhs_raw(u, conn);
        p.drho[k] = p.rho[k] * p.du[k] / (conn.sigma - u);
        p.ddu[k] = rhs_slope(u, conn) * p.du[k];
    }

    // tail fits on the trailing windows of each side
    {
        std::vector<double> res(n);
        for (size_t k = 0; k < n; ++k) res[k] = p.u[k] - conn.right.u;
        const size_t n_right = xi_fwd.size();
        size_t w = std::max<size_t>(opts.tail_fit_min_points,
                                    static_cast<size_t>(opts.tail_fit_fraction *
                                                        double(n_right)));
        w = std::min(w, n_right);
        const TailFit f = fit_tail(p.xi, res, n - w, n, -1);
        p.tail_rate_right = f.rate;
        p.tail_amp_right = f.amp_at_zero;
        p.tail_r2_right = f.r2;
    }
    {
        std::vector<double> res(n);
        for (size_t k = 0; k < n; ++k) res[k] = conn.left.u - p.u[k];
        const size_t n_left = xi_bwd.size();
        size_t w = std::max<size_t>(opts.tail_fit_min_points,
                                    static_cast<size_t>(opts.tail_fit_fraction *
                                                        double(n_left)));
        w = std::min(w, n_left);
        const TailFit f = fit_tail(p.xi, res, 0, w, +1);
        p.tail_rate_left = f.rate;
        p.tail_amp_left = f.amp_at_zero;
        p.tail_r2_left = f.r2;
    }

    p.hermite_slope = pchip_slopes(p.xi, p.u);
    return p;
}

ShockProfile::Point point_from_velocity(double uq, const ShockConnection& c) {
    const double j = c.mass_flux();
    const double inv = 1.0 / (uq - c.sigma);  // negative along the wave
    ShockProfile::Point out;
    out.u = uq;
    out.rho = j * inv;
    out.du = (uq - c.right.u) * j + c.gas.pressure(out.rho) -
             c.gas.pressure(c.right.rho);
    out.drho = -out.rho * out.du * inv;
    out.ddu = (j - c.gas.dpressure(out.rho) * out.rho * inv) * out.du;
    return out;
}

namespace {

inline ShockProfile::Point point_from_u(double uq, const ShockConnection& c) {
    return point_from_velocity(uq, c);
}

}  // namespace

ShockProfile::Point ShockProfile::eval(double xq) const {
    double uq;
    if (xq <= xi.front()) {
        const double amp = conn.left.u - u.front();
        uq = conn.left.u - amp * std::exp(tail_rate_left * (xq - xi.front()));
    } else if (xq >= xi.back()) {
        const double amp = u.back() - conn.right.u;
        uq = conn.right.u + amp * std::exp(-tail_rate_right * (xq - xi.back()));
    } else {
        const auto it = std::upper_bound(xi.begin(), xi.end(), xq);
        const size_t i = static_cast<size_t>(it - xi.begin()) - 1;
        const double h = xi[i + 1] - xi[i];
        const double t = (xq - xi[i]) / h;
        const double t2 = t * t, t3 = t2 * t;
        uq = (2 * t3 - 3 * t2 + 1) * u[i] + (t3 - 2 * t2 + t) * h * hermite_slope[i] +
             (-2 * t3 + 3 * t2) * u[i + 1] + (t3 - t2) * h * hermite_slope[i + 1];
    }
    return point_from_u(uq, conn);
}

ShockProfile::Point ShockProfile::eval_hinted(double xq, std::size_t& hint) const {
    double uq;
    if (xq <= xi.front()) {
        const double amp = conn.left.u - u.front();
        uq = conn.left.u - amp * std::exp(tail_rate_left * (xq - xi.front()));
    } else if (xq >= xi.back()) {
        const double amp = u.back() - conn.right.u;
        uq = conn.right.u + amp * std::exp(-tail_rate_right * (xq - xi.back()));
    } else {
        size_t i = std::min(hint, xi.size() - 2);
        while (xi[i + 1] < xq) ++i;  // monotone sweep; amortized O(1)
        while (i > 0 && xi[i] > xq) --i;
        hint = i;
        const double h = xi[i + 1] - xi[i];
        const double t = (xq - xi[i]) / h;
        const double t2 = t * t, t3 = t2 * t;
        uq = (2 * t3 - 3 * t2 + 1) * u[i] + (t3 - 2 * t2 + t) * h * hermite_slope[i] +
             (-2 * t3 + 3 * t2) * u[i + 1] + (t3 - t2) * h * hermite_slope[i + 1];
    }
    return point_from_u(uq, conn);
}

TailReport verify_tails(const ShockProfile& p) {
    TailReport rep;
    rep.rate_left = p.tail_rate_left;
    rep.rate_right = p.tail_rate_right;
    rep.r2_left = p.tail_r2_left;
    rep.r2_right = p.tail_r2_right;
    double max_du = 0, max_ddu = 0;
    for (size_t k = 0; k < p.u.size(); ++k) {
        max_du = std::max(max_du, std::abs(p.du[k]));
        max_ddu = std::max(max_ddu, std::abs(p.ddu[k]));
    }
    rep.second_derivative_ratio = max_ddu / (p.conn.delta * max_du);
    if (!(rep.rate_left > 0.0) || !(rep.rate_right > 0.0) ||
        rep.r2_left < 0.99 || rep.r2_right < 0.99) {
        std::ostringstream msg;
        msg << "verify_tails: non-exponential tail (rates " << rep.rate_left
            << ", " << rep.rate_right << "; R2 " << rep.r2_left << ", "
            << rep.r2_right << ")";
        throw std::runtime_error(msg.str());
    }
    return rep;
}

WeightValue weight_at(const Weight& w, double xi_query) {
    const ShockProfile::Point pt = w.profile->eval(xi_query);
    const double sq = std::sqrt(w.delta);
    WeightValue out;
    out.a = 1.0 + sq + (w.profile->conn.right.u - pt.u) / sq;
    out.da = -pt.du / sq;
    return out;
}

ProfileResiduals profile_residuals(const ShockProfile& p) {
    const ShockConnection& c = p.conn;
    const double j = c.mass_flux();
    ProfileResiduals out{0, 0, 0, 0};
    for (size_t k = 0; k < p.u.size(); ++k) {
        const double rho = p.rho[k], u = p.u[k];
        const double du = p.du[k], drho = p.drho[k], ddu = p.ddu[k];
        const double mom_flux_d = drho * u + rho * du;
        const double eq1 = -c.sigma * drho + mom_flux_d;
        const double s1 = std::max({std::abs(c.sigma * drho),
                                    std::abs(drho * u), std::abs(rho * du),
                                    1e-30});
        const double conv_d =
            drho * u * u + 2.0 * rho * u * du + c.gas.dpressure(rho) * drho;
        const double eq2 = -c.sigma * mom_flux_d + conv_d - ddu;
        const double s2 = std::max({std::abs(c.sigma * mom_flux_d),
                                    std::abs(conv_d), std::abs(ddu), 1e-30});
        out.max_eq1 = std::max(out.max_eq1, std::abs(eq1) / s1);
        out.max_eq2 = std::max(out.max_eq2, std::abs(eq2) / s2);
        out.first_integral_drift =
            std::max(out.first_integral_drift,
                     std::abs(rho * (u - c.sigma) - j) / std::abs(j));
        out.remark_bound_max =
            std::max(out.remark_bound_max,
                     std::abs(c.sigma - u - std::sqrt(c.gas.dpressure(rho))));
    }
    return out;
}

void write_profile_csv(const ShockProfile& p, std::ostream& out) {
    csv::header(out, {"xi", "rho", "u", "drho", "du", "ddu", "a", "da"});
    const Weight w{&p, p.conn.delta};
    const double sq = std::sqrt(p.conn.delta);
    for (size_t k = 0; k < p.u.size(); ++k) {
        const double a = 1.0 + sq + (p.conn.right.u - p.u[k]) / sq;
        const double da = -p.du[k] / sq;
        csv::row(out, {p.xi[k], p.rho[k], p.u[k], p.drho[k], p.du[k], p.ddu[k],
                       a, da});
    }
}

}  // namespace shockline
