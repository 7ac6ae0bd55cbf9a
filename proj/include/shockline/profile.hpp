#pragma once

#include <iosfwd>
#include <vector>

#include "shockline/hugoniot.hpp"

namespace shockline {

struct ProfileOptions {
    double tail_eps = 1e-8;      // stop when |u - u_pm| <= tail_eps * delta
    double rel_tol = 1e-12;      // ODE step controller, relative
    double abs_tol_scale = 1e-13;  // absolute tolerance = scale * delta
    double max_step_scale = 0.5;   // dxi cap = max_step_scale / delta
    double tail_fit_fraction = 0.25;  // trailing fraction of nodes per side
    int tail_fit_min_points = 20;
};

/// Tabulated viscous 2-shock wave in the wave coordinate xi = x - sigma t,
/// normalized so rho(0) = (rho- + rho+)/2. Strictly decreasing in both
/// components; derivatives follow from the first integral
/// rho (u - sigma) = rho+ (u+ - sigma), so the tabulated columns satisfy the
/// profile ODE identically at the nodes. Immutable after construction.
struct ShockProfile {
    ShockConnection conn;
    std::vector<double> xi;    // strictly increasing sample points
    std::vector<double> u;     // velocity, decreasing from u- side to u+ side
    std::vector<double> rho;   // density, decreasing
    std::vector<double> du;    // u'
    std::vector<double> drho;  // rho'
    std::vector<double> ddu;   // u''

    double tail_rate_left = 0.0;   // fitted decay rates, > 0
    double tail_rate_right = 0.0;
    double tail_amp_left = 0.0;    // fitted amplitude of |u - u_pm| at xi = 0
    double tail_amp_right = 0.0;
    double tail_r2_left = 0.0;     // fit quality
    double tail_r2_right = 0.0;
    double tail_eps = 1e-8;

    struct Point {
        double rho, u, drho, du, ddu;
    };

    /// Total function over R: monotone cubic inside the table, exponential
    /// tail model matched continuously at the table ends outside it.
    Point eval(double xi_query) const;

    /// Same, with an interval hint for monotone query sweeps. The hint is
    /// advanced forward only; queries must be nondecreasing between resets.
    Point eval_hinted(double xi_query, std::size_t& hint) const;

    double xi_min() const { return xi.front(); }
    double xi_max() const { return xi.back(); }

    // monotone cubic slopes for u, filled by integrate_profile
    std::vector<double> hermite_slope;
};

/// rho(u) = rho+ (u+ - sigma)/(u - sigma) from the first integral.
/// Requires u_val < sigma.
double density_from_velocity(double u_val, const ShockConnection& conn);

/// All wave quantities as closed forms of the velocity value (first integral
/// for rho, the profile equation for u', the chain rule for u'').
ShockProfile::Point point_from_velocity(double u_val, const ShockConnection& conn);

/// Right-hand side of the scalar profile equation,
///   u' = rho+ (u - u+)(u+ - sigma) + p(rho(u)) - p(rho+),
/// negative on (u+, u-) and zero at both endpoints. Requires u_val in [u+, u-].
double profile_rhs(double u_val, const ShockConnection& conn);

/// Integrate the profile ODE forward and backward from xi = 0 with
/// u(0) = sigma + rho+ (u+ - sigma) / ((rho- + rho+)/2), stopping once
/// |u - u_pm| <= tail_eps * delta, and fit exponential tail rates.
/// Throws std::runtime_error on step-size underflow.
ShockProfile integrate_profile(const ShockConnection& conn,
                               const ProfileOptions& opts = {});

struct TailReport {
    double rate_left, rate_right;
    double r2_left, r2_right;
    double second_derivative_ratio;  // max|u''| / (delta * max|u'|)
};

/// Report the fitted tail rates and the curvature/slope ratio.
/// Throws std::runtime_error if either fit has R^2 < 0.99.
TailReport verify_tails(const ShockProfile& profile);

/// Weight function a(xi) = 1 + sqrt(delta) + (u+ - u(xi))/sqrt(delta),
/// increasing from 1 at -inf to 1 + sqrt(delta) at +inf.
struct Weight {
    const ShockProfile* profile;
    double delta;
};

struct WeightValue {
    double a, da;
};

WeightValue weight_at(const Weight& w, double xi_query);

struct ProfileResiduals {
    double max_eq1;          // mass equation, scaled
    double max_eq2;          // momentum equation, scaled
    double first_integral_drift;  // relative drift of rho (u - sigma)
    double remark_bound_max;      // max |sigma - u - sqrt(p'(rho))|
};

/// Evaluate both equations of the traveling-wave system at every node from
/// the tabulated values and derivative columns, scaled by the local term size.
ProfileResiduals profile_residuals(const ShockProfile& profile);

/// CSV export: xi, rho, u, drho, du, ddu, a, da (RFC 4180, 17 significant digits).
void write_profile_csv(const ShockProfile& profile, std::ostream& out);

}  // namespace shockline
