#pragma once

#include <span>
#include <vector>

#include "shockline/shift.hpp"

namespace shockline {

/// p(rho | rho~) = rho^g - rho~^g - g rho~^(g-1) (rho - rho~); nonnegative
/// by convexity, zero iff the densities coincide.
double relative_pressure(double rho, double rho_tilde, const GasParams& gas);

struct RelativeQuantities {
    double eta;    // rho |u - u~|^2 / 2 + p(rho|rho~)/(gamma - 1)
    double q;      // relative entropy flux
    double f_rel;  // momentum component of the relative flux
};

RelativeQuantities relative_quantities(const EndState& U, const EndState& Ut,
                                       const GasParams& gas);

/// One time level of every monitored functional. Column order of the CSV
/// stream matches the field order here.
struct DiagRecord {
    double t = 0.0;
    double E = 0.0;      // weighted relative entropy, int a eta dx
    double Gnew = 0.0;
    double GS = 0.0;
    double Gbd = 0.0;
    double Drho = 0.0;
    double Du1 = 0.0;
    double Du2 = 0.0;
    double P = 0.0;      // boundary production
    double supnorm_phi = 0.0, supnorm_psi = 0.0;
    double l2_phi = 0.0, l2_psi = 0.0;
    double h1_phi = 0.0, h1_psi = 0.0;
    double Xdot = 0.0;
    double y0 = 0.0;     // boundary image of the y coordinate, in (0,1)
    double tail_truncation_bound = 0.0;  // remainder bound of the truncated shift integrals
};

/// All monitored functionals at one snapshot: midpoint quadrature on the
/// solver grid; perturbation derivatives by central differences with the
/// one-sided second-order stencil at x = 0; wave derivatives analytic.
DiagRecord functionals(const FluidField& field, const ShockProfile& profile,
                       const ShiftState& s, const Grid& grid, double t,
                       ShiftMode mode);

/// P = a(t,0) q(U;U~)(t,0) - a(t,0) (u-u~)(t,0) (u-u~)_x(t,0) with boundary
/// traces by second-order one-sided reconstruction at x = 0.
double boundary_production(const FluidField& field, const ShockProfile& profile,
                           const ShiftState& s, const Grid& grid, double t);

/// y = (u- - u~)/delta, strictly in (0,1) along the wave.
double y_coordinate(double u_tilde_val, double u_minus, double delta);

struct BalanceCheck {
    std::vector<double> residual;  // E(t_k) - E(0) - int_0^{t_k} max(P,0) ds - budget
    bool pass = false;
    double budget = 0.0;
};

/// Monotonicity up to boundary production: E(t) <= E(0) + int P_+ + budget,
/// with budget = budget_abs + budget_rel * E(0) absorbing scheme error.
BalanceCheck entropy_balance_check(const std::vector<DiagRecord>& records,
                                   double budget_abs = 1e-8,
                                   double budget_rel = 0.05);

/// max over interior nodes of |(1/(y(1-y))) dy/dx - (gamma+1) rho+ delta / 2|
/// with dy/dx = -u'/delta; the deviation is O(delta^2).
double jacobian_lemma_check(const ShockProfile& profile);

struct PoincareResult {
    double lhs;  // int |f - mean|^2
    double rhs;  // (1/2) int (y-a)(b-y) |f'|^2
    bool holds;
};

/// Weighted Poincare inequality on [a,b] by trapezoid quadrature over the
/// samples. df may be empty, in which case f' is taken by central
/// differences (one-sided at the ends).
PoincareResult poincare_check(std::span<const double> y,
                              std::span<const double> f,
                              std::span<const double> df = {},
                              double tol_q = 1e-9);

struct PerturbationSources {
    double F;  // mass equation source, -psi rho~_x - phi u~_x
    double G;  // momentum equation source
};

/// Source terms of the perturbation system in the co-moving decomposition,
/// evaluated pointwise from (phi, psi) = (rho - rho~, u - u~) and the wave.
PerturbationSources perturbation_sources(double phi, double psi, double rho,
                                         const ShockProfile::Point& wave,
                                         const GasParams& gas);

}  // namespace shockline
