#pragma once

#include <functional>
#include <vector>

#include "shockline/solver.hpp"

namespace shockline {

/// Dynamical shift X(t) of the reference wave, X(0) = 0, driven by the
/// weighted projection of the velocity perturbation. M = 2(gamma+1)/rho+.
struct ShiftState {
    double X = 0.0;
    double Xdot = 0.0;
    double M = 0.0;
    double beta = 0.0;
    std::vector<double> t_hist, X_hist, Xdot_hist;

    ShiftState() = default;
    ShiftState(const ShockConnection& conn, double beta_in)
        : M(2.0 * (conn.gas.gamma + 1.0) / conn.right.rho), beta(beta_in) {}

    void record(double t) {
        t_hist.push_back(t);
        X_hist.push_back(X);
        Xdot_hist.push_back(Xdot);
    }
};

/// xi = x - sigma t - X(t) - beta, the wave coordinate in the lab frame.
inline double shifted_coordinate(double x, double t, const ShiftState& s,
                                 double sigma) {
    return x - sigma * t - s.X - s.beta;
}

/// Wave quantities sampled on the solver grid at a given shift position.
/// Filled by one monotone sweep through the profile table.
struct ProfileSamples {
    std::vector<double> rho, u, drho, du, ddu, a, da;
    void resize(int n) {
        rho.resize(n); u.resize(n); drho.resize(n);
        du.resize(n); ddu.resize(n); a.resize(n); da.resize(n);
    }
};

/// shift_pos = sigma t + X + beta; samples the wave at xi_i = x_i - shift_pos.
void sample_profile(const ShockProfile& profile, const Grid& grid,
                    double shift_pos, ProfileSamples& out);

/// Right-hand side of the shift ODE,
///   Xdot = -(M/delta) [ int a k(rho~)/(sigma - u~) rho~_x (u - u~) dx
///                     + int a rho~ (u - u~) u~_x dx ],
/// with k = p' (YgConsistent) or k = p (AsPrinted); midpoint quadrature on
/// the solver grid, wave quantities at the shifted coordinate.
double shift_rhs(const FluidField& field, const ShockProfile& profile,
                 const ShiftState& s, const Grid& grid, double t,
                 ShiftMode mode);

/// Same, reusing samples already taken at this stage's shift position.
double shift_rhs_sampled(const FluidField& field, const ProfileSamples& ps,
                         const ShiftState& s, const Grid& grid,
                         const ShockConnection& conn, ShiftMode mode);

/// Two-stage (Heun) update of X, matching the field update. The callable is
/// evaluated once per stage: stage 0 at (t, X), stage 1 at (t+dt, X1) where
/// X1 is the Euler predictor. Exact for constant rates.
using ShiftRhsFn = std::function<double(int stage, double t, double X)>;
void advance_shift(ShiftState& s, double t, double dt, const ShiftRhsFn& rhs);

struct ShiftSelftestResult {
    double max_abs_X;
    double X_final;
    long steps;
};

/// Drive the coupled shift integration with field stages sampled from the
/// exact moving wave plus an optional synthetic velocity perturbation of
/// the given amplitude (a traveling Gaussian). With amplitude zero the rate
/// vanishes identically and X must stay at zero up to round-off.
ShiftSelftestResult shift_selftest(const ShockProfile& profile, const Grid& grid,
                                   double beta, double t_final, double dt,
                                   double pert_amplitude, ShiftMode mode);

}  // namespace shockline
