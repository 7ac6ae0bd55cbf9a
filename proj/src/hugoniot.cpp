#include "shockline/hugoniot.hpp"

#include <cmath>
#include <iostream>
#include <limits>
#include <string>

namespace shockline {

static void require_positive_density(double rho, const char* where) {
    if (!(rho > 0.0))
        throw std::domain_error(std::string(where) + ": density must be positive");
}

double sound_speed(const EndState& state, const GasParams& gas) {
    require_positive_density(state.rho, "sound_speed");
    return std::sqrt(gas.dpressure(state.rho));
}

double lambda2(const EndState& state, const GasParams& gas) {
    return state.u + sound_speed(state, gas);
}

StateClass classify_state(const EndState& state, const GasParams& gas,
                          double tol_sonic) {
    const double c = sound_speed(state, gas);
    if (state.u >= 0.0) return StateClass::NotInScope;
    const double l2 = state.u + c;
    if (std::abs(l2) <= tol_sonic * c) return StateClass::TransonicMinus;
    return l2 > 0.0 ? StateClass::SubsonicMinus : StateClass::SupersonicMinus;
}

std::pair<double, double> rh_residual(const ShockConnection& conn) {
    const auto& [rp, up] = conn.right;
    const auto& [rm, um] = conn.left;
    const double pp = conn.gas.pressure(rp);
    const double pm = conn.gas.pressure(rm);
    const double r1 = -conn.sigma * (rp - rm) + (rp * up - rm * um);
    const double r2 = -conn.sigma * (rp * up - rm * um) +
                      (rp * up * up - rm * um * um + pp - pm);
    return {r1, r2};
}

// Reduced jump relation: with the mass flux eliminated,
//   H(rho-) := sqrt((p(rho-) - p(rho+)) (rho- - rho+) / (rho+ rho-)) - (u- - u+),
// strictly increasing from -(u- - u+) at rho- = rho+.
static double reduced_relation(double rho_m, const EndState& right,
                               double du, const GasParams& gas) {
    const double dp = gas.pressure(rho_m) - gas.pressure(right.rho);
    const double dr = rho_m - right.rho;
    return std::sqrt(dp * dr / (right.rho * rho_m)) - du;
}

ShockConnection solve_hugoniot(const EndState& right, double u_minus,
                               const GasParams& gas,
                               const HugoniotOptions& opts) {
    gas.validate();
    require_positive_density(right.rho, "solve_hugoniot");
    if (!(u_minus < 0.0) || !(right.u < u_minus))
        throw std::domain_error("solve_hugoniot: requires u+ < u- < 0");
    const StateClass cls = classify_state(right, gas);
    if (cls != StateClass::SubsonicMinus && cls != StateClass::TransonicMinus)
        throw std::domain_error(
            "solve_hugoniot: right state must be subsonic or transonic");

    const double du = u_minus - right.u;  // = delta > 0
    if (du > opts.delta_warn)
        std::clog << "solve_hugoniot: shock strength " << du
                  << " exceeds delta_warn=" << opts.delta_warn
                  << " (small-amplitude regime left)\n";

    // bracket: (rho+ (1+1e-14), rho+ R) with R grown geometrically
    double lo = right.rho * (1.0 + 1e-14);
    if (reduced_relation(lo, right, du, gas) >= 0.0)
        throw std::runtime_error(
            "solve_hugoniot: no admissible 2-shock (strength below resolvable "
            "threshold)");
    double hi = 2.0 * right.rho;
    int grow = 0;
    while (reduced_relation(hi, right, du, gas) < 0.0) {
        hi *= 2.0;
        if (++grow > 600)
            throw std::runtime_error("solve_hugoniot: no bracketing root");
    }
    // bisection; unconditionally robust on the monotone reduced relation
    for (int it = 0; it < 200 && (hi - lo) > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (reduced_relation(mid, right, du, gas) < 0.0 ? lo : hi) = mid;
    }
    const double rho_m = 0.5 * (lo + hi);

    // closed form for the speed, then cross-check against the mass condition
    const double pp = gas.pressure(right.rho);
    const double pm = gas.pressure(rho_m);
    const double sigma =
        right.u + std::sqrt(rho_m / right.rho) *
                      std::sqrt((pp - pm) / (right.rho - rho_m));
    const double sigma_mass =
        (rho_m * u_minus - right.rho * right.u) / (rho_m - right.rho);
    if (std::abs(sigma - sigma_mass) >
        opts.sigma_cross_tol * std::max(1.0, std::abs(sigma)))
        throw std::logic_error(
            "solve_hugoniot: speed closed form disagrees with mass condition");

    ShockConnection conn{right, EndState{rho_m, u_minus}, sigma, du, gas};
    const LaxReport lax = lax_check(conn);
    if (!lax.admissible)
        throw std::runtime_error("solve_hugoniot: inadmissible connection");
    return conn;
}

LaxReport lax_check(const ShockConnection& conn) {
    const double lp = lambda2(conn.right, conn.gas);
    const double lm = lambda2(conn.left, conn.gas);
    LaxReport rep{};
    rep.margin_plus = conn.sigma - lp;
    rep.margin_minus = lm - conn.sigma;
    rep.admissible = rep.margin_plus > 0.0 && rep.margin_minus > 0.0;
    return rep;
}

}  // namespace shockline
