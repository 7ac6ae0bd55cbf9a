#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>

namespace shockline {

/// Gamma-law gas, p(rho) = K rho^gamma with the normalization K = mu = 1.
/// K and mu are stored explicitly so the flux and viscous formulas read
/// literally even though both are fixed to one.
struct GasParams {
    double gamma = 2.0;
    static constexpr double K = 1.0;
    static constexpr double mu = 1.0;

    double pressure(double rho) const {
        return gamma == 2.0 ? rho * rho : std::pow(rho, gamma);
    }
    double dpressure(double rho) const {  // p'(rho) = gamma rho^(gamma-1)
        return gamma == 2.0 ? 2.0 * rho : gamma * std::pow(rho, gamma - 1.0);
    }
    double ddpressure(double rho) const {
        return gamma == 2.0 ? 2.0
                            : gamma * (gamma - 1.0) * std::pow(rho, gamma - 2.0);
    }

    void validate() const {
        if (!(gamma > 1.0))
            throw std::domain_error("GasParams: gamma must exceed 1");
    }
};

struct EndState {
    double rho;  // > 0
    double u;
};

enum class StateClass {
    SubsonicMinus,    // u < 0 and u + c > 0
    TransonicMinus,   // u + c = 0 within tolerance
    SupersonicMinus,  // u + c < 0
    NotInScope,       // u >= 0
};

/// c = sqrt(p'(rho)). Throws std::domain_error on non-positive density.
double sound_speed(const EndState& state, const GasParams& gas);

/// lambda_2 = u + c, the forward acoustic speed.
double lambda2(const EndState& state, const GasParams& gas);

/// Sign classification of lambda_2 for states with u < 0. The transonic
/// curve has measure zero, so membership is decided within tol_sonic * c.
StateClass classify_state(const EndState& state, const GasParams& gas,
                          double tol_sonic = 1e-10);

/// A 2-shock connection (rho-, u-) -> (rho+, u+) with speed sigma:
/// both Rankine-Hugoniot relations hold, the Lax inequalities are strict,
/// and u+ < u- < 0, rho- > rho+, sigma > 0.
struct ShockConnection {
    EndState right;  // (rho+, u+), the far-field state
    EndState left;   // (rho-, u-)
    double sigma = 0.0;
    double delta = 0.0;  // |u- - u+|
    GasParams gas;

    /// Mass flux j = rho (u - sigma), equal on both sides; negative here.
    double mass_flux() const { return right.rho * (right.u - sigma); }
};

/// Residuals of the two jump conditions,
///   r1 = -sigma (rho+ - rho-) + (rho+ u+ - rho- u-)
///   r2 = -sigma (rho+ u+ - rho- u-) + (rho+ u+^2 - rho- u-^2 + p+ - p-)
std::pair<double, double> rh_residual(const ShockConnection& conn);

struct HugoniotOptions {
    double delta_warn = 0.5;   // warn above this shock strength
    double sigma_cross_tol = 1e-10;  // closed form vs mass condition
};

/// Solve the jump conditions for the unique admissible 2-shock through a
/// given right state and boundary velocity u- in (u+, 0). Bisection on
/// rho- of the reduced relation
///   (u- - u+)^2 = (p(rho-) - p(rho+)) (rho- - rho+) / (rho+ rho-),
/// then sigma from the closed form sigma = u+ + sqrt(rho-/rho+) sqrt((p+ - p-)/(rho+ - rho-)).
/// Throws std::domain_error on bad preconditions, std::runtime_error if no
/// bracketing root exists or the Lax condition fails.
ShockConnection solve_hugoniot(const EndState& right, double u_minus,
                               const GasParams& gas,
                               const HugoniotOptions& opts = {});

struct LaxReport {
    bool admissible;      // both margins strictly positive
    double margin_plus;   // sigma - lambda2(U+)
    double margin_minus;  // lambda2(U-) - sigma
};

LaxReport lax_check(const ShockConnection& conn);

}  // namespace shockline
