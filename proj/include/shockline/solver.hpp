#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "shockline/profile.hpp"

namespace shockline {

struct Grid {
    double L = 0.0;
    int N = 0;
    double h = 0.0;

    Grid() = default;
    Grid(double length, int cells) : L(length), N(cells), h(length / cells) {
        if (cells < 16) throw std::domain_error("Grid: N must be at least 16");
    }
    double x(int i) const { return (i + 0.5) * h; }
};

/// Cell-averaged conservative state (rho, rho u) on the truncated half line.
struct FluidField {
    double t = 0.0;
    std::vector<double> rho;
    std::vector<double> mom;

    double u(int i) const { return mom[i] / rho[i]; }
    int size() const { return static_cast<int>(rho.size()); }
};

enum class BcMode {
    Physical,      // u(t,0) = u-, density extrapolated; far field Dirichlet
    ExactProfile,  // ghost data sampled from the moving wave (order studies)
};

enum class ShiftMode {
    YgConsistent,  // p'(rho) factor in the first shift integrand
    AsPrinted,     // p(rho) factor
};

struct PerturbationSpec {
    enum class Shape { None, Bump, RandomBumps };
    Shape shape = Shape::Bump;
    double epsilon = 0.0;
    double center = -1.0;  // < 0: resolved to beta
    double width = 10.0;
    int count = 5;         // random bump count
};

struct SimConfig {
    GasParams gas;
    double rho_plus = 1.0;
    double u_plus = -1.0;
    double u_minus = -0.9;

    double beta = -1.0;        // < 0: chosen from the tail rule
    double beta_target = 1e-6; // boundary-influence tolerance for that rule

    double L = 0.0;
    int N = 0;
    double cfl = 0.4;
    double t_final = 0.0;
    double fixed_dt = 0.0;  // > 0 forces the step (still capped by stability)

    PerturbationSpec pert;
    std::uint64_t seed = 0;

    double records_per_crossing = 50.0;  // diagnostic records per 1/sigma time
    int snapshot_stride = 10;            // snapshots every k-th record; 0 = off

    BcMode bc = BcMode::Physical;
    ShiftMode shift_mode = ShiftMode::YgConsistent;

    double tail_eps = 1e-8;
    double delta_warn = 0.5;
    double rho_floor = 1e-10;
};

/// Raised when a run must stop: vacuum, or the wave reaching the far margin.
struct SimulationAbort : std::runtime_error {
    double t;
    int cell;
    SimulationAbort(const std::string& what, double time, int idx)
        : std::runtime_error(what), t(time), cell(idx) {}
};

struct Flux2 {
    double mass, mom;
};

/// Physical convective flux (rho u, rho u^2 + p).
Flux2 physical_flux(const EndState& w, const GasParams& gas);

/// Local Lax-Friedrichs flux between two states; dissipation speed
/// max(|u|+c) over the pair. Consistent and Lipschitz.
Flux2 flux(const EndState& left, const EndState& right, const GasParams& gas);

/// Central second difference on a padded velocity array (one ghost each side):
/// index i refers to the interior cell, u_pad[i+1] is cell i.
double viscous_term(std::span<const double> u_pad, int i, double h);

/// Two ghost cells per side.
struct GhostCells {
    double rho[2], mom[2];  // [0] adjacent to the boundary, [1] outer
};

struct BoundaryContext {
    const ShockProfile* profile = nullptr;  // ExactProfile mode only
    double sigma = 0.0;
    double beta = 0.0;  // ghost data sampled at x - (sigma t + beta)
};

/// Fill ghost cells. Physical mode: u reflected about u- at x = 0 so the
/// face value is exact, density by zeroth-order extrapolation; right side
/// Dirichlet (rho+, u+). ExactProfile mode: both sides sampled from the wave.
std::pair<GhostCells, GhostCells> apply_boundary(const FluidField& field,
                                                 const SimConfig& cfg,
                                                 const BoundaryContext& bc = {});

/// dt = cfl * min(h / max(|u|+c), h^2 / 2).
double cfl_dt(const FluidField& field, const SimConfig& cfg, const Grid& grid);

struct StepFluxes {
    double mass_left = 0.0;   // time-integrated mass flux through x = 0
    double mass_right = 0.0;  // and through x = L
};

/// Observer invoked once per stage with the stage field (stage 0: the field
/// at t, stage 1: the Euler predictor at t+dt). Lets co-integrated equations
/// evaluate their rates on the matching stage.
using StageHook = std::function<void(int stage, const FluidField& stage_field)>;

/// One two-stage (Heun) update of the conservative variables. Ghosts are
/// reapplied and positivity asserted at each stage. Returns the
/// dt-integrated boundary mass fluxes so callers can audit conservation.
StepFluxes step(FluidField& field, double dt, const SimConfig& cfg,
                const Grid& grid, const BoundaryContext& bc = {},
                const StageHook& hook = {});

struct InitReport {
    double l2_right;   // || (rho0,u0) - (rho+,u+) ||_{L2(beta,inf)}
    double l2_left;    // || (rho0,u0) - (rho-,u-) ||_{L2(0,beta)}
    double h1_semi;    // || (d rho0, d u0) ||_{L2}
    double min_rho;
};

/// Sample the shifted wave (centered at beta) onto the grid and add the
/// configured perturbation. Rejects perturbations that break positivity or
/// touch the boundary in the velocity component.
FluidField init_data(const SimConfig& cfg, const ShockProfile& profile,
                     const Grid& grid, double beta, InitReport* report = nullptr);

}  // namespace shockline
