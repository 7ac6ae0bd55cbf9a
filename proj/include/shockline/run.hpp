#pragma once

#include <functional>
#include <optional>

#include "shockline/diagnostics.hpp"

namespace shockline {

struct SnapshotAux {
    std::vector<double> rho_tilde, u_tilde;  // shifted wave at cell centers
};

struct RunSinks {
    std::function<void(const DiagRecord&)> on_record;
    std::function<void(int index, const FluidField&, const SnapshotAux&)> on_snapshot;
    std::function<void(const std::string&)> on_message;
};

struct RunResult {
    ShockConnection conn;
    double beta = 0.0;
    Grid grid;
    InitReport init;
    std::vector<DiagRecord> records;
    ShiftState shift;
    FluidField final_field;
    double mass_balance_rel = 0.0;  // cumulative audit, relative
    double lipschitz_C0 = 0.0;      // max |Xdot| / supnorm(phi,psi) over the run
    double min_rho = 0.0, max_rho = 0.0;
    long steps = 0;
};

/// Advance the initial-boundary value problem to t_final, co-integrating the
/// shift stage-consistently and emitting diagnostics at the configured
/// cadence. Deterministic for a fixed config and seed.
RunResult run(const SimConfig& cfg, const RunSinks& sinks = {});

/// Convenience: solve the connection and integrate the wave for a config,
/// resolving beta if unset. Shared by run() and the experiment drivers.
struct Setup {
    ShockConnection conn;
    ShockProfile profile;
    double beta;
    Grid grid;
};
Setup make_setup(const SimConfig& cfg);

}  // namespace shockline
