#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "shockline/run.hpp"

namespace shockline {

enum class RunMode {
    Run,
    SweepDelta,
    SweepBeta,
    ValidateProfile,
    ValidatePoincare,
    ValidateJacobian,
    ConvergenceStudy,
};

RunMode parse_mode(const std::string& name);  // throws ConfigError
std::string mode_name(RunMode mode);

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ExperimentSpec {
    RunMode mode = RunMode::Run;
    SimConfig base;
    std::vector<double> sweep_delta = {0.2, 0.1, 0.05, 0.025};
    std::vector<double> sweep_beta = {40.0, 80.0, 160.0};
    std::vector<int> grid_list = {3000, 6000, 12000};
    double conv_t_final = 1.0;
    int poincare_trials = 1000;
    std::string out_dir = "out";
};

/// Resolve a spec from an optional config file plus "key=value" overrides;
/// flags win over the file. Unknown keys, type mismatches and invariant
/// violations raise ConfigError with the offending key path.
ExperimentSpec parse_config(const std::string& path,
                            const std::vector<std::string>& overrides,
                            RunMode mode, const std::string& out_dir);

/// Smallest beta with fitted_tail_amplitude * exp(-rate_left * beta) <= target,
/// clamped below by 10 h.
double choose_beta(const ShockProfile& profile, double target, double h);

// exit codes: 0 ok, 1 check failure, 2 config error, 3 runtime abort
struct ExperimentResult {
    int exit_code = 0;
    nlohmann::json report;
};

/// Execute the spec, writing meta.json, diag.csv, shift.csv, snapshots/ and
/// report.json into the output directory. Deterministic given the spec.
ExperimentResult run_experiment(const ExperimentSpec& spec);

// Engines behind the CLI modes, reusable from tests. Each returns a JSON
// report carrying fitted slopes and a "pass" verdict.
nlohmann::json profile_sweep_report(const SimConfig& base,
                                    const std::vector<double>& deltas);
nlohmann::json jacobian_sweep_report(const SimConfig& base,
                                     const std::vector<double>& deltas);
nlohmann::json convergence_report(const SimConfig& base,
                                  const std::vector<int>& grids,
                                  double t_final);
nlohmann::json beta_sweep_report(const SimConfig& base,
                                 const std::vector<double>& betas);
nlohmann::json profile_validation_report(const SimConfig& base,
                                         std::uint64_t seed,
                                         const std::string& csv_path = "");
nlohmann::json poincare_report(int trials, std::uint64_t seed);

struct PoincareTrialSummary {
    int trials;
    int violations;
    double worst_excess;
};

/// Random smooth test functions (polynomials and trigonometric sums) on
/// random intervals, checked against the weighted Poincare inequality.
PoincareTrialSummary poincare_trials(int n_trials, std::uint64_t seed,
                                     double tol = 1e-9);

/// lhs/rhs for the extremal linear function on [0,1]; equals 1 up to
/// quadrature error.
double poincare_extremal_ratio();

std::string version_string();

}  // namespace shockline
