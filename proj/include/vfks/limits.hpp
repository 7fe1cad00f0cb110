#pragma once

#include "vfks/model.hpp"
#include "vfks/scheme.hpp"

#include <span>
#include <stdexcept>
#include <vector>

namespace vfks {

enum class LimitKind { tau_zero, eta_zero };

std::string to_string(LimitKind kind);

class MismatchedSampling : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Solves (I - eta D2) c = rho with reflected Neumann boundaries.
std::vector<double> solve_elliptic_c(std::span<const double> rho, double eta, const Grid& grid);

/// Pointwise update of tau d_t c = -c + rho over one step.
std::vector<double> step_ode_c(std::span<const double> c, std::span<const double> rho, double tau, double dt,
                               CUpdateMode mode);

/// Coupling that realizes the limit system with the unchanged density stepper.
Coupling limit_coupling(LimitKind which, const ModelParams& params, const SolverConfig& config, const Grid& grid);

/// Runs the tau = 0 or eta = 0 system. For tau_zero the initial c is replaced
/// by the elliptic solve of the initial density and c is re-solved after every
/// density step.
RunResult run_limit_system(LimitKind which, const CellState& initial, const ModelParams& params,
                           const SolverConfig& config, const Grid& grid, double t_end, RunOptions options = {});

/// Discrete L2(0,T; L2) distance of the densities, trapezoidal in time over the
/// common sampling times.
double l2_space_time_distance(std::span<const Snapshot> a, std::span<const Snapshot> b, const Grid& grid);

/// L2(Omega) distance of the densities at each common sampling time.
std::vector<double> snapshot_distances(std::span<const Snapshot> a, std::span<const Snapshot> b, const Grid& grid);

struct SweepResult {
    LimitKind which = LimitKind::tau_zero;
    std::vector<double> parameter_values;
    std::vector<double> distances;
    std::vector<double> sample_times;
    std::vector<std::vector<double>> snapshot_distances;  // one row per parameter value
    std::vector<CellState> final_states;                   // one per parameter value
    CellState limit_final_state;
    bool outside_proven_regime = false;
};

/// Runs the full system for each (strictly decreasing, positive) parameter value
/// and the limit system once, all from the same initial data, and measures the
/// distance of each run to the limit. Runs execute concurrently.
SweepResult sweep(LimitKind which, std::span<const double> values, const CellState& initial,
                  const ModelParams& params, const SolverConfig& config, const Grid& grid, double t_end,
                  double sample_interval = 0.1);

}  // namespace vfks
