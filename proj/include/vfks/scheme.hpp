#pragma once

#include "vfks/diagnostics.hpp"
#include "vfks/model.hpp"

#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace vfks {

/// Interface fluxes F_{i+1/2}, i = 0..N; f[0] = f[N] = 0 (no-flux boundary).
struct FluxField {
    std::vector<double> f;
};

struct StepReport {
    int newton_iterations = 0;
    double final_residual_norm = 0.0;
    double bound_violation = 0.0;
    int halvings = 0;            // deepest retry level used
    bool stability_warning = false;  // explicit c update beyond its stability bound
};

class NonConvergence : public std::runtime_error {
public:
    NonConvergence(const std::string& what, double residual)
        : std::runtime_error(what), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

/// Upwind value of (1-rho) rho^{m-1} at an interface.
double interface_diffusion(double rho_left, double rho_right, double m);

/// Upwind value of rho (1-rho) at an interface, oriented by the chemoattractant gradient.
double interface_mobility(double rho_left, double rho_right, double c_left, double c_right);

/// F_{i+1/2} = -(1/dx) [ psi (rho_{i+1} - rho_i) - chi phi (c_{i+1} - c_i) ].
FluxField assemble_fluxes(std::span<const double> rho, std::span<const double> c, const ModelParams& params,
                          const Grid& grid);

/// Largest dt for which the explicit c update is stable: tau dx^2 / (2 eta + dx^2).
double explicit_c_stability_limit(const ModelParams& params, const Grid& grid);

/// Advances c from level k-1 to k using rho at level k-1. Requires tau > 0.
std::vector<double> update_c(const CellState& state, const ModelParams& params, const SolverConfig& config,
                             const Grid& grid);

/// Residual of the density equation scaled by dt,
///   rho_i - rho_old_i + dt/dx (F_{i+1/2} - F_{i-1/2}),
/// so that it is measured in density units.
std::vector<double> rho_residual(std::span<const double> rho, std::span<const double> rho_old,
                                 std::span<const double> c, const ModelParams& params, double dt,
                                 const Grid& grid);

/// Implicit density update with c frozen at the new level, solved by Newton's
/// method with the exact tridiagonal Jacobian of the active upwind branches.
/// At least one correction is applied unless the residual at rho_old is exactly zero.
/// Throws NonConvergence if the residual stays above newton_tol.
std::pair<std::vector<double>, StepReport> update_rho(const CellState& state, std::span<const double> c_new,
                                                      const ModelParams& params, const SolverConfig& config,
                                                      const Grid& grid);

/// How c is coupled into a step. advance_c produces c^k from the state at level
/// k-1 before the density solve; project_c, if set, replaces c after the
/// density solve by a function of the new density.
struct Coupling {
    std::function<std::vector<double>(const CellState&, double dt)> advance_c;
    std::function<std::vector<double>(std::span<const double> rho)> project_c;
};

/// c from update_c for tau > 0; for tau = 0 the elliptic equation solved from rho^{k-1}.
Coupling standard_coupling(const ModelParams& params, const SolverConfig& config, const Grid& grid);

/// One time step: c first, then rho. A step that fails to converge is redone as
/// two half steps, up to config.max_halvings levels deep.
std::pair<CellState, StepReport> step(const CellState& state, const ModelParams& params,
                                      const SolverConfig& config, const Grid& grid);
std::pair<CellState, StepReport> step(const CellState& state, const ModelParams& params,
                                      const SolverConfig& config, const Grid& grid, const Coupling& coupling);

struct Snapshot {
    double t = 0.0;
    std::vector<double> rho;
    std::vector<double> c;
};

struct RunOptions {
    double sample_interval = 0.1;
    bool keep_snapshots = true;
    /// Reference mass for the relative entropy; NaN means "mass of the initial density".
    double reference_mass = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::function<void(const CellState&)>> observers;
    /// Defaults to standard_coupling when empty.
    Coupling coupling;
};

struct RunResult {
    CellState final_state;
    std::vector<DiagnosticsRecord> records;
    std::vector<Snapshot> snapshots;
    long long steps = 0;
    long long newton_iterations = 0;
    double max_bound_violation = 0.0;
    long long bound_violation_steps = 0;  // steps whose overshoot exceeded bound_tolerance
    int max_halvings = 0;
    bool stability_warning = false;
};

/// Steps from initial.t to t_end (within one dt), sampling diagnostics at the
/// initial time, at every multiple of sample_interval and at the final time.
RunResult run(const CellState& initial, double t_end, const ModelParams& params, const SolverConfig& config,
              const Grid& grid, const RunOptions& options = {});

}  // namespace vfks
