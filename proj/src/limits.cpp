#include "vfks/limits.hpp"

#include "vfks/tridiagonal.hpp"

#include <cmath>
#include <future>

namespace vfks {

std::string to_string(LimitKind kind)
{
    return kind == LimitKind::tau_zero ? "tau" : "eta";
}

std::vector<double> solve_elliptic_c(std::span<const double> rho, double eta, const Grid& grid)
{
    if (rho.size() != grid.n_cells()) throw DomainError("density length does not match the grid");
    if (!(eta > 0.0)) throw DomainError("elliptic solve requires eta > 0");
    return solve_neumann_elliptic(rho, eta, grid.dx());
}

std::vector<double> step_ode_c(std::span<const double> c, std::span<const double> rho, double tau, double dt,
                               CUpdateMode mode)
{
    if (c.size() != rho.size()) throw DomainError("step_ode_c: size mismatch");
    if (!(tau > 0.0)) throw DomainError("step_ode_c requires tau > 0");
    std::vector<double> out(c.size());
    const double k = dt / tau;
    for (std::size_t i = 0; i < c.size(); ++i) {
        out[i] = mode == CUpdateMode::explicit_euler ? c[i] + k * (rho[i] - c[i]) : c[i] + k * (rho[i] - c[i]) / (1.0 + k);
    }
    return out;
}

Coupling limit_coupling(LimitKind which, const ModelParams& params, const SolverConfig& config, const Grid& grid)
{
    Coupling coupling;
    if (which == LimitKind::tau_zero) {
        const double eta = params.eta();
        coupling.advance_c = [](const CellState& s, double) { return s.c; };
        coupling.project_c = [eta, grid](std::span<const double> rho) { return solve_elliptic_c(rho, eta, grid); };
    } else {
        const double tau = params.tau();
        const CUpdateMode mode = config.c_update_mode;
        coupling.advance_c = [tau, mode](const CellState& s, double dt) {
            return step_ode_c(s.c, s.rho, tau, dt, mode);
        };
    }
    return coupling;
}

RunResult run_limit_system(LimitKind which, const CellState& initial, const ModelParams& params,
                           const SolverConfig& config, const Grid& grid, double t_end, RunOptions options)
{
    const ModelParams limit_params = which == LimitKind::tau_zero ? params.with_tau(0.0) : params.with_eta(0.0);
    options.coupling = limit_coupling(which, limit_params, config, grid);
    CellState start = initial;
    if (which == LimitKind::tau_zero) start.c = solve_elliptic_c(start.rho, params.eta(), grid);
    return run(start, t_end, limit_params, config, grid, options);
}

namespace {

void check_matching(std::span<const Snapshot> a, std::span<const Snapshot> b, const Grid& grid)
{
    if (a.size() != b.size()) throw MismatchedSampling("trajectories have different numbers of samples");
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double scale = std::max({1.0, std::abs(a[k].t), std::abs(b[k].t)});
        if (std::abs(a[k].t - b[k].t) > 1e-12 * scale)
            throw MismatchedSampling("trajectories are sampled at different times");
        if (a[k].rho.size() != grid.n_cells() || b[k].rho.size() != grid.n_cells())
            throw MismatchedSampling("snapshot length does not match the grid");
    }
}

double squared_l2(const std::vector<double>& a, const std::vector<double>& b, double dx)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s * dx;
}

}  // namespace

double l2_space_time_distance(std::span<const Snapshot> a, std::span<const Snapshot> b, const Grid& grid)
{
    check_matching(a, b, grid);
    double total = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        double w = 0.0;
        if (k > 0) w += 0.5 * (a[k].t - a[k - 1].t);
        if (k + 1 < a.size()) w += 0.5 * (a[k + 1].t - a[k].t);
        total += w * squared_l2(a[k].rho, b[k].rho, grid.dx());
    }
    return std::sqrt(total);
}

std::vector<double> snapshot_distances(std::span<const Snapshot> a, std::span<const Snapshot> b, const Grid& grid)
{
    check_matching(a, b, grid);
    std::vector<double> d(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) d[k] = std::sqrt(squared_l2(a[k].rho, b[k].rho, grid.dx()));
    return d;
}

SweepResult sweep(LimitKind which, std::span<const double> values, const CellState& initial,
                  const ModelParams& params, const SolverConfig& config, const Grid& grid, double t_end,
                  double sample_interval)
{
    if (values.empty()) throw std::invalid_argument("sweep needs at least one parameter value");
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (!(values[k] > 0.0)) throw std::invalid_argument("sweep parameter values must be positive");
        if (k > 0 && !(values[k] < values[k - 1]))
            throw std::invalid_argument("sweep parameter values must be strictly decreasing");
    }

    RunOptions options;
    options.sample_interval = sample_interval;

    auto limit_future = std::async(std::launch::async, [&] {
        return run_limit_system(which, initial, params, config, grid, t_end, options);
    });
    std::vector<std::future<RunResult>> runs;
    runs.reserve(values.size());
    for (double v : values) {
        const ModelParams p = which == LimitKind::tau_zero ? params.with_tau(v) : params.with_eta(v);
        runs.push_back(std::async(std::launch::async, [&, p] { return run(initial, t_end, p, config, grid, options); }));
    }

    const RunResult limit = limit_future.get();
    SweepResult result;
    result.which = which;
    result.parameter_values.assign(values.begin(), values.end());
    for (const auto& s : limit.snapshots) result.sample_times.push_back(s.t);
    for (auto& f : runs) {
        const RunResult r = f.get();
        result.distances.push_back(l2_space_time_distance(r.snapshots, limit.snapshots, grid));
        result.snapshot_distances.push_back(snapshot_distances(r.snapshots, limit.snapshots, grid));
        result.final_states.push_back(r.final_state);
    }
    result.limit_final_state = limit.final_state;
    // the eta -> 0 limit is established only for 1 < m <= 2
    result.outside_proven_regime = which == LimitKind::eta_zero && !(params.m() > 1.0 && params.m() <= 2.0);
    return result;
}

}  // namespace vfks
