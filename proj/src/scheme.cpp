#include "vfks/scheme.hpp"

#include "vfks/tridiagonal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace vfks {

namespace {

// Smallest density used inside derivatives of rho^{m-1}; for 1 < m < 2 the
// derivative is unbounded at zero.
constexpr double kDerivativeFloor = 1e-14;

double power(double rho, double e)
{
    return std::pow(std::max(rho, 0.0), e);
}

double power_derivative(double rho, double m)
{
    return (m - 1.0) * std::pow(std::max(rho, kDerivativeFloor), m - 2.0);
}

// Flux through the interface between cells j and j+1 and its partial
// derivatives with respect to the two adjacent densities.
struct InterfaceFlux {
    double f;
    double d_left;
    double d_right;
};

InterfaceFlux interface_flux(double rl, double rr, double cl, double cr, double m, double chi, double dx)
{
    const double drho = rr - rl;
    double psi, dpsi_l, dpsi_r;
    if (drho >= 0.0) {
        psi = (1.0 - rl) * power(rr, m - 1.0);
        dpsi_l = -power(rr, m - 1.0);
        dpsi_r = (1.0 - rl) * power_derivative(rr, m);
    } else {
        psi = (1.0 - rr) * power(rl, m - 1.0);
        dpsi_l = (1.0 - rr) * power_derivative(rl, m);
        dpsi_r = -power(rl, m - 1.0);
    }
    const double dc = cr - cl;
    double phi, dphi_l, dphi_r;
    if (dc >= 0.0) {
        phi = rl * (1.0 - rr);
        dphi_l = 1.0 - rr;
        dphi_r = -rl;
    } else {
        phi = rr * (1.0 - rl);
        dphi_l = -rr;
        dphi_r = 1.0 - rl;
    }
    const double inv = -1.0 / dx;
    return {
        inv * (psi * drho - chi * phi * dc),
        inv * (dpsi_l * drho - psi - chi * dphi_l * dc),
        inv * (dpsi_r * drho + psi - chi * dphi_r * dc),
    };
}

double max_abs(std::span<const double> v)
{
    double m = 0.0;
    for (double x : v) {
        if (std::isnan(x)) return std::numeric_limits<double>::infinity();
        m = std::max(m, std::abs(x));
    }
    return m;
}

void check_sizes(std::span<const double> a, std::span<const double> b, const Grid& grid)
{
    if (a.size() != grid.n_cells() || b.size() != grid.n_cells())
        throw DomainError("vector length does not match the grid");
}

SolverConfig with_dt(const SolverConfig& config, double dt)
{
    SolverConfig c = config;
    c.dt = dt;
    return c;
}

}  // namespace

double interface_diffusion(double rho_left, double rho_right, double m)
{
    if (rho_right - rho_left >= 0.0) return (1.0 - rho_left) * power(rho_right, m - 1.0);
    return (1.0 - rho_right) * power(rho_left, m - 1.0);
}

double interface_mobility(double rho_left, double rho_right, double c_left, double c_right)
{
    if (c_right - c_left >= 0.0) return rho_left * (1.0 - rho_right);
    return rho_right * (1.0 - rho_left);
}

FluxField assemble_fluxes(std::span<const double> rho, std::span<const double> c, const ModelParams& params,
                          const Grid& grid)
{
    check_sizes(rho, c, grid);
    const std::size_t n = rho.size();
    FluxField flux{std::vector<double>(n + 1, 0.0)};
    for (std::size_t j = 0; j + 1 < n; ++j) {
        flux.f[j + 1] =
            interface_flux(rho[j], rho[j + 1], c[j], c[j + 1], params.m(), params.chi(), grid.dx()).f;
    }
    return flux;
}

double explicit_c_stability_limit(const ModelParams& params, const Grid& grid)
{
    const double dx2 = grid.dx() * grid.dx();
    return params.tau() * dx2 / (2.0 * params.eta() + dx2);
}

std::vector<double> update_c(const CellState& state, const ModelParams& params, const SolverConfig& config,
                             const Grid& grid)
{
    check_state(state, grid);
    const double tau = params.tau();
    if (!(tau > 0.0)) throw DomainError("update_c requires tau > 0; use the elliptic solve for tau = 0");
    const double dt = config.dt;
    const double eta = params.eta();
    const std::size_t n = state.size();

    if (config.c_update_mode == CUpdateMode::explicit_euler) {
        const auto lap = neumann_laplacian(state.c, grid.dx());
        std::vector<double> c(n);
        for (std::size_t i = 0; i < n; ++i)
            c[i] = state.c[i] + (dt / tau) * (eta * lap[i] - state.c[i] + state.rho[i]);
        return c;
    }
    // increment form, so that a steady state gives an exactly zero right-hand side
    const auto lap = neumann_laplacian(state.c, grid.dx());
    std::vector<double> rhs(n);
    for (std::size_t i = 0; i < n; ++i) rhs[i] = state.rho[i] - state.c[i] + eta * lap[i];
    auto c = solve_shifted_neumann(tau / dt + 1.0, eta, rhs, grid.dx());
    for (std::size_t i = 0; i < n; ++i) c[i] += state.c[i];
    return c;
}

std::vector<double> rho_residual(std::span<const double> rho, std::span<const double> rho_old,
                                 std::span<const double> c, const ModelParams& params, double dt,
                                 const Grid& grid)
{
    check_sizes(rho, rho_old, grid);
    check_sizes(rho, c, grid);
    const std::size_t n = rho.size();
    const double scale = dt / grid.dx();
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = rho[i] - rho_old[i];
    for (std::size_t j = 0; j + 1 < n; ++j) {
        const double f = interface_flux(rho[j], rho[j + 1], c[j], c[j + 1], params.m(), params.chi(), grid.dx()).f;
        r[j] += scale * f;
        r[j + 1] -= scale * f;
    }
    return r;
}

std::pair<std::vector<double>, StepReport> update_rho(const CellState& state, std::span<const double> c_new,
                                                      const ModelParams& params, const SolverConfig& config,
                                                      const Grid& grid)
{
    check_state(state, grid);
    check_sizes(state.rho, c_new, grid);
    const std::size_t n = state.size();
    const double scale = config.dt / grid.dx();
    const double m = params.m();
    const double chi = params.chi();

    std::vector<double> rho = state.rho;
    StepReport report;
    for (int it = 1; it <= config.newton_max_iter; ++it) {
        Tridiagonal jac(n);
        std::vector<double> r(n);
        for (std::size_t i = 0; i < n; ++i) {
            r[i] = rho[i] - state.rho[i];
            jac.diag[i] = 1.0;
        }
        for (std::size_t j = 0; j + 1 < n; ++j) {
            const auto fl = interface_flux(rho[j], rho[j + 1], c_new[j], c_new[j + 1], m, chi, grid.dx());
            r[j] += scale * fl.f;
            r[j + 1] -= scale * fl.f;
            jac.diag[j] += scale * fl.d_left;
            jac.upper[j] += scale * fl.d_right;
            jac.lower[j + 1] -= scale * fl.d_left;
            jac.diag[j + 1] -= scale * fl.d_right;
        }
        const double norm = max_abs(r);
        report.newton_iterations = it;
        report.final_residual_norm = norm;
        if (!std::isfinite(norm)) break;
        const bool corrected = it > 1 || norm == 0.0 || it == config.newton_max_iter;
        if (norm <= config.newton_tol && corrected) return {std::move(rho), report};
        if (it == config.newton_max_iter) break;

        for (double& x : r) x = -x;
        std::vector<double> delta;
        try {
            delta = solve_tridiagonal(jac, r);
        } catch (const std::runtime_error&) {
            break;
        }
        for (std::size_t i = 0; i < n; ++i) rho[i] += delta[i];
    }
    throw NonConvergence("Newton iteration for the density did not converge", report.final_residual_norm);
}

Coupling standard_coupling(const ModelParams& params, const SolverConfig& config, const Grid& grid)
{
    Coupling coupling;
    if (params.parabolic_elliptic()) {
        const double eta = params.eta();
        const double dx = grid.dx();
        coupling.advance_c = [eta, dx](const CellState& s, double) {
            return solve_neumann_elliptic(s.rho, eta, dx);
        };
    } else {
        coupling.advance_c = [params, config, grid](const CellState& s, double dt) {
            return update_c(s, params, with_dt(config, dt), grid);
        };
    }
    return coupling;
}

namespace {

std::pair<CellState, StepReport> step_impl(const CellState& state, const ModelParams& params,
                                           const SolverConfig& config, const Grid& grid, const Coupling& coupling,
                                           double dt, int depth)
{
    try {
        std::vector<double> c_new = coupling.advance_c(state, dt);
        auto [rho, report] = update_rho(state, c_new, params, with_dt(config, dt), grid);
        CellState next{std::move(rho), std::move(c_new), state.t + dt};
        if (coupling.project_c) next.c = coupling.project_c(next.rho);
        report.bound_violation = bound_violation(next);
        report.halvings = depth;
        return {std::move(next), report};
    } catch (const NonConvergence&) {
        if (depth >= config.max_halvings) throw;
    }
    auto first = step_impl(state, params, config, grid, coupling, 0.5 * dt, depth + 1);
    auto second = step_impl(first.first, params, config, grid, coupling, 0.5 * dt, depth + 1);
    StepReport report = second.second;
    report.newton_iterations += first.second.newton_iterations;
    report.final_residual_norm = std::max(first.second.final_residual_norm, second.second.final_residual_norm);
    report.bound_violation = std::max(first.second.bound_violation, second.second.bound_violation);
    report.halvings = std::max(first.second.halvings, second.second.halvings);
    return {std::move(second.first), report};
}

}  // namespace

std::pair<CellState, StepReport> step(const CellState& state, const ModelParams& params,
                                      const SolverConfig& config, const Grid& grid, const Coupling& coupling)
{
    config.validate();
    check_state(state, grid);
    auto result = step_impl(state, params, config, grid, coupling, config.dt, 0);
    result.second.stability_warning = config.c_update_mode == CUpdateMode::explicit_euler &&
                                      !params.parabolic_elliptic() &&
                                      config.dt > explicit_c_stability_limit(params, grid);
    return result;
}

std::pair<CellState, StepReport> step(const CellState& state, const ModelParams& params,
                                      const SolverConfig& config, const Grid& grid)
{
    return step(state, params, config, grid, standard_coupling(params, config, grid));
}

RunResult run(const CellState& initial, double t_end, const ModelParams& params, const SolverConfig& config,
              const Grid& grid, const RunOptions& options)
{
    config.validate();
    check_state(initial, grid);
    if (t_end < initial.t) throw std::invalid_argument("t_end precedes the initial time");
    if (!(options.sample_interval > 0.0)) throw std::invalid_argument("sample_interval must be > 0");

    const Coupling coupling = options.coupling.advance_c ? options.coupling : standard_coupling(params, config, grid);
    const double t0 = initial.t;
    const double dt = config.dt;
    const long long total = std::llround((t_end - t0) / dt);
    const double M = std::isnan(options.reference_mass) ? total_mass(initial.rho, grid) : options.reference_mass;

    RunResult result;
    CellState state = initial;

    auto sample = [&](const CellState& s) {
        result.records.push_back(make_record(s, M, params, grid));
        if (options.keep_snapshots) result.snapshots.push_back({s.t, s.rho, s.c});
        for (const auto& obs : options.observers) obs(s);
    };

    long long next_sample_index = 1;
    auto next_sample_step = [&]() {
        return std::llround(static_cast<double>(next_sample_index) * options.sample_interval / dt);
    };

    sample(state);
    for (long long k = 1; k <= total; ++k) {
        auto [next, report] = step(state, params, config, grid, coupling);
        next.t = t0 + static_cast<double>(k) * dt;
        state = std::move(next);

        ++result.steps;
        result.newton_iterations += report.newton_iterations;
        result.max_bound_violation = std::max(result.max_bound_violation, report.bound_violation);
        if (report.bound_violation > config.bound_tolerance) ++result.bound_violation_steps;
        result.max_halvings = std::max(result.max_halvings, report.halvings);
        result.stability_warning = result.stability_warning || report.stability_warning;

        bool due = false;
        while (next_sample_step() <= k) {
            due = due || next_sample_step() == k;
            ++next_sample_index;
        }
        if (due || k == total) sample(state);
    }
    result.final_state = std::move(state);
    return result;
}

}  // namespace vfks
