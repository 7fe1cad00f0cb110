#include "vfks/cli.hpp"
#include "vfks/diagnostics.hpp"
#include "vfks/limits.hpp"
#include "vfks/scheme.hpp"
#include "vfks/steady.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>

using namespace vfks;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

double max_dev(const std::vector<double>& v, double target)
{
    double d = 0.0;
    for (double x : v) d = std::max(d, std::abs(x - target));
    return d;
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b)
{
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

cli::RunConfig figure_preset(double chi)
{
    cli::RunConfig c;
    c.m = 2.0;
    c.chi = chi;
    c.tau = 1.0;
    c.eta = 1.0;
    c.n_cells = 100;
    c.dt = 1e-3;
    c.c_update_mode = CUpdateMode::implicit_euler;
    c.t_end = 100.0;
    c.sample_interval = 0.1;
    return c;
}

struct PresetRun {
    RunResult result;
    double seconds = 0.0;
    double initial_mass = 0.0;
};

PresetRun run_preset(double chi)
{
    const cli::RunConfig c = figure_preset(chi);
    const Grid grid = c.grid();
    const CellState initial = cli::make_initial_condition(c, grid);
    RunOptions options;
    options.sample_interval = c.sample_interval;
    options.reference_mass = c.ic_mass;
    const auto start = Clock::now();
    PresetRun out;
    out.result = run(initial, c.t_end, c.params(), c.solver(), grid, options);
    out.seconds = seconds_since(start);
    out.initial_mass = total_mass(initial.rho, grid);
    return out;
}

const Snapshot& snapshot_at(const RunResult& r, double t)
{
    for (const auto& s : r.snapshots)
        if (std::abs(s.t - t) < 1e-9) return s;
    throw std::runtime_error("no snapshot at t=" + fmt(t));
}

std::map<double, PresetRun>& presets()
{
    static std::map<double, PresetRun> cache;
    return cache;
}

const PresetRun& preset(double chi)
{
    auto& cache = presets();
    auto it = cache.find(chi);
    if (it == cache.end()) it = cache.emplace(chi, run_preset(chi)).first;
    return it->second;
}

Outcome ac1()
{
    Outcome o{true, ""};
    for (double chi : {1.0, 10.0}) {
        const PresetRun& p = preset(chi);
        double drift = 0.0;
        for (const auto& r : p.result.records) drift = std::max(drift, std::abs(r.mass_rho - p.initial_mass) / p.initial_mass);
        const bool ok = drift <= 1e-10 && p.seconds < 30.0;
        o.pass = o.pass && ok;
        o.detail += "chi=" + fmt(chi) + ": drift " + fmt(drift) + ", " + fmt(p.seconds) + " s; ";
    }
    return o;
}

Outcome ac2()
{
    struct Set {
        double m, chi, tau, eta;
    };
    Outcome o{true, ""};
    double worst = 0.0;
    for (const Set& s : {Set{2, 1, 1, 1}, Set{3, 0.4, 1, 1}, Set{1.5, 1, 0.5, 2}}) {
        for (double M : {0.5, 0.3}) {
            const Grid grid(100);
            const ModelParams params(s.m, s.chi, s.tau, s.eta);
            const SolverConfig config;
            CellState state{std::vector<double>(100, M), std::vector<double>(100, M), 0.0};
            for (int k = 0; k < 10000; ++k) state = step(state, params, config, grid).first;
            worst = std::max({worst, max_dev(state.rho, M), max_dev(state.c, M)});
        }
    }
    o.pass = worst <= 1e-13;
    o.detail = "max deviation after 1e4 steps " + fmt(worst);
    return o;
}

Outcome ac3()
{
    Outcome o{true, ""};
    for (double chi : {1.0, 10.0}) {
        cli::RunConfig c = figure_preset(chi);
        c.apply_paper_fidelity();
        c.ic_kind = cli::IcKind::perturbed_cosine;
        c.ic_amplitude = 0.05;
        c.t_end = 1e5 * c.dt;
        const Grid grid = c.grid();
        RunOptions options;
        options.keep_snapshots = false;
        options.sample_interval = 0.01;
        options.reference_mass = c.ic_mass;
        const RunResult r = run(cli::make_initial_condition(c, grid), c.t_end, c.params(), c.solver(), grid, options);
        const bool ok = r.steps == 100000 && r.max_bound_violation <= 1e-10 && r.bound_violation_steps == 0;
        o.pass = o.pass && ok;
        o.detail += "chi=" + fmt(chi) + ": " + std::to_string(r.steps) + " steps, max violation " +
                    fmt(r.max_bound_violation) + "; ";
    }
    return o;
}

Outcome ac4()
{
    const PresetRun& weak = preset(1.0);
    const double dev = max_dev(weak.result.final_state.rho, 0.5);
    const PresetRun& strong = preset(10.0);
    const auto& rho100 = strong.result.final_state.rho;
    const auto [lo, hi] = std::minmax_element(rho100.begin(), rho100.end());
    const double range = *hi - *lo;
    const double change = max_diff(rho100, snapshot_at(strong.result, 99.0).rho);
    Outcome o;
    o.pass = dev < 1e-3 && range > 0.1 && change < 1e-6;
    o.detail = "chi=1 |rho-0.5| " + fmt(dev) + "; chi=10 range " + fmt(range) + ", |rho(100)-rho(99)| " + fmt(change);
    if (range <= 0.1) o.detail += " (chi=10 relaxes to the constant state)";
    return o;
}

Outcome ac5()
{
    const PresetRun& p = preset(1.0);
    std::vector<std::pair<double, double>> series;
    for (const auto& r : p.result.records) series.emplace_back(r.t, r.rel_entropy_h1);
    const DecayFit fit = fit_decay(series, 1.0, 50.0);
    Outcome o;
    o.pass = fit.r_squared >= 0.99 && fit.mu > 0.0;
    o.detail = "mu " + fmt(fit.mu) + ", r^2 " + fmt(fit.r_squared) + " over [" + fmt(fit.t_start) + ", " +
               fmt(fit.t_end) + "] with " + std::to_string(fit.points_used) + " points";
    return o;
}

Outcome ac6()
{
    using namespace steady;
    const auto start = Clock::now();
    const double m = 3.0, chi = 0.5, lambda = -0.1;
    const PotentialLandmarks lm = critical_points(m, chi, lambda);
    const double r1 = (1.0 - std::sqrt(0.6)) / 2.0, r2 = (1.0 + std::sqrt(0.6)) / 2.0;
    const double root_err = std::max(std::abs(lm.c_tilde - r1), std::abs(lm.c_tilde_plus - r2));

    const SteadyProblem top{m, chi, lambda, lm.g_at_tilde - 1e-8};
    const double x_top = time_map(top, lm);
    const double limit = time_map_top_limit(lm);
    const bool top_ok = std::abs(x_top - limit) < 1e-3 && std::abs(limit - 1.6953) < 1e-3;

    std::string bottom;
    bool bottom_ok = false;
    try {
        const double x_bottom = time_map({m, chi, lambda, lm.g_at_tilde_plus + 1e-10}, lm);
        bottom_ok = x_bottom > 1e3;
        bottom = "X(G(c~+)+1e-10) " + fmt(x_bottom);
    } catch (const EmptyWindow& e) {
        bottom = "X(G(c~+)+1e-10) undefined: mu lies below max(G(-lambda), G(c~+)) = " +
                 fmt(std::max(lambda * lambda, lm.g_at_tilde_plus));
    }
    const double secs = seconds_since(start);
    Outcome o;
    o.pass = root_err <= 1e-10 && top_ok && bottom_ok && secs < 1.0;
    o.detail = "root error " + fmt(root_err) + "; X(G(c~)-1e-8) " + fmt(x_top) + " vs limit " + fmt(limit) + "; " +
               bottom + "; " + fmt(secs) + " s";
    return o;
}

Outcome ac7()
{
    using namespace steady;
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    boost::math::quadrature::tanh_sinh<double> ts;
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const double m = 2.0 + 1e-3 + 3.0 * u(gen);
        const double chi = (1.0 / (m - 1.0)) * (0.01 + 0.98 * u(gen));
        const double lambda = lambda_tangency(m, chi) * (0.01 + 0.98 * u(gen));
        const SteadyProblem p{m, chi, lambda, 0.0};
        const double c = -lambda + (1.0 + lambda) * u(gen);
        auto f = [&](double z) { return std::pow((m - 1.0) * chi * std::max(z + lambda, 0.0), 1.0 / (m - 1.0)); };
        const double reference = c * c - 2.0 * ts.integrate(f, -lambda, c, 1e-15);
        worst = std::max(worst, std::abs(g_lambda(c, p) - reference));
    }
    return {worst <= 1e-10, "max |G - quadrature| " + fmt(worst) + " over 1000 points"};
}

Outcome ac8()
{
    using namespace steady;
    const double m = 3.0, chi = 0.4;
    const Grid grid(100);
    const PatternResult pr = find_pattern(m, chi, grid);
    const double residual = ode_residual(pr.problem, pr.landmarks, 2000);

    const auto& rho0 = pr.profile.rho_values;
    bool increasing = true;
    for (std::size_t i = 1; i < rho0.size(); ++i) increasing = increasing && rho0[i] > rho0[i - 1];
    const double M = total_mass(rho0, grid);

    RunOptions options;
    options.sample_interval = 0.5;
    options.keep_snapshots = false;
    const CellState initial{rho0, pr.profile.c_values, 0.0};
    const RunResult r = run(initial, 5.0, ModelParams(m, chi, 1.0, 1.0), SolverConfig{}, grid, options);
    const double drift = max_diff(r.final_state.rho, rho0);

    Outcome o;
    o.pass = residual < 1e-4 && drift < 1e-2 && increasing && M > 0.0 && M < 1.0;
    o.detail = "m=3, chi=0.4: ODE residual " + fmt(residual) + ", |rho(5)-rho(0)| " + fmt(drift) + ", M " + fmt(M) +
               (increasing ? ", strictly increasing" : ", not monotone");
    return o;
}

Outcome ac9()
{
    const auto start = Clock::now();
    cli::RunConfig c = figure_preset(1.0);
    c.t_end = 10.0;
    const Grid grid = c.grid();
    const CellState initial = cli::make_initial_condition(c, grid);
    Outcome o{true, ""};
    const std::vector<double> taus{1.0, 0.1, 0.01}, etas{5.0, 0.5, 0.05};
    for (const auto& [kind, values] : {std::pair{LimitKind::tau_zero, taus}, std::pair{LimitKind::eta_zero, etas}}) {
        const SweepResult s = sweep(kind, values, initial, c.params(), c.solver(), grid, c.t_end, c.sample_interval);
        bool decreasing = true;
        for (std::size_t k = 1; k < s.distances.size(); ++k) decreasing = decreasing && s.distances[k] < s.distances[k - 1];
        o.pass = o.pass && decreasing;
        o.detail += to_string(kind) + ":";
        for (double d : s.distances) o.detail += " " + fmt(d);
        o.detail += "; ";
    }
    const double secs = seconds_since(start);
    o.pass = o.pass && secs < 300.0;
    o.detail += fmt(secs) + " s";
    return o;
}

std::vector<double> oracle_residual(const std::vector<double>& rho, const std::vector<double>& old,
                                    const std::vector<double>& c, double m, double chi, double dt, double dx)
{
    const std::size_t n = rho.size();
    std::vector<double> f(n + 1, 0.0), r(n);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double rl = rho[i], rr = rho[i + 1];
        const double psi = rr - rl >= 0.0 ? (1.0 - rl) * std::pow(std::max(rr, 0.0), m - 1.0)
                                           : (1.0 - rr) * std::pow(std::max(rl, 0.0), m - 1.0);
        const double ph = c[i + 1] - c[i] >= 0.0 ? rl * (1.0 - rr) : rr * (1.0 - rl);
        f[i + 1] = -(psi * (rr - rl) - chi * ph * (c[i + 1] - c[i])) / dx;
    }
    for (std::size_t i = 0; i < n; ++i) r[i] = rho[i] - old[i] + dt / dx * (f[i + 1] - f[i]);
    return r;
}

Outcome ac10()
{
    std::mt19937_64 gen(20240601);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
        const std::size_t n = 2 + static_cast<std::size_t>(u(gen) * 7.0);
        const double m = 1.0 + 3.0 * u(gen);
        const double chi = 0.1 + 9.9 * u(gen);
        const Grid g(n);
        SolverConfig cfg;
        cfg.dt = 1e-3 * (0.1 + u(gen));
        CellState s;
        for (std::size_t i = 0; i < n; ++i) {
            s.rho.push_back(0.02 + 0.96 * u(gen));
            s.c.push_back(u(gen));
        }
        const auto rho = update_rho(s, s.c, ModelParams(m, chi, 1.0, 1.0), cfg, g).first;
        std::vector<double> fp = s.rho;
        for (int it = 0; it < 200000; ++it) {
            const auto r = oracle_residual(fp, s.rho, s.c, m, chi, cfg.dt, g.dx());
            double norm = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                fp[i] -= 0.5 * r[i];
                norm = std::max(norm, std::abs(r[i]));
            }
            if (norm < 1e-15) break;
        }
        worst = std::max(worst, max_diff(rho, fp));
    }
    return {worst <= 1e-10, "max |Newton - fixed point| " + fmt(worst) + " over 100 draws"};
}

}  // namespace

int main()
{
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"AC1", ac1}, {"AC2", ac2}, {"AC3", ac3}, {"AC4", ac4}, {"AC5", ac5},
        {"AC6", ac6}, {"AC7", ac7}, {"AC8", ac8}, {"AC9", ac9}, {"AC10", ac10},
    };
    int failures = 0;
    for (const auto& [name, check] : criteria) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failures;
        std::printf("%s %s %s\n", name.c_str(), o.pass ? "PASS" : "FAIL", o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
