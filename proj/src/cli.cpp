#include "vfks/cli.hpp"

#include "vfks/steady.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

namespace vfks::cli {

namespace fs = std::filesystem;

std::string to_string(IcKind kind)
{
    switch (kind) {
    case IcKind::constant: return "constant";
    case IcKind::perturbed_cosine: return "perturbed_cosine";
    case IcKind::step: return "step";
    case IcKind::from_file: return "from_file";
    }
    return "unknown";
}

IcKind parse_ic_kind(const std::string& text)
{
    if (text == "constant") return IcKind::constant;
    if (text == "perturbed_cosine") return IcKind::perturbed_cosine;
    if (text == "step") return IcKind::step;
    if (text == "from_file") return IcKind::from_file;
    throw ConfigError("unknown ic_kind '" + text + "'");
}

SolverConfig RunConfig::solver() const
{
    SolverConfig s;
    s.dt = dt;
    s.newton_tol = newton_tol;
    s.newton_max_iter = newton_max_iter;
    s.c_update_mode = c_update_mode;
    s.bound_tolerance = bound_tolerance;
    return s;
}

void RunConfig::apply_paper_fidelity()
{
    const SolverConfig paper = paper_fidelity_config();
    c_update_mode = paper.c_update_mode;
    dt = paper.dt;
    n_cells = kPaperFidelityCells;
}

void RunConfig::validate() const
{
    try {
        (void)params();
        solver().validate();
        (void)grid();
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    if (!(t_end >= 0.0)) throw ConfigError("t_end must be >= 0");
    if (!(sample_interval > 0.0)) throw ConfigError("sample_interval must be > 0");
    if (!(snapshot_interval > 0.0)) throw ConfigError("snapshot_interval must be > 0");
    const double ratio = snapshot_interval / sample_interval;
    if (ratio < 1.0 - 1e-9 || std::abs(ratio - std::round(ratio)) > 1e-9 * ratio)
        throw ConfigError("snapshot_interval must be a multiple of sample_interval");
    if (!(ic_mass > 0.0 && ic_mass < 1.0)) throw ConfigError("ic_mass must lie in (0,1)");
    if (!(ic_amplitude >= 0.0)) throw ConfigError("ic_amplitude must be >= 0");
    if (ic_kind == IcKind::from_file && ic_file.empty()) throw ConfigError("ic_kind=from_file needs ic_file");
}

namespace {

std::string trim(const std::string& s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_double(const std::string& key, const std::string& value)
{
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(value, &used);
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': not a number: '" + value + "'");
    }
    if (used != value.size()) throw ConfigError("key '" + key + "': trailing characters in '" + value + "'");
    return v;
}

long long parse_integer(const std::string& key, const std::string& value)
{
    std::size_t used = 0;
    long long v = 0;
    try {
        v = std::stoll(value, &used);
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': not an integer: '" + value + "'");
    }
    if (used != value.size()) throw ConfigError("key '" + key + "': trailing characters in '" + value + "'");
    return v;
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters()
{
    static const std::map<std::string, Setter> table = {
        {"m", [](RunConfig& c, const std::string& k, const std::string& v) { c.m = parse_double(k, v); }},
        {"chi", [](RunConfig& c, const std::string& k, const std::string& v) { c.chi = parse_double(k, v); }},
        {"tau", [](RunConfig& c, const std::string& k, const std::string& v) { c.tau = parse_double(k, v); }},
        {"eta", [](RunConfig& c, const std::string& k, const std::string& v) { c.eta = parse_double(k, v); }},
        {"dt", [](RunConfig& c, const std::string& k, const std::string& v) { c.dt = parse_double(k, v); }},
        {"newton_tol", [](RunConfig& c, const std::string& k, const std::string& v) { c.newton_tol = parse_double(k, v); }},
        {"newton_max_iter",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.newton_max_iter = static_cast<int>(parse_integer(k, v));
         }},
        {"c_update_mode",
         [](RunConfig& c, const std::string&, const std::string& v) {
             try {
                 c.c_update_mode = parse_c_update_mode(v);
             } catch (const std::invalid_argument& e) {
                 throw ConfigError(e.what());
             }
         }},
        {"bound_tolerance",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.bound_tolerance = parse_double(k, v); }},
        {"n_cells",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             const long long n = parse_integer(k, v);
             if (n < 1) throw ConfigError("n_cells must be >= 1");
             c.n_cells = static_cast<std::size_t>(n);
         }},
        {"t_end", [](RunConfig& c, const std::string& k, const std::string& v) { c.t_end = parse_double(k, v); }},
        {"sample_interval",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.sample_interval = parse_double(k, v); }},
        {"snapshot_interval",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.snapshot_interval = parse_double(k, v); }},
        {"ic_kind", [](RunConfig& c, const std::string&, const std::string& v) { c.ic_kind = parse_ic_kind(v); }},
        {"ic_amplitude",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.ic_amplitude = parse_double(k, v); }},
        {"ic_mass", [](RunConfig& c, const std::string& k, const std::string& v) { c.ic_mass = parse_double(k, v); }},
        {"ic_file", [](RunConfig& c, const std::string&, const std::string& v) { c.ic_file = v; }},
        {"output_dir", [](RunConfig& c, const std::string&, const std::string& v) { c.output_dir = v; }},
        {"seed",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             const long long s = parse_integer(k, v);
             if (s < 0) throw ConfigError("seed must be >= 0");
             c.seed = static_cast<std::uint64_t>(s);
         }},
    };
    return table;
}

}  // namespace

RunConfig parse_config(std::istream& in, RunConfig base)
{
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto it = setters().find(key);
        if (it == setters().end()) throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        it->second(base, key, value);
    }
    return base;
}

RunConfig parse_config_file(const fs::path& path, RunConfig base)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    return parse_config(in, std::move(base));
}

std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& c)
{
    return {
        {"m", format_double(c.m)},
        {"chi", format_double(c.chi)},
        {"tau", format_double(c.tau)},
        {"eta", format_double(c.eta)},
        {"dt", format_double(c.dt)},
        {"newton_tol", format_double(c.newton_tol)},
        {"newton_max_iter", std::to_string(c.newton_max_iter)},
        {"c_update_mode", to_string(c.c_update_mode)},
        {"bound_tolerance", format_double(c.bound_tolerance)},
        {"n_cells", std::to_string(c.n_cells)},
        {"t_end", format_double(c.t_end)},
        {"sample_interval", format_double(c.sample_interval)},
        {"snapshot_interval", format_double(c.snapshot_interval)},
        {"ic_kind", to_string(c.ic_kind)},
        {"ic_amplitude", format_double(c.ic_amplitude)},
        {"ic_mass", format_double(c.ic_mass)},
        {"ic_file", c.ic_file},
        {"output_dir", c.output_dir},
        {"seed", std::to_string(c.seed)},
    };
}

namespace {

void write_header(std::ostream& out, const RunConfig& config, const std::string& command)
{
    out << "# command=" << command << '\n';
    for (const auto& [k, v] : config_entries(config)) out << "# " << k << '=' << v << '\n';
}

}  // namespace

CellState make_initial_condition(const RunConfig& config, const Grid& grid)
{
    const std::size_t n = grid.n_cells();
    const double M = config.ic_mass;
    const double A = config.ic_amplitude;
    CellState s;
    s.t = 0.0;
    s.c.assign(n, M);
    switch (config.ic_kind) {
    case IcKind::constant:
        s.rho.assign(n, M);
        break;
    case IcKind::perturbed_cosine:
    case IcKind::step: {
        if (A > std::min(M, 1.0 - M))
            throw AmplitudeTooLarge("ic_amplitude exceeds min(ic_mass, 1 - ic_mass)");
        s.rho.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double x = grid.center(i);
            if (config.ic_kind == IcKind::perturbed_cosine) s.rho[i] = M + A * std::cos(std::numbers::pi * x);
            else s.rho[i] = x < 0.5 ? M + A : M - A;
        }
        break;
    }
    case IcKind::from_file: {
        std::ifstream in(config.ic_file);
        if (!in) throw ConfigError("cannot open ic_file " + config.ic_file);
        auto [rho, c] = read_snapshot(in);
        if (rho.size() != n) throw ConfigError("ic_file has " + std::to_string(rho.size()) + " rows, expected " +
                                               std::to_string(n));
        s.rho = std::move(rho);
        s.c = std::move(c);
        break;
    }
    }
    return s;
}

void write_snapshot(std::ostream& out, const RunConfig& config, const Grid& grid, std::span<const double> rho,
                    std::span<const double> c, double t, const std::string& command)
{
    write_header(out, config, command);
    out << "# t=" << format_double(t) << '\n';
    out << "x,rho,c\n";
    for (std::size_t i = 0; i < rho.size(); ++i)
        out << format_double(grid.center(i)) << ',' << format_double(rho[i]) << ',' << format_double(c[i]) << '\n';
}

std::pair<std::vector<double>, std::vector<double>> read_snapshot(std::istream& in)
{
    std::vector<double> rho, c;
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            if (line != "x,rho,c") throw ConfigError("snapshot header must be 'x,rho,c'");
            header_seen = true;
            continue;
        }
        std::stringstream row(line);
        std::string x, r, cc, extra;
        if (!std::getline(row, x, ',') || !std::getline(row, r, ',') || !std::getline(row, cc, ',') ||
            std::getline(row, extra, ','))
            throw ConfigError("snapshot row must have three columns: '" + line + "'");
        rho.push_back(parse_double("rho", trim(r)));
        c.push_back(parse_double("c", trim(cc)));
    }
    if (!header_seen) throw ConfigError("snapshot file has no header");
    return {std::move(rho), std::move(c)};
}

void write_series(std::ostream& out, const RunConfig& config, std::span<const DiagnosticsRecord> records,
                  const std::string& command)
{
    write_header(out, config, command);
    out << "t,mass_rho,mass_c,energy,h1,rho_min,rho_max,c_min,c_max,l2_dist_const\n";
    for (const auto& r : records) {
        out << format_double(r.t) << ',' << format_double(r.mass_rho) << ',' << format_double(r.mass_c) << ','
            << format_double(r.energy) << ',' << format_double(r.rel_entropy_h1) << ',' << format_double(r.rho_min)
            << ',' << format_double(r.rho_max) << ',' << format_double(r.c_min) << ',' << format_double(r.c_max)
            << ',' << format_double(r.l2_dist_const) << '\n';
    }
}

void write_sweep(std::ostream& out, const RunConfig& config, const SweepResult& result, const std::string& command)
{
    write_header(out, config, command);
    if (result.outside_proven_regime) out << "# note=outside proven regime\n";
    out << "param,l2_space_time_dist\n";
    for (std::size_t k = 0; k < result.parameter_values.size(); ++k)
        out << format_double(result.parameter_values[k]) << ',' << format_double(result.distances[k]) << '\n';
}

namespace {

std::ofstream open_output(const fs::path& path)
{
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    return out;
}

std::string snapshot_name(const std::string& prefix, double t)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_t%.6f.csv", prefix.c_str(), t);
    return buf;
}

bool on_snapshot_grid(double t, double interval, double dt)
{
    const double k = std::round(t / interval);
    return std::abs(t - k * interval) < 0.5 * dt;
}

RunConfig prepared(const RunConfig& config)
{
    config.validate();
    fs::create_directories(config.output_dir);
    return config;
}

template <class F>
int guarded(std::ostream& err, F&& body)
{
    try {
        return body();
    } catch (const NonConvergence& e) {
        err << "error: " << e.what() << " (residual " << e.residual() << ")\n";
        return kNonConvergence;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const DomainError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const fs::filesystem_error& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    }
}

RunResult simulate(const RunConfig& config, const Grid& grid, const CellState& initial)
{
    RunOptions options;
    options.sample_interval = config.sample_interval;
    options.reference_mass = config.ic_kind == IcKind::from_file ? std::numeric_limits<double>::quiet_NaN()
                                                                  : config.ic_mass;
    return run(initial, config.t_end, config.params(), config.solver(), grid, options);
}

}  // namespace

int cmd_simulate(const RunConfig& raw, std::ostream& out, std::ostream& err)
{
    return guarded(err, [&] {
        const RunConfig config = prepared(raw);
        const Grid grid = config.grid();
        const CellState initial = make_initial_condition(config, grid);
        const RunResult result = simulate(config, grid, initial);
        const fs::path dir = config.output_dir;

        for (const auto& snap : result.snapshots) {
            const bool last = &snap == &result.snapshots.back();
            if (!last && !on_snapshot_grid(snap.t, config.snapshot_interval, config.dt)) continue;
            auto f = open_output(dir / snapshot_name("snapshot", snap.t));
            write_snapshot(f, config, grid, snap.rho, snap.c, snap.t, "simulate");
        }
        {
            auto f = open_output(dir / "series.csv");
            write_series(f, config, result.records, "simulate");
        }

        const double m0 = total_mass(initial.rho, grid);
        const double m1 = total_mass(result.final_state.rho, grid);
        out << "steps=" << result.steps << '\n';
        out << "final_time=" << format_double(result.final_state.t) << '\n';
        out << "mass_drift=" << format_double(std::abs(m1 - m0) / m0) << '\n';
        out << "max_bound_violation=" << format_double(result.max_bound_violation) << '\n';
        out << "bound_violation_steps=" << result.bound_violation_steps << '\n';
        if (result.stability_warning)
            err << "warning: dt exceeds the explicit c-update stability bound "
                << format_double(explicit_c_stability_limit(config.params(), grid)) << '\n';
        if (config.ic_kind != IcKind::from_file) {
            const auto regime = steady::uniqueness_regime(config.m, config.chi, config.ic_mass);
            out << "constant_state_unique=" << (regime.unique ? "yes" : "no") << " (" << regime.explanation << ")\n";
        }
        return kSuccess;
    });
}

int cmd_steady(const RunConfig& raw, const SteadyOptions& options, std::ostream& out, std::ostream& err)
{
    return guarded(err, [&]() -> int {
        const RunConfig config = prepared(raw);
        const Grid grid = config.grid();
        const fs::path dir = config.output_dir;
        steady::PatternSearchOptions search;
        search.scan_points = options.scan_points;
        search.scan_upper = options.scan_to_zero ? steady::ScanUpper::zero : steady::ScanUpper::lemma_bound;

        auto report = open_output(dir / "steady_report.txt");
        report << "m=" << format_double(config.m) << '\n' << "chi=" << format_double(config.chi) << '\n';
        steady::PatternResult found;
        try {
            found = steady::find_pattern(config.m, config.chi, grid, search);
        } catch (const steady::NoSolution& e) {
            report << "status=no_solution\n";
            out << "no increasing steady state found: " << e.what() << '\n';
            return kSuccess;
        }
        const auto& p = found.profile;
        const double residual = steady::ode_residual(found.problem, found.landmarks, options.residual_cells);
        report << "status=profile\n"
               << "lambda=" << format_double(p.lambda_star) << '\n'
               << "mu=" << format_double(p.mu_star) << '\n'
               << "time_map=" << format_double(p.time_map) << '\n'
               << "mass=" << format_double(p.mass) << '\n'
               << "c_minus=" << format_double(p.c_minus) << '\n'
               << "c_plus=" << format_double(p.c_plus) << '\n'
               << "ode_residual=" << format_double(residual) << '\n';
        {
            RunConfig header = config;
            header.ic_mass = p.mass;
            auto f = open_output(dir / "steady_profile.csv");
            write_snapshot(f, header, grid, p.rho_values, p.c_values, 0.0, "steady");
        }
        out << "lambda=" << format_double(p.lambda_star) << " mu=" << format_double(p.mu_star)
            << " X=" << format_double(p.time_map) << " mass=" << format_double(p.mass)
            << " ode_residual=" << format_double(residual) << '\n';
        return kSuccess;
    });
}

int cmd_sweep(LimitKind which, const RunConfig& raw, const std::vector<double>& values, std::ostream& out,
              std::ostream& err)
{
    return guarded(err, [&] {
        const RunConfig config = prepared(raw);
        const Grid grid = config.grid();
        const CellState initial = make_initial_condition(config, grid);
        SweepResult result;
        try {
            result = sweep(which, values, initial, config.params(), config.solver(), grid, config.t_end,
                           config.sample_interval);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
        const std::string command = "sweep-" + to_string(which);
        const fs::path dir = config.output_dir;
        {
            auto f = open_output(dir / "sweep.csv");
            write_sweep(f, config, result, command);
        }
        {
            auto f = open_output(dir / "sweep_snapshot_distances.csv");
            write_header(f, config, command);
            f << "t";
            for (double v : result.parameter_values) f << ",dist_" << format_double(v);
            f << '\n';
            for (std::size_t k = 0; k < result.sample_times.size(); ++k) {
                f << format_double(result.sample_times[k]);
                for (const auto& row : result.snapshot_distances) f << ',' << format_double(row[k]);
                f << '\n';
            }
        }
        const std::string name = to_string(which);
        for (std::size_t k = 0; k < result.parameter_values.size(); ++k) {
            const auto& s = result.final_states[k];
            auto f = open_output(dir / ("snapshot_" + name + "_" + format_double(result.parameter_values[k]) + ".csv"));
            write_snapshot(f, config, grid, s.rho, s.c, s.t, command);
        }
        {
            const auto& s = result.limit_final_state;
            auto f = open_output(dir / ("snapshot_" + name + "_0.csv"));
            write_snapshot(f, config, grid, s.rho, s.c, s.t, command);
        }
        if (result.outside_proven_regime) err << "warning: outside proven regime (the eta limit needs 1 < m <= 2)\n";
        for (std::size_t k = 0; k < result.parameter_values.size(); ++k)
            out << name << '=' << format_double(result.parameter_values[k])
                << " l2_space_time_dist=" << format_double(result.distances[k]) << '\n';
        return kSuccess;
    });
}

int cmd_decay(const RunConfig& raw, const DecayOptions& options, std::ostream& out, std::ostream& err)
{
    return guarded(err, [&] {
        const RunConfig config = prepared(raw);
        const Grid grid = config.grid();
        const CellState initial = make_initial_condition(config, grid);
        const RunResult result = simulate(config, grid, initial);
        const fs::path dir = config.output_dir;
        {
            auto f = open_output(dir / "series.csv");
            write_series(f, config, result.records, "decay");
        }

        const bool in_regime = config.m > 1.0 && config.m <= 2.0 && config.chi <= 1.0;
        if (!in_regime) err << "warning: outside proven regime (exponential decay needs 1 < m <= 2, chi <= 1)\n";

        const double h1_initial = result.records.front().rel_entropy_h1;
        if (!(h1_initial > kDecayFloor)) {
            out << "already at equilibrium\n";
            return kSuccess;
        }

        std::vector<std::pair<double, double>> h1, l2;
        for (const auto& r : result.records) {
            h1.emplace_back(r.t, r.rel_entropy_h1);
            l2.emplace_back(r.t, r.l2_dist_const);
        }
        const double fit_end = options.fit_end < 0.0 ? config.t_end : options.fit_end;

        auto f = open_output(dir / "decay_fit.csv");
        write_header(f, config, "decay");
        f << "quantity,mu,r_squared,t_start,t_end,points\n";
        bool ok = true;
        for (const auto& [name, series] : {std::pair{"h1", &h1}, std::pair{"l2_dist_const", &l2}}) {
            try {
                const DecayFit fit = fit_decay(*series, options.fit_start, fit_end);
                f << name << ',' << format_double(fit.mu) << ',' << format_double(fit.r_squared) << ','
                  << format_double(fit.t_start) << ',' << format_double(fit.t_end) << ',' << fit.points_used << '\n';
                out << name << ": mu=" << format_double(fit.mu) << " r_squared=" << format_double(fit.r_squared)
                    << " window=[" << format_double(fit.t_start) << ',' << format_double(fit.t_end) << "]\n";
                ok = ok && fit.mu > 0.0 && fit.r_squared >= 0.99;
            } catch (const InsufficientData& e) {
                out << name << ": " << e.what() << '\n';
                ok = false;
            }
        }
        if (!in_regime) return kSuccess;
        if (!ok) {
            err << "decay check failed: need mu > 0 and r_squared >= 0.99\n";
            return kAcceptanceFailure;
        }
        return kSuccess;
    });
}

}  // namespace vfks::cli
