#pragma once

#include "vfks/diagnostics.hpp"
#include "vfks/limits.hpp"
#include "vfks/model.hpp"
#include "vfks/scheme.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace vfks::cli {

enum ExitCode : int {
    kSuccess = 0,
    kConfigError = 2,
    kNonConvergence = 3,
    kAcceptanceFailure = 4,
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class AmplitudeTooLarge : public ConfigError {
public:
    using ConfigError::ConfigError;
};

enum class IcKind { constant, perturbed_cosine, step, from_file };

std::string to_string(IcKind kind);
IcKind parse_ic_kind(const std::string& text);

/// Everything one command needs. Keys of the config file are the field names.
struct RunConfig {
    double m = 2.0;
    double chi = 1.0;
    double tau = 1.0;
    double eta = 1.0;
    double dt = 1e-3;
    double newton_tol = 1e-12;
    int newton_max_iter = 50;
    CUpdateMode c_update_mode = CUpdateMode::implicit_euler;
    double bound_tolerance = 1e-10;
    std::size_t n_cells = 100;
    double t_end = 100.0;
    double sample_interval = 0.1;
    double snapshot_interval = 1.0;
    IcKind ic_kind = IcKind::perturbed_cosine;
    double ic_amplitude = 0.05;
    double ic_mass = 0.5;
    std::string ic_file;
    std::string output_dir = "output";
    std::uint64_t seed = 20240601;

    ModelParams params() const { return {m, chi, tau, eta}; }
    SolverConfig solver() const;
    Grid grid() const { return Grid(n_cells); }

    /// Explicit c update, dt = 1e-6, 100 cells.
    void apply_paper_fidelity();
    void validate() const;
};

/// key=value lines; '#' starts a comment; unknown keys are errors.
RunConfig parse_config(std::istream& in, RunConfig base = {});
RunConfig parse_config_file(const std::filesystem::path& path, RunConfig base = {});

/// The config as "key=value" lines in a fixed order.
std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& config);

CellState make_initial_condition(const RunConfig& config, const Grid& grid);

/// Fixed 17-significant-digit formatting used in every CSV file.
std::string format_double(double v);

void write_snapshot(std::ostream& out, const RunConfig& config, const Grid& grid, std::span<const double> rho,
                    std::span<const double> c, double t, const std::string& command);
/// Reads x,rho,c rows; '#' lines are skipped. Returns (rho, c).
std::pair<std::vector<double>, std::vector<double>> read_snapshot(std::istream& in);

void write_series(std::ostream& out, const RunConfig& config, std::span<const DiagnosticsRecord> records,
                  const std::string& command);
void write_sweep(std::ostream& out, const RunConfig& config, const SweepResult& result, const std::string& command);

int cmd_simulate(const RunConfig& config, std::ostream& out, std::ostream& err);

struct SteadyOptions {
    int scan_points = 200;
    bool scan_to_zero = false;
    std::size_t residual_cells = 2000;
};
int cmd_steady(const RunConfig& config, const SteadyOptions& options, std::ostream& out, std::ostream& err);

int cmd_sweep(LimitKind which, const RunConfig& config, const std::vector<double>& values, std::ostream& out,
              std::ostream& err);

struct DecayOptions {
    double fit_start = 1.0;
    double fit_end = -1.0;  // negative: t_end
};
int cmd_decay(const RunConfig& config, const DecayOptions& options, std::ostream& out, std::ostream& err);

}  // namespace vfks::cli
