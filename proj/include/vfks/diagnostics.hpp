#pragma once

#include "vfks/model.hpp"

#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace vfks {

/// Scalar observables of one snapshot.
struct DiagnosticsRecord {
    double t = 0.0;
    double mass_rho = 0.0;
    double mass_c = 0.0;
    double energy = 0.0;
    double rel_entropy_h1 = 0.0;  // NaN when the reference mass is not in (0,1)
    double rho_min = 0.0;
    double rho_max = 0.0;
    double c_min = 0.0;
    double c_max = 0.0;
    double l2_dist_const = 0.0;
};

struct DecayFit {
    double mu = 0.0;
    double r_squared = 0.0;
    double t_start = 0.0;
    double t_end = 0.0;
    std::size_t points_used = 0;
};

class InsufficientData : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Values at or below this are treated as floating-point floor and skipped by fit_decay.
inline constexpr double kDecayFloor = 1e-14;

double total_mass(std::span<const double> v, const Grid& grid);

/// Discrete gradient energy
///   dx sum [ rho^m/(m(m-1)) + chi/2 (eta |D+ c|^2 + c^2) - chi rho c ],
/// with rho (log rho - 1) in place of the power term for m = 1. D+ is the
/// forward difference, zero in the last cell.
double energy(const CellState& state, const ModelParams& params, const Grid& grid);

/// Relative entropy with respect to the constant state (M, M):
///   dx sum [ rho log(rho/M) + (1-rho) log((1-rho)/(1-M)) + tau/2 |D+ c|^2 ].
double relative_entropy_h1(const CellState& state, double M, const ModelParams& params, const Grid& grid);

/// Relative entropy between two states:
///   dx sum [ rho log(rho/ref) + (1-rho) log((1-rho)/(1-ref)) + weight/2 (c - c_ref)^2 ].
/// The reference density must be strictly inside (0,1).
double relative_entropy_pair(const CellState& state, const CellState& ref, double weight, const Grid& grid);

/// Least-squares line through (t, log value) restricted to the window.
DecayFit fit_decay(std::span<const std::pair<double, double>> series, double t_start, double t_end);

DiagnosticsRecord make_record(const CellState& state, double M, const ModelParams& params, const Grid& grid);

}  // namespace vfks
