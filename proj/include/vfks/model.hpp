#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace vfks {

/// Thrown when an argument lies outside the domain of a model function.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Physical parameters of the volume-filling Keller-Segel system
///
///   d_t rho   = d_x( (1-rho) rho^{m-1} d_x rho - chi rho (1-rho) d_x c )
///   tau d_t c = eta d_xx c - c + rho
///
/// tau == 0 is the parabolic-elliptic system, eta == 0 the system without
/// chemical diffusion. Both zero at once is rejected.
class ModelParams {
public:
    ModelParams(double m, double chi, double tau, double eta);

    double m() const { return m_; }
    double chi() const { return chi_; }
    double tau() const { return tau_; }
    double eta() const { return eta_; }

    bool parabolic_elliptic() const { return tau_ == 0.0; }
    bool no_chemical_diffusion() const { return eta_ == 0.0; }

    ModelParams with_tau(double tau) const { return {m_, chi_, tau, eta_}; }
    ModelParams with_eta(double eta) const { return {m_, chi_, tau_, eta}; }
    ModelParams with_chi(double chi) const { return {m_, chi, tau_, eta_}; }

private:
    double m_;
    double chi_;
    double tau_;
    double eta_;
};

/// Uniform partition of (0,1) into n cells.
class Grid {
public:
    explicit Grid(std::size_t n_cells);

    std::size_t n_cells() const { return n_; }
    double dx() const { return dx_; }
    /// x_i = (i + 1/2) dx for the zero-based index i.
    double center(std::size_t i) const { return (static_cast<double>(i) + 0.5) * dx_; }
    std::vector<double> centers() const;

private:
    std::size_t n_;
    double dx_;
};

/// Cell averages of density and chemoattractant at time t.
struct CellState {
    std::vector<double> rho;
    std::vector<double> c;
    double t = 0.0;

    std::size_t size() const { return rho.size(); }
};

/// Throws DomainError unless both vectors have the grid's length.
void check_state(const CellState& state, const Grid& grid);

/// Largest distance by which any component of the state leaves [0,1]; 0 if none.
double bound_violation(const CellState& state);

enum class CUpdateMode { explicit_euler, implicit_euler };

std::string to_string(CUpdateMode mode);
CUpdateMode parse_c_update_mode(const std::string& text);

struct SolverConfig {
    double dt = 1e-3;
    double newton_tol = 1e-12;
    int newton_max_iter = 50;
    CUpdateMode c_update_mode = CUpdateMode::implicit_euler;
    double bound_tolerance = 1e-10;
    /// Retry budget: a step that fails to converge is redone as two half steps,
    /// recursively, at most this many times deep.
    int max_halvings = 10;

    void validate() const;
};

/// Settings of the explicit-c scheme with dx = 0.01, dt = 1e-6.
SolverConfig paper_fidelity_config();
inline constexpr std::size_t kPaperFidelityCells = 100;

/// (1 - rho) rho^{m-1}; rho^0 is taken as 1 at rho = 0.
double diffusion_coefficient(double rho, double m, double bound_tolerance = 1e-10);

/// rho (1 - rho)
double mobility(double rho, double bound_tolerance = 1e-10);

}  // namespace vfks
