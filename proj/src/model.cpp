#include "vfks/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace vfks {

ModelParams::ModelParams(double m, double chi, double tau, double eta)
    : m_(m), chi_(chi), tau_(tau), eta_(eta)
{
    if (!(m >= 1.0)) throw DomainError("degeneracy exponent m must be >= 1");
    if (!(chi > 0.0)) throw DomainError("chemotactic sensitivity chi must be > 0");
    if (!(tau >= 0.0)) throw DomainError("tau must be >= 0");
    if (!(eta >= 0.0)) throw DomainError("eta must be >= 0");
    if (tau == 0.0 && eta == 0.0) throw DomainError("tau and eta cannot both vanish");
}

Grid::Grid(std::size_t n_cells) : n_(n_cells), dx_(0.0)
{
    if (n_cells == 0) throw DomainError("grid needs at least one cell");
    dx_ = 1.0 / static_cast<double>(n_cells);
}

std::vector<double> Grid::centers() const
{
    std::vector<double> x(n_);
    for (std::size_t i = 0; i < n_; ++i) x[i] = center(i);
    return x;
}

void check_state(const CellState& state, const Grid& grid)
{
    if (state.rho.size() != grid.n_cells() || state.c.size() != grid.n_cells())
        throw DomainError("state length does not match the grid");
}

double bound_violation(const CellState& state)
{
    double worst = 0.0;
    auto scan = [&worst](const std::vector<double>& v) {
        for (double x : v) {
            if (std::isnan(x)) {
                worst = std::numeric_limits<double>::infinity();
                return;
            }
            worst = std::max({worst, -x, x - 1.0});
        }
    };
    scan(state.rho);
    scan(state.c);
    return worst;
}

std::string to_string(CUpdateMode mode)
{
    return mode == CUpdateMode::explicit_euler ? "explicit" : "implicit";
}

CUpdateMode parse_c_update_mode(const std::string& text)
{
    if (text == "explicit") return CUpdateMode::explicit_euler;
    if (text == "implicit") return CUpdateMode::implicit_euler;
    throw std::invalid_argument("c_update_mode must be 'explicit' or 'implicit', got '" + text + "'");
}

void SolverConfig::validate() const
{
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
    if (!(newton_tol > 0.0)) throw std::invalid_argument("newton_tol must be > 0");
    if (newton_max_iter < 1) throw std::invalid_argument("newton_max_iter must be >= 1");
    if (!(bound_tolerance >= 0.0)) throw std::invalid_argument("bound_tolerance must be >= 0");
    if (max_halvings < 0) throw std::invalid_argument("max_halvings must be >= 0");
}

SolverConfig paper_fidelity_config()
{
    SolverConfig config;
    config.dt = 1e-6;
    config.c_update_mode = CUpdateMode::explicit_euler;
    return config;
}

namespace {

void check_unit_interval(double rho, double tol)
{
    if (!(rho >= -tol && rho <= 1.0 + tol))
        throw DomainError("density outside [0,1]: " + std::to_string(rho));
}

}  // namespace

double diffusion_coefficient(double rho, double m, double bound_tolerance)
{
    check_unit_interval(rho, bound_tolerance);
    if (!(m >= 1.0)) throw DomainError("m must be >= 1");
    const double r = std::clamp(rho, 0.0, 1.0);
    return (1.0 - r) * std::pow(r, m - 1.0);
}

double mobility(double rho, double bound_tolerance)
{
    check_unit_interval(rho, bound_tolerance);
    const double r = std::clamp(rho, 0.0, 1.0);
    return r * (1.0 - r);
}

}  // namespace vfks
