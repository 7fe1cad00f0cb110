#pragma once

#include "vfks/model.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace vfks::steady {

// Stationary problem with tau = eta = 1 on (0,1):
//   -c'' + c = phi^{-1}(chi (c + lambda)),  c'(0) = c'(1) = 0,
// with phi(rho) = rho^{m-1}/(m-1). Multiplying by c' gives the first integral
//   (c')^2 = G_lambda(c) - mu,
//   G_lambda(c) = c^2 - 2 int_{-lambda}^{c} phi^{-1}(chi (z + lambda)) dz,
// so an increasing solution runs between two roots c_- < c_+ of G_lambda = mu
// and needs the time map X(lambda, mu) = int dz / sqrt(G_lambda(z) - mu) to be 1.

class NoBracket : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class EmptyWindow : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NoSolution : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class QuadratureFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SteadyProblem {
    double m = 3.0;
    double chi = 0.5;
    double lambda = 0.0;
    double mu = 0.0;
};

struct PotentialLandmarks {
    double c_tilde = 0.0;       // local maximum of G_lambda
    double c_tilde_plus = 0.0;  // local minimum of G_lambda
    double g_at_tilde = 0.0;
    double g_at_tilde_plus = 0.0;
    double g_second_at_tilde = 0.0;
    double g_second_at_tilde_plus = 0.0;
};

struct SteadyProfile {
    std::vector<double> x;
    std::vector<double> c_values;
    std::vector<double> rho_values;
    double lambda_star = 0.0;
    double mu_star = 0.0;
    double time_map = 0.0;
    double mass = 0.0;
    double c_minus = 0.0;
    double c_plus = 0.0;
};

double phi(double rho, double m);
double phi_inv(double y, double m);

double g_lambda(double c, const SteadyProblem& problem);
double g_lambda_prime(double c, const SteadyProblem& problem);
double g_lambda_second(double c, const SteadyProblem& problem);

/// Lower end of the lambda window, -(m-2)/(m-1) chi^{1/(m-2)}, where the two
/// critical points of G_lambda merge.
double lambda_tangency(double m, double chi);

/// Upper lambda bound (1/((pi^2+1)(m-1)) - 1) (chi/(pi^2+1))^{1/(m-2)}.
double lambda_lemma_bound(double m, double chi);

/// Both roots of phi(c) = chi (c + lambda) in (0,1). Throws NoBracket when they
/// are not strictly interior and distinct.
PotentialLandmarks critical_points(double m, double chi, double lambda);

/// (lower, upper) bounds of admissible mu: (max(G(-lambda), G(c~+)), G(c~)).
std::pair<double, double> mu_window(const SteadyProblem& problem, const PotentialLandmarks& landmarks);

/// Roots c_- in (-lambda, c~) and c_+ in (c~, c~+) of G_lambda = mu.
std::pair<double, double> boundary_values(const SteadyProblem& problem, const PotentialLandmarks& landmarks);

/// X(lambda, mu), computed after the substitution c = mid - half cos(theta)
/// that removes both square-root endpoint singularities.
double time_map(const SteadyProblem& problem, const PotentialLandmarks& landmarks);

/// sqrt(2) pi / sqrt(-G''(c~)), the value of X as mu approaches G(c~).
double time_map_top_limit(const PotentialLandmarks& landmarks);

/// Mass of the branch, int phi^{-1}(chi (c + lambda)) / sqrt(G_lambda(c) - mu) dc.
double mass_map(const SteadyProblem& problem, const PotentialLandmarks& landmarks);

/// Profile on the cell centres of the grid, obtained by inverting x(c).
/// The branch is rescaled to unit length, which is the identity when X = 1.
SteadyProfile reconstruct_profile(const SteadyProblem& problem, const PotentialLandmarks& landmarks,
                                  const Grid& grid);

/// Profile at arbitrary points of [0,1].
SteadyProfile reconstruct_profile_at(const SteadyProblem& problem, const PotentialLandmarks& landmarks,
                                     const std::vector<double>& xs);

/// Max over a uniform grid of spacing 1/n_fine of |-c'' + c - phi^{-1}(chi(c+lambda))|,
/// with c'' by second differences (reflected at the ends).
double ode_residual(const SteadyProblem& problem, const PotentialLandmarks& landmarks, std::size_t n_fine);

enum class ScanUpper { lemma_bound, zero };

struct PatternSearchOptions {
    int scan_points = 200;
    ScanUpper scan_upper = ScanUpper::lemma_bound;
    double time_map_tol = 1e-10;
};

struct PatternResult {
    SteadyProblem problem;
    PotentialLandmarks landmarks;
    SteadyProfile profile;
};

/// Searches (lambda, mu) with X(lambda, mu) = 1 and returns the reconstructed
/// increasing profile. Requires m > 2 and 0 < chi < 1/(m-1). Throws NoSolution
/// when no lambda in the scanned window admits X = 1.
PatternResult find_pattern(double m, double chi, const Grid& grid, const PatternSearchOptions& options = {});

/// lambda_M = M^{m-1}/((m-1) chi) - M, the constant of the steady state (M, M).
double constant_state_lambda(double M, double m, double chi);

struct RegimeClassification {
    bool unique = false;
    std::string explanation;
};

/// Whether (m, chi, M) lies in the parameter range where the constant state is
/// proven to be the only steady state.
RegimeClassification uniqueness_regime(double m, double chi, double M);

}  // namespace vfks::steady
