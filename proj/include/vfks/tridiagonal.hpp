#pragma once

#include <span>
#include <vector>

namespace vfks {

/// Tridiagonal matrix stored by diagonals. lower[0] and upper[n-1] are unused.
struct Tridiagonal {
    std::vector<double> lower;
    std::vector<double> diag;
    std::vector<double> upper;

    explicit Tridiagonal(std::size_t n) : lower(n, 0.0), diag(n, 0.0), upper(n, 0.0) {}
    std::size_t size() const { return diag.size(); }

    std::vector<double> apply(std::span<const double> x) const;
};

/// Thomas algorithm without pivoting. Throws std::runtime_error on a zero pivot.
std::vector<double> solve_tridiagonal(const Tridiagonal& a, std::span<const double> rhs);

/// Three-point Laplacian with ghost-cell reflection (u_0 = u_1, u_{N+1} = u_N).
std::vector<double> neumann_laplacian(std::span<const double> u, double dx);

/// Solves (alpha I - beta D2) u = rhs with the reflected Neumann Laplacian D2.
/// alpha > 0, beta >= 0 makes the matrix strictly diagonally dominant.
std::vector<double> solve_shifted_neumann(double alpha, double beta, std::span<const double> rhs, double dx);

/// Solves (I - eta D2) c = rho as c = rho + d, (I - eta D2) d = eta D2 rho, so
/// that constant data is reproduced exactly.
std::vector<double> solve_neumann_elliptic(std::span<const double> rho, double eta, double dx);

}  // namespace vfks
