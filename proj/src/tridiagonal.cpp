#include "vfks/tridiagonal.hpp"

#include <cmath>
#include <stdexcept>

namespace vfks {

std::vector<double> Tridiagonal::apply(std::span<const double> x) const
{
    const std::size_t n = size();
    std::vector<double> y(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double s = diag[i] * x[i];
        if (i > 0) s += lower[i] * x[i - 1];
        if (i + 1 < n) s += upper[i] * x[i + 1];
        y[i] = s;
    }
    return y;
}

std::vector<double> solve_tridiagonal(const Tridiagonal& a, std::span<const double> rhs)
{
    const std::size_t n = a.size();
    if (rhs.size() != n) throw std::invalid_argument("tridiagonal solve: size mismatch");
    if (n == 0) return {};

    std::vector<double> c_star(n, 0.0);
    std::vector<double> x(n, 0.0);

    double pivot = a.diag[0];
    if (pivot == 0.0 || !std::isfinite(pivot)) throw std::runtime_error("tridiagonal solve: zero pivot");
    c_star[0] = a.upper[0] / pivot;
    x[0] = rhs[0] / pivot;
    for (std::size_t i = 1; i < n; ++i) {
        pivot = a.diag[i] - a.lower[i] * c_star[i - 1];
        if (pivot == 0.0 || !std::isfinite(pivot)) throw std::runtime_error("tridiagonal solve: zero pivot");
        c_star[i] = (i + 1 < n) ? a.upper[i] / pivot : 0.0;
        x[i] = (rhs[i] - a.lower[i] * x[i - 1]) / pivot;
    }
    for (std::size_t i = n - 1; i-- > 0;) x[i] -= c_star[i] * x[i + 1];
    return x;
}

std::vector<double> neumann_laplacian(std::span<const double> u, double dx)
{
    const std::size_t n = u.size();
    std::vector<double> out(n, 0.0);
    const double inv = 1.0 / (dx * dx);
    for (std::size_t i = 0; i < n; ++i) {
        const double left = i > 0 ? u[i - 1] : u[i];
        const double right = i + 1 < n ? u[i + 1] : u[i];
        out[i] = (right - 2.0 * u[i] + left) * inv;
    }
    return out;
}

std::vector<double> solve_shifted_neumann(double alpha, double beta, std::span<const double> rhs, double dx)
{
    const std::size_t n = rhs.size();
    Tridiagonal a(n);
    const double k = beta / (dx * dx);
    for (std::size_t i = 0; i < n; ++i) {
        // reflection folds the ghost neighbour back onto the diagonal
        const double neighbours = (i > 0 ? 1.0 : 0.0) + (i + 1 < n ? 1.0 : 0.0);
        a.diag[i] = alpha + k * neighbours;
        if (i > 0) a.lower[i] = -k;
        if (i + 1 < n) a.upper[i] = -k;
    }
    return solve_tridiagonal(a, rhs);
}

std::vector<double> solve_neumann_elliptic(std::span<const double> rho, double eta, double dx)
{
    auto rhs = neumann_laplacian(rho, dx);
    for (double& v : rhs) v *= eta;
    auto c = solve_shifted_neumann(1.0, eta, rhs, dx);
    for (std::size_t i = 0; i < c.size(); ++i) c[i] += rho[i];

    return c;
}

}  // namespace vfks
