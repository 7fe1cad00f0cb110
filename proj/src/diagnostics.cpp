#include "vfks/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace vfks {

namespace {

// a log(a/b) with 0 log 0 = 0. Written through log1p so that the value stays
// accurate when a is close to b.
double xlogx_ratio(double a, double b)
{
    if (a == 0.0) return 0.0;
    return a * std::log1p((a - b) / b);
}

// Binary Bregman divergence of the mixing entropy; nonnegative up to rounding.
double binary_divergence(double rho, double ref)
{
    return xlogx_ratio(rho, ref) + xlogx_ratio(1.0 - rho, 1.0 - ref);
}

double gradient_sq(std::span<const double> c, std::size_t i, double dx)
{
    if (i + 1 >= c.size()) return 0.0;
    const double d = (c[i + 1] - c[i]) / dx;
    return d * d;
}

}  // namespace

double total_mass(std::span<const double> v, const Grid& grid)
{
    double s = 0.0;
    for (double x : v) s += x;
    return s * grid.dx();
}

double energy(const CellState& state, const ModelParams& params, const Grid& grid)
{
    check_state(state, grid);
    const double m = params.m();
    const double chi = params.chi();
    const double eta = params.eta();
    const double dx = grid.dx();
    double s = 0.0;
    for (std::size_t i = 0; i < state.size(); ++i) {
        const double r = state.rho[i];
        const double c = state.c[i];
        double internal;
        if (m == 1.0) {
            internal = r == 0.0 ? 0.0 : r * (std::log(r) - 1.0);
        } else {
            internal = std::pow(r, m) / (m * (m - 1.0));
        }
        s += internal + 0.5 * chi * (eta * gradient_sq(state.c, i, dx) + c * c) - chi * r * c;
    }
    return s * dx;
}

double relative_entropy_h1(const CellState& state, double M, const ModelParams& params, const Grid& grid)
{
    check_state(state, grid);
    if (!(M > 0.0 && M < 1.0)) throw DomainError("reference mass must lie in (0,1)");
    const double dx = grid.dx();
    double s = 0.0;
    for (std::size_t i = 0; i < state.size(); ++i) {
        s += binary_divergence(state.rho[i], M) + 0.5 * params.tau() * gradient_sq(state.c, i, dx);
    }
    return s * dx;
}

double relative_entropy_pair(const CellState& state, const CellState& ref, double weight, const Grid& grid)
{
    check_state(state, grid);
    check_state(ref, grid);
    double s = 0.0;
    for (std::size_t i = 0; i < state.size(); ++i) {
        const double r_ref = ref.rho[i];
        if (!(r_ref > 0.0 && r_ref < 1.0)) throw DomainError("reference density must lie strictly inside (0,1)");
        const double dc = state.c[i] - ref.c[i];
        s += binary_divergence(state.rho[i], r_ref) + 0.5 * weight * dc * dc;
    }
    return s * grid.dx();
}

DecayFit fit_decay(std::span<const std::pair<double, double>> series, double t_start, double t_end)
{
    std::vector<std::pair<double, double>> pts;
    for (const auto& [t, v] : series) {
        if (t < t_start || t > t_end) continue;
        if (!(v > kDecayFloor) || !std::isfinite(v)) continue;
        pts.emplace_back(t, std::log(v));
    }
    if (pts.size() < 3) throw InsufficientData("decay fit needs at least 3 points above the floor");

    const double n = static_cast<double>(pts.size());
    double mt = 0.0, my = 0.0;
    for (const auto& [t, y] : pts) {
        mt += t;
        my += y;
    }
    mt /= n;
    my /= n;
    double stt = 0.0, sty = 0.0, syy = 0.0;
    for (const auto& [t, y] : pts) {
        stt += (t - mt) * (t - mt);
        sty += (t - mt) * (y - my);
        syy += (y - my) * (y - my);
    }
    if (stt == 0.0) throw InsufficientData("decay fit needs distinct times");

    const double slope = sty / stt;
    DecayFit fit;
    fit.mu = -slope;
    fit.t_start = pts.front().first;
    fit.t_end = pts.back().first;
    fit.points_used = pts.size();
    // A flat series explains no variance; report 0 rather than 0/0.
    fit.r_squared = syy > 0.0 ? std::clamp(sty * sty / (stt * syy), 0.0, 1.0) : 0.0;
    return fit;
}

DiagnosticsRecord make_record(const CellState& state, double M, const ModelParams& params, const Grid& grid)
{
    check_state(state, grid);
    DiagnosticsRecord r;
    r.t = state.t;
    r.mass_rho = total_mass(state.rho, grid);
    r.mass_c = total_mass(state.c, grid);
    r.energy = energy(state, params, grid);
    r.rel_entropy_h1 = (M > 0.0 && M < 1.0) ? relative_entropy_h1(state, M, params, grid)
                                            : std::numeric_limits<double>::quiet_NaN();
    const auto [rmin, rmax] = std::minmax_element(state.rho.begin(), state.rho.end());
    const auto [cmin, cmax] = std::minmax_element(state.c.begin(), state.c.end());
    r.rho_min = *rmin;
    r.rho_max = *rmax;
    r.c_min = *cmin;
    r.c_max = *cmax;
    double l2 = 0.0;
    for (double x : state.rho) l2 += (x - M) * (x - M);
    r.l2_dist_const = std::sqrt(l2 * grid.dx());
    return r;
}

}  // namespace vfks
