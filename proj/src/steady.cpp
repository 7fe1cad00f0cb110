#include "vfks/steady.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace vfks::steady {

namespace {

constexpr double kPi = std::numbers::pi;

void check_problem(const SteadyProblem& p)
{
    if (!(p.m > 1.0)) throw DomainError("steady problem requires m > 1");
    if (!(p.chi > 0.0)) throw DomainError("steady problem requires chi > 0");
}

// G_lambda(c) = c^2 - K (c + lambda)^p
double potential_coefficient(double m, double chi)
{
    return 2.0 * (m - 1.0) / m * std::pow((m - 1.0) * chi, 1.0 / (m - 1.0));
}

double potential_exponent(double m) { return m / (m - 1.0); }

// ((u + d)^p - u^p) / d for u >= 0, u + d >= 0, accurate when |d| << u.
double power_divided_difference(double u, double d, double p)
{
    if (d == 0.0) return p * std::pow(u, p - 1.0);
    if (u == 0.0) return std::pow(d, p - 1.0);
    const double x = d / u;
    if (x <= -1.0) return std::pow(u, p - 1.0);
    return std::pow(u, p - 1.0) * std::expm1(p * std::log1p(x)) / x;
}

// (G(z) - G(a)) / (z - a)
double potential_divided_difference(double a, double z, const SteadyProblem& p)
{
    const double K = potential_coefficient(p.m, p.chi);
    return (z + a) - K * power_divided_difference(a + p.lambda, z - a, potential_exponent(p.m));
}

// Bisection to the resolution of double precision. f(lo) and f(hi) must have
// opposite signs; the sign at lo is passed in to save an evaluation.
template <class F>
double bisect(F&& f, double lo, double hi, bool f_lo_positive)
{
    for (int it = 0; it < 400; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double v = f(mid);
        if (v == 0.0) return mid;
        if ((v > 0.0) == f_lo_positive) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

// The branch between c_- and c_+ in the variable theta in [0, pi]:
// c(theta) = mid - half cos(theta). With G(c) - mu = (c_+ - c)(c - c_-) A(c)
// the time-map integrand becomes 1/sqrt(A(c(theta))) d theta.
struct Branch {
    SteadyProblem problem;
    double c_minus;
    double c_plus;

    double mid() const { return 0.5 * (c_plus + c_minus); }
    double half() const { return 0.5 * (c_plus - c_minus); }
    double c_at(double theta) const { return mid() - half() * std::cos(theta); }

    double reduced(double c) const
    {
        const double below = c - c_minus;
        const double above = c_plus - c;
        if (below <= above) return potential_divided_difference(c_minus, c, problem) / above;
        return -potential_divided_difference(c_plus, c, problem) / below;
    }

    double speed_inverse(double theta) const
    {
        const double a = reduced(c_at(theta));
        if (!(a > 0.0)) throw QuadratureFailure("time-map integrand is not positive inside the branch");
        return 1.0 / std::sqrt(a);
    }

    double density(double c) const { return phi_inv(problem.chi * std::max(c + problem.lambda, 0.0), problem.m); }
};

// Midpoint rule in theta (Gauss-Chebyshev in c), doubled until converged.
template <class F>
double chebyshev_integral(F&& integrand, double tol)
{
    double previous = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t n = 32; n <= (std::size_t{1} << 23); n *= 2) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double theta = (static_cast<double>(j) + 0.5) * kPi / static_cast<double>(n);
            s += integrand(theta);
        }
        s *= kPi / static_cast<double>(n);
        if (std::abs(s - previous) < tol * std::max(1.0, std::abs(s))) return s;
        previous = s;
    }
    throw QuadratureFailure("time-map quadrature did not converge");
}

constexpr double kTimeMapTol = 1e-10;

double branch_time_map(const Branch& b, double tol = kTimeMapTol)
{
    return chebyshev_integral([&](double th) { return b.speed_inverse(th); }, tol);
}

double branch_mass(const Branch& b, double tol = kTimeMapTol)
{
    return chebyshev_integral([&](double th) { return b.density(b.c_at(th)) * b.speed_inverse(th); }, tol);
}

// Cumulative x(theta) = int_0^theta 1/sqrt(A) on panels, inverted by a
// safeguarded Newton iteration inside the panel that holds the target.
class InverseMap {
public:
    explicit InverseMap(const Branch& b, std::size_t panels = 512) : branch_(b), edges_(panels + 1), cum_(panels + 1)
    {
        for (std::size_t k = 0; k <= panels; ++k) edges_[k] = kPi * static_cast<double>(k) / static_cast<double>(panels);
        cum_[0] = 0.0;
        for (std::size_t k = 0; k < panels; ++k) cum_[k + 1] = cum_[k] + integrate(edges_[k], edges_[k + 1]);
    }

    double length() const { return cum_.back(); }

    double theta_at(double target) const
    {
        if (target <= 0.0) return 0.0;
        if (target >= length()) return kPi;
        const auto it = std::upper_bound(cum_.begin(), cum_.end(), target);
        const std::size_t k = static_cast<std::size_t>(std::distance(cum_.begin(), it)) - 1;
        double lo = edges_[k];
        double hi = edges_[k + 1];
        double theta = lo + (hi - lo) * (target - cum_[k]) / (cum_[k + 1] - cum_[k]);
        for (int iter = 0; iter < 60; ++iter) {
            const double h = cum_[k] + integrate(edges_[k], theta) - target;
            if (h > 0.0) hi = theta;
            else lo = theta;
            double next = theta - h / branch_.speed_inverse(theta);
            if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
            if (std::abs(next - theta) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, theta)) {
                return next;
            }
            theta = next;
        }
        return theta;
    }

private:
    double integrate(double a, double b) const
    {
        if (b <= a) return 0.0;
        return boost::math::quadrature::gauss<double, 10>::integrate(
            [this](double th) { return branch_.speed_inverse(th); }, a, b);
    }

    const Branch& branch_;
    std::vector<double> edges_;
    std::vector<double> cum_;
};

Branch make_branch(const SteadyProblem& problem, const PotentialLandmarks& landmarks)
{
    const auto [cm, cp] = boundary_values(problem, landmarks);
    return Branch{problem, cm, cp};
}

SteadyProfile profile_from_branch(const Branch& b, const std::vector<double>& xs)
{
    const InverseMap inverse(b);
    SteadyProfile p;
    p.x = xs;
    p.c_values.resize(xs.size());
    p.rho_values.resize(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double theta = inverse.theta_at(xs[i] * inverse.length());
        p.c_values[i] = b.c_at(theta);
        p.rho_values[i] = b.density(p.c_values[i]);
    }
    p.lambda_star = b.problem.lambda;
    p.mu_star = b.problem.mu;
    p.time_map = branch_time_map(b);
    p.mass = branch_mass(b);
    p.c_minus = b.c_minus;
    p.c_plus = b.c_plus;
    return p;
}

}  // namespace

double phi(double rho, double m)
{
    if (!(rho > 0.0)) throw DomainError("phi requires rho > 0");
    if (!(m > 1.0)) throw DomainError("phi requires m > 1");
    return std::pow(rho, m - 1.0) / (m - 1.0);
}

double phi_inv(double y, double m)
{
    if (!(y >= 0.0)) throw DomainError("phi_inv requires y >= 0");
    if (!(m > 1.0)) throw DomainError("phi_inv requires m > 1");
    return std::pow((m - 1.0) * y, 1.0 / (m - 1.0));
}

double g_lambda(double c, const SteadyProblem& problem)
{
    check_problem(problem);
    if (!(c >= -problem.lambda)) throw DomainError("G_lambda is defined for c >= -lambda");
    return c * c - potential_coefficient(problem.m, problem.chi) *
                       std::pow(c + problem.lambda, potential_exponent(problem.m));
}

double g_lambda_prime(double c, const SteadyProblem& problem)
{
    check_problem(problem);
    if (!(c >= -problem.lambda)) throw DomainError("G_lambda is defined for c >= -lambda");
    return 2.0 * c - 2.0 * phi_inv(problem.chi * (c + problem.lambda), problem.m);
}

double g_lambda_second(double c, const SteadyProblem& problem)
{
    check_problem(problem);
    if (!(c > -problem.lambda)) throw DomainError("G_lambda'' is defined for c > -lambda");
    const double m = problem.m;
    return 2.0 - 2.0 * problem.chi * std::pow((m - 1.0) * problem.chi * (c + problem.lambda), (2.0 - m) / (m - 1.0));
}

double lambda_tangency(double m, double chi)
{
    if (!(m > 2.0)) throw DomainError("lambda window requires m > 2");
    return -(m - 2.0) / (m - 1.0) * std::pow(chi, 1.0 / (m - 2.0));
}

double lambda_lemma_bound(double m, double chi)
{
    if (!(m > 2.0)) throw DomainError("lambda window requires m > 2");
    const double q = kPi * kPi + 1.0;
    return (1.0 / (q * (m - 1.0)) - 1.0) * std::pow(chi / q, 1.0 / (m - 2.0));
}

PotentialLandmarks critical_points(double m, double chi, double lambda)
{
    if (!(m > 2.0)) throw DomainError("critical points need m > 2");
    if (!(chi > 0.0)) throw DomainError("critical points need chi > 0");
    const double lb = lambda_tangency(m, chi);
    if (!(lambda > lb && lambda < 0.0)) throw NoBracket("lambda outside the two-root window");

    // f(c) = phi(c) - chi (c + lambda) is convex with its minimum at c_hat.
    auto f = [m, chi, lambda](double c) { return std::pow(c, m - 1.0) / (m - 1.0) - chi * (c + lambda); };
    const double c_hat = std::pow(chi, 1.0 / (m - 2.0));
    if (!(c_hat < 1.0) || !(f(c_hat) < 0.0) || !(f(1.0) > 0.0))
        throw NoBracket("critical points are not strictly inside (0,1)");

    PotentialLandmarks lm;
    lm.c_tilde = bisect(f, 0.0, c_hat, true);
    lm.c_tilde_plus = bisect(f, c_hat, 1.0, false);
    const SteadyProblem p{m, chi, lambda, 0.0};
    lm.g_at_tilde = g_lambda(lm.c_tilde, p);
    lm.g_at_tilde_plus = g_lambda(lm.c_tilde_plus, p);
    lm.g_second_at_tilde = 2.0 * (1.0 - chi / std::pow(lm.c_tilde, m - 2.0));
    lm.g_second_at_tilde_plus = 2.0 * (1.0 - chi / std::pow(lm.c_tilde_plus, m - 2.0));
    return lm;
}

std::pair<double, double> mu_window(const SteadyProblem& problem, const PotentialLandmarks& landmarks)
{
    const double at_zero_density = problem.lambda * problem.lambda;  // G(-lambda)
    return {std::max(at_zero_density, landmarks.g_at_tilde_plus), landmarks.g_at_tilde};
}

std::pair<double, double> boundary_values(const SteadyProblem& problem, const PotentialLandmarks& landmarks)
{
    check_problem(problem);
    const auto [lo, hi] = mu_window(problem, landmarks);
    const double mu = problem.mu;
    if (!(mu > lo && mu < hi)) throw EmptyWindow("mu outside the admissible window");
    auto f = [&](double c) { return g_lambda(c, problem) - mu; };
    const double c_minus = bisect(f, -problem.lambda, landmarks.c_tilde, false);
    const double c_plus = bisect(f, landmarks.c_tilde, landmarks.c_tilde_plus, true);
    return {c_minus, c_plus};
}

double time_map(const SteadyProblem& problem, const PotentialLandmarks& landmarks)
{
    return branch_time_map(make_branch(problem, landmarks));
}

double time_map_top_limit(const PotentialLandmarks& landmarks)
{
    return std::numbers::sqrt2 * kPi / std::sqrt(-landmarks.g_second_at_tilde);
}

double mass_map(const SteadyProblem& problem, const PotentialLandmarks& landmarks)
{
    return branch_mass(make_branch(problem, landmarks));
}

SteadyProfile reconstruct_profile(const SteadyProblem& problem, const PotentialLandmarks& landmarks,
                                  const Grid& grid)
{
    return reconstruct_profile_at(problem, landmarks, grid.centers());
}

SteadyProfile reconstruct_profile_at(const SteadyProblem& problem, const PotentialLandmarks& landmarks,
                                     const std::vector<double>& xs)
{
    return profile_from_branch(make_branch(problem, landmarks), xs);
}

double ode_residual(const SteadyProblem& problem, const PotentialLandmarks& landmarks, std::size_t n_fine)
{
    if (n_fine < 2) throw std::invalid_argument("ode_residual needs at least two intervals");
    std::vector<double> xs(n_fine + 1);
    for (std::size_t k = 0; k <= n_fine; ++k) xs[k] = static_cast<double>(k) / static_cast<double>(n_fine);
    const SteadyProfile p = reconstruct_profile_at(problem, landmarks, xs);
    const auto& c = p.c_values;
    const double h2 = 1.0 / (static_cast<double>(n_fine) * static_cast<double>(n_fine));
    double worst = 0.0;
    for (std::size_t k = 0; k <= n_fine; ++k) {
        const double left = k > 0 ? c[k - 1] : c[k + 1];
        const double right = k < n_fine ? c[k + 1] : c[k - 1];
        const double second = (right - 2.0 * c[k] + left) / h2;
        worst = std::max(worst, std::abs(-second + c[k] - p.rho_values[k]));
    }
    return worst;
}

namespace {

struct LambdaProbe {
    bool valid = false;
    PotentialLandmarks landmarks;
    double mu_lo = 0.0;
    double mu_hi = 0.0;
    double x_lo = 0.0;  // X at the bottom of the mu window; +inf when it diverges there
    double x_hi = 0.0;  // limit of X at the top of the window

    bool straddles_one() const { return valid && (x_lo - 1.0) * (x_hi - 1.0) < 0.0; }
};

LambdaProbe probe_lambda(double m, double chi, double lambda)
{
    LambdaProbe probe;
    try {
        probe.landmarks = critical_points(m, chi, lambda);
    } catch (const NoBracket&) {
        return probe;
    }
    const SteadyProblem p{m, chi, lambda, 0.0};
    const auto [lo, hi] = mu_window(p, probe.landmarks);
    if (!(lo < hi)) return probe;
    probe.valid = true;
    probe.mu_lo = lo;
    probe.mu_hi = hi;
    probe.x_hi = time_map_top_limit(probe.landmarks);
    if (probe.landmarks.g_at_tilde_plus >= lambda * lambda) {
        probe.x_lo = std::numeric_limits<double>::infinity();
    } else {
        // bottom of the window is G(-lambda): the branch starts where the density vanishes
        auto f = [&](double c) { return g_lambda(c, p) - lo; };
        const double c_plus = bisect(f, probe.landmarks.c_tilde, probe.landmarks.c_tilde_plus, true);
        probe.x_lo = branch_time_map(Branch{SteadyProblem{m, chi, lambda, lo}, -lambda, c_plus});
    }
    return probe;
}

// Refines a sign change of g between scan points a < b by bisection in lambda.
template <class G>
double refine_root(G&& g, double a, double b)
{
    const bool ga_positive = g(a) > 0.0;
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (a + b);
        if ((g(mid) > 0.0) == ga_positive) a = mid;
        else b = mid;
    }
    return 0.5 * (a + b);
}

}  // namespace

PatternResult find_pattern(double m, double chi, const Grid& grid, const PatternSearchOptions& options)
{
    if (!(m > 2.0)) throw DomainError("pattern search requires m > 2");
    if (!(chi > 0.0 && chi < 1.0 / (m - 1.0))) throw DomainError("pattern search requires 0 < chi < 1/(m-1)");
    if (options.scan_points < 2) throw std::invalid_argument("scan_points must be >= 2");

    const double lb = lambda_tangency(m, chi);
    const double ub = options.scan_upper == ScanUpper::lemma_bound ? lambda_lemma_bound(m, chi) : 0.0;
    const int n = options.scan_points;

    std::vector<double> lambdas(static_cast<std::size_t>(n));
    std::vector<LambdaProbe> probes(lambdas.size());
    for (int k = 0; k < n; ++k) {
        lambdas[k] = lb + (ub - lb) * static_cast<double>(k + 1) / static_cast<double>(n + 1);
        probes[k] = probe_lambda(m, chi, lambdas[k]);
    }

    std::vector<std::size_t> hits;
    for (std::size_t k = 0; k < probes.size(); ++k)
        if (probes[k].straddles_one()) hits.push_back(k);

    double lambda_star = std::numeric_limits<double>::quiet_NaN();
    LambdaProbe chosen;
    if (!hits.empty()) {
        // the middle of the admissible lambda range keeps the profile away from
        // both the constant state and a vanishing boundary density
        const std::size_t k = hits[hits.size() / 2];
        lambda_star = lambdas[k];
        chosen = probes[k];
    } else {
        // No scan point straddles: locate the crossings of x_hi = 1 and x_lo = 1
        // between scan points and try the midpoints between consecutive crossings.
        std::vector<double> roots;
        auto x_hi_minus_one = [&](double l) { return probe_lambda(m, chi, l).x_hi - 1.0; };
        auto x_lo_minus_one = [&](double l) { return probe_lambda(m, chi, l).x_lo - 1.0; };
        for (std::size_t k = 0; k + 1 < probes.size(); ++k) {
            const auto& a = probes[k];
            const auto& b = probes[k + 1];
            if (!a.valid || !b.valid) continue;
            if ((a.x_hi > 1.0) != (b.x_hi > 1.0)) roots.push_back(refine_root(x_hi_minus_one, lambdas[k], lambdas[k + 1]));
            if ((a.x_lo > 1.0) != (b.x_lo > 1.0)) roots.push_back(refine_root(x_lo_minus_one, lambdas[k], lambdas[k + 1]));
        }
        std::sort(roots.begin(), roots.end());
        for (std::size_t k = 0; k + 1 < roots.size() && std::isnan(lambda_star); ++k) {
            const double l = 0.5 * (roots[k] + roots[k + 1]);
            const LambdaProbe probe = probe_lambda(m, chi, l);
            if (probe.straddles_one()) {
                lambda_star = l;
                chosen = probe;
            }
        }
    }
    if (std::isnan(lambda_star)) throw NoSolution("no lambda in the scanned window admits X(lambda, mu) = 1");

    // X - 1 changes sign across the mu window; bisect for X = 1.
    SteadyProblem problem{m, chi, lambda_star, 0.0};
    double a = chosen.mu_lo;
    double b = chosen.mu_hi;
    const bool low_end_above = chosen.x_lo > 1.0;
    double best_mu = 0.5 * (a + b);
    double best_gap = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 200; ++it) {
        const double mu = 0.5 * (a + b);
        if (mu <= a || mu >= b) break;
        problem.mu = mu;
        const double x = time_map(problem, chosen.landmarks);
        if (std::abs(x - 1.0) < best_gap) {
            best_gap = std::abs(x - 1.0);
            best_mu = mu;
        }
        if (best_gap < options.time_map_tol) break;
        if ((x > 1.0) == low_end_above) a = mu;
        else b = mu;
    }
    problem.mu = best_mu;

    PatternResult result;
    result.problem = problem;
    result.landmarks = chosen.landmarks;
    result.profile = reconstruct_profile(problem, chosen.landmarks, grid);
    return result;
}

double constant_state_lambda(double M, double m, double chi)
{
    if (!(M > 0.0 && M < 1.0)) throw DomainError("mass must lie in (0,1)");
    if (!(m > 1.0)) throw DomainError("constant_state_lambda requires m > 1");
    if (!(chi > 0.0)) throw DomainError("constant_state_lambda requires chi > 0");
    return std::pow(M, m - 1.0) / ((m - 1.0) * chi) - M;
}

RegimeClassification uniqueness_regime(double m, double chi, double M)
{
    if (!(M > 0.0 && M < 1.0)) throw DomainError("mass must lie in (0,1)");
    if (!(m > 1.0)) return {false, "m <= 1 is not covered by the uniqueness result"};
    if (m <= 2.0) {
        if (chi <= 1.0) return {true, "1 < m <= 2 and chi <= 1"};
        return {false, "1 < m <= 2 but chi > 1"};
    }
    const double first = std::pow(M, m - 2.0) / (m - 1.0);
    if (!(chi < first)) return {false, "m > 2 and chi >= M^{m-2}/(m-1)"};
    const double base = std::pow(M, m - 1.0) - (m - 1.0) * chi * M;
    const double second = chi / std::pow(base, (m - 2.0) / (m - 1.0));
    if (!(second < 1.0)) return {false, "m > 2 and chi/(M^{m-1} - (m-1) chi M)^{(m-2)/(m-1)} >= 1"};
    return {true, "m > 2 with both smallness conditions on chi"};
}

}  // namespace vfks::steady
