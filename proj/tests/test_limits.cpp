#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "vfks/diagnostics.hpp"
#include "vfks/limits.hpp"
#include "vfks/tridiagonal.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

using namespace vfks;

namespace {

CellState cosine_state(const Grid& g, double M, double A)
{
    CellState s;
    for (std::size_t i = 0; i < g.n_cells(); ++i) {
        s.rho.push_back(M + A * std::cos(std::numbers::pi * g.center(i)));
        s.c.push_back(M);
    }
    return s;
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b)
{
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

}  // namespace

TEST_CASE("elliptic solve examples")
{
    const Grid g(100);
    const std::vector<double> flat(100, 0.3);
    CHECK(solve_elliptic_c(flat, 1.0, g) == flat);

    const CellState s = cosine_state(g, 0.5, 0.1);
    for (double eta : {0.1, 1.0, 5.0}) {
        // rounding c to double alone leaves a residual up to eta * 4 * (eps/2) |c| / dx^2
        const double floor = eta * 2.0 * std::numeric_limits<double>::epsilon() * 0.6 / (g.dx() * g.dx());
        const auto c = solve_elliptic_c(s.rho, eta, g);
        const double dx = g.dx();
        const double eig = 2.0 / (dx * dx) * (1.0 - std::cos(std::numbers::pi * dx));
        for (std::size_t i = 0; i < 100; ++i)
            CHECK(std::abs(c[i] - (0.5 + 0.1 / (1.0 + eta * eig) * std::cos(std::numbers::pi * g.center(i)))) < 1e-13);
        CHECK(std::abs(eig - std::numbers::pi * std::numbers::pi) < 1e-2);

        const auto lap = neumann_laplacian(c, dx);
        for (std::size_t i = 0; i < 100; ++i) CHECK(std::abs(c[i] - eta * lap[i] - s.rho[i]) < std::max(1e-12, floor));
        CHECK(std::abs(total_mass(c, g) - total_mass(s.rho, g)) < 1e-13);
    }
    CHECK_THROWS_AS(solve_elliptic_c(flat, 0.0, g), DomainError);
}

TEST_CASE("elliptic solve preserves mass on random data")
{
    std::mt19937_64 gen(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 50; ++k) {
        const Grid g(10 + k);
        std::vector<double> rho(g.n_cells());
        for (double& r : rho) r = u(gen);
        const auto c = solve_elliptic_c(rho, 0.01 + 3.0 * u(gen), g);
        CHECK(std::abs(total_mass(c, g) - total_mass(rho, g)) < 1e-13);
    }
}

TEST_CASE("ODE update examples")
{
    const std::vector<double> c{0.0, 0.0}, rho{1.0, 1.0}, same{0.3, 0.7};
    for (double v : step_ode_c(c, rho, 1.0, 0.1, CUpdateMode::explicit_euler)) CHECK(v == doctest::Approx(0.1).epsilon(1e-15));
    for (double v : step_ode_c(c, rho, 1.0, 0.1, CUpdateMode::implicit_euler))
        CHECK(v == doctest::Approx(0.1 / 1.1).epsilon(1e-15));
    CHECK(step_ode_c(same, same, 0.5, 0.1, CUpdateMode::explicit_euler) == same);
    CHECK(step_ode_c(same, same, 0.5, 0.1, CUpdateMode::implicit_euler) == same);
    CHECK_THROWS_AS(step_ode_c(c, rho, 0.0, 0.1, CUpdateMode::explicit_euler), DomainError);
}

TEST_CASE("limit systems preserve the constant state")
{
    const Grid g(50);
    const ModelParams p(2.0, 1.0, 1.0, 1.0);
    SolverConfig cfg;
    const CellState flat{std::vector<double>(50, 0.5), std::vector<double>(50, 0.5), 0.0};
    for (auto which : {LimitKind::tau_zero, LimitKind::eta_zero}) {
        const auto res = run_limit_system(which, flat, p, cfg, g, 1.0);
        CHECK(res.final_state.rho == flat.rho);
        CHECK(res.final_state.c == flat.c);
    }
}

TEST_CASE("tau limit starts from the elliptic solve")
{
    const Grid g(50);
    const ModelParams p(2.0, 1.0, 1.0, 1.0);
    SolverConfig cfg;
    const CellState s = cosine_state(g, 0.5, 0.1);
    const auto res = run_limit_system(LimitKind::tau_zero, s, p, cfg, g, 0.0);
    CHECK(res.steps == 0);
    CHECK(res.final_state.rho == s.rho);
    CHECK(res.final_state.c == solve_elliptic_c(s.rho, 1.0, g));

    const auto one = run_limit_system(LimitKind::tau_zero, s, p, cfg, g, cfg.dt);
    CHECK(max_diff(one.final_state.c, solve_elliptic_c(one.final_state.rho, 1.0, g)) < 1e-15);
}

TEST_CASE("tau limit is independent of the c update mode")
{
    const Grid g(50);
    const ModelParams p(2.0, 3.0, 1.0, 1.0);
    SolverConfig a, b;
    a.c_update_mode = CUpdateMode::explicit_euler;
    b.c_update_mode = CUpdateMode::implicit_euler;
    const CellState s = cosine_state(g, 0.5, 0.1);
    const auto ra = run_limit_system(LimitKind::tau_zero, s, p, a, g, 0.5);
    const auto rb = run_limit_system(LimitKind::tau_zero, s, p, b, g, 0.5);
    CHECK(ra.final_state.rho == rb.final_state.rho);
    CHECK(ra.final_state.c == rb.final_state.c);
}

TEST_CASE("limit systems converge to the constant state for m=2, chi=1")
{
    const Grid g(50);
    const ModelParams p(2.0, 1.0, 1.0, 1.0);
    SolverConfig cfg;
    cfg.dt = 1e-2;
    const CellState s = cosine_state(g, 0.5, 0.1);
    for (auto which : {LimitKind::tau_zero, LimitKind::eta_zero}) {
        RunOptions opt;
        opt.sample_interval = 1.0;
        const auto res = run_limit_system(which, s, p, cfg, g, 30.0, opt);
        // without chemical diffusion chi = 1 is linearly neutral at M = 1/2, so only monotonicity is expected
        if (which == LimitKind::tau_zero) CHECK(res.records.back().l2_dist_const < 1e-3 * res.records.front().l2_dist_const);
        for (std::size_t k = 1; k < res.records.size(); ++k)
            CHECK(res.records[k].l2_dist_const <= res.records[k - 1].l2_dist_const);
    }
}

TEST_CASE("space-time distance")
{
    const Grid g(10);
    std::vector<Snapshot> a, b;
    for (int k = 0; k <= 20; ++k) {
        a.push_back({0.1 * k, std::vector<double>(10, 0.5), {}});
        b.push_back({0.1 * k, std::vector<double>(10, 0.5 + 0.03), {}});
    }
    CHECK(l2_space_time_distance(a, a, g) == 0.0);
    CHECK(l2_space_time_distance(a, b, g) == doctest::Approx(0.03 * std::sqrt(2.0)).epsilon(1e-13));
    for (double d : snapshot_distances(a, b, g)) CHECK(d == doctest::Approx(0.03).epsilon(1e-13));

    auto shifted = b;
    shifted[3].t += 1e-3;
    CHECK_THROWS_AS(l2_space_time_distance(a, shifted, g), MismatchedSampling);
    shifted = b;
    shifted.pop_back();
    CHECK_THROWS_AS(l2_space_time_distance(a, shifted, g), MismatchedSampling);
}

TEST_CASE("space-time distance matches a brute-force double loop")
{
    std::mt19937_64 gen(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const Grid g(13);
    std::vector<Snapshot> a, b;
    std::vector<double> times{0.0};
    for (int k = 1; k < 30; ++k) times.push_back(times.back() + 0.05 + 0.1 * u(gen));
    for (double t : times) {
        Snapshot sa{t, {}, {}}, sb{t, {}, {}};
        for (int i = 0; i < 13; ++i) {
            sa.rho.push_back(u(gen));
            sb.rho.push_back(u(gen));
        }
        a.push_back(sa);
        b.push_back(sb);
    }
    double sum = 0.0;
    for (std::size_t k = 0; k < times.size(); ++k) {
        double w = 0.0;
        if (k > 0) w += 0.5 * (times[k] - times[k - 1]);
        if (k + 1 < times.size()) w += 0.5 * (times[k + 1] - times[k]);
        for (std::size_t i = 0; i < 13; ++i) sum += w * g.dx() * (a[k].rho[i] - b[k].rho[i]) * (a[k].rho[i] - b[k].rho[i]);
    }
    CHECK(l2_space_time_distance(a, b, g) == doctest::Approx(std::sqrt(sum)).epsilon(1e-13));
}

TEST_CASE("sweeps approach their limits")
{
    const Grid g(100);
    const ModelParams p(2.0, 1.0, 1.0, 1.0);
    SolverConfig cfg;
    const CellState s = cosine_state(g, 0.5, 0.05);

    const std::vector<double> taus{1.0, 0.1, 0.01};
    const SweepResult rt = sweep(LimitKind::tau_zero, taus, s, p, cfg, g, 2.0);
    REQUIRE(rt.distances.size() == 3);
    CHECK(rt.distances[0] > rt.distances[1]);
    CHECK(rt.distances[1] > rt.distances[2]);
    CHECK(rt.sample_times.size() == 21);
    CHECK(rt.snapshot_distances.size() == 3);
    CHECK(rt.final_states.size() == 3);
    CHECK_FALSE(rt.outside_proven_regime);

    const std::vector<double> tiny{1e-6};
    const SweepResult r6 = sweep(LimitKind::tau_zero, tiny, s, p, cfg, g, 2.0);
    CHECK(r6.distances[0] < 1e-2 * rt.distances[0]);

    const std::vector<double> etas{5.0, 0.5, 0.05};
    const SweepResult re = sweep(LimitKind::eta_zero, etas, s, p, cfg, g, 2.0);
    CHECK(re.distances[0] > re.distances[1]);
    CHECK(re.distances[1] > re.distances[2]);
}

TEST_CASE("sweep arguments")
{
    const Grid g(20);
    const ModelParams p(3.0, 1.0, 1.0, 1.0);
    SolverConfig cfg;
    const CellState s = cosine_state(g, 0.5, 0.05);
    const std::vector<double> increasing{0.1, 1.0}, negative{1.0, -1.0}, repeated{1.0, 1.0};
    CHECK_THROWS_AS(sweep(LimitKind::tau_zero, increasing, s, p, cfg, g, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(sweep(LimitKind::tau_zero, negative, s, p, cfg, g, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(sweep(LimitKind::tau_zero, repeated, s, p, cfg, g, 0.1), std::invalid_argument);
    const std::vector<double> ok{1.0};
    CHECK(sweep(LimitKind::eta_zero, ok, s, p, cfg, g, 0.1).outside_proven_regime);
    CHECK_FALSE(sweep(LimitKind::tau_zero, ok, s, p, cfg, g, 0.1).outside_proven_regime);
    CHECK(to_string(LimitKind::tau_zero) == "tau");
    CHECK(to_string(LimitKind::eta_zero) == "eta");
}
