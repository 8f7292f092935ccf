#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "fraclab/kato.hpp"

using namespace fraclab;

namespace {

KatoProfile profile_for(double alpha, int n)
{
    KatoProfile k;
    k.params = FracParams::make(alpha, n);
    k.C1 = 1.0;
    k.C2 = 1.0;
    return k;
}

// sup over x of a midpoint sum in y; y nodes are offset from x so J is never evaluated at 0
double brute_force_unit_ball(double t, const std::vector<double>& xs)
{
    FracParams p = FracParams::make(0.5, 1);
    const int M = 40000;
    const double h = 2.0 / M;
    double best = 0.0;
    for (double x : xs) {
        double s = 0.0;
        for (int j = 0; j < M; ++j) {
            double y = -1.0 + (j + 0.5) * h;
            double d = std::fabs(x - y);
            if (d < 1e-12) d = 0.5 * h;
            s += J_profile(p, t, d) * h;
        }
        best = std::max(best, s);
    }
    return best;
}

} // namespace

TEST_CASE("omega_alpha branches")
{
    CHECK(omega_alpha(FracParams::make(1, 3), 0.5) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(omega_alpha(FracParams::make(1, 2), std::exp(-1.0)) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(omega_alpha(FracParams::make(1, 1), 7.0) == 1.0);
    CHECK_THROWS_AS(omega_alpha(FracParams::make(1, 1), 0.0), DomainError);
}

TEST_CASE("J_profile branches")
{
    CHECK(J_profile(FracParams::make(1, 3), 1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(J_profile(FracParams::make(1, 1), 4.0, 1.0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(J_profile(FracParams::make(1, 2), std::exp(1.0), 1.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(J_profile(FracParams::make(1, 1), 1.0, 0.0), DomainError);
    CHECK_THROWS_AS(J_profile(FracParams::make(1, 1), 0.0, 1.0), DomainError);
}

TEST_CASE("J is nondecreasing in t")
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> lr(-4, 4);
    for (auto [a, n] : std::vector<std::pair<double, int>>{{0.5, 1}, {0.75, 1}, {1.5, 1}, {1, 2}, {0.75, 3}, {1, 3}}) {
        FracParams p = FracParams::make(a, n);
        for (int i = 0; i < 2000; ++i) {
            double r = std::exp(lr(rng)), t1 = std::exp(lr(rng)), t2 = std::exp(lr(rng));
            if (t1 > t2) std::swap(t1, t2);
            CHECK(J_profile(p, t1, r) <= J_profile(p, t2, r) * (1 + 1e-14));
        }
    }
}

TEST_CASE("J wedge inequality: empirical constant finite and stable")
{
    for (auto [a, n] : std::vector<std::pair<double, int>>{{0.5, 1}, {0.75, 1}, {1.5, 1}, {1, 2}, {1, 3}}) {
        FracParams p = FracParams::make(a, n);
        auto worst = [&](unsigned seed) {
            std::mt19937_64 rng(seed);
            std::uniform_real_distribution<double> u(-3, 3);
            std::uniform_real_distribution<double> lt(-3, 2);
            double c = 0.0;
            for (int i = 0; i < 40000; ++i) {
                double t = std::exp(lt(rng));
                std::vector<double> x(n), y(n), z(n);
                for (int k = 0; k < n; ++k) {
                    x[k] = u(rng);
                    y[k] = u(rng);
                    z[k] = u(rng);
                }
                auto dist = [&](const std::vector<double>& a1, const std::vector<double>& b1) {
                    double s = 0;
                    for (int k = 0; k < n; ++k) s += (a1[k] - b1[k]) * (a1[k] - b1[k]);
                    return std::sqrt(s);
                };
                double lhs = std::min(J_profile(p, t, dist(x, z)), J_profile(p, t, dist(z, y)));
                c = std::max(c, lhs / J_profile(p, t, dist(x, y)));
            }
            return c;
        };
        double c1 = worst(1), c2 = worst(2);
        CAPTURE(a);
        CAPTURE(n);
        // min(J(a), J(b)) = J(max(a,b)) and max(a,b) >= |x-y|/2
        CHECK(c1 <= std::pow(2.0, n + 2 * a) * (1 + 1e-12));
        CHECK(c2 <= std::pow(2.0, n + 2 * a) * (1 + 1e-12));
        CHECK(std::max(c1, c2) / std::min(c1, c2) < 1.5);
    }
}

TEST_CASE("J has no spurious jump as alpha crosses n/2")
{
    // the log branch differs from its neighbours by ln(t r^{-n}); sample away from r = 0
    for (int n : {1, 2, 3}) {
        double ac = 0.5 * n;
        for (double t : {0.1, 1.0, 10.0})
            for (double r : {0.2, 0.5, 1.0, 3.0, 30.0}) {
                double lo = J_profile(FracParams::make(ac - 1e-3, n), t, r);
                double mid = J_profile(FracParams::make(ac, n), t, r);
                double hi = J_profile(FracParams::make(ac + 1e-3, n), t, r);
                CAPTURE(n);
                CAPTURE(t);
                CAPTURE(r);
                CHECK(std::max({lo, mid, hi}) / std::min({lo, mid, hi}) < 10.0);
            }
    }
}

TEST_CASE("potential construction and text format")
{
    auto b = Potential::box(1, 2.0, 3.0);
    CHECK(b.at(1.9) == 3.0);
    CHECK(b.at(2.1) == 0.0);
    CHECK(b.support_radius() == 2.0);
    CHECK(b.sup_bound().value() == 3.0);
    CHECK(b.scaled(2.0).at(0.0) == 6.0);

    auto g = parse_potential("kind=gaussian width=0.5 amplitude=-2 center=1", 1);
    CHECK(g.kind() == PotentialKind::gaussian);
    CHECK(g.at(1.0) == -2.0);
    CHECK(g.at(1.5) == doctest::Approx(-2.0 * std::exp(-1.0)));
    CHECK(std::isinf(g.support_radius()));

    auto ip = parse_potential("inverse_power exponent=1 center=0,0,0", 3);
    REQUIRE(ip.singularities().size() == 1);
    CHECK(ip.singularities()[0].exponent == 1.0);
    CHECK(ip({0.5, 0.0, 0.0}) == doctest::Approx(2.0));
    CHECK_FALSE(ip.sup_bound().has_value());

    auto bumps = Potential::periodic_bumps(4.0, 1.0, 1.0, 3);
    CHECK(bumps.at(-4.0) == doctest::Approx(1.0));
    CHECK(bumps.at(2.0) == 0.0);
    CHECK(bumps.support_radius() == 5.0);

    CHECK(Potential::zero(2)({0.1, 0.2}) == 0.0);
    CHECK_THROWS_AS(parse_potential("box radius=-1", 1), DomainError);
    CHECK_THROWS_AS(parse_potential("box colour=red", 1), DomainError);
    CHECK_THROWS_AS(parse_potential("hexagon", 1), DomainError);
    CHECK_THROWS_AS(parse_potential("box center=0,0", 1), DomainError);
    CHECK_THROWS_AS(Potential::periodic_bumps(1.0, 1.0, 1.0, 3), DomainError);

    const char* path = "test_kato_potential.txt";
    {
        std::ofstream f(path);
        f << "# two boxes\nbox radius=1 center=-2\n\nbox radius=1 amplitude=2 center=2 # right\n";
    }
    auto sum = load_potential_file(path, 1);
    std::remove(path);
    CHECK(sum.kind() == PotentialKind::composite);
    CHECK(sum.at(-2.0) == 1.0);
    CHECK(sum.at(2.0) == 2.0);
    CHECK(sum.at(0.0) == 0.0);
}

TEST_CASE("kato_modulus examples against radial oracles")
{
    auto p3 = FracParams::make(1, 3);
    auto inv1 = Potential::inverse_power(3, 1.0, 1.0);
    auto grid = default_x_grid(inv1, 9);
    for (double d : {0.5, 0.1, 0.01, 1e-3})
        CHECK(kato_modulus(inv1, p3, d, grid) == doctest::Approx(4 * M_PI * d).epsilon(1e-6));

    auto inv25 = Potential::inverse_power(3, 2.5, 1.0);
    CHECK(std::isinf(kato_modulus(inv25, p3, 0.1, default_x_grid(inv25, 9))));

    for (double d : {0.5, 0.1})
        CHECK(kato_modulus(Potential::zero(3), p3, d, default_x_grid(Potential::zero(3), 5)) == 0.0);

    // box in n=3 at its centre: 4 pi int_0^delta rho^{-1} rho^2 = 2 pi delta^2
    auto box3 = Potential::box(3, 1.0, 1.5);
    CHECK(kato_modulus(box3, p3, 0.4, default_x_grid(box3, 9)) == doctest::Approx(1.5 * 2 * M_PI * 0.16).epsilon(1e-8));

    // n = 1, 2 alpha = n: 2 int_0^delta ln(1/rho) = 2 delta (1 - ln delta)
    auto box1 = Potential::box(1, 1.0, 1.0);
    auto p1 = FracParams::make(0.5, 1);
    double d = 0.2;
    CHECK(kato_modulus(box1, p1, d, default_x_grid(box1)) == doctest::Approx(2 * d * (1 - std::log(d))).epsilon(1e-8));

    // n = 2, 2 alpha = n: 2 pi int_0^delta -2 ln(rho) rho = 2 pi delta^2 (1/2 - ln delta)
    auto box2 = Potential::box(2, 1.0, 1.0);
    auto p2 = FracParams::make(1, 2);
    CHECK(kato_modulus(box2, p2, d, default_x_grid(box2, 9)) ==
          doctest::Approx(2 * M_PI * d * d * (0.5 - std::log(d))).epsilon(1e-8));

    // 2 alpha > n: int over the unit ball, delta ignored
    auto p15 = FracParams::make(1.5, 1);
    CHECK(kato_modulus(box1, p15, 0.3, default_x_grid(box1)) == doctest::Approx(2.0).epsilon(1e-10));
    CHECK_THROWS_AS(kato_modulus(box1, p1, 1.5, default_x_grid(box1)), DomainError);
}

TEST_CASE("is_kato verdicts")
{
    auto deltas = default_delta_sequence();
    CHECK(deltas.back() >= 1e-4);
    for (double a : {0.5, 0.75, 1.0, 1.5}) {
        auto p = FracParams::make(a, 1);
        CAPTURE(a);
        CHECK(is_kato(Potential::zero(1), p, deltas).verdict == KatoVerdict::member);
        CHECK(is_kato(Potential::box(1, 1.0, 2.0), p, deltas).verdict == KatoVerdict::member);
        CHECK(is_kato(Potential::gaussian(1, 0.7, -1.0), p, deltas).verdict == KatoVerdict::member);
        CHECK(is_kato(Potential::periodic_bumps(3.0, 1.0, 1.0, 3), p, deltas).verdict == KatoVerdict::member);
    }
    auto p3 = FracParams::make(1, 3);
    auto d1 = is_kato(Potential::inverse_power(3, 1.0, 1.0), p3, deltas);
    CHECK(d1.verdict == KatoVerdict::member);
    CHECK(d1.fit_power == doctest::Approx(1.0).epsilon(0.02));
    CHECK(is_kato(Potential::inverse_power(3, 2.5, 1.0), p3, deltas).verdict == KatoVerdict::non_member);
    CHECK(is_kato(Potential::box(3, 1.0, 1.0), p3, deltas).verdict == KatoVerdict::member);
    // borderline: |x|^{-gamma} in n=3, alpha=1 is Kato iff gamma < 2
    CHECK(is_kato(Potential::inverse_power(3, 2.0, 1.0), p3, deltas).verdict == KatoVerdict::non_member);
    // n = 1, 2 alpha > n: |x|^{-1/2} is locally integrable
    CHECK(is_kato(Potential::inverse_power(1, 0.5, 1.0), FracParams::make(1.5, 1), deltas).verdict ==
          KatoVerdict::member);
    CHECK(is_kato(Potential::inverse_power(1, 1.0, 1.0), FracParams::make(1.5, 1), deltas).verdict ==
          KatoVerdict::non_member);
    CHECK_THROWS_AS(is_kato(Potential::zero(1), FracParams::make(0.5, 1), {0.5, 0.6, 0.1}), DomainError);
    CHECK_THROWS_AS(is_kato(Potential::zero(1), FracParams::make(0.5, 1), {0.5, 1e-3, 1e-5}), DomainError);
}

TEST_CASE("kato_norm: unit ball, n=1, alpha=1/2, against a brute-force double sum")
{
    auto V = Potential::box(1, 1.0, 1.0);
    auto prof = profile_for(0.5, 1);
    std::vector<double> xs = linspace(-2.0, 2.0, 41);
    std::vector<Point> grid;
    for (double x : xs) grid.push_back({x});
    for (double t : {0.1, 1.0}) {
        double k = kato_norm(V, prof, t, grid);
        double b = brute_force_unit_ball(t, xs);
        CAPTURE(t);
        CHECK(k > 0.0);
        CHECK(std::fabs(k - b) <= 0.01 * b);
    }
}

TEST_CASE("kato_norm off-centre geometry in n=2 and n=3")
{
    {
        // n=2: midpoint sum over the box, grid offset from the evaluation point
        auto V = Potential::box(2, 1.0, 1.0, {1.5, 0.0});
        auto prof = profile_for(0.75, 2);
        const double t = 1.0, h = 0.002;
        for (double x0 : {0.0, 1.0, 1.5 + 1e-3}) {
            double s = 0.0;
            for (double y0 = 0.5 + 0.5 * h; y0 < 2.5; y0 += h)
                for (double y1 = -1.0 + 0.5 * h; y1 < 1.0; y1 += h) {
                    if (V({y0, y1}) == 0.0) continue;
                    s += J_profile(prof.params, t, std::hypot(x0 - y0, y1)) * h * h;
                }
            CAPTURE(x0);
            CHECK(std::fabs(kato_norm_at(V, prof, t, {x0, 0.0}) - s) <= 0.01 * s);
        }
    }
    {
        // n=3: box at distance 3 from the origin, cylindrical coordinates about the axis
        auto V = Potential::box(3, 1.0, 2.0, {3.0, 0.0, 0.0});
        auto prof = profile_for(1.0, 3);
        const double t = 2.0;
        const int M = 1600;
        const double h = 2.0 / M;
        double s = 0.0;
        for (int i = 0; i < M; ++i) {
            double z = 2.0 + (i + 0.5) * h;
            for (int j = 0; j < M / 2; ++j) {
                double sr = (j + 0.5) * h;
                if ((z - 3) * (z - 3) + sr * sr >= 1.0) continue;
                s += 2.0 * J_profile(prof.params, t, std::hypot(z, sr)) * 2 * M_PI * sr * h * h;
            }
        }
        CHECK(std::fabs(kato_norm_at(V, prof, t, {0.0, 0.0, 0.0}) - s) <= 0.01 * s);
        // at the centre: radial integral
        double own = 2.0 * integrate([&](double r) { return 4 * M_PI * r * r * J_profile(prof.params, t, r); }, 0.0, 1.0,
                                     {}, EndpointSingularity::power(1.0)).value;
        CHECK(kato_norm(V, prof, t, {{0.0, 0.0, 0.0}}) == doctest::Approx(own).epsilon(1e-8));
    }
}

TEST_CASE("kato_norm linearity, monotonicity, small-t decay")
{
    auto V = Potential::box(1, 1.0, 1.0);
    auto grid = default_x_grid(V, 21);
    for (double a : {0.5, 0.75, 1.5}) {
        auto prof = profile_for(a, 1);
        double k = kato_norm(V, prof, 0.5, grid);
        for (double c : {0.5, 2.0, 10.0})
            CHECK(std::fabs(kato_norm(V.scaled(c), prof, 0.5, grid) - c * k) <= 1e-10 * c * k);
        auto ts = logspace(1e-5, 10.0, 15);
        auto curve = kato_norm_curve(V, prof, ts, grid);
        CHECK(curve.sup_grid_size == grid.size() + 1);
        for (std::size_t i = 1; i < ts.size(); ++i) {
            CHECK(curve.K_V[i] >= 0.0);
            CHECK(curve.K_V[i] >= curve.K_V[i - 1] * (1 - 1e-9));
        }
        CHECK(curve.K_V.front() < 1e-2 * curve.K_V.back());
    }
    CHECK(kato_norm(Potential::zero(1), profile_for(0.5, 1), 1.0, {{0.0}}) == 0.0);
    auto inv = Potential::inverse_power(3, 2.5, 1.0);
    CHECK(std::isinf(kato_norm(inv, profile_for(1, 3), 1.0, {{0.0, 0.0, 0.0}})));
}

TEST_CASE("v_epsilon")
{
    auto prof = profile_for(0.5, 1);
    auto ts = logspace(1e-5, 2.0, 30);
    auto zero = kato_norm_curve(Potential::zero(1), prof, ts, {{0.0}});
    for (double e : {0.1, 0.5, 0.9}) {
        auto v = v_epsilon(zero, e);
        CHECK(v.value == 1.0);
        CHECK_FALSE(v.warning);
    }
    auto V = Potential::box(1, 1.0, 1.0);
    auto grid = default_x_grid(V, 11);
    auto curve = kato_norm_curve(V, prof, ts, grid);
    auto eval = [&](double t) { return kato_norm(V, prof, t, grid); };
    double prev = 0.0;
    for (double e : {0.05, 0.1, 0.3, 0.5, 0.9}) {
        double v = v_epsilon(curve, e, eval).value;
        CHECK(v >= prev);
        CHECK(v <= 1.0);
        prev = v;
        if (v < 1.0) CHECK(prof.omega_const() * eval(v + 2e-4) > e * (1 - 1e-9));
    }
    double last = 2.0;
    for (double c : {1.0, 2.0, 5.0, 20.0}) {
        auto cv = curve;
        for (auto& k : cv.K_V) k *= c;
        double v = v_epsilon(cv, 0.5).value;
        CHECK(v <= last);
        last = v;
    }
    auto huge = curve;
    for (auto& k : huge.K_V) k *= 1e12;
    auto w = v_epsilon(huge, 0.5);
    CHECK(w.value == 0.0);
    CHECK(w.warning);
    CHECK_THROWS_AS(v_epsilon(curve, 1.5), DomainError);
}

TEST_CASE("KatoProfile constants")
{
    auto k = profile_for(0.5, 1);
    CHECK(k.C4() == 2.0);
    CHECK(k.omega_const() == doctest::Approx(2.0 * std::exp(1.0)));
    k.C1 = 3.0;
    CHECK(k.omega_const() == doctest::Approx(6.0 * std::exp(1.0)));
    CHECK(c4_constant(FracParams::make(0.75, 1)) == doctest::Approx(std::pow(2.0, 2.0 / 3.0)));
    CHECK(c4_sharp(FracParams::make(0.75, 1)) == doctest::Approx(std::pow(2.0, 1.5)));
    k.C2 = 0.0;
    CHECK_THROWS_AS(k.omega_const(), DomainError);
}
