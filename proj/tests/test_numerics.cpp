#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <random>

#include "fraclab/bessel.hpp"
#include "fraclab/dft.hpp"
#include "fraclab/fit.hpp"
#include "fraclab/grid.hpp"
#include "fraclab/quadrature.hpp"

using namespace fraclab;
using cd = std::complex<double>;

namespace {

// power series for J_nu, independent of the library path; fine for x <= ~20
double j_series(double nu, double x)
{
    double term = std::pow(0.5 * x, nu) / std::tgamma(nu + 1.0), sum = term;
    for (int k = 1; k < 200; ++k) {
        term *= -(0.25 * x * x) / (k * (k + nu));
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    return sum;
}

// composite Simpson, used as a brute-force oracle
template <class F> double simpson(F f, double a, double b, int n)
{
    if (n % 2) ++n;
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return s * h / 3.0;
}

} // namespace

TEST_CASE("integrate: constant, exponential and Gaussian")
{
    auto one = [](double) { return 1.0; };
    CHECK(std::abs(integrate(one, 0.0, 1.0).value - 1.0) <= 1e-12);
    auto ex = [](double x) { return std::exp(-x); };
    CHECK(std::abs(integrate(ex, 0.0, kInf).value - 1.0) <= 1e-10);
    auto ga = [](double x) { return std::exp(-x * x); };
    QuadResult r = integrate(ga, 0.0, kInf);
    CHECK(std::abs(r.value - std::sqrt(M_PI) / 2.0) <= 1e-10);
    CHECK(r.err.converged);
}

TEST_CASE("integrate: declared endpoint singularities")
{
    auto f = [](double x) { return 1.0 / std::sqrt(x); };
    QuadResult r = integrate(f, 0.0, 1.0, {}, EndpointSingularity::power(-0.5));
    CHECK(std::abs(r.value - 2.0) <= 1e-10);
    auto g = [](double x) { return std::pow(x, -0.9); };
    QuadResult r2 = integrate(g, 0.0, 1.0, {}, EndpointSingularity::power(-0.9));
    CHECK(std::abs(r2.value - 10.0) <= 1e-7);
    auto g2 = [](double x) { return std::pow(2.0 - x, -0.5); };
    QuadResult r4 = integrate(g2, 1.0, 2.0, {}, {}, EndpointSingularity::power(-0.5));
    CHECK(std::abs(r4.value - 2.0) <= 1e-7);
    auto lg = [](double x) { return -std::log(x); };
    QuadResult r3 = integrate(lg, 0.0, 1.0, {}, EndpointSingularity::power(0.0));
    CHECK(std::abs(r3.value - 1.0) <= 1e-10);
}

TEST_CASE("integrate: non-convergence carries the partial value")
{
    QuadratureSpec spec;
    spec.max_subdivisions = 2;
    auto f = [](double x) { return std::sin(200.0 * x); };
    bool threw = false;
    try {
        integrate(f, 0.0, 10.0, spec);
    } catch (const QuadratureError& e) {
        threw = true;
        CHECK_FALSE(e.partial().err.converged);
    }
    CHECK(threw);
}

TEST_CASE("integrate: tighter rel_tol never worsens the example set")
{
    auto ga = [](double x) { return std::exp(-x * x); };
    auto ex = [](double x) { return std::exp(-x); };
    const double o1 = std::sqrt(M_PI) / 2.0;
    QuadratureSpec s;
    double prev_g = kInf, prev_e = kInf;
    for (double rel : {1e-4, 5e-5, 1e-6, 1e-8, 1e-10}) {
        s.rel_tol = rel;
        s.abs_tol = 1e-14;
        const double eg = std::abs(integrate(ga, 0.0, kInf, s).value - o1);
        const double ee = std::abs(integrate(ex, 0.0, kInf, s).value - 1.0);
        CHECK(eg <= prev_g + 1e-16);
        CHECK(ee <= prev_e + 1e-16);
        prev_g = eg;
        prev_e = ee;
    }
}

TEST_CASE("bessel_j: values, zero, domain")
{
    CHECK(bessel_j(0.0, 0.0) == 1.0);
    CHECK(std::abs(bessel_j(0.5, M_PI)) <= 1e-15);
    CHECK(std::abs(bessel_j(0.0, 2.404825557695773)) <= 1e-10);
    CHECK_THROWS_AS(bessel_j(-0.7, 1.0), DomainError);
    CHECK_THROWS_AS(bessel_j(0.0, -1.0), DomainError);
}

TEST_CASE("bessel_j: first zero of J0 by bisection on the series oracle")
{
    double lo = 2.0, hi = 3.0;
    for (int i = 0; i < 80; ++i) {
        const double mid = 0.5 * (lo + hi);
        (j_series(0.0, lo) * j_series(0.0, mid) <= 0.0 ? hi : lo) = mid;
    }
    CHECK(std::abs(bessel_j_zero(0.0, 1) - 0.5 * (lo + hi)) <= 1e-12);
    CHECK(std::abs(bessel_j(0.0, 0.5 * (lo + hi))) <= 1e-10);
}

TEST_CASE("bessel_j: agrees with the power series oracle")
{
    for (double nu : {-0.5, 0.0, 0.5, 1.0, 1.5, 2.3})
        for (double x : {0.1, 1.0, 3.7, 9.0}) {
            const double ref = j_series(nu, x);
            CHECK(std::abs(bessel_j(nu, x) - ref) <= 1e-11 * std::max(1.0, std::abs(ref)));
        }
}

TEST_CASE("bessel_j: three-term recurrence on sampled (nu, x)")
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unu(0.5, 4.0), ux(0.5, 50.0);
    for (int i = 0; i < 300; ++i) {
        const double nu = unu(rng), x = ux(rng);
        const double lhs = bessel_j(nu - 1.0, x) + bessel_j(nu + 1.0, x);
        const double rhs = 2.0 * nu / x * bessel_j(nu, x);
        const double scale = std::abs(bessel_j(nu - 1.0, x)) + std::abs(bessel_j(nu + 1.0, x));
        CHECK(std::abs(lhs - rhs) <= 1e-10 * scale);
    }
}

TEST_CASE("oscillatory_bessel_integral: examples")
{
    QuadratureSpec s;
    auto g0 = [](double r) { return std::exp(-r * r) * r; };
    CHECK(std::abs(oscillatory_bessel_integral(g0, 0.0, 1e-12, s).value - 0.5) <= 1e-9);

    auto g1 = [](double r) { return std::exp(-r); };
    CHECK(std::abs(oscillatory_bessel_integral(g1, 0.0, 1.0, s).value - 1.0 / std::sqrt(2.0)) <= 1e-9);

    // brute-force Simpson oracle before trusting the closed form e^{-1/4}... (2 e^{-omega^2})/2
    auto h = [](double r) { return std::exp(-r * r / 4.0) * r * j_series(0.0, r); };
    const double brute = simpson(h, 0.0, 14.0, 20000);
    CHECK(std::abs(brute - 2.0 * std::exp(-1.0)) <= 1e-9);
    auto g2 = [](double r) { return std::exp(-r * r / 4.0) * r; };
    CHECK(std::abs(oscillatory_bessel_integral(g2, 0.0, 1.0, s).value - brute) <= 1e-8);
}

TEST_CASE("oscillatory_bessel_integral: slowly decaying alternating tail")
{
    // int_0^inf e^{-a r} J0(r) dr = 1/sqrt(1+a^2), small a gives many oscillations
    QuadratureSpec s;
    s.abs_tol = 1e-13;
    s.rel_tol = 1e-11;
    for (double a : {0.01, 0.1}) {
        auto g = [a](double r) { return std::exp(-a * r); };
        const double v = oscillatory_bessel_integral(g, 0.0, 1.0, s).value;
        CHECK(std::abs(v - 1.0 / std::sqrt(1.0 + a * a)) <= 1e-9);
    }
    // algebraic decay: int_0^inf cos(r)/(1+r) dr, via J_{-1/2}: cos r = sqrt(pi r / 2) J_{-1/2}(r)
    auto g = [](double r) { return std::sqrt(M_PI * r / 2.0) / (1.0 + r); };
    const double v = oscillatory_bessel_integral(g, -0.5, 1.0, s).value;
    // = -Ci(1) cos 1 - (Si(1) - pi/2) sin 1 ; Ci(1)=0.337403922900968, Si(1)=0.946083070367183
    const double ref = -0.337403922900968 * std::cos(1.0) - (0.946083070367183 - M_PI / 2.0) * std::sin(1.0);
    CHECK(std::abs(v - ref) <= 1e-9);
}

TEST_CASE("wynn_epsilon accelerates the alternating harmonic series")
{
    std::vector<double> s;
    double sum = 0.0;
    for (int k = 1; k <= 20; ++k) {
        sum += (k % 2 ? 1.0 : -1.0) / k;
        s.push_back(sum);
    }
    CHECK(std::abs(wynn_epsilon(s).value - std::log(2.0)) <= 1e-10);
}

TEST_CASE("dft_1d: examples")
{
    auto d = dft_1d({1, 0, 0, 0}, DftDirection::forward);
    for (auto v : d) CHECK(std::abs(v - cd(0.5, 0)) <= 1e-15);
    auto c = dft_1d({1, 1, 1, 1}, DftDirection::forward);
    CHECK(std::abs(c[0] - cd(2, 0)) <= 1e-15);
    for (int k = 1; k < 4; ++k) CHECK(std::abs(c[k]) <= 1e-15);
}

TEST_CASE("dft_1d: round trip and Parseval, lengths up to 4096")
{
    std::mt19937_64 rng(11);
    std::normal_distribution<double> nd;
    for (std::size_t n : {1u, 2u, 3u, 7u, 64u, 100u, 1000u, 4096u}) {
        std::vector<cd> v(n);
        double vmax = 0.0, n2 = 0.0;
        for (auto& x : v) {
            x = {nd(rng), nd(rng)};
            vmax = std::max(vmax, std::abs(x));
            n2 += std::norm(x);
        }
        auto f = dft_1d(v, DftDirection::forward);
        auto b = dft_1d(f, DftDirection::inverse);
        double err = 0.0, f2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) err = std::max(err, std::abs(b[i] - v[i]));
        for (auto x : f) f2 += std::norm(x);
        CHECK(err <= 1e-12 * vmax);
        CHECK(std::abs(std::sqrt(f2) - std::sqrt(n2)) <= 1e-12 * std::sqrt(n2));
    }
}

TEST_CASE("grid helpers and fits")
{
    RadialGrid g;
    g.radii = {0.0, 1.0, 1.0};
    g.values = {1, 2, 3};
    CHECK_THROWS_AS(g.validate(), DomainError);
    g.radii = {0.0, 1.0, 2.0};
    CHECK_NOTHROW(g.validate());
    auto x = logspace(1.0, 100.0, 9);
    std::vector<double> lx, ly;
    for (double t : x) {
        lx.push_back(std::log(t));
        ly.push_back(0.5 * std::log(t) + 2.0);
    }
    LineFit f = fit_line(lx, ly);
    CHECK(std::abs(f.slope - 0.5) <= 1e-12);
    CHECK(std::abs(f.intercept - 2.0) <= 1e-12);
    CHECK(refine_midpoints({0, 1, 2}).size() == 5);
}

TEST_CASE("gauss_legendre integrates polynomials exactly")
{
    std::vector<double> x, w;
    gauss_legendre(10, x, w);
    double s = 0.0;
    for (int i = 0; i < 10; ++i) s += w[i] * std::pow(x[i], 18);
    CHECK(std::abs(s - 2.0 / 19.0) <= 1e-14);
}
