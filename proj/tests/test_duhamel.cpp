#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <string>

#include "fraclab/discrete_operator.hpp"
#include "fraclab/duhamel.hpp"

using namespace fraclab;

namespace {

const FracParams kHalf = FracParams::make(0.5, 1);

// Poisson kernel summed over the images of a period-L torus
double poisson_periodic(double t, double r, double L)
{
    const double a = 2.0 * M_PI / L;
    return std::sinh(a * t) / (L * (std::cosh(a * t) - std::cos(a * r)));
}

double max_abs(const Eigen::MatrixXd& A)
{
    return A.cwiseAbs().maxCoeff();
}

// Kato profile for alpha = 1/2, n = 1: C1 = 1/pi is the sup of Poisson / I, C2 from the resolvent sweep
KatoProfile half_profile()
{
    static const double C2 =
        resolvent_bound_check(kHalf, {0.1, 1.0, 10.0}, logspace(0.01, 50.0, 40)).report.empirical_constant;
    KatoProfile k;
    k.params = kHalf;
    k.C1 = 1.0 / M_PI;
    k.C2 = C2;
    return k;
}

SeriesOptions bounded_options(const Potential& V, int terms)
{
    KatoProfile prof = half_profile();
    auto grid = default_x_grid(V);
    SeriesOptions opt;
    opt.N_terms = terms;
    opt.bounds.C1 = prof.C1;
    opt.bounds.omega_const = prof.omega_const();
    opt.bounds.K_V = [V, prof, grid](double t) { return kato_norm(V, prof, t, grid); };
    return opt;
}

// box of height 1/2 on [-1, 1], N = 256, L = 40, six terms, Laplace at mu = 2
const DuhamelSeries& box_series()
{
    static const DuhamelSeries s = [] {
        auto V = Potential::box(1, 1.0, 0.5);
        auto opt = bounded_options(V, 6);
        opt.laplace_mu = {2.0};
        return build_series(PeriodicLattice::make(256, 40.0), kHalf, V, {0.15, 0.3, 6.5}, opt);
    }();
    return s;
}

} // namespace

TEST_CASE("space-time grid")
{
    auto lat = PeriodicLattice::make(64, 10.0);
    auto g = SpaceTimeGrid::make(lat, 20.0, {1.0, 0.25, 0.25});
    CHECK(g.anchors.size() == 2);
    CHECK(g.t_nodes.front() == 0.0);
    CHECK(g.t_nodes.back() == 1.0);
    for (std::size_t i = 1; i < g.t_nodes.size(); ++i) CHECK(g.t_nodes[i] > g.t_nodes[i - 1]);
    CHECK(g.t_nodes[g.anchor_node(0)] == 0.25);
    // refined near 0: the first step is far below the stiffness scale
    CHECK(g.t_nodes[1] < 1e-3 / 20.0);
    CHECK_THROWS_AS(SpaceTimeGrid::make(lat, 20.0, {0.0}), DomainError);
    CHECK_THROWS_AS(SpaceTimeGrid::make(lat, 20.0, {}), DomainError);
}

TEST_CASE("zero potential")
{
    auto lat = PeriodicLattice::make(64, 20.0);
    SeriesOptions opt;
    opt.N_terms = 3;
    opt.bounds.K_V = [](double) { return 0.0; };
    auto s = build_series(lat, kHalf, Potential::zero(1), {0.5, 1.0}, opt);
    for (int j = 1; j <= 3; ++j)
        for (std::size_t a = 0; a < 2; ++a) CHECK(max_abs(s.terms[j][a]) == 0.0);
    auto sum = series_sum(s, 1.0);
    CHECK(max_abs(sum.kernel - circulant(lattice_free_kernel(lat, kHalf, 1.0))) == 0.0);
    CHECK(sum.truncation_bound == 0.0);
    auto rep = verify_33(s, lattice_C1(s), 1.0, 3);
    CHECK(rep[0].empirical_constant <= 1.0 + 1e-6);
    for (int j = 1; j <= 3; ++j) CHECK(rep[j].empirical_constant == 0.0);
}

TEST_CASE("constant potential collapses to c t K0")
{
    const double c = 0.3;
    auto lat = PeriodicLattice::make(128, 40.0);
    SeriesOptions opt;
    opt.N_terms = 6;
    auto s = build_series(lat, kHalf, Potential::constant(1, c), {0.5, 2.0}, opt);
    for (double t : {0.5, 2.0}) {
        const std::size_t a = s.anchor_index(t);
        Eigen::MatrixXd K0 = s.kernel(0, a);
        CHECK(max_abs(s.terms[1][a] - c * t * K0) <= 0.01 * max_abs(c * t * K0));
        // mass of the summed kernel: the scalar exponential
        auto sum = series_sum(s, t);
        Eigen::VectorXd mass = sum.kernel.colwise().sum() * lat.dx();
        CHECK(std::fabs(mass.maxCoeff() - std::exp(-c * t)) <= 0.01 * std::exp(-c * t));
        CHECK(std::fabs(mass.minCoeff() - std::exp(-c * t)) <= 0.01 * std::exp(-c * t));
    }
}

TEST_CASE("first term against a space-time Riemann sum")
{
    // smooth bump of radius 0.3 at the origin (15 nodes across), Poisson kernels, t = 0.3
    const double t = 0.3, R = 0.3;
    auto V = Potential::periodic_bumps(1.0, R, 1.0, 1);
    auto lat = PeriodicLattice::make(512, 20.0);
    SeriesOptions opt;
    opt.N_terms = 1;
    auto s = build_series(lat, kHalf, V, {t}, opt);
    auto nodes = lat.nodes();
    const Eigen::MatrixXd& K1 = s.terms[1][0];
    for (auto [ix, iy] : {std::pair{280, 216}, std::pair{320, 240}, std::pair{300, 180}}) {
        const double x = nodes[ix], y = nodes[iy];
        const int Ms = 2000, Mz = 300;
        double sum = 0.0;
        for (int a = 0; a < Mz; ++a) {
            const double z = -R + (a + 0.5) * 2.0 * R / Mz;
            double inner = 0.0;
            for (int b = 0; b < Ms; ++b) {
                const double sv = (b + 0.5) * t / Ms;
                inner += poisson_periodic(t - sv, x - z, lat.L) * poisson_periodic(sv, z - y, lat.L);
            }
            sum += V.at(z) * inner * (t / Ms) * (2.0 * R / Mz);
        }
        MESSAGE("x=" << x << " y=" << y << " lattice " << K1(ix, iy) << " oracle " << sum);
        CHECK(std::fabs(K1(ix, iy) - sum) <= 0.02 * sum);
    }
}

TEST_CASE("symmetry and linearity")
{
    const auto& s = box_series();
    for (int j = 1; j <= s.N_terms; ++j)
        for (std::size_t a = 0; a < s.grid.anchors.size(); ++a) {
            const Eigen::MatrixXd& K = s.terms[j][a];
            CHECK(max_abs(K - K.transpose()) <= 1e-8 * max_abs(K));
        }
    auto sum = series_sum(s, 0.3);
    CHECK(max_abs(sum.kernel - sum.kernel.transpose()) <= 1e-8 * max_abs(sum.kernel));

    auto lat = PeriodicLattice::make(64, 20.0);
    auto V = Potential::box(1, 1.0, 0.5);
    SeriesOptions opt;
    opt.N_terms = 1;
    auto a = build_series(lat, kHalf, V, {0.5}, opt);
    auto b = build_series(lat, kHalf, V.scaled(3.0), {0.5}, opt);
    CHECK(max_abs(b.terms[1][0] - 3.0 * a.terms[1][0]) <= 1e-10 * max_abs(b.terms[1][0]));
}

TEST_CASE("series against the matrix exponential")
{
    const auto& s = box_series();
    const auto& lat = s.grid.lattice;
    auto H = build_hamiltonian(lat, kHalf, s.V);
    for (double t : {0.15, 0.3}) {
        auto sum = series_sum(s, t);
        Eigen::MatrixXd ref = heat_matrix(H, t) / lat.dx();
        const double d = kernel_l1_discrepancy(sum.kernel, ref, lat.dx());
        MESSAGE("t=" << t << " omega K_V=" << s.omega_KV[s.anchor_index(t)] << " L1 discrepancy " << d
                     << " bound " << sum.truncation_bound_L1);
        CHECK(s.omega_KV[s.anchor_index(t)] <= 0.5);
        CHECK(d <= sum.truncation_bound_L1);
    }
    // past the geometric regime the sum refuses
    CHECK(s.omega_KV.back() >= 1.0);
    CHECK(!s.warnings.empty());
    CHECK_THROWS_AS(series_sum(s, 6.5), NonGeometricError);
    CHECK_THROWS_AS(series_sum(s, 0.2), DomainError);
}

TEST_CASE("truncation honesty")
{
    auto V = Potential::box(1, 1.0, 0.5);
    auto s = build_series(PeriodicLattice::make(128, 40.0), kHalf, V, {0.1, 0.3}, bounded_options(V, 2));
    auto next = duhamel_step(s);
    CHECK(next.N_terms == 3);
    for (double t : {0.1, 0.3}) {
        auto a = series_sum(s, t), b = series_sum(next, t);
        CHECK(max_abs(b.kernel - a.kernel) <= a.truncation_bound);
        CHECK(b.truncation_bound < a.truncation_bound);
    }
}

TEST_CASE("inductive bound ratios")
{
    const auto& s = box_series();
    const double omega = half_profile().omega_const();
    auto rep = verify_33(s, lattice_C1(s), omega, 4);
    CHECK(rep[0].empirical_constant <= 1.0 + 1e-6);
    auto V = s.V;
    auto opt = bounded_options(V, 4);
    auto fine = build_series(PeriodicLattice::make(512, 40.0), kHalf, V, {0.15, 0.3, 6.5}, opt);
    auto rep_fine = verify_33(fine, lattice_C1(fine), omega, 4);
    for (int j = 1; j <= 4; ++j) {
        MESSAGE("j=" << j << " ratio " << rep[j].empirical_constant << " refined " << rep_fine[j].empirical_constant);
        CHECK(std::isfinite(rep[j].empirical_constant));
        CHECK(rep[j].empirical_constant > 0.0);
        CHECK(std::fabs(rep_fine[j].empirical_constant / rep[j].empirical_constant - 1.0) <= 0.1);
    }
}

TEST_CASE("profile product inequality")
{
    for (double alpha : {0.5, 0.75, 1.5}) {
        auto p = FracParams::make(alpha, 1);
        // symmetric point
        for (double t : {0.01, 1.0, 100.0})
            for (double x : {0.0, 0.3, 5.0}) {
                double r = product_ratio(p, t, t, {x}, {x});
                CHECK(r == doctest::Approx(comparison_I(p, t, x) / comparison_I(p, 2 * t, 2 * x)).epsilon(1e-14));
                CHECK(r <= c4_sharp(p) + 1e-9);
            }
        // both points at the origin: ((t+s)/max(t,s))^{n/2alpha}
        for (auto [t, s] : {std::pair{1.0, 1.0}, std::pair{0.1, 3.0}, std::pair{7.0, 0.5}}) {
            double r = product_ratio(p, t, s, {0.0}, {0.0});
            CHECK(r == doctest::Approx(std::pow((t + s) / std::max(t, s), 1.0 / (2 * alpha))).epsilon(1e-14));
            CHECK(r <= std::pow(2.0, 1.0 / (2 * alpha)) + 1e-12);
        }
    }
    auto rep = product_inequality_check(kHalf, 100000, 7);
    MESSAGE("alpha=1/2 max " << rep.report.empirical_constant << " at t=" << rep.worst_t << " s=" << rep.worst_s);
    CHECK(rep.report.n_samples == 100000);
    CHECK(rep.report.empirical_constant <= rep.C4 + 1e-9);
    CHECK(rep.report.empirical_constant > 1.9);

    // alpha = 3/4: the stated constant 2^{alpha-1} v 2^{n/2alpha} is exceeded; 2^{n+2alpha-1} is not
    auto p = FracParams::make(0.75, 1);
    auto r75 = product_inequality_check(p, 100000, 7);
    MESSAGE("alpha=3/4 max " << r75.report.empirical_constant << " stated " << r75.C4 << " sharp " << r75.C4_sharp);
    CHECK(r75.report.empirical_constant > r75.C4);
    CHECK(r75.report.empirical_constant <= r75.C4_sharp + 1e-9);
}

TEST_CASE("free resolvent kernel")
{
    // symbol side: (1/pi) int_0^inf cos(xi r) / (1 + xi) dxi, with cos written as a Bessel J_{-1/2}
    const double r = 1.0;
    QuadratureSpec spec;
    spec.rel_tol = 1e-11;
    spec.abs_tol = 1e-14;
    auto g = [&](double xi) { return std::sqrt(M_PI * xi * r / 2.0) / (1.0 + xi); };
    const double oracle = oscillatory_bessel_integral(g, -0.5, r, spec).value / M_PI;
    auto R = resolvent_kernel(kHalf, 1.0, {r});
    MESSAGE("R(1,1) = " << R.radial.values[0] << " oracle " << oracle);
    CHECK(std::fabs(R.radial.values[0] - oracle) <= 1e-6 * oracle);

    for (double alpha : {0.5, 0.75}) {
        auto p = FracParams::make(alpha, 1);
        std::vector<double> radii{0.05, 0.5, 2.0, 20.0};
        for (double mu : {0.3, 4.0}) {
            auto a = resolvent_kernel(p, mu, radii);
            std::vector<double> scaled;
            for (double rr : radii) scaled.push_back(std::pow(mu, 1.0 / (2 * alpha)) * rr);
            auto b = resolvent_kernel(p, 1.0, scaled);
            for (std::size_t i = 0; i < radii.size(); ++i) {
                CHECK(a.radial.values[i] >= 0.0);
                CHECK(a.radial.values[i] ==
                      doctest::Approx(std::pow(mu, 1.0 / (2 * alpha) - 1.0) * b.radial.values[i]).epsilon(1e-8));
            }
        }
    }
    CHECK_THROWS_AS(resolvent_kernel(kHalf, 0.0, {1.0}), DomainError);
    CHECK_THROWS_AS(resolvent_kernel(kHalf, 1.0, {0.0}), DomainError);
}

TEST_CASE("resolvent bound constant")
{
    std::vector<double> radii = logspace(0.01, 50.0, 40);
    auto rep = resolvent_bound_check(kHalf, {0.1, 1.0, 10.0}, radii);
    for (double v : rep.report.samples) CHECK(v >= 0.0);
    MESSAGE("C2 = " << rep.report.empirical_constant << " refined " << rep.refined_constant);
    CHECK(std::isfinite(rep.report.empirical_constant));
    CHECK(rep.refinement_change <= 0.05);
    // mu scaling collapses the sweep
    auto p = FracParams::make(0.75, 1);
    for (double mu : {0.2, 5.0})
        for (double r : {0.1, 1.0, 8.0}) {
            const double s = std::pow(mu, 1.0 / 1.5);
            auto a = resolvent_bound_check(p, {mu}, {r});
            auto b = resolvent_bound_check(p, {1.0}, {s * r});
            CHECK(a.report.empirical_constant == doctest::Approx(b.report.empirical_constant).epsilon(1e-6));
        }
}

TEST_CASE("Laplace transforms of the terms")
{
    const auto& s = box_series();
    auto err = laplace_consistency(s, 2.0, 2);
    MESSAGE("Laplace errors " << err[0] << " " << err[1] << " " << err[2]);
    CHECK(err[0] <= 1e-6);
    CHECK(err[1] <= 0.01);

    auto lat = PeriodicLattice::make(128, 40.0);
    SeriesOptions opt;
    opt.N_terms = 1;
    opt.laplace_mu = {2.0};
    auto zero = build_series(lat, kHalf, Potential::zero(1), {6.0}, opt);
    auto e0 = laplace_consistency(zero, 2.0, 1);
    CHECK(e0[1] == 0.0);
    auto box = build_series(lat, kHalf, Potential::box(1, 1.0, 0.5), {6.5}, opt);
    CHECK(laplace_consistency(box, 2.0, 1)[1] <= 0.01);
    auto short_run = build_series(lat, kHalf, Potential::box(1, 1.0, 0.5), {1.0}, opt);
    CHECK_THROWS_AS(laplace_consistency(short_run, 2.0, 1), NumericalError);
    CHECK_THROWS_AS(laplace_consistency(box, 3.0, 1), DomainError);
}

TEST_CASE("semigroup doubling")
{
    auto lat = PeriodicLattice::make(256, 40.0);
    // free kernel: Chapman-Kolmogorov on the lattice
    Eigen::MatrixXd half = circulant(lattice_free_kernel(lat, kHalf, 0.1));
    Eigen::MatrixXd full = circulant(lattice_free_kernel(lat, kHalf, 0.2));
    auto d = doubling_extend(half, 0.1, lat, kHalf, 1.0 / M_PI);
    CHECK(max_abs(d.kernel - full) <= 1e-4 * max_abs(full));
    CHECK(d.bound_constant == doctest::Approx(2.0 * 2.0 * c8_constant(kHalf) / (M_PI * M_PI)));

    // one doubling against the series computed directly at t
    const auto& s = box_series();
    auto half_sum = series_sum(s, 0.15), full_sum = series_sum(s, 0.3);
    auto dd = doubling_extend(half_sum.kernel, 0.15, lat, kHalf);
    const double combined = full_sum.truncation_bound_L1 + 2.0 * half_sum.truncation_bound_L1;
    CHECK(kernel_l1_discrepancy(dd.kernel, full_sum.kernel, lat.dx()) <= combined);

    // two doublings against expm: the error of a truncated start grows at most linearly
    auto V = Potential::box(1, 1.0, 0.5);
    SeriesOptions opt;
    opt.N_terms = 2;
    auto s2 = build_series(lat, kHalf, V, {0.075}, opt);
    auto H = build_hamiltonian(lat, kHalf, V);
    auto one = doubling_extend(series_sum(s2, 0.075).kernel, 0.075, lat, kHalf);
    auto two = doubling_extend(one.kernel, 0.15, lat, kHalf);
    const double e1 = kernel_l1_discrepancy(one.kernel, heat_matrix(H, 0.15) / lat.dx(), lat.dx());
    const double e2 = kernel_l1_discrepancy(two.kernel, heat_matrix(H, 0.3) / lat.dx(), lat.dx());
    MESSAGE("single step " << e1 << " two steps " << e2);
    CHECK(e2 <= 5.0 * e1);

    // too much mass wraps around the period
    try {
        doubling_extend(full, 0.5, lat, kHalf);
        FAIL("expected a wrap-around failure");
    } catch (const NumericalError& e) {
        CHECK(std::string(e.what()).find("required L") != std::string::npos);
    }
}

TEST_CASE("doubling constants")
{
    for (double alpha : {0.5, 0.75, 1.5})
        for (int n : {1, 2, 3}) {
            auto p = FracParams::make(alpha, n);
            const double sphere = 2.0 * std::pow(M_PI, 0.5 * n) / std::tgamma(0.5 * n);
            CHECK(c8_constant(p) == doctest::Approx(sphere * (1.0 / n + 1.0 / (2 * alpha))).epsilon(1e-8));
        }
    auto lat = PeriodicLattice::make(256, 40.0);
    for (double t : {0.05, 0.5, 3.0})
        CHECK(wrap_fraction(lat, kHalf, t) ==
              doctest::Approx(1.0 - 2.0 / M_PI * std::atan(20.0 / t)).epsilon(1e-6));
}

TEST_CASE("singular potentials need a fine grid")
{
    auto V = Potential::inverse_power(1, 0.5, 1.0, 2.0, {0.05});
    try {
        check_resolution(PeriodicLattice::make(64, 40.0), V);
        FAIL("expected a resolution failure");
    } catch (const DomainError& e) {
        CHECK(std::string(e.what()).find("required dx") != std::string::npos);
    }
    CHECK_NOTHROW(check_resolution(PeriodicLattice::make(64, 40.0), Potential::box(1, 1.0, 1.0)));
    CHECK_THROWS_AS(check_resolution(PeriodicLattice::make(64, 40.0), Potential::inverse_power(1, 1.2, 1.0, 2.0, {0.05})),
                    DomainError);
}
