#include "fraclab/kernel_core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fraclab/bessel.hpp"
#include "fraclab/fit.hpp"
#include "fraclab/parallel.hpp"

namespace fraclab {

namespace {

using cd = std::complex<double>;

cd ipow(cd z, int k)
{
    cd r = 1.0;
    for (int i = 0; i < k; ++i) r *= z;
    return r;
}

void require_time(double t)
{
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("kernel: time must be positive and finite");
}

// Roundoff floor for kernel quadrature, in kernel units.
double kernel_floor(const FracParams& p, double t) { return 1e-13 * free_kernel_origin_closed_form(p, t); }

KernelPoint origin_value(const FracParams& p, double t, const QuadratureSpec& spec)
{
    const double a = p.alpha;
    const int n = p.n;
    auto f = [&](double rho) { return std::exp(-t * std::pow(rho, 2.0 * a)) * std::pow(rho, n - 1); };
    const double c = sphere_area(n) / std::pow(2.0 * M_PI, n);
    const double ell = 1.0 / p.length_scale(t);
    QuadratureSpec s = spec.with_tol(std::max(spec.abs_tol, kernel_floor(p, t)) / c, spec.rel_tol);
    QuadResult q = integrate_with_breaks(f, 0.0, kInf, {ell, 4.0 * ell}, s,
                                         n > 1 ? EndpointSingularity::none() : EndpointSingularity::power(0.0));
    KernelPoint kp;
    kp.value = c * q.value;
    kp.log_abs = std::log(kp.value);
    kp.err = q.err;
    kp.err.abs_err *= c;
    return kp;
}

// Integer order in one dimension: shift the Fourier contour to Im xi = c through the
// dominant saddle of i xi r - t xi^{2m}; the integrand then carries no cancellation.
KernelPoint contour_value(int m, double t, double r, const QuadratureSpec& spec)
{
    const double theta = M_PI / (2.0 * (2 * m - 1));
    const double rho_s = std::pow(r / (2.0 * m * t), 1.0 / (2 * m - 1));
    const cd xi_s = std::polar(rho_s, theta);
    const double c = xi_s.imag(), us = xi_s.real();
    const double E = -t * ipow(xi_s, 2 * m).real();
    auto f = [&](double u) {
        const cd w = cd(0.0, u * r) - t * ipow(cd(u, c), 2 * m) - E;
        return std::exp(w.real()) * std::cos(w.imag());
    };
    const double width = std::pow(t, -1.0 / (2.0 * m));
    std::vector<double> breaks;
    if (us > 0.0) breaks = {0.5 * us, us, 1.5 * us, 2.0 * us};
    breaks.push_back(width);
    QuadratureSpec s = spec.with_tol(1e-13 * (width + us), spec.rel_tol);
    s.max_subdivisions = std::max(spec.max_subdivisions, 4000);
    QuadResult q = integrate_with_breaks(f, 0.0, kInf, breaks, s);
    KernelPoint kp;
    const double scale_log = -c * r + E - std::log(M_PI);
    kp.log_abs = scale_log + std::log(std::abs(q.value));
    kp.value = std::copysign(std::exp(kp.log_abs), q.value);
    kp.err = q.err;
    kp.err.abs_err = q.err.abs_err * std::exp(scale_log);
    kp.err.rel_err = q.err.rel_err;
    return kp;
}

KernelPoint hankel_value(const FracParams& p, double t, double r, const QuadratureSpec& spec)
{
    const double a = p.alpha, half = 0.5 * p.n;
    auto g = [&](double rho) { return std::exp(-t * std::pow(rho, 2.0 * a)) * std::pow(rho, half); };
    const double pref = std::pow(2.0 * M_PI, -half) * std::pow(r, 1.0 - half);
    QuadratureSpec s = spec.with_tol(std::max(spec.abs_tol, kernel_floor(p, t)) / pref, spec.rel_tol);
    s.tail_cutoff = 2.0 / p.length_scale(t);
    QuadResult q = oscillatory_bessel_integral(g, half - 1.0, r, s);
    KernelPoint kp;
    kp.value = pref * q.value;
    kp.log_abs = std::log(std::abs(kp.value));
    kp.err = q.err;
    kp.err.abs_err *= pref;
    return kp;
}

} // namespace

FracParams FracParams::make(double alpha, int n)
{
    FracParams p;
    p.alpha = alpha;
    p.n = n;
    const double ra = std::round(alpha);
    if (ra >= 1.0 && std::abs(alpha - ra) < 1e-14) {
        p.alpha = ra;
        p.m = static_cast<int>(ra);
    }
    p.validate();
    return p;
}

void FracParams::validate() const
{
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("FracParams: alpha must be positive");
    if (n < 1) throw DomainError("FracParams: n must be a positive integer");
    const bool integer = alpha == std::round(alpha);
    if (m.has_value() != integer || (m && *m != static_cast<int>(alpha)))
        throw DomainError("FracParams: m must be set exactly when alpha is an integer, with m = alpha");
}

double FracParams::length_scale(double t) const { return std::pow(t, 1.0 / (2.0 * alpha)); }

QuadratureSpec kernel_quadrature_spec()
{
    QuadratureSpec s;
    s.abs_tol = 1e-300;
    s.rel_tol = 1e-12;
    s.max_subdivisions = 4000;
    return s;
}

double free_kernel_origin_closed_form(const FracParams& p, double t)
{
    const double na = p.n / (2.0 * p.alpha);
    return std::tgamma(na) * sphere_area(p.n) / (std::pow(2.0 * M_PI, p.n) * 2.0 * p.alpha) *
           std::pow(t, -na);
}

KernelPoint free_kernel_point(const FracParams& p, double t, double r, const QuadratureSpec& spec)
{
    p.validate();
    require_time(t);
    if (!(r >= 0.0)) throw DomainError("free_kernel: negative radius");
    try {
        if (r == 0.0) return origin_value(p, t, spec);
        if (p.m && p.n == 1) return contour_value(*p.m, t, r, spec);
        return hankel_value(p, t, r, spec);
    } catch (const QuadratureError& e) {
        std::ostringstream os;
        os << "free_kernel: quadrature failed at r = " << r << " (t = " << t << ", alpha = " << p.alpha
           << ", n = " << p.n << "): " << e.what();
        throw NumericalError(os.str());
    }
}

double free_kernel_value(const FracParams& p, double t, double r, const QuadratureSpec& spec)
{
    return free_kernel_point(p, t, r, spec).value;
}

FreeKernelGrid free_kernel(const FracParams& p, double t, const std::vector<double>& radii,
                           const QuadratureSpec& spec)
{
    FreeKernelGrid g;
    g.params = p;
    g.t = t;
    g.radial.dim = p.n;
    g.radial.radii = radii;
    g.radial.values.assign(radii.size(), 0.0);
    g.radial.validate();
    std::vector<KernelPoint> pts(radii.size());
    parallel_for(radii.size(), [&](std::size_t i) { pts[i] = free_kernel_point(p, t, radii[i], spec); });
    g.quad_err = {};
    for (std::size_t i = 0; i < radii.size(); ++i) {
        g.radial.values[i] = pts[i].value;
        g.quad_err.abs_err = std::max(g.quad_err.abs_err, pts[i].err.abs_err);
        g.quad_err.rel_err = std::max(g.quad_err.rel_err, pts[i].err.rel_err);
        g.quad_err.converged = g.quad_err.converged && pts[i].err.converged;
    }
    return g;
}

double free_kernel_tail_coefficient(const FracParams& p, int k)
{
    if (p.m) return 0.0;
    const double ak = p.alpha * k;
    const double sign = (k % 2 == 1) ? 1.0 : -1.0;
    // log-gamma keeps large k finite
    const double lg = std::lgamma(ak + 0.5 * p.n) + std::lgamma(ak + 1.0) - std::lgamma(k + 1.0) +
                      2.0 * ak * std::log(2.0) - (0.5 * p.n + 1.0) * std::log(M_PI);
    return sign * std::exp(lg) * std::sin(M_PI * ak);
}

double free_kernel_tail_series(const FracParams& p, double t, double r, int terms)
{
    double s = 0.0;
    for (int k = 1; k <= terms; ++k)
        s += free_kernel_tail_coefficient(p, k) * std::pow(t, k) * std::pow(r, -p.n - 2.0 * p.alpha * k);
    return s;
}

double free_kernel_mass(const FracParams& p, double t)
{
    p.validate();
    require_time(t);
    const double ell = p.length_scale(t);
    const double R = (p.m ? 40.0 : 60.0) * ell;
    auto f = [&](double r) { return free_kernel_value(p, t, r) * std::pow(r, p.n - 1); };
    QuadratureSpec s;
    s.abs_tol = 1e-14 / ell;
    s.rel_tol = 1e-11;
    const QuadResult head = integrate_with_breaks(f, 0.0, R, {ell, 2 * ell, 5 * ell, 10 * ell, 20 * ell}, s);
    double tail = 0.0;
    for (int k = 1; k <= 8; ++k) {
        const double e = 2.0 * p.alpha * k;
        tail += free_kernel_tail_coefficient(p, k) * std::pow(t, k) * std::pow(R, -e) / e;
    }
    return sphere_area(p.n) * (head.value + tail);
}

double chapman_kolmogorov_error(const FracParams& p, double t, double s, double h, double z_max,
                                double x_max)
{
    if (p.n != 1) throw DomainError("chapman_kolmogorov_error: one-dimensional check");
    require_time(t);
    require_time(s);
    const long J = std::lround(z_max / h), I = std::lround(x_max / h);
    const std::size_t nr = static_cast<std::size_t>(I + J + 1);
    std::vector<double> radii(nr);
    for (std::size_t k = 0; k < nr; ++k) radii[k] = k * h;
    const std::vector<double> kt = free_kernel(p, t, radii).radial.values;
    const std::vector<double> ks = (s == t) ? kt : free_kernel(p, s, radii).radial.values;
    std::vector<double> xr(static_cast<std::size_t>(I + 1));
    for (long i = 0; i <= I; ++i) xr[i] = i * h;
    const std::vector<double> kts = free_kernel(p, t + s, xr).radial.values;
    double err = 0.0, peak = 0.0;
    for (long i = 0; i <= I; ++i) {
        double conv = 0.0;
        for (long j = -J; j <= J; ++j) conv += kt[std::labs(i - j)] * ks[std::labs(j)];
        conv *= h;
        err = std::max(err, std::abs(conv - kts[i]));
        peak = std::max(peak, std::abs(kts[i]));
    }
    return err / peak;
}

double comparison_I(const FracParams& p, double t, double r)
{
    require_time(t);
    if (r < 0.0) throw DomainError("comparison_I: negative radius");
    const double top = std::pow(t, -p.n / (2.0 * p.alpha));
    if (r == 0.0) return top;
    return std::min(t * std::pow(r, -p.tail_exponent()), top);
}

double comparability_profile(const FracParams& p, double t, double r)
{
    require_time(t);
    return t / std::pow(r * r + std::pow(t, 1.0 / p.alpha), 0.5 * p.n + p.alpha);
}

SharpConstants sharp_constants(int m)
{
    if (m < 1) throw DomainError("sharp_constants: m must be >= 1");
    SharpConstants c;
    c.m = m;
    const double k = 2.0 * m - 1.0;
    const double s = std::sin(M_PI / (4.0 * m - 2.0));
    c.varsigma = k * std::pow(2.0 * m, -2.0 * m / k) * s;
    c.b = std::pow(s, -k);
    if (m == 1) { // exact
        c.varsigma = 0.25;
        c.b = 1.0;
    }
    return c;
}

void TwistedSymbol::validate() const
{
    if (m < 1) throw DomainError("TwistedSymbol: m must be >= 1");
    if (!(lambda > 0.0)) throw DomainError("TwistedSymbol: lambda must be positive");
    double nrm = 0.0;
    for (double v : a) nrm += v * v;
    if (a.empty() || std::abs(std::sqrt(nrm) - 1.0) > 1e-12) throw DomainError("TwistedSymbol: |a| must be 1");
}

std::complex<double> TwistedSymbol::operator()(const std::vector<double>& xi) const
{
    if (xi.size() != a.size()) throw DomainError("TwistedSymbol: dimension mismatch");
    double x2 = 0.0, ax = 0.0;
    for (std::size_t i = 0; i < xi.size(); ++i) {
        x2 += xi[i] * xi[i];
        ax += a[i] * xi[i];
    }
    return ipow(cd(x2 - lambda * lambda, 2.0 * lambda * ax), m);
}

double twisted_symbol_min(const TwistedSymbol& sym, const TwistedSweep& sweep)
{
    sym.validate();
    const std::size_t n = sym.a.size();
    std::vector<double> e(n, 0.0);
    bool has_perp = false;
    if (n >= 2) {
        // Gram-Schmidt on the coordinate vector least aligned with a
        std::size_t k = 0;
        for (std::size_t i = 1; i < n; ++i)
            if (std::abs(sym.a[i]) < std::abs(sym.a[k])) k = i;
        e[k] = 1.0;
        double d = sym.a[k];
        double nrm = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            e[i] -= d * sym.a[i];
            nrm += e[i] * e[i];
        }
        for (double& v : e) v /= std::sqrt(nrm);
        has_perp = true;
    }
    const double lam = sym.lambda, scale = std::pow(lam, 2 * sym.m);
    auto value = [&](double s, double w) {
        std::vector<double> xi(n);
        for (std::size_t i = 0; i < n; ++i) xi[i] = lam * (s * sym.a[i] + w * e[i]);
        return sym(xi).real() / scale;
    };
    const double E = sweep.extent;
    const int P = std::max(sweep.points, 3) | 1; // odd: includes s = 0
    const int Pw = has_perp ? P : 1;
    struct Cand { double v, s, w; };
    std::vector<Cand> cands;
    for (int i = 0; i < P; ++i)
        for (int j = 0; j < Pw; ++j) {
            const double s = -E + 2.0 * E * i / (P - 1);
            const double w = has_perp ? -E + 2.0 * E * j / (P - 1) : 0.0;
            cands.push_back({value(s, w), s, w});
        }
    std::partial_sort(cands.begin(), cands.begin() + std::min<std::size_t>(6, cands.size()), cands.end(),
                      [](const Cand& x, const Cand& y) { return x.v < y.v; });
    double best = cands.front().v;
    const double h0 = 2.0 * E / (P - 1);
    for (std::size_t c = 0; c < std::min<std::size_t>(6, cands.size()); ++c) {
        double s = cands[c].s, w = cands[c].w, v = cands[c].v;
        for (double h = h0; h > 1e-13; h *= 0.5) {
            bool moved = true;
            while (moved) {
                moved = false;
                const double ds[4] = {h, -h, 0.0, 0.0}, dw[4] = {0.0, 0.0, h, -h};
                for (int k = 0; k < (has_perp ? 4 : 2); ++k) {
                    const double s2 = std::clamp(s + ds[k], -E, E), w2 = std::clamp(w + dw[k], -E, E);
                    const double v2 = value(s2, w2);
                    if (v2 < v) {
                        s = s2;
                        w = w2;
                        v = v2;
                        moved = true;
                    }
                }
            }
        }
        best = std::min(best, v);
    }
    return best;
}

std::vector<double> default_t_sweep() { return {0.1, 1.0, 10.0}; }

std::vector<double> default_r_sweep(const FracParams& p, double t, std::size_t points, double extent)
{
    return linspace(0.0, extent * p.length_scale(t), points);
}

BoundReport verify_I_bound(const FracParams& p, const std::vector<double>& t_sweep,
                           const std::vector<double>& r_sweep, bool r_scaled, const QuadratureSpec& spec)
{
    p.validate();
    if (p.m) throw DomainError("verify_I_bound: the profile bound concerns non-integer alpha");
    if (t_sweep.empty() || r_sweep.empty()) throw DomainError("verify_I_bound: empty sweep");
    const std::size_t nt = t_sweep.size(), nr = r_sweep.size();
    std::vector<double> ratio(nt * nr), radius(nt * nr);
    parallel_for(nt * nr, [&](std::size_t idx) {
        const double t = t_sweep[idx / nr];
        const double r = r_sweep[idx % nr] * (r_scaled ? p.length_scale(t) : 1.0);
        radius[idx] = r;
        ratio[idx] = std::abs(free_kernel_point(p, t, r, spec).value) / comparison_I(p, t, r);
    });
    BoundReport rep;
    rep.n_samples = static_cast<long>(ratio.size());
    rep.per_t_max.assign(nt, 0.0);
    for (std::size_t idx = 0; idx < ratio.size(); ++idx) {
        rep.per_t_max[idx / nr] = std::max(rep.per_t_max[idx / nr], ratio[idx]);
        if (ratio[idx] > rep.empirical_constant) {
            rep.empirical_constant = ratio[idx];
            rep.worst_t = t_sweep[idx / nr];
            rep.worst_r = radius[idx];
        }
    }
    rep.margin = 1.0;
    for (double v : ratio) rep.margin = std::min(rep.margin, 1.0 - v / rep.empirical_constant);
    rep.samples = std::move(ratio);
    return rep;
}

double tail_ratio(const FracParams& p, double r)
{
    return std::abs(free_kernel_value(p, 1.0, r)) * std::pow(r, p.tail_exponent());
}

BoundReport verify_polyharmonic_bound(int m, int n, double t, const std::vector<double>& r_sweep,
                                      const QuadratureSpec& spec)
{
    const FracParams p = FracParams::make(m, n);
    require_time(t);
    const double vs = sharp_constants(m).varsigma;
    const double q = 2.0 * m / (2.0 * m - 1.0);
    std::vector<double> w(r_sweep.size());
    parallel_for(r_sweep.size(), [&](std::size_t i) {
        const double r = r_sweep[i];
        const KernelPoint kp = free_kernel_point(p, t, r, spec);
        const double lw = kp.log_abs + vs * std::pow(r, q) / std::pow(t, 1.0 / (2 * m - 1)) +
                          n / (2.0 * m) * std::log(t);
        w[i] = std::exp(lw);
    });
    BoundReport rep;
    rep.n_samples = static_cast<long>(w.size());
    for (std::size_t i = 0; i < w.size(); ++i)
        if (w[i] > rep.empirical_constant) {
            rep.empirical_constant = w[i];
            rep.worst_t = t;
            rep.worst_r = r_sweep[i];
        }
    rep.margin = 1.0;
    for (double v : w) rep.margin = std::min(rep.margin, 1.0 - v / rep.empirical_constant);
    rep.samples = std::move(w);
    return rep;
}

EnvelopeFit envelope_decay_fit(int m, double t, double r_lo, double r_hi, const QuadratureSpec& spec)
{
    const FracParams p = FracParams::make(m, 1);
    require_time(t);
    if (!(r_hi > r_lo) || r_lo <= 0.0) throw DomainError("envelope_decay_fit: need 0 < r_lo < r_hi");
    auto logk = [&](double r) { return free_kernel_point(p, t, r, spec).log_abs; };
    EnvelopeFit fit;
    fit.prefactor_power = (m - 1.0) / (2.0 * m - 1.0);
    if (m == 1) {
        fit.r_max = linspace(r_lo, r_hi, 41);
        for (double r : fit.r_max) fit.log_abs.push_back(logk(r));
    } else {
        const std::size_t N = 1400;
        const std::vector<double> r = linspace(r_lo, r_hi, N);
        std::vector<double> y(N);
        parallel_for(N, [&](std::size_t i) { y[i] = logk(r[i]); });
        for (std::size_t i = 1; i + 1 < N; ++i) {
            if (!(y[i] >= y[i - 1] && y[i] > y[i + 1])) continue;
            // golden-section refinement of the local maximum
            double a = r[i - 1], b = r[i + 1];
            const double g = 0.5 * (std::sqrt(5.0) - 1.0);
            double c = b - g * (b - a), d = a + g * (b - a), fc = logk(c), fd = logk(d);
            while (b - a > 1e-9) {
                if (fc > fd) { b = d; d = c; fd = fc; c = b - g * (b - a); fc = logk(c); }
                else { a = c; c = d; fc = fd; d = a + g * (b - a); fd = logk(d); }
            }
            fit.r_max.push_back(0.5 * (a + b));
            fit.log_abs.push_back(std::max(fc, fd));
        }
        if (fit.r_max.size() < 2)
            throw NumericalError("envelope_decay_fit: fewer than two local maxima in the window");
    }
    const double q = 2.0 * m / (2.0 * m - 1.0);
    std::vector<double> x, y, yraw;
    for (std::size_t i = 0; i < fit.r_max.size(); ++i) {
        const double r = fit.r_max[i];
        x.push_back(std::pow(r, q) / std::pow(t, 1.0 / (2 * m - 1)));
        yraw.push_back(-fit.log_abs[i]);
        y.push_back(-fit.log_abs[i] - fit.prefactor_power * std::log(r));
    }
    const LineFit lf = fit_line(x, y), raw = fit_line(x, yraw);
    fit.slope = lf.slope;
    fit.residual = lf.residual_rms;
    fit.raw_slope = raw.slope;
    return fit;
}

std::complex<double> complex_time_kernel(int m, int n, std::complex<double> z, double r,
                                         const QuadratureSpec& spec)
{
    if (m < 1 || n < 1) throw DomainError("complex_time_kernel: m, n must be positive");
    if (!(z.real() > 0.0)) throw DomainError("complex_time_kernel: Re z must be positive");
    if (!(r >= 0.0)) throw DomainError("complex_time_kernel: negative radius");
    const FracParams p = FracParams::make(m, n);
    const double floor = kernel_floor(p, z.real());
    const double rho_max = std::pow(46.0 / z.real(), 1.0 / (2.0 * m));
    auto wexp = [&](double rho) { return std::exp(-z * std::pow(rho, 2.0 * m)); };
    try {
        if (r == 0.0) {
            const double c = sphere_area(n) / std::pow(2.0 * M_PI, n);
            auto fr = [&](double rho) { return wexp(rho).real() * std::pow(rho, n - 1); };
            auto fi = [&](double rho) { return wexp(rho).imag() * std::pow(rho, n - 1); };
            QuadratureSpec s = spec.with_tol(std::max(spec.abs_tol, floor) / c, spec.rel_tol);
            s.max_subdivisions = std::max(spec.max_subdivisions, 20000);
            const std::vector<double> br = linspace(0.0, rho_max, 65);
            const double re = integrate_with_breaks(fr, 0.0, rho_max, br, s).value;
            const double im = integrate_with_breaks(fi, 0.0, rho_max, br, s).value;
            return c * cd(re, im);
        }
        const double half = 0.5 * n;
        const double pref = std::pow(2.0 * M_PI, -half) * std::pow(r, 1.0 - half);
        QuadratureSpec s = spec.with_tol(std::max(spec.abs_tol, floor) / pref, spec.rel_tol);
        s.tail_cutoff = rho_max;
        s.max_subdivisions = std::max(spec.max_subdivisions, 20000);
        auto gr = [&](double rho) { return wexp(rho).real() * std::pow(rho, half); };
        auto gi = [&](double rho) { return wexp(rho).imag() * std::pow(rho, half); };
        const double re = oscillatory_bessel_integral(gr, half - 1.0, r, s).value;
        const double im = oscillatory_bessel_integral(gi, half - 1.0, r, s).value;
        return pref * cd(re, im);
    } catch (const QuadratureError& e) {
        std::ostringstream os;
        os << "complex_time_kernel: quadrature failed at r = " << r << ": " << e.what();
        throw NumericalError(os.str());
    }
}

BoundReport complex_time_kernel_decay(int m, int n, std::complex<double> z, const std::vector<double>& r_sweep,
                                      const QuadratureSpec& spec)
{
    std::vector<double> w(r_sweep.size());
    const double scale = std::pow(z.real(), n / (2.0 * m));
    parallel_for(r_sweep.size(), [&](std::size_t i) {
        w[i] = std::abs(complex_time_kernel(m, n, z, r_sweep[i], spec)) * scale;
    });
    BoundReport rep;
    rep.n_samples = static_cast<long>(w.size());
    for (std::size_t i = 0; i < w.size(); ++i)
        if (w[i] > rep.empirical_constant) {
            rep.empirical_constant = w[i];
            rep.worst_r = r_sweep[i];
        }
    rep.worst_t = std::abs(z);
    rep.margin = 1.0;
    for (double v : w) rep.margin = std::min(rep.margin, 1.0 - v / rep.empirical_constant);
    rep.samples = std::move(w);
    return rep;
}

} // namespace fraclab
