#include "fraclab/kato.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fraclab/bessel.hpp"
#include "fraclab/errors.hpp"
#include "fraclab/grid.hpp"
#include "fraclab/parallel.hpp"

namespace fraclab {

namespace {

enum class Regime { subcritical, critical, supercritical }; // 2a < n, 2a = n, 2a > n

Regime regime(const FracParams& p) {
    double d = 2.0 * p.alpha - p.n;
    if (std::fabs(d) < 1e-12) return Regime::critical;
    return d < 0 ? Regime::subcritical : Regime::supercritical;
}

// exponent kappa with weight ~ rho^kappa at the origin (log counted as 0)
double local_weight_exponent(const FracParams& p) {
    return regime(p) == Regime::subcritical ? 2.0 * p.alpha - p.n : 0.0;
}

double distance(const Point& x, const std::vector<double>& c) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - c[i]) * (x[i] - c[i]);
    return std::sqrt(s);
}

// int_lo^hi |v(s)| s ds in closed form where available
double radial_moment(const RadialComponent& c, double lo, double hi) {
    using P = RadialComponent::Profile;
    const double A = std::fabs(c.amplitude);
    if (A == 0.0 || hi <= lo) return 0.0;
    switch (c.profile) {
    case P::constant: return A * 0.5 * (hi * hi - lo * lo);
    case P::box: {
        double h = std::min(hi, c.radius);
        return h > lo ? A * 0.5 * (h * h - lo * lo) : 0.0;
    }
    case P::gaussian: {
        double w2 = c.radius * c.radius;
        return A * 0.5 * w2 * (std::exp(-lo * lo / w2) - std::exp(-hi * hi / w2));
    }
    case P::inverse_power: {
        double h = std::min(hi, c.radius);
        if (h <= lo) return 0.0;
        double g = c.exponent;
        if (std::fabs(g - 2.0) < 1e-14) return lo > 0 ? A * std::log(h / lo) : HUGE_VAL;
        if (lo == 0.0 && g > 2.0) return HUGE_VAL;
        return A * (std::pow(h, 2.0 - g) - std::pow(lo, 2.0 - g)) / (2.0 - g);
    }
    case P::bump: {
        double h = std::min(hi, c.radius);
        if (h <= lo) return 0.0;
        QuadratureSpec s;
        s.abs_tol = 1e-300;
        s.rel_tol = 1e-11;
        return integrate([&](double u) { return std::fabs(c.value(u)) * u; }, lo, h, s).value;
    }
    }
    return 0.0;
}

// Integral of |v| over the sphere of radius rho about a point at distance a from the centre.
double sphere_integral(const RadialComponent& c, int n, double a, double rho) {
    if (c.amplitude == 0.0) return 0.0;
    const double reach = c.reach();
    if (std::fabs(a - rho) >= reach) return 0.0;
    if (n == 1) return std::fabs(c.value(std::fabs(a - rho))) + std::fabs(c.value(a + rho));
    if (a == 0.0 || rho == 0.0) return sphere_area(n) * std::fabs(c.value(std::max(a, rho)));
    if (n == 3) return 2.0 * M_PI / (a * rho) * radial_moment(c, std::fabs(a - rho), a + rho);
    // n = 2: angle between x - c and y - x
    auto f = [&](double phi) {
        double d2 = a * a + rho * rho + 2.0 * a * rho * std::cos(phi);
        return std::fabs(c.value(std::sqrt(std::max(d2, 0.0))));
    };
    std::vector<double> breaks;
    if (std::isfinite(reach)) {
        double cs = (reach * reach - a * a - rho * rho) / (2.0 * a * rho);
        if (cs > -1.0 && cs < 1.0) breaks.push_back(std::acos(cs));
    }
    EndpointSingularity at_pi;
    const double gap = std::fabs(a - rho) / a;
    if (c.singular()) {
        if (gap < 1e-12) at_pi = EndpointSingularity::power(-c.exponent);
        else
            for (double k = 1.0; k <= 256.0 && k * gap < M_PI; k *= 4.0) breaks.push_back(M_PI - k * gap);
    }
    QuadratureSpec s;
    s.abs_tol = 1e-300;
    s.rel_tol = 1e-11;
    s.max_subdivisions = 4000;
    QuadResult r = integrate_nothrow(f, 0.0, M_PI, breaks, s, {}, at_pi);
    return 2.0 * r.value;
}

// local exponent of the sphere integral near rho = a for a singular component (a > 0)
double crossing_exponent(const RadialComponent& c, int n) {
    double g = c.exponent;
    if (n == 1) return -g;
    double e = (n - 1) - g;
    if (std::fabs(e) < 1e-12) return -0.1; // logarithmic
    return std::min(0.0, e);
}

struct Weight {
    FunctionRef<double(double)> w;
    double rho_max;
    std::vector<double> breaks;
    double kappa;
    bool log_at_zero;
};

// int_0^{rho_max} W(rho) rho^{n-1} S_c(a, rho) d rho summed over components
double weighted_integral(const Potential& V, const Point& x, const Weight& W, const QuadratureSpec& spec) {
    const int n = V.dim();
    double total = 0.0;
    for (const auto& c : V.components()) {
        if (c.amplitude == 0.0) continue;
        const double a = distance(x, c.center);
        const bool at_centre = a < 1e-14 * std::max(1.0, c.radius);
        const double reach = c.reach();
        if (c.singular()) {
            if (c.exponent >= n && a < W.rho_max) return HUGE_VAL;
            if (at_centre && W.kappa + n - c.exponent <= 0.0) return HUGE_VAL;
        }
        double upper = std::min(W.rho_max, a + reach);
        double lower = std::isfinite(reach) ? std::max(0.0, a - reach) : 0.0;
        if (upper <= lower) continue;

        std::vector<double> pts{lower, upper};
        for (double b : W.breaks) pts.push_back(b);
        if (!at_centre) pts.push_back(a);
        if (std::isfinite(reach)) pts.push_back(reach - a);
        if (c.profile == RadialComponent::Profile::gaussian)
            for (double k = 2; k <= 8; k += 2) pts.push_back(a + k * c.radius);
        std::sort(pts.begin(), pts.end());
        pts.erase(std::remove_if(pts.begin(), pts.end(), [&](double p) { return p < lower || p > upper; }), pts.end());
        pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

        auto f = [&](double rho) {
            if (rho <= 0.0) return 0.0;
            double wv = W.w(rho);
            if (wv == 0.0) return 0.0;
            return wv * std::pow(rho, n - 1) * sphere_integral(c, n, at_centre ? 0.0 : a, rho);
        };
        const double e0 = W.kappa + n - 1 - (at_centre && c.singular() ? c.exponent : 0.0);
        const double ea = c.singular() && !at_centre ? crossing_exponent(c, n) : 0.0;
        for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
            double lo = pts[i], hi = pts[i + 1];
            EndpointSingularity sl, sh;
            if (lo == 0.0 && (e0 < 0.0 || W.log_at_zero)) sl = EndpointSingularity::power(std::min(e0, -0.05));
            if (ea < 0.0 && lo == a) sl = EndpointSingularity::power(ea);
            if (ea < 0.0 && hi == a) sh = EndpointSingularity::power(ea);
            if (std::isinf(hi)) {
                total += integrate(f, lo, hi, spec, sl).value;
            } else {
                total += integrate(f, lo, hi, spec, sl, sh).value;
            }
        }
    }
    return total;
}

std::vector<Point> x_set(const Potential& V, const std::vector<Point>& grid) {
    std::vector<Point> pts = grid;
    for (const auto& c : V.components()) pts.push_back(c.center);
    for (const auto& s : V.singularities()) pts.push_back(s.location);
    for (const auto& p : pts)
        if ((int)p.size() != V.dim()) throw DomainError("x-grid point dimension mismatch");
    return pts;
}

double sup_over(const std::vector<Point>& pts, const std::function<double(const Point&)>& g) {
    std::vector<double> vals(pts.size());
    parallel_for(pts.size(), [&](std::size_t i) { vals[i] = g(pts[i]); });
    double m = 0.0;
    for (double v : vals) m = std::max(m, v);
    return m;
}

} // namespace

double omega_alpha(const FracParams& p, double r) {
    p.validate();
    if (!(r > 0)) throw DomainError("omega_alpha: r must be positive");
    switch (regime(p)) {
    case Regime::subcritical: return std::pow(r, 2.0 * p.alpha - p.n);
    case Regime::critical: return -p.n * std::log(r);
    case Regime::supercritical: return 1.0;
    }
    return 0.0;
}

double J_profile(const FracParams& p, double t, double r) {
    p.validate();
    if (!(t > 0)) throw DomainError("J_profile: t must be positive");
    if (!(r > 0)) throw DomainError("J_profile: r must be positive");
    const double a = p.alpha;
    const int n = p.n;
    const double far = t * t * std::pow(r, -n - 2.0 * a);
    switch (regime(p)) {
    case Regime::subcritical: return std::min(std::pow(r, 2.0 * a - n), far);
    case Regime::critical: return std::min(std::max(1.0, std::log(t) - n * std::log(r)), far);
    case Regime::supercritical: return std::min(std::pow(t, 1.0 - n / (2.0 * a)), far);
    }
    return 0.0;
}

double c4_constant(const FracParams& p) {
    p.validate();
    return std::max(std::pow(2.0, p.alpha - 1.0), std::pow(2.0, p.n / (2.0 * p.alpha)));
}

double c4_sharp(const FracParams& p) {
    p.validate();
    return std::max(std::pow(2.0, p.n + 2.0 * p.alpha - 1.0), std::pow(2.0, p.n / (2.0 * p.alpha)));
}

double KatoProfile::omega_const() const {
    if (!(C1 > 0) || !(C2 > 0)) throw DomainError("KatoProfile: C1 and C2 must be positive");
    return std::exp(1.0) * C1 * C2 * C4();
}

std::vector<Point> default_x_grid(const Potential& V, std::size_t size) {
    double X = V.support_radius();
    if (!std::isfinite(X)) {
        X = 0.0;
        for (const auto& c : V.components()) {
            double cn = 0.0;
            for (double v : c.center) cn += v * v;
            double scale = 1.0;
            if (std::isfinite(c.reach())) scale = c.reach();
            else if (c.profile == RadialComponent::Profile::gaussian) scale = 3.0 * c.radius;
            X = std::max(X, std::sqrt(cn) + scale);
        }
    }
    X = std::max(X, 1.0) + 0.5;
    std::vector<Point> pts;
    for (double s : linspace(-X, X, std::max<std::size_t>(size, 2))) {
        Point p(V.dim(), 0.0);
        p[0] = s;
        pts.push_back(p);
    }
    return pts;
}

double kato_modulus(const Potential& V, const FracParams& p, double delta, const std::vector<Point>& x_grid,
                    const QuadratureSpec& spec) {
    p.validate();
    if (p.n != V.dim()) throw DomainError("kato_modulus: dimension mismatch");
    const Regime rg = regime(p);
    if (rg != Regime::supercritical && !(delta > 0 && delta < 1))
        throw DomainError("kato_modulus: delta must lie in (0,1)");
    auto w = [&](double rho) { return rg == Regime::supercritical ? 1.0 : omega_alpha(p, rho); };
    Weight W{w, rg == Regime::supercritical ? 1.0 : delta, {}, local_weight_exponent(p), rg == Regime::critical};
    return sup_over(x_set(V, x_grid), [&](const Point& x) { return weighted_integral(V, x, W, spec); });
}

std::string to_string(KatoVerdict v) {
    switch (v) {
    case KatoVerdict::member: return "member";
    case KatoVerdict::non_member: return "non-member";
    case KatoVerdict::inconclusive: return "inconclusive";
    }
    return "?";
}

std::vector<double> default_delta_sequence() {
    std::vector<double> d;
    for (int k = 0; k <= 12; ++k) d.push_back(0.5 * std::ldexp(1.0, -k));
    return d;
}

KatoDiagnostics is_kato(const Potential& V, const FracParams& p, const std::vector<double>& deltas,
                        const std::vector<Point>& x_grid) {
    KatoDiagnostics d;
    d.deltas = deltas;
    if (deltas.size() < 3) throw DomainError("is_kato: need at least three deltas");
    for (std::size_t i = 1; i < deltas.size(); ++i)
        if (!(deltas[i] < deltas[i - 1])) throw DomainError("is_kato: deltas must decrease strictly");
    if (!(deltas.back() >= 1e-4)) throw DomainError("is_kato: delta floor must be >= 1e-4");
    const auto grid = x_grid.empty() ? default_x_grid(V) : x_grid;

    if (regime(p) == Regime::supercritical) {
        // uniform local integrability; delta plays no role
        double m = kato_modulus(V, p, 0.5, grid);
        d.moduli.assign(deltas.size(), m);
        d.fit_limit = m;
        d.verdict = std::isfinite(m) ? KatoVerdict::member : KatoVerdict::non_member;
        d.reason = std::isfinite(m) ? "locally uniformly integrable" : "divergent local integral";
        return d;
    }
    for (double delta : deltas) {
        d.moduli.push_back(kato_modulus(V, p, delta, grid));
        if (!std::isfinite(d.moduli.back())) {
            d.verdict = KatoVerdict::non_member;
            d.reason = "divergent local integral";
            return d;
        }
    }
    const double m0 = d.moduli.front();
    if (m0 == 0.0) {
        d.verdict = KatoVerdict::member;
        d.reason = "modulus identically zero";
        return d;
    }
    bool decreasing = true;
    for (std::size_t i = 1; i < d.moduli.size(); ++i)
        if (d.moduli[i] > d.moduli[i - 1] * (1 + 1e-10)) decreasing = false;

    // m(delta) ~ L + C delta^q on the smallest deltas: profile q, solve (L, C) linearly
    const std::size_t k0 = d.moduli.size() >= 6 ? d.moduli.size() - 6 : 0;
    double best = HUGE_VAL;
    for (double q = 0.05; q <= 4.0 + 1e-12; q += 0.01) {
        double s1 = 0, sx = 0, sxx = 0, sy = 0, sxy = 0;
        for (std::size_t i = k0; i < d.moduli.size(); ++i) {
            double wgt = 1.0 / (d.moduli[i] * d.moduli[i]);
            double xq = std::pow(deltas[i], q), y = d.moduli[i];
            s1 += wgt;
            sx += wgt * xq;
            sxx += wgt * xq * xq;
            sy += wgt * y;
            sxy += wgt * xq * y;
        }
        double det = s1 * sxx - sx * sx;
        if (det == 0.0) continue;
        double L = (sxx * sy - sx * sxy) / det, C = (s1 * sxy - sx * sy) / det;
        double res = 0;
        for (std::size_t i = k0; i < d.moduli.size(); ++i) {
            double e = (L + C * std::pow(deltas[i], q) - d.moduli[i]) / d.moduli[i];
            res += e * e;
        }
        if (res < best) {
            best = res;
            d.fit_limit = L;
            d.fit_coeff = C;
            d.fit_power = q;
        }
    }
    if (decreasing && d.fit_limit <= 1e-3 * m0) {
        d.verdict = KatoVerdict::member;
        d.reason = "modulus decreases to an extrapolated limit below 1e-3 of its first value";
    } else if (d.fit_limit >= 0.1 * m0) {
        d.verdict = KatoVerdict::non_member;
        d.reason = "modulus bounded below by a positive fitted limit";
    } else {
        d.verdict = KatoVerdict::inconclusive;
        d.reason = "extrapolated limit between 1e-3 and 0.1 of the first value";
    }
    return d;
}

namespace {

Weight J_weight(const FracParams& p, double t, const FunctionRef<double(double)>& w) {
    Weight W{w, HUGE_VAL, {p.length_scale(t)}, local_weight_exponent(p), regime(p) == Regime::critical};
    if (regime(p) == Regime::critical) W.breaks.push_back(std::pow(t / std::exp(1.0), 1.0 / p.n));
    return W;
}

void check_norm_args(const Potential& V, const FracParams& p, double t) {
    p.validate();
    if (p.n != V.dim()) throw DomainError("kato_norm: dimension mismatch");
    if (!(t > 0)) throw DomainError("kato_norm: t must be positive");
}

} // namespace

double kato_norm_at(const Potential& V, const KatoProfile& profile, double t, const Point& x,
                    const QuadratureSpec& spec) {
    const FracParams& p = profile.params;
    check_norm_args(V, p, t);
    if ((int)x.size() != V.dim()) throw DomainError("kato_norm_at: point dimension mismatch");
    auto w = [&](double rho) { return J_profile(p, t, rho); };
    return weighted_integral(V, x, J_weight(p, t, w), spec);
}

double kato_norm(const Potential& V, const KatoProfile& profile, double t, const std::vector<Point>& x_grid,
                 const QuadratureSpec& spec) {
    const FracParams& p = profile.params;
    check_norm_args(V, p, t);
    auto w = [&](double rho) { return J_profile(p, t, rho); };
    const Weight W = J_weight(p, t, w);
    return sup_over(x_set(V, x_grid), [&](const Point& x) { return weighted_integral(V, x, W, spec); });
}

KatoNormCurve kato_norm_curve(const Potential& V, const KatoProfile& profile, const std::vector<double>& t_samples,
                              const std::vector<Point>& x_grid, const QuadratureSpec& spec) {
    KatoNormCurve c;
    c.potential = V;
    c.profile = profile;
    c.t = t_samples;
    for (std::size_t i = 1; i < t_samples.size(); ++i)
        if (!(t_samples[i] > t_samples[i - 1])) throw DomainError("kato_norm_curve: t samples must increase");
    c.sup_grid_size = x_set(V, x_grid).size();
    for (double t : t_samples) c.K_V.push_back(kato_norm(V, profile, t, x_grid, spec));
    return c;
}

VEpsilon v_epsilon(const KatoNormCurve& curve, double eps, const std::function<double(double)>& K_V_of_t) {
    if (!(eps > 0 && eps < 1)) throw DomainError("v_epsilon: epsilon must lie in (0,1)");
    if (curve.t.empty() || curve.t.size() != curve.K_V.size()) throw DomainError("v_epsilon: empty curve");
    VEpsilon out;
    out.epsilon = eps;
    const double w = curve.profile.omega_const();
    std::size_t k = 0;
    while (k < curve.t.size() && w * curve.K_V[k] <= eps) ++k;
    if (k == curve.t.size()) {
        out.value = 1.0;
        return out;
    }
    if (k == 0) {
        out.value = 0.0;
        out.warning = true;
        return out;
    }
    double lo = curve.t[k - 1], hi = curve.t[k];
    if (lo >= 1.0) {
        out.value = 1.0;
        return out;
    }
    auto interp = [&](double t) {
        double k0 = curve.K_V[k - 1], k1 = curve.K_V[k];
        double u = std::log(t / lo) / std::log(hi / lo);
        if (k0 > 0.0 && k1 > 0.0) return std::exp(std::log(k0) + u * std::log(k1 / k0));
        return k0 + u * (k1 - k0);
    };
    while (hi - lo > 1e-4 && lo < 1.0) {
        double mid = 0.5 * (lo + hi);
        double K = K_V_of_t ? K_V_of_t(mid) : interp(mid);
        if (w * K <= eps) lo = mid;
        else hi = mid;
    }
    out.value = std::min(1.0, 0.5 * (lo + hi));
    return out;
}

} // namespace fraclab
