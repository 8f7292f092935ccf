#include "fraclab/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "fraclab/bessel.hpp"

namespace fraclab {

void QuadratureSpec::validate() const
{
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0))
        throw DomainError("QuadratureSpec: abs_tol and rel_tol must be positive");
    if (max_subdivisions < 1)
        throw DomainError("QuadratureSpec: max_subdivisions must be >= 1");
    if (!(tail_cutoff >= 0.0))
        throw DomainError("QuadratureSpec: tail_cutoff must be nonnegative");
}

QuadratureSpec QuadratureSpec::with_tol(double abs, double rel) const
{
    QuadratureSpec s = *this;
    s.abs_tol = abs;
    s.rel_tol = rel;
    return s;
}

ErrorEstimate& ErrorEstimate::operator+=(const ErrorEstimate& o)
{
    abs_err += o.abs_err;
    converged = converged && o.converged;
    return *this;
}

namespace {

// QUADPACK qk21 abscissae / weights
constexpr std::array<double, 11> xgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.0};
constexpr std::array<double, 11> wgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077208980803680, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
constexpr std::array<double, 5> wg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

constexpr double kEps = std::numeric_limits<double>::epsilon();

struct Piece {
    double lo, hi, value, err;
    int seg;
    bool operator<(const Piece& o) const { return err < o.err; }
};

template <class G>
Piece gk21(const G& g, double lo, double hi, int seg)
{
    const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
    const double fc = g(c);
    double resg = 0.0, resk = fc * wgk[10], resabs = std::abs(resk);
    std::array<double, 10> f1{}, f2{};
    for (int j = 0; j < 10; ++j) {
        const double dx = h * xgk[j];
        f1[j] = g(c - dx);
        f2[j] = g(c + dx);
        const double s = f1[j] + f2[j];
        resk += wgk[j] * s;
        resabs += wgk[j] * (std::abs(f1[j]) + std::abs(f2[j]));
        if (j % 2 == 1) resg += wg[j / 2] * s;
    }
    const double mean = 0.5 * resk;
    double resasc = wgk[10] * std::abs(fc - mean);
    for (int j = 0; j < 10; ++j) resasc += wgk[j] * (std::abs(f1[j] - mean) + std::abs(f2[j] - mean));
    const double value = resk * h;
    resabs *= std::abs(h);
    resasc *= std::abs(h);
    double err = std::abs((resk - resg) * h);
    if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    if (resabs > std::numeric_limits<double>::min() / (50.0 * kEps))
        err = std::max(50.0 * kEps * resabs, err);
    if (!std::isfinite(value)) err = std::numeric_limits<double>::infinity();
    return {lo, hi, value, err, seg};
}

// Maps u in [0,1] onto a segment, with a power grading toward a singular end or
// an algebraic map onto [c, inf).
struct Segment {
    enum Kind { plain, grade_left, grade_right, to_infinity } kind = plain;
    double a = 0.0, b = 1.0;
    int power = 1;
};

int grading_power(double exponent)
{
    if (exponent <= -1.0) throw DomainError("integrate: non-integrable endpoint singularity");
    if (exponent >= 2.0) return 1;
    const int k = static_cast<int>(std::ceil(2.0 / (1.0 + exponent)));
    return std::clamp(k, 2, 24);
}

} // namespace

QuadResult integrate_nothrow(FunctionRef<double(double)> f, double a, double b,
                             const std::vector<double>& breaks, const QuadratureSpec& spec,
                             EndpointSingularity at_a, EndpointSingularity at_b)
{
    spec.validate();
    if (std::isnan(a) || std::isnan(b)) throw DomainError("integrate: NaN limits");
    if (std::isinf(a)) throw DomainError("integrate: lower limit must be finite");
    if (a == b) return {};
    if (b < a) {
        std::vector<double> br(breaks);
        QuadResult r = integrate_nothrow(f, b, a, br, spec, at_b, at_a);
        r.value = -r.value;
        return r;
    }

    std::vector<double> pts{a};
    for (double x : breaks)
        if (x > a && x < b && std::isfinite(x)) pts.push_back(x);
    std::sort(pts.begin() + 1, pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    const bool infinite = std::isinf(b);
    if (infinite) {
        if (pts.size() == 1 && at_a.present) pts.push_back(a + 1.0);
        pts.push_back(b);
    } else {
        pts.push_back(b);
        if (pts.size() == 2 && at_a.present && at_b.present) pts.insert(pts.begin() + 1, 0.5 * (a + b));
    }

    std::vector<Segment> segs;
    const std::size_t nseg = pts.size() - 1;
    for (std::size_t i = 0; i < nseg; ++i) {
        Segment s;
        s.a = pts[i];
        s.b = pts[i + 1];
        if (std::isinf(s.b)) {
            s.kind = Segment::to_infinity;
        } else if (i == 0 && at_a.present) {
            s.kind = Segment::grade_left;
            s.power = grading_power(at_a.exponent);
        } else if (i + 1 == nseg && at_b.present) {
            s.kind = Segment::grade_right;
            s.power = grading_power(at_b.exponent);
        }
        if (s.power == 1 && (s.kind == Segment::grade_left || s.kind == Segment::grade_right))
            s.kind = Segment::plain;
        segs.push_back(s);
    }

    auto eval = [&](int si) {
        const Segment& s = segs[si];
        return [&f, s](double u) -> double {
            switch (s.kind) {
            case Segment::plain:
                return f(s.a + (s.b - s.a) * u) * (s.b - s.a);
            case Segment::grade_left: {
                const double up = std::pow(u, s.power - 1);
                const double x = s.a + (s.b - s.a) * up * u;
                return x == s.a ? 0.0 : f(x) * (s.b - s.a) * s.power * up;
            }
            case Segment::grade_right: {
                // x rounds onto b once (b-a)u^k drops below ulp(b): mass lost there is O(ulp^{1+p})
                const double up = std::pow(u, s.power - 1);
                const double x = s.b - (s.b - s.a) * up * u;
                return x == s.b ? 0.0 : f(x) * (s.b - s.a) * s.power * up;
            }
            case Segment::to_infinity: {
                // x = a + (1-u)/u, u in (0, 1]
                if (u <= 0.0) return 0.0;
                const double x = s.a + (1.0 - u) / u;
                return f(x) / (u * u);
            }
            }
            return 0.0;
        };
    };

    std::vector<Piece> heap;
    heap.reserve(static_cast<std::size_t>(spec.max_subdivisions) + nseg + 1);
    std::vector<Piece> frozen; // too narrow to bisect further
    double total = 0.0, total_err = 0.0;
    for (std::size_t i = 0; i < nseg; ++i) {
        Piece p = gk21(eval(static_cast<int>(i)), 0.0, 1.0, static_cast<int>(i));
        total += p.value;
        total_err += p.err;
        heap.push_back(p);
    }
    std::make_heap(heap.begin(), heap.end());

    auto tol = [&] { return std::max(spec.abs_tol, spec.rel_tol * std::abs(total)); };
    int count = static_cast<int>(nseg);
    int iter = 0;
    while (total_err > tol() && !heap.empty() && count < spec.max_subdivisions) {
        std::pop_heap(heap.begin(), heap.end());
        Piece p = heap.back();
        heap.pop_back();
        const double mid = 0.5 * (p.lo + p.hi);
        if (!(mid > p.lo && mid < p.hi) || (p.hi - p.lo) < 1e-15) {
            frozen.push_back(p);
            continue;
        }
        auto g = eval(p.seg);
        Piece l = gk21(g, p.lo, mid, p.seg), r = gk21(g, mid, p.hi, p.seg);
        total += l.value + r.value - p.value;
        total_err += l.err + r.err - p.err;
        heap.push_back(l);
        std::push_heap(heap.begin(), heap.end());
        heap.push_back(r);
        std::push_heap(heap.begin(), heap.end());
        ++count;
        if (++iter % 64 == 0) { // resum to limit drift
            total = 0.0;
            total_err = 0.0;
            for (const auto& q : heap) { total += q.value; total_err += q.err; }
            for (const auto& q : frozen) { total += q.value; total_err += q.err; }
        }
    }
    total = 0.0;
    total_err = 0.0;
    for (const auto& q : heap) { total += q.value; total_err += q.err; }
    for (const auto& q : frozen) { total += q.value; total_err += q.err; }

    QuadResult res;
    res.value = total;
    res.err.abs_err = total_err;
    res.err.rel_err = total != 0.0 ? total_err / std::abs(total) : (total_err == 0.0 ? 0.0 : kInf);
    res.err.converged = std::isfinite(total) && total_err <= tol();
    return res;
}

QuadResult integrate_with_breaks(FunctionRef<double(double)> f, double a, double b,
                                 const std::vector<double>& breaks, const QuadratureSpec& spec,
                                 EndpointSingularity at_a, EndpointSingularity at_b)
{
    QuadResult r = integrate_nothrow(f, a, b, breaks, spec, at_a, at_b);
    if (!r.err.converged) {
        std::ostringstream os;
        os << "integrate: no convergence on [" << a << ", " << b << "] after "
           << spec.max_subdivisions << " subdivisions (value " << r.value << ", err "
           << r.err.abs_err << ")";
        throw QuadratureError(os.str(), r);
    }
    return r;
}

QuadResult integrate(FunctionRef<double(double)> f, double a, double b, const QuadratureSpec& spec,
                     EndpointSingularity at_a, EndpointSingularity at_b)
{
    return integrate_with_breaks(f, a, b, {}, spec, at_a, at_b);
}

namespace {

// Best even-column entry of the epsilon table built from s.
double wynn_estimate(const std::vector<double>& s)
{
    const std::size_t m = s.size();
    if (m == 0) return 0.0;
    if (m < 3) return s.back();
    std::vector<double> prev(m + 1, 0.0), cur(s.begin(), s.end());
    double best = s.back();
    for (std::size_t col = 1; col < m; ++col) {
        std::vector<double> next(cur.size() - 1);
        for (std::size_t k = 0; k + 1 < cur.size(); ++k) {
            const double d = cur[k + 1] - cur[k];
            if (d == 0.0 || !std::isfinite(1.0 / d)) {
                // exact convergence in this column
                return (col % 2 == 1) ? cur[k + 1] : best;
            }
            next[k] = prev[k + 1] + 1.0 / d;
        }
        prev = std::move(cur);
        cur = std::move(next);
        if (col % 2 == 0 && !cur.empty() && std::isfinite(cur.back())) best = cur.back();
    }
    return best;
}

std::vector<double> last_three(const std::vector<double>& s)
{
    return {s.end() - std::min<std::ptrdiff_t>(3, static_cast<std::ptrdiff_t>(s.size())), s.end()};
}

} // namespace

WynnResult wynn_epsilon(const std::vector<double>& partial_sums)
{
    constexpr std::size_t window = 40;
    std::vector<double> s(partial_sums.size() > window ? partial_sums.end() - window : partial_sums.begin(),
                          partial_sums.end());
    const double e0 = wynn_estimate(s);
    if (s.size() < 4) {
        const double d = s.size() >= 2 ? std::abs(s[s.size() - 1] - s[s.size() - 2]) : kInf;
        return {e0, d};
    }
    std::vector<double> s1(s.begin(), s.end() - 1), s2(s.begin(), s.end() - 2);
    const double e1 = wynn_estimate(s1), e2 = wynn_estimate(s2);
    const double err = std::abs(e0 - e1) + std::abs(e0 - e2) + 10.0 * kEps * std::abs(e0);
    return {e0, err};
}

QuadResult oscillatory_bessel_integral(FunctionRef<double(double)> g, double nu, double omega,
                                       const QuadratureSpec& spec)
{
    spec.validate();
    if (!(omega > 0.0)) throw DomainError("oscillatory_bessel_integral: omega must be positive");
    if (nu < -0.5) throw DomainError("oscillatory_bessel_integral: nu < -1/2");

    auto h = [&](double r) { return g(r) * bessel_j(nu, omega * r); };

    // first zero at or beyond the cutoff
    int k0 = std::max(1, static_cast<int>(std::floor(spec.tail_cutoff * omega / M_PI - 0.5 * nu + 0.25)) - 1);
    if (spec.tail_cutoff * omega / M_PI > 1e8) throw DomainError("oscillatory_bessel_integral: tail_cutoff * omega too large");
    while (bessel_j_zero(nu, k0) / omega < spec.tail_cutoff) ++k0;
    while (k0 > 1 && bessel_j_zero(nu, k0 - 1) / omega >= spec.tail_cutoff) --k0;
    const double b0 = bessel_j_zero(nu, k0) / omega;

    std::vector<double> breaks;
    if (k0 - 1 <= 4000)
        for (int k = 1; k < k0; ++k) breaks.push_back(bessel_j_zero(nu, k) / omega);
    if (spec.tail_cutoff > 0.0) {
        for (int j = 1; j <= 8; ++j) breaks.push_back(spec.tail_cutoff * std::ldexp(1.0, -j));
        for (double x = spec.tail_cutoff; x < b0; x *= 2.0) breaks.push_back(x);
    }
    QuadratureSpec head_spec = spec;
    head_spec.max_subdivisions = std::max(spec.max_subdivisions, 4 * static_cast<int>(breaks.size()) + 100);
    QuadResult head = integrate_nothrow(h, 0.0, b0, breaks, head_spec);
    if (!head.err.converged) {
        std::ostringstream os;
        os << "oscillatory_bessel_integral: head [0, " << b0 << "] did not converge (err "
           << head.err.abs_err << ")";
        throw QuadratureError(os.str(), head, {head.value});
    }

    std::vector<double> sums{head.value};
    ErrorEstimate err = head.err;
    double sum = head.value, lo = b0;
    int small_terms = 0, accepted = 0;
    WynnResult acc{sum, kInf};
    for (int k = k0 + 1; k < k0 + 1 + spec.max_subdivisions; ++k) {
        const double hi = bessel_j_zero(nu, k) / omega;
        QuadResult term = integrate_nothrow(h, lo, hi, {}, spec);
        if (!term.err.converged) {
            std::ostringstream os;
            os << "oscillatory_bessel_integral: interval [" << lo << ", " << hi << "] did not converge";
            throw QuadratureError(os.str(), {sum, err}, last_three(sums));
        }
        err.abs_err += term.err.abs_err;
        sum += term.value;
        sums.push_back(sum);
        lo = hi;

        const double tol = std::max(spec.abs_tol, spec.rel_tol * std::abs(sum));
        if (std::abs(term.value) <= 1e-3 * tol) {
            if (++small_terms >= 3) {
                QuadResult r{sum, err};
                r.err.abs_err += std::abs(term.value);
                r.err.rel_err = sum != 0.0 ? r.err.abs_err / std::abs(sum) : 0.0;
                r.err.converged = true;
                return r;
            }
        } else {
            small_terms = 0;
        }
        if (sums.size() >= 5) {
            acc = wynn_epsilon(sums);
            const double atol = std::max(spec.abs_tol, spec.rel_tol * std::abs(acc.value));
            accepted = (acc.error <= atol) ? accepted + 1 : 0;
            if (accepted >= 2) {
                QuadResult r{acc.value, err};
                r.err.abs_err += acc.error;
                r.err.rel_err = acc.value != 0.0 ? r.err.abs_err / std::abs(acc.value) : 0.0;
                r.err.converged = true;
                return r;
            }
        }
    }
    const std::vector<double> last = last_three(sums);
    QuadResult partial{acc.value, err};
    partial.err.abs_err += acc.error;
    partial.err.converged = false;
    std::ostringstream os;
    os << "oscillatory_bessel_integral: acceleration did not converge; last partial sums";
    for (double v : last) os << ' ' << v;
    throw QuadratureError(os.str(), partial, last);
}

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights)
{
    if (n < 1) throw DomainError("gauss_legendre: n must be >= 1");
    nodes.assign(n, 0.0);
    weights.assign(n, 0.0);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) { p1 = x; p0 = 1.0; }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
}

} // namespace fraclab
