#include "fraclab/duhamel.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <deque>
#include <limits>
#include <random>
#include <sstream>

#include "fraclab/dft.hpp"

namespace fraclab {

namespace {

using cplx = std::complex<double>;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// psi_k(z) = int_0^1 e^{z u} u^k du, k < q
void psi_moments(double z, int q, double* psi) {
    if (std::fabs(z) <= 4.0) {
        for (int k = 0; k < q; ++k) {
            double term = 1.0, sum = 1.0 / (k + 1);
            for (int i = 1; i < 60; ++i) {
                term *= z / i;
                const double add = term / (k + i + 1);
                sum += add;
                if (std::fabs(add) < 1e-17 * std::fabs(sum)) break;
            }
            psi[k] = sum;
        }
        return;
    }
    // upward recurrence, stable for |z| > k
    const double ez = std::exp(z);
    psi[0] = std::expm1(z) / z;
    for (int k = 1; k < q; ++k) psi[k] = (ez - k * psi[k - 1]) / z;
}

// monomial coefficients a[m][c] of the Lagrange basis polynomials on nodes u
std::vector<std::vector<double>> lagrange_monomials(const std::vector<double>& u) {
    const int q = (int)u.size();
    Eigen::MatrixXd Vd(q, q);
    for (int r = 0; r < q; ++r)
        for (int c = 0; c < q; ++c) Vd(r, c) = std::pow(u[r], c);
    // l_m(u_r) = delta_mr: coefficient columns solve Vd a_m = e_m
    Eigen::MatrixXd A = Vd.fullPivLu().solve(Eigen::MatrixXd::Identity(q, q));
    std::vector<std::vector<double>> a(q, std::vector<double>(q));
    for (int m = 0; m < q; ++m)
        for (int c = 0; c < q; ++c) a[m][c] = A(c, m);
    return a;
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

} // namespace

SpaceTimeGrid SpaceTimeGrid::make(const PeriodicLattice& lat, double lambda_max, std::vector<double> anchors,
                                  double step_fraction) {
    lat.validate();
    if (!(lambda_max > 0)) throw DomainError("SpaceTimeGrid: lambda_max must be positive");
    if (!(step_fraction > 0 && step_fraction <= 0.5)) throw DomainError("SpaceTimeGrid: step_fraction out of (0, 0.5]");
    if (anchors.empty()) throw DomainError("SpaceTimeGrid: no output times");
    std::sort(anchors.begin(), anchors.end());
    anchors.erase(std::unique(anchors.begin(), anchors.end()), anchors.end());
    if (!(anchors.front() > 0) || !std::isfinite(anchors.back()))
        throw DomainError("SpaceTimeGrid: output times must be positive and finite");

    SpaceTimeGrid g;
    g.lattice = lat;
    g.anchors = anchors;
    g.step_fraction = step_fraction;
    const double h0 = step_fraction / lambda_max;
    double t = 0.0;
    g.t_nodes.push_back(t);
    // the first steps ramp up from h0 / 1024 so the low-order startup of the multistep march is harmless
    double ramp = h0 / 1024.0;
    for (double a : anchors) {
        while (t < a) {
            double h = t < 1.0 / lambda_max ? std::min(ramp, h0) : step_fraction * t;
            ramp *= 2.0;
            double next = t + h;
            if (next >= a - 0.25 * h) next = a;
            t = next;
            g.t_nodes.push_back(t);
        }
    }
    g.validate();
    return g;
}

void SpaceTimeGrid::validate() const {
    lattice.validate();
    if (t_nodes.empty() || t_nodes.front() != 0.0) throw DomainError("SpaceTimeGrid: t_nodes must start at 0");
    for (std::size_t i = 1; i < t_nodes.size(); ++i)
        if (!(t_nodes[i] > t_nodes[i - 1])) throw DomainError("SpaceTimeGrid: t_nodes not strictly increasing");
    for (std::size_t a = 0; a < anchors.size(); ++a) anchor_node(a);
}

std::size_t SpaceTimeGrid::anchor_node(std::size_t a) const {
    auto it = std::lower_bound(t_nodes.begin(), t_nodes.end(), anchors.at(a));
    if (it == t_nodes.end() || *it != anchors[a]) throw DomainError("SpaceTimeGrid: anchor is not a mesh node");
    return it - t_nodes.begin();
}

Eigen::MatrixXd DuhamelSeries::kernel(int j, std::size_t anchor) const {
    if (j < 0 || j > N_terms) throw DomainError("DuhamelSeries::kernel: term index out of range");
    if (anchor >= grid.anchors.size()) throw DomainError("DuhamelSeries::kernel: anchor out of range");
    if (j == 0) return circulant(free_terms[anchor]);
    return terms[j][anchor];
}

std::size_t DuhamelSeries::anchor_index(double t) const {
    for (std::size_t a = 0; a < grid.anchors.size(); ++a)
        if (std::fabs(grid.anchors[a] - t) <= 1e-12 * std::max(1.0, t)) return a;
    throw DomainError("time " + fmt(t) + " is not an output time of the series");
}

void check_resolution(const PeriodicLattice& lat, const Potential& V) {
    if (V.dim() != 1) throw DomainError("lattice potentials are one-dimensional");
    const double dx = lat.dx();
    for (const auto& c : V.components()) {
        if (!c.singular()) continue;
        const double g = c.exponent;
        if (g >= 1.0) throw DomainError("inverse power |x|^-" + fmt(g) + " is not locally integrable in one dimension");
        const double R = std::min({c.reach(), 1.0, 0.25 * lat.L});
        const double center = c.center.empty() ? 0.0 : c.center[0];
        const double exact = 2.0 * std::pow(R, 1.0 - g) / (1.0 - g);
        // offset of the nodes relative to the singularity, kept while refining
        const double first = -0.5 * lat.L;
        const double frac = std::fmod(std::fmod(center - first, dx) + dx, dx) / dx;
        auto riemann = [&](double h) {
            double s = 0.0;
            for (double d = -frac * h; d > -R; d -= h)
                if (d != 0.0) s += std::pow(std::fabs(d), -g) * h;
            for (double d = (1.0 - frac) * h; d < R; d += h) s += std::pow(d, -g) * h;
            return s;
        };
        auto rel = [&](double h) { return std::fabs(riemann(h) - exact) / exact; };
        if (rel(dx) <= 0.05) continue;
        double h = dx;
        for (int k = 0; k < 40 && rel(h) > 0.05; ++k) h *= 0.5;
        throw DomainError("grid too coarse for the |x|^-" + fmt(g) + " singularity at " + fmt(center) +
                          ": dx = " + fmt(dx) + ", required dx <= " + fmt(h));
    }
}

double c8_constant(const FracParams& p) {
    p.validate();
    // int I(1, x) dx; I(t, .) integrates to the same value for every t
    const double a2 = 2.0 * p.alpha;
    const double sphere = 2.0 * std::pow(M_PI, 0.5 * p.n) / std::tgamma(0.5 * p.n);
    auto f = [&](double r) { return std::pow(r, p.n - 1) * comparison_I(p, 1.0, r); };
    QuadratureSpec spec;
    spec.rel_tol = 1e-12;
    spec.abs_tol = 1e-300;
    double inner = integrate(f, 0.0, 1.0, spec).value;
    // beyond r = 1 the profile is r^{-n-2alpha}
    double outer = integrate(f, 1.0, kInf, spec, {}, EndpointSingularity::power(-1.0 - a2)).value;
    return sphere * (inner + outer);
}

DuhamelSeries build_series(const PeriodicLattice& lat, const FracParams& p, const Potential& V,
                           const std::vector<double>& anchors, const SeriesOptions& opt) {
    lat.validate();
    p.validate();
    if (p.n != 1) throw DomainError("the Duhamel series is built on one-dimensional lattices");
    if (opt.N_terms < 0) throw DomainError("N_terms must be nonnegative");
    for (double mu : opt.laplace_mu)
        if (!(mu > 0)) throw DomainError("Laplace parameters must be positive");
    check_resolution(lat, V);

    const int N = lat.N;
    const int J = opt.N_terms;
    const double dx = lat.dx();
    auto lam = free_symbol(lat, p);
    const double lam_max = *std::max_element(lam.begin(), lam.end());

    DuhamelSeries s;
    s.params = p;
    s.V = V;
    s.V_values = sample_potential(lat, V);
    s.N_terms = J;
    s.options = opt;
    s.grid = SpaceTimeGrid::make(lat, lam_max, anchors, opt.step_fraction);
    s.laplace_mu = opt.laplace_mu;
    const auto& tn = s.grid.t_nodes;
    const std::size_t nA = s.grid.anchors.size();
    s.laplace_T = tn.back();

    for (double t : s.grid.anchors) s.free_terms.push_back(lattice_free_kernel(lat, p, t));
    s.terms.assign(J + 1, {});
    for (int j = 1; j <= J; ++j) s.terms[j].assign(nA, Eigen::MatrixXd::Zero(N, N));

    ColumnDft dft(N, N);
    Eigen::MatrixXcd F = Eigen::MatrixXcd::Identity(N, N);
    dft.execute(F.data(), DftDirection::forward);

    auto free_part = [&](double t) {
        Eigen::MatrixXcd P = F;
        for (int k = 0; k < N; ++k) P.row(k) *= std::exp(-lam[k] * t);
        return P;
    };
    // F V F* Phi, with Phi = F T
    auto forcing = [&](const Eigen::MatrixXcd& Phi) {
        Eigen::MatrixXcd G = Phi;
        dft.execute(G.data(), DftDirection::inverse);
        for (int c = 0; c < N; ++c) {
            cplx* col = G.data() + (std::size_t)c * N;
            for (int k = 0; k < N; ++k) col[k] *= s.V_values[k];
        }
        dft.execute(G.data(), DftDirection::forward);
        return G;
    };
    auto to_kernel = [&](const Eigen::MatrixXcd& Phi) {
        Eigen::MatrixXcd T = Phi;
        dft.execute(T.data(), DftDirection::inverse);
        return Eigen::MatrixXd(T.real() / dx);
    };

    // exponential Adams-Moulton march: on each step the forcing is the cubic through the
    // new node and up to three previous ones, integrated exactly against e^{-lambda (t+h-s)}
    constexpr int kPoints = 6;
    const std::size_t nM = s.laplace_mu.size();
    std::vector<Eigen::MatrixXcd> Phi(J + 1);
    std::vector<std::deque<Eigen::MatrixXcd>> Ghist(J + 1), Phist(J + 1); // most recent first
    std::vector<std::vector<Eigen::MatrixXcd>> lap(nM, std::vector<Eigen::MatrixXcd>(J + 1));
    {
        Eigen::MatrixXcd prev = F;
        for (int j = 1; j <= J; ++j) {
            Phi[j] = Eigen::MatrixXcd::Zero(N, N);
            Ghist[j].push_front(forcing(prev));
            if (nM) Phist[j].push_front(Phi[j]);
            prev = Phi[j];
            for (std::size_t m = 0; m < nM; ++m) lap[m][j] = Eigen::MatrixXcd::Zero(N, N);
        }
    }

    std::vector<double> E(N);
    std::vector<std::vector<double>> W(kPoints, std::vector<double>(N));
    std::vector<std::vector<double>> Lw(nM, std::vector<double>(kPoints));
    std::size_t next_anchor = 0;
    for (std::size_t i = 1; i < tn.size() && J >= 1; ++i) {
        const double h = tn[i] - tn[i - 1];
        const int q = (int)std::min<std::size_t>(kPoints, i + 1);
        std::vector<double> u(q);
        for (int m = 0; m < q; ++m) u[m] = (tn[i] - tn[i - m]) / h;
        auto a = lagrange_monomials(u);
        std::vector<double> psi(q);
        for (int k = 0; k < N; ++k) {
            const double z = -lam[k] * h;
            E[k] = std::exp(z);
            psi_moments(z, q, psi.data());
            for (int m = 0; m < q; ++m) {
                double w = 0.0;
                for (int c = 0; c < q; ++c) w += a[m][c] * psi[c];
                W[m][k] = h * w;
            }
        }
        for (std::size_t mu_i = 0; mu_i < nM; ++mu_i) {
            const double mu = s.laplace_mu[mu_i];
            psi_moments(mu * h, q, psi.data());
            for (int m = 0; m < q; ++m) {
                double w = 0.0;
                for (int c = 0; c < q; ++c) w += a[m][c] * psi[c];
                Lw[mu_i][m] = h * std::exp(-mu * tn[i]) * w;
            }
        }
        Eigen::MatrixXcd prev_new = free_part(tn[i]);
        for (int j = 1; j <= J; ++j) {
            Eigen::MatrixXcd Gnew = forcing(prev_new);
            for (int c = 0; c < N; ++c) {
                cplx* ph = Phi[j].data() + (std::size_t)c * N;
                const cplx* g0 = Gnew.data() + (std::size_t)c * N;
                for (int k = 0; k < N; ++k) ph[k] = E[k] * ph[k] + W[0][k] * g0[k];
                for (int m = 1; m < q; ++m) {
                    const cplx* gm = Ghist[j][m - 1].data() + (std::size_t)c * N;
                    for (int k = 0; k < N; ++k) ph[k] += W[m][k] * gm[k];
                }
            }
            Ghist[j].push_front(std::move(Gnew));
            if ((int)Ghist[j].size() > kPoints - 1) Ghist[j].pop_back();
            if (nM) {
                for (std::size_t mu_i = 0; mu_i < nM; ++mu_i) {
                    lap[mu_i][j] += Lw[mu_i][0] * Phi[j];
                    for (int m = 1; m < q; ++m) lap[mu_i][j] += Lw[mu_i][m] * Phist[j][m - 1];
                }
                Phist[j].push_front(Phi[j]);
                if ((int)Phist[j].size() > kPoints - 1) Phist[j].pop_back();
            }
            prev_new = Phi[j];
        }
        while (next_anchor < nA && s.grid.anchors[next_anchor] == tn[i]) {
            for (int j = 1; j <= J; ++j) s.terms[j][next_anchor] = to_kernel(Phi[j]);
            ++next_anchor;
        }
    }

    s.laplace.assign(nM, std::vector<Eigen::MatrixXd>(J + 1));
    for (std::size_t m = 0; m < nM; ++m) {
        const double mu = s.laplace_mu[m];
        Eigen::MatrixXcd L0 = F;
        for (int k = 0; k < N; ++k) L0.row(k) *= -std::expm1(-(mu + lam[k]) * s.laplace_T) / (mu + lam[k]);
        s.laplace[m][0] = to_kernel(L0);
        for (int j = 1; j <= J; ++j) s.laplace[m][j] = to_kernel(lap[m][j]);
    }

    // geometric tail bounds
    const double C8 = c8_constant(p);
    s.K_V.assign(nA, kNaN);
    s.omega_KV.assign(nA, kNaN);
    s.truncation_bound.assign(nA, HUGE_VAL);
    s.truncation_bound_L1.assign(nA, HUGE_VAL);
    if (opt.bounds.K_V) {
        for (std::size_t a = 0; a < nA; ++a) {
            const double t = s.grid.anchors[a];
            s.K_V[a] = opt.bounds.K_V(t);
            const double q = opt.bounds.omega_const * s.K_V[a];
            s.omega_KV[a] = q;
            if (q < 1.0) {
                const double tail = opt.bounds.C1 * std::pow(q, J + 1) / (1.0 - q);
                s.truncation_bound[a] = tail * std::pow(t, -p.n / (2.0 * p.alpha));
                s.truncation_bound_L1[a] = tail * C8;
            }
        }
        if (s.omega_KV.back() >= 1.0)
            s.warnings.push_back("omega K_V(T) = " + fmt(s.omega_KV.back()) +
                                 " >= 1: the series is not geometric at the last output time");
    }
    return s;
}

DuhamelSeries duhamel_step(const DuhamelSeries& prev) {
    SeriesOptions opt = prev.options;
    opt.N_terms = prev.N_terms + 1;
    return build_series(prev.grid.lattice, prev.params, prev.V, prev.grid.anchors, opt);
}

SeriesSum series_sum(const DuhamelSeries& s, double t, int N_terms) {
    const std::size_t a = s.anchor_index(t);
    const int J = N_terms < 0 ? s.N_terms : N_terms;
    if (J > s.N_terms) throw DomainError("series_sum: only " + std::to_string(s.N_terms) + " terms computed");
    const double q = s.omega_KV[a];
    if (std::isfinite(q) && q >= 1.0)
        throw NonGeometricError("omega K_V(t) = " + fmt(q) + " >= 1 at t = " + fmt(t) +
                                ": the series does not converge geometrically, use doubling");
    SeriesSum out;
    out.kernel = s.kernel(0, a);
    for (int j = 1; j <= J; ++j) out.kernel += (j % 2 ? -1.0 : 1.0) * s.terms[j][a];
    if (std::isfinite(q)) {
        const double tail = s.options.bounds.C1 * std::pow(q, J + 1) / (1.0 - q);
        out.truncation_bound = tail * std::pow(t, -s.params.n / (2.0 * s.params.alpha));
        out.truncation_bound_L1 = tail * c8_constant(s.params);
    } else {
        out.truncation_bound = out.truncation_bound_L1 = HUGE_VAL;
    }
    return out;
}

double lattice_C1(const DuhamelSeries& s) {
    const auto& lat = s.grid.lattice;
    double c = 0.0;
    for (std::size_t a = 0; a < s.grid.anchors.size(); ++a)
        for (int j = 0; j < lat.N; ++j) {
            const double r = lat.wrap_distance(j * lat.dx());
            c = std::max(c, std::fabs(s.free_terms[a][j]) / comparison_I(s.params, s.grid.anchors[a], r));
        }
    return c;
}

std::vector<BoundReport> verify_33(const DuhamelSeries& s, double C1, double omega_const, int j_max) {
    if (j_max < 0 || j_max > s.N_terms) throw DomainError("verify_33: j_max out of range");
    const auto& lat = s.grid.lattice;
    const int N = lat.N;
    const double dx = lat.dx();
    std::vector<BoundReport> out(j_max + 1);
    for (int j = 0; j <= j_max; ++j) {
        BoundReport& rep = out[j];
        rep.empirical_constant = 0.0;
        for (std::size_t a = 0; a < s.grid.anchors.size(); ++a) {
            const double t = s.grid.anchors[a];
            double scale = C1;
            if (j > 0) {
                if (!std::isfinite(s.K_V[a])) throw DomainError("verify_33: the series carries no K_V curve");
                scale *= std::pow(omega_const * s.K_V[a], j);
            }
            double worst = 0.0;
            for (int y = 0; y < N; ++y)
                for (int x = 0; x < N; ++x) {
                    const double num = j == 0 ? std::fabs(s.free_terms[a][((x - y) % N + N) % N])
                                              : std::fabs(s.terms[j][a](x, y));
                    const double r = lat.wrap_distance((x - y) * dx);
                    double ratio = num == 0.0 ? 0.0 : num / (scale * comparison_I(s.params, t, r));
                    ++rep.n_samples;
                    if (ratio > worst) worst = ratio;
                    if (ratio > rep.empirical_constant) {
                        rep.empirical_constant = ratio;
                        rep.worst_t = t;
                        rep.worst_r = r;
                    }
                }
            rep.per_t_max.push_back(worst);
        }
        rep.margin = 1.0 - rep.empirical_constant;
    }
    return out;
}

double product_ratio(const FracParams& p, double t, double s, const std::vector<double>& x,
                     const std::vector<double>& y) {
    if (!(t > 0 && s > 0)) throw DomainError("product_ratio: t and s must be positive");
    if ((int)x.size() != p.n || (int)y.size() != p.n) throw DomainError("product_ratio: point dimension mismatch");
    double nx = 0, ny = 0, nxy = 0;
    for (int i = 0; i < p.n; ++i) {
        nx += x[i] * x[i];
        ny += y[i] * y[i];
        nxy += (x[i] + y[i]) * (x[i] + y[i]);
    }
    const double It = comparison_I(p, t, std::sqrt(nx)), Is = comparison_I(p, s, std::sqrt(ny));
    // I(t,x) I(s,y) / max(I(t,x), I(s,y)) = min of the two
    return std::min(It, Is) / comparison_I(p, t + s, std::sqrt(nxy));
}

ProductInequalityReport product_inequality_check(const FracParams& p, long n_samples, unsigned long long seed) {
    p.validate();
    if (n_samples <= 0) throw DomainError("product_inequality_check: need samples");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-3.0, 3.0), ur(-2.0, 2.0);
    std::normal_distribution<double> gauss;
    std::bernoulli_distribution same(0.5);
    auto direction = [&] {
        std::vector<double> d(p.n);
        double nrm = 0;
        do {
            nrm = 0;
            for (auto& v : d) {
                v = gauss(rng);
                nrm += v * v;
            }
        } while (nrm == 0.0);
        for (auto& v : d) v /= std::sqrt(nrm);
        return d;
    };
    ProductInequalityReport out;
    out.C4 = c4_constant(p);
    out.C4_sharp = c4_sharp(p);
    auto& rep = out.report;
    for (long i = 0; i < n_samples; ++i) {
        const double t = std::pow(10.0, u(rng)), s = std::pow(10.0, u(rng));
        auto dx = direction();
        auto dy = same(rng) ? dx : direction();
        const double rx = p.length_scale(t) * std::pow(10.0, ur(rng));
        const double ry = p.length_scale(s) * std::pow(10.0, ur(rng));
        for (auto& v : dx) v *= rx;
        for (auto& v : dy) v *= ry;
        const double r = product_ratio(p, t, s, dx, dy);
        ++rep.n_samples;
        if (r > rep.empirical_constant) {
            rep.empirical_constant = r;
            rep.worst_t = t;
            rep.worst_r = rx;
            out.worst_t = t;
            out.worst_s = s;
            out.worst_x = dx;
            out.worst_y = dy;
        }
    }
    rep.margin = 1.0 - rep.empirical_constant / out.C4;
    return out;
}

namespace {

// K0(t, r) for the Laplace quadrature: the large-r expansion where it is accurate
double laplace_kernel_value(const FracParams& p, double t, double r, const double* c, const QuadratureSpec& spec) {
    const double a2 = 2.0 * p.alpha;
    if (!p.m && r > 0) {
        const double tr = t * std::pow(r, -a2);
        if (tr <= 0.02) {
            double sum = 0.0, pw = 1.0;
            for (int k = 1; k <= 8; ++k) {
                pw *= tr;
                sum += c[k] * pw;
            }
            return std::pow(r, -(double)p.n) * sum;
        }
    }
    return free_kernel_value(p, t, r, spec);
}

} // namespace

ResolventKernel resolvent_kernel(const FracParams& p, double mu, const std::vector<double>& radii,
                                 const QuadratureSpec& spec) {
    p.validate();
    if (!(mu > 0) || !std::isfinite(mu)) throw DomainError("resolvent_kernel: mu must be positive");
    const double a2 = 2.0 * p.alpha;
    const double small_t_power = 1.0 - p.n / a2; // integrand t K0(t, 0) ~ t^{1 - n/2alpha}
    double c[9] = {0};
    if (!p.m)
        for (int k = 1; k <= 8; ++k) c[k] = free_kernel_tail_coefficient(p, k);
    ResolventKernel out;
    out.params = p;
    out.mu = mu;
    out.radial.dim = p.n;
    out.radial.radii = radii;
    // trapezoid in u = log t; the integrand is analytic in |Im u| < pi/2, so h = 1/8 is far below roundoff
    const double h = 0.125;
    for (double r : radii) {
        if (!(r >= 0)) throw DomainError("resolvent_kernel: radii must be nonnegative");
        double t_lo;
        if (r > 0) t_lo = 1e-9 * std::min(std::pow(r, a2), 1.0 / mu);
        else if (small_t_power > 0) t_lo = std::pow(1e-17, 1.0 / small_t_power) / mu;
        else throw DomainError("resolvent_kernel: R(mu, 0) diverges for 2 alpha <= n");
        const double t_hi = 40.0 / mu;
        const double u0 = std::log(t_lo), u1 = std::log(t_hi);
        const int steps = (int)std::ceil((u1 - u0) / h);
        double sum = 0.0;
        for (int i = 0; i <= steps; ++i) {
            const double t = std::exp(u0 + i * h);
            const double w = (i == 0 || i == steps) ? 0.5 : 1.0;
            sum += w * t * std::exp(-mu * t) * laplace_kernel_value(p, t, r, c, spec);
        }
        const double val = sum * h;
        if (!std::isfinite(val)) throw NumericalError("resolvent_kernel: quadrature failed at r = " + fmt(r));
        out.radial.values.push_back(val);
    }
    return out;
}

ResolventBoundReport resolvent_bound_check(const FracParams& p, const std::vector<double>& mu_sweep,
                                           const std::vector<double>& r_sweep) {
    if (mu_sweep.empty() || r_sweep.empty()) throw DomainError("resolvent_bound_check: empty sweep");
    auto run = [&](const std::vector<double>& radii, BoundReport& rep) {
        rep = {};
        for (double mu : mu_sweep) {
            auto R = resolvent_kernel(p, mu, radii);
            double worst = 0.0;
            for (std::size_t i = 0; i < radii.size(); ++i) {
                const double ratio = std::fabs(R.radial.values[i]) / J_profile(p, 1.0 / mu, radii[i]);
                rep.samples.push_back(ratio);
                ++rep.n_samples;
                worst = std::max(worst, ratio);
                if (ratio > rep.empirical_constant) {
                    rep.empirical_constant = ratio;
                    rep.worst_t = 1.0 / mu;
                    rep.worst_r = radii[i];
                }
            }
            rep.per_t_max.push_back(worst);
        }
        rep.margin = 0.0;
    };
    ResolventBoundReport out;
    run(r_sweep, out.report);
    std::vector<double> sorted = r_sweep;
    std::sort(sorted.begin(), sorted.end());
    BoundReport refined;
    run(refine_midpoints(sorted), refined);
    out.refined_constant = refined.empirical_constant;
    out.refinement_change = std::fabs(refined.empirical_constant - out.report.empirical_constant) /
                            out.report.empirical_constant;
    return out;
}

std::vector<Eigen::MatrixXd> lattice_resolvent_terms(const PeriodicLattice& lat, const FracParams& p,
                                                     const std::vector<double>& V_values, double mu, int j_max) {
    if (!(mu > 0)) throw DomainError("lattice_resolvent_terms: mu must be positive");
    if ((int)V_values.size() != lat.N) throw DomainError("lattice_resolvent_terms: potential size mismatch");
    auto lam = free_symbol(lat, p);
    std::vector<cplx> c(lat.N);
    for (int k = 0; k < lat.N; ++k) c[k] = 1.0 / (lam[k] + mu);
    auto col = dft_1d(c, DftDirection::inverse);
    std::vector<double> first(lat.N);
    for (int j = 0; j < lat.N; ++j) first[j] = col[j].real() / std::sqrt((double)lat.N);
    const Eigen::MatrixXd R0 = circulant(first);
    Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(V_values.data(), lat.N);
    std::vector<Eigen::MatrixXd> out;
    Eigen::MatrixXd Rj = R0;
    out.push_back(Rj / lat.dx());
    for (int j = 1; j <= j_max; ++j) {
        Rj = (Rj * v.asDiagonal()) * R0;
        out.push_back(Rj / lat.dx());
    }
    return out;
}

std::vector<double> laplace_consistency(const DuhamelSeries& s, double mu, int j_max, double tol) {
    if (j_max < 0 || j_max > s.N_terms) throw DomainError("laplace_consistency: j_max out of range");
    std::size_t m = s.laplace_mu.size();
    for (std::size_t i = 0; i < s.laplace_mu.size(); ++i)
        if (std::fabs(s.laplace_mu[i] - mu) <= 1e-12 * mu) m = i;
    if (m == s.laplace_mu.size()) throw DomainError("laplace_consistency: mu = " + fmt(mu) + " was not accumulated");
    double vmax = 0.0;
    for (double v : s.V_values) vmax = std::max(vmax, std::fabs(v));
    // the growth envelope of sum_j |K_j| is e^{|V| t}
    const double rate = mu - vmax;
    const double need = rate > 0 ? std::log(100.0 / tol) / rate : HUGE_VAL;
    if (s.laplace_T < need)
        throw NumericalError("laplace_consistency: series horizon T = " + fmt(s.laplace_T) + " too short for mu = " +
                             fmt(mu) + ", required T >= " + fmt(need));
    auto R = lattice_resolvent_terms(s.grid.lattice, s.params, s.V_values, mu, j_max);
    std::vector<double> err;
    for (int j = 0; j <= j_max; ++j) {
        const double diff = (s.laplace[m][j] - R[j]).cwiseAbs().maxCoeff();
        const double ref = R[j].cwiseAbs().maxCoeff();
        err.push_back(ref > 0 ? diff / ref : diff);
    }
    return err;
}

double wrap_fraction(const PeriodicLattice& lat, const FracParams& p, double t) {
    p.validate();
    if (p.n != 1) throw DomainError("wrap_fraction: one-dimensional only");
    if (!(t > 0)) throw DomainError("wrap_fraction: t must be positive");
    const double R = 0.5 * lat.L;
    const double a2 = 2.0 * p.alpha;
    const double ell = p.length_scale(t);
    QuadratureSpec spec;
    spec.rel_tol = 1e-6;
    spec.abs_tol = 1e-14;
    auto K = [&](double r) { return std::fabs(free_kernel_value(p, t, r)); };
    if (p.m) {
        // super-exponential decay: 60 length scales beyond R is far past underflow of the mass
        return 2.0 * integrate(K, R, R + 60.0 * ell, spec).value;
    }
    if (t * std::pow(R, -a2) <= 0.02) {
        double out = 0.0, pw = 1.0;
        for (int k = 1; k <= 8; ++k) {
            pw *= t * std::pow(R, -a2);
            out += free_kernel_tail_coefficient(p, k) * pw / (a2 * k);
        }
        return 2.0 * out;
    }
    std::vector<double> breaks;
    for (double b = ell; b < R; b *= 4.0) breaks.push_back(b);
    return std::max(0.0, 1.0 - 2.0 * integrate_with_breaks(K, 0.0, R, breaks, spec).value);
}

DoublingResult doubling_extend(const Eigen::MatrixXd& K_half, double t_half, const PeriodicLattice& lat,
                               const FracParams& p, double bound_constant_in) {
    lat.validate();
    if (K_half.rows() != lat.N || K_half.cols() != lat.N) throw DomainError("doubling_extend: kernel is not N x N");
    if (!(t_half > 0)) throw DomainError("doubling_extend: t must be positive");
    DoublingResult out;
    out.t = 2.0 * t_half;
    out.wrap_fraction = wrap_fraction(lat, p, out.t);
    if (out.wrap_fraction > 0.01) {
        double L = lat.L;
        while (wrap_fraction(PeriodicLattice{lat.N, L}, p, out.t) > 0.01 && L < 1e12) L *= 2.0;
        throw NumericalError("doubling_extend: " + fmt(100.0 * out.wrap_fraction) + "% of the kernel mass wraps around at t = " +
                             fmt(out.t) + "; required L >= " + fmt(L));
    }
    out.kernel = (K_half * K_half) * lat.dx();
    out.bound_constant = 2.0 * c4_constant(p) * c8_constant(p) * bound_constant_in * bound_constant_in;
    return out;
}

double kernel_l1_norm(const Eigen::MatrixXd& K, double dx) {
    return K.cwiseAbs().colwise().sum().maxCoeff() * dx;
}

double kernel_l1_discrepancy(const Eigen::MatrixXd& K, const Eigen::MatrixXd& ref, double dx) {
    if (K.rows() != ref.rows() || K.cols() != ref.cols()) throw DomainError("kernel_l1_discrepancy: size mismatch");
    return kernel_l1_norm(K - ref, dx) / kernel_l1_norm(ref, dx);
}

} // namespace fraclab
