#include "fraclab/discrete_operator.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SVD>

#include "fraclab/dft.hpp"
#include "fraclab/errors.hpp"
#include "fraclab/fit.hpp"
#include "fraclab/parallel.hpp"

namespace fraclab {

DiscreteHamiltonian build_hamiltonian_values(const PeriodicLattice& lat, const FracParams& p,
                                             std::vector<double> V_values, double theta, double M) {
    lat.validate();
    p.validate();
    if (!(theta > 0 && theta <= 1)) throw DomainError("theta must lie in (0,1]");
    if ((int)V_values.size() != lat.N) throw DomainError("potential samples do not match the lattice");
    for (double v : V_values)
        if (!std::isfinite(v)) throw DomainError("non-finite potential sample");
    DiscreteHamiltonian H;
    H.lattice = lat;
    H.params = p;
    H.theta = theta;
    H.M = M;
    H.V_values = std::move(V_values);

    auto s = free_symbol(lat, p);
    std::vector<std::complex<double>> c(s.begin(), s.end());
    auto col = dft_1d(c, DftDirection::inverse);
    std::vector<double> first(lat.N);
    for (int j = 0; j < lat.N; ++j) first[j] = col[j].real() / std::sqrt((double)lat.N);
    H.dense = circulant(first);
    for (int j = 0; j < lat.N; ++j) H.dense(j, j) += H.V_values[j];
    const double asym = (H.dense - H.dense.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * std::max(1.0, H.dense.cwiseAbs().maxCoeff()))
        throw NumericalError("discrete Hamiltonian is not symmetric (" + std::to_string(asym) + ")");
    H.dense = 0.5 * (H.dense + H.dense.transpose());

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H.dense);
    if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
    H.eigenvalues = es.eigenvalues();
    H.eigenvectors = es.eigenvectors();
    return H;
}

DiscreteHamiltonian build_hamiltonian(const PeriodicLattice& lat, const FracParams& p, const Potential& V,
                                      double theta, double M) {
    return build_hamiltonian_values(lat, p, sample_potential(lat, V, theta, p.alpha), theta, M);
}

Eigen::MatrixXd spectral_function_real(const DiscreteHamiltonian& H, const std::function<double(double)>& f) {
    const auto& U = H.eigenvectors;
    Eigen::VectorXd d(H.eigenvalues.size());
    for (Eigen::Index k = 0; k < d.size(); ++k) d(k) = f(H.eigenvalues(k));
    return U * d.asDiagonal() * U.transpose();
}

Eigen::MatrixXcd spectral_function(const DiscreteHamiltonian& H,
                                   const std::function<std::complex<double>(double)>& f) {
    const auto& U = H.eigenvectors;
    Eigen::VectorXd re(H.eigenvalues.size()), im(H.eigenvalues.size());
    for (Eigen::Index k = 0; k < re.size(); ++k) {
        auto z = f(H.eigenvalues(k));
        re(k) = z.real();
        im(k) = z.imag();
    }
    Eigen::MatrixXcd A(U.rows(), U.rows());
    A.real() = U * re.asDiagonal() * U.transpose();
    A.imag() = U * im.asDiagonal() * U.transpose();
    return A;
}

Eigen::MatrixXd heat_matrix(const DiscreteHamiltonian& H, double t) {
    if (!(t >= 0)) throw DomainError("heat_matrix: t must be nonnegative");
    return spectral_function_real(H, [t](double l) { return std::exp(-t * l); });
}

PeriodicLattice rescaled_lattice(const PeriodicLattice& lat1, double theta, double alpha) {
    if (!(theta > 0 && theta <= 1)) throw DomainError("theta must lie in (0,1]");
    return PeriodicLattice::make(lat1.N, lat1.L * std::pow(theta, -1.0 / (2.0 * alpha)));
}

double theta_rescale_check(const DiscreteHamiltonian& H1, const DiscreteHamiltonian& Ht, double t) {
    if (H1.theta != 1.0) throw DomainError("theta_rescale_check: first operator must have theta = 1");
    if (H1.params.alpha != Ht.params.alpha || H1.params.n != Ht.params.n)
        throw DomainError("theta_rescale_check: parameter mismatch");
    const double s = std::pow(Ht.theta, 1.0 / (2.0 * H1.params.alpha));
    if (H1.lattice.N != Ht.lattice.N || std::fabs(Ht.lattice.L * s - H1.lattice.L) > 1e-12 * H1.lattice.L)
        throw DomainError("theta_rescale_check: lattices are not commensurate (need L_theta = L_1 theta^{-1/2alpha})");
    // K_theta(t, x, y) = theta^{1/2alpha} K_1(theta t, theta^{1/2alpha} x, theta^{1/2alpha} y)
    Eigen::MatrixXd K1 = heat_matrix(H1, Ht.theta * t) / H1.lattice.dx();
    Eigen::MatrixXd Kt = heat_matrix(Ht, t) / Ht.lattice.dx();
    return (Kt - s * K1).cwiseAbs().maxCoeff() / Kt.cwiseAbs().maxCoeff();
}

double norm_1(const Eigen::MatrixXcd& A) { return A.cwiseAbs().colwise().sum().maxCoeff(); }
double norm_inf(const Eigen::MatrixXcd& A) { return A.cwiseAbs().rowwise().sum().maxCoeff(); }
double norm_2(const Eigen::MatrixXcd& A) {
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(A);
    return svd.singularValues()(0);
}

PNorm matrix_p_norm(const Eigen::MatrixXcd& A, double p) {
    if (!(p >= 1)) throw DomainError("norm index p must lie in [1, inf]");
    if (p == 1) return {norm_1(A), false};
    if (std::isinf(p)) return {norm_inf(A), false};
    if (p == 2) return {norm_2(A), false};
    // Riesz-Thorin between the exact endpoints
    const double n2 = norm_2(A);
    if (p < 2) {
        double s = 2.0 * (1.0 - 1.0 / p);
        return {std::pow(norm_1(A), 1.0 - s) * std::pow(n2, s), true};
    }
    double s = 1.0 - 2.0 / p;
    return {std::pow(n2, 1.0 - s) * std::pow(norm_inf(A), s), true};
}

Eigen::MatrixXcd smoothed_propagator(const DiscreteHamiltonian& H, double t, double beta) {
    if (!(beta > 0)) throw DomainError("beta must be positive");
    if (!(H.lambda_min() + H.M > 0))
        throw DomainError("shift M = " + std::to_string(H.M) + " does not exceed the eigenvalue floor -lambda_min = " +
                          std::to_string(-H.lambda_min()));
    return spectral_function(H, [&](double l) {
        return std::exp(std::complex<double>(0.0, -t * l)) * std::pow(l + H.M, -beta);
    });
}

PNorm propagator_smoothing_norm(const DiscreteHamiltonian& H, double t, double beta, double p) {
    return matrix_p_norm(smoothed_propagator(H, t, beta), p);
}

double n_p(int n, double p) {
    if (!(p >= 1)) throw DomainError("norm index p must lie in [1, inf]");
    return n * std::fabs((std::isinf(p) ? 0.0 : 1.0 / p) - 0.5);
}

SmoothingEstimate growth_fit(const std::vector<double>& t, const std::vector<double>& norm, double p, double beta,
                             int n) {
    if (t.size() != norm.size()) throw DomainError("growth_fit: size mismatch");
    if (t.size() < 8) throw DomainError("growth_fit: need at least 8 samples");
    const auto [tmin, tmax] = std::minmax_element(t.begin(), t.end());
    if (!(*tmin > 0) || std::log10(*tmax / *tmin) < 1.5 - 1e-12)
        throw DomainError("growth_fit: samples must span at least 1.5 decades of t");
    std::vector<double> x, y;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!(norm[i] > 0)) throw DomainError("growth_fit: nonpositive norm");
        x.push_back(std::log1p(t[i]));
        y.push_back(std::log(norm[i]));
    }
    LineFit f = fit_line(x, y);
    SmoothingEstimate e;
    e.p = p;
    e.beta = beta;
    e.gamma_fit = f.slope;
    e.log_C = f.intercept;
    e.residual = f.residual_rms;
    e.n_p = n_p(n, p);
    e.t = t;
    e.norm = norm;
    return e;
}

double amalgam_norm(const std::vector<double>& slice, double dx, double cell_size, double p, double q) {
    if (!(p >= 1) || !(q >= 1)) throw DomainError("amalgam_norm: p and q must lie in [1, inf]");
    if (!(dx > 0) || !(cell_size > 0)) throw DomainError("amalgam_norm: dx and cell size must be positive");
    const double per = cell_size / dx;
    const long m = std::lround(per);
    if (m < 1 || std::fabs(per - m) > 1e-9 * per) throw DomainError("amalgam_norm: cell size is not a multiple of dx");
    if (slice.size() % m != 0) throw DomainError("amalgam_norm: domain is not a whole number of cells");
    const std::size_t cells = slice.size() / m;
    double outer = 0.0;
    for (std::size_t c = 0; c < cells; ++c) {
        double inner = 0.0;
        for (long j = 0; j < m; ++j) {
            double v = std::fabs(slice[c * m + j]);
            if (std::isinf(q)) inner = std::max(inner, v);
            else inner += std::pow(v, q) * dx;
        }
        if (!std::isinf(q)) inner = std::pow(inner, 1.0 / q);
        if (std::isinf(p)) outer = std::max(outer, inner);
        else outer += std::pow(inner, p);
    }
    return std::isinf(p) ? outer : std::pow(outer, 1.0 / p);
}

namespace {

// max over y of the l^1(L^p) norm of the column K(., y)
double max_column_amalgam(const Eigen::MatrixXd& A, double dx, double cell, double p_outer, double q) {
    const int N = (int)A.rows();
    std::vector<double> vals(A.cols());
    parallel_for(A.cols(), [&](std::size_t y) {
        std::vector<double> col(N);
        for (int i = 0; i < N; ++i) col[i] = A(i, y) / dx;
        vals[y] = amalgam_norm(col, dx, cell, p_outer, q);
    });
    return *std::max_element(vals.begin(), vals.end());
}

} // namespace

Verify41Report verify_41(const PeriodicLattice& lat, const FracParams& params, const Potential& V,
                         const std::vector<double>& theta_sweep, double p, const std::vector<double>& t_sweep,
                         double cell_size) {
    if (theta_sweep.empty() || t_sweep.size() < 3) throw DomainError("verify_41: need thetas and >= 3 times");
    Verify41Report rep;
    rep.p = p;
    const double gam = params.n / (2.0 * params.alpha) * (1.0 - (std::isinf(p) ? 0.0 : 1.0 / p));
    std::vector<double> all_ratios;
    for (double theta : theta_sweep) {
        auto H = build_hamiltonian(lat, params, V, theta);
        Fit41 f;
        f.theta = theta;
        f.t = t_sweep;
        for (double t : t_sweep) f.norm.push_back(max_column_amalgam(heat_matrix(H, t), lat.dx(), cell_size, 1.0, p));
        std::vector<double> x, y;
        for (std::size_t i = 0; i < t_sweep.size(); ++i) {
            x.push_back(t_sweep[i]);
            y.push_back(std::log(f.norm[i] / (1.0 + std::pow(t_sweep[i], -gam))));
        }
        f.L = fit_line(x, y).slope;
        f.C = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) f.C = std::max(f.C, std::exp(y[i] - f.L * x[i]));
        f.margin = HUGE_VAL;
        for (std::size_t i = 0; i < x.size(); ++i) {
            double bound = f.C * std::exp(f.L * x[i]) * (1.0 + std::pow(x[i], -gam));
            double r = f.norm[i] / bound;
            all_ratios.push_back(r);
            f.margin = std::min(f.margin, 1.0 - r);
        }
        rep.fits.push_back(f);
    }
    double cmin = HUGE_VAL, cmax = 0.0;
    for (const auto& f : rep.fits) {
        cmin = std::min(cmin, f.C);
        cmax = std::max(cmax, f.C);
    }
    rep.C_spread = cmax / cmin;
    rep.bound_spread = 1.0;
    for (double t : t_sweep) {
        double bmin = HUGE_VAL, bmax = 0.0;
        for (const auto& f : rep.fits) {
            double b = f.C * std::exp(f.L * t);
            bmin = std::min(bmin, b);
            bmax = std::max(bmax, b);
        }
        rep.bound_spread = std::max(rep.bound_spread, bmax / bmin);
    }
    rep.bound.samples = all_ratios;
    rep.bound.n_samples = (long)all_ratios.size();
    rep.bound.empirical_constant = *std::max_element(all_ratios.begin(), all_ratios.end());
    rep.bound.margin = 1.0 - rep.bound.empirical_constant;
    return rep;
}

Eigen::MatrixXd resolvent_power_spectral(const DiscreteHamiltonian& H, double lambda) {
    if (!(lambda > 0)) throw DomainError("resolvent power must be positive");
    if (!(H.lambda_min() + H.M > 0)) throw DomainError("shift M does not exceed the eigenvalue floor");
    return spectral_function_real(H, [&](double l) { return std::pow(l + H.M, -lambda); });
}

// Gamma(lambda)^{-1} int_0^inf t^{lambda-1} e^{-t(H+M)} dt, one exp-sinh node set for the whole spectrum
Eigen::MatrixXd resolvent_power_gamma(const DiscreteHamiltonian& H, double lambda) {
    if (!(lambda > 0)) throw DomainError("resolvent power must be positive");
    if (!(H.lambda_min() + H.M > 0)) throw DomainError("shift M does not exceed the eigenvalue floor");
    const double h = 1.0 / 64.0;
    std::vector<double> nodes, weights;
    for (double u = -6.5; u <= 6.5 + 1e-12; u += h) {
        double t = std::exp(0.5 * M_PI * std::sinh(u));
        double w = h * 0.5 * M_PI * std::cosh(u) * t;
        if (t == 0.0 || !std::isfinite(t)) continue;
        nodes.push_back(t);
        weights.push_back(w);
    }
    const double lg = std::lgamma(lambda);
    return spectral_function_real(H, [&](double l) {
        const double mu = l + H.M;
        double s = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const double e = (lambda - 1.0) * std::log(nodes[i]) - mu * nodes[i] - lg;
            if (e > -745.0) s += weights[i] * std::exp(e);
        }
        return s;
    });
}

ResolventPowerReport resolvent_power_amalgam(const DiscreteHamiltonian& H, double lambda, double p, double q,
                                             double cell_size) {
    ResolventPowerReport r;
    const auto& prm = H.params;
    r.below_threshold = lambda <= prm.n / (2.0 * prm.alpha) * ((1.0 / p) - (std::isinf(q) ? 0.0 : 1.0 / q));
    Eigen::MatrixXd A = resolvent_power_spectral(H, lambda);
    Eigen::MatrixXd B = resolvent_power_gamma(H, lambda);
    r.calculus_mismatch = (A - B).cwiseAbs().maxCoeff() / A.cwiseAbs().maxCoeff();
    if (p == 1) r.norm = max_column_amalgam(A, H.lattice.dx(), cell_size, 1.0, q);
    else if (p == 2 && q == 2) r.norm = norm_2(A.cast<std::complex<double>>());
    else throw DomainError("resolvent_power_amalgam: supported (p, q) are (1, any) and (2, 2)");
    return r;
}

namespace {

double smooth_step(double u) {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / u), b = std::exp(-1.0 / (1.0 - u));
    return a / (a + b);
}

} // namespace

double dyadic_phi(double x) {
    const double ax = std::fabs(x);
    if (ax <= 1.0) return 1.0;
    if (ax >= 2.0) return 0.0;
    return smooth_step(2.0 - ax);
}

double dyadic_psi(double x) { return x > 0.0 ? dyadic_phi(x) - dyadic_phi(2.0 * x) : 0.0; }

double DyadicDecomposition::f(double lambda) const { return std::pow(lambda + M, -beta); }

double DyadicDecomposition::phi_k(int k, double lambda) const {
    return k == 0 ? dyadic_phi(lambda) : dyadic_psi(std::ldexp(lambda, -k));
}

double DyadicDecomposition::f_k(int k, double lambda) const {
    if (k == 0) return dyadic_phi(lambda) * f(lambda);
    const double psi = dyadic_psi(lambda);
    return psi == 0.0 ? 0.0 : psi * f(std::ldexp(lambda, k));
}

DyadicDecomposition dyadic_pieces(double beta, double M, int K_max) {
    if (!(beta > 0)) throw DomainError("dyadic_pieces: beta must be positive");
    if (K_max < 1) throw DomainError("dyadic_pieces: K_max must be >= 1");
    if (!(M > 1)) throw DomainError("dyadic_pieces: M must exceed 1 (spectrum covered from -1)");
    DyadicDecomposition d;
    d.beta = beta;
    d.M = M;
    d.K_max = K_max;
    const double top = std::ldexp(1.0, K_max);
    for (int i = 0; i <= 200000; ++i) {
        double l = -1.0 + (top + 1.0) * i / 200000.0;
        double s = 0.0;
        for (int k = 0; k <= K_max; ++k) s += d.phi_k(k, l);
        d.partition_error = std::max(d.partition_error, std::fabs(s - 1.0));
    }
    for (int k = 1; k <= K_max; ++k)
        for (int i = 0; i <= 20000; ++i) {
            double l = -3.0 + 8.0 * i / 20000.0;
            if (l > 0.5 && l < 2.0) continue;
            d.support_leak = std::max(d.support_leak, std::fabs(d.f_k(k, l)));
        }
    return d;
}

Thm12Report assemble_thm12(const DiscreteHamiltonian& H, double beta, double p, const std::vector<double>& t_sweep) {
    if (H.lambda_min() < -1.0) throw DomainError("assemble_thm12: spectrum extends below -1; raise the shift");
    int K = 1;
    while (std::ldexp(1.0, K) < H.lambda_max()) ++K;
    auto d = dyadic_pieces(beta, H.M, K);
    Thm12Report rep;
    for (Eigen::Index i = 0; i < H.eigenvalues.size(); ++i) {
        double l = H.eigenvalues(i), s = 0.0;
        for (int k = 0; k <= K; ++k) s += d.f_k(k, std::ldexp(l, -k));
        rep.identity_error = std::max(rep.identity_error, std::fabs(s - d.f(l)) / d.f(l));
    }
    std::vector<double> norms(t_sweep.size());
    for (std::size_t i = 0; i < t_sweep.size(); ++i) {
        const double t = t_sweep[i];
        Eigen::MatrixXcd direct = smoothed_propagator(H, t, beta);
        Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(direct.rows(), direct.cols());
        for (int k = 0; k <= K; ++k)
            sum += spectral_function(H, [&](double l) {
                return std::exp(std::complex<double>(0.0, -t * l)) * d.f_k(k, std::ldexp(l, -k));
            });
        rep.reassembly_error =
            std::max(rep.reassembly_error, (direct - sum).cwiseAbs().maxCoeff() / direct.cwiseAbs().maxCoeff());
        norms[i] = matrix_p_norm(direct, p).value;
    }
    rep.estimate = growth_fit(t_sweep, norms, p, beta, H.params.n);
    return rep;
}

} // namespace fraclab
