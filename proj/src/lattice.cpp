#include "fraclab/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "fraclab/dft.hpp"
#include "fraclab/errors.hpp"

namespace fraclab {

PeriodicLattice PeriodicLattice::make(int N, double L) {
    PeriodicLattice lat{N, L};
    lat.validate();
    return lat;
}

void PeriodicLattice::validate() const {
    if (N < 2 || (N & (N - 1)) != 0) throw DomainError("lattice size N must be a power of two >= 2");
    if (!(L > 0) || !std::isfinite(L)) throw DomainError("lattice period L must be positive");
}

std::vector<double> PeriodicLattice::nodes() const {
    std::vector<double> x(N);
    for (int j = 0; j < N; ++j) x[j] = -0.5 * L + j * dx();
    return x;
}

std::vector<double> PeriodicLattice::frequencies() const {
    std::vector<double> xi(N);
    for (int j = 0; j < N; ++j) {
        int k = j <= N / 2 ? j : j - N;
        xi[j] = 2.0 * M_PI * k / L;
    }
    return xi;
}

double PeriodicLattice::wrap_distance(double d) const {
    double r = std::fmod(std::fabs(d), L);
    return std::min(r, L - r);
}

std::vector<double> free_symbol(const PeriodicLattice& lat, const FracParams& p) {
    lat.validate();
    p.validate();
    if (p.n != 1) throw DomainError("lattice operators are one-dimensional");
    auto xi = lat.frequencies();
    std::vector<double> s(xi.size());
    for (std::size_t k = 0; k < xi.size(); ++k) s[k] = std::pow(std::fabs(xi[k]), 2.0 * p.alpha);
    return s;
}

std::vector<double> lattice_free_kernel(const PeriodicLattice& lat, const FracParams& p, double t) {
    if (!(t >= 0)) throw DomainError("lattice_free_kernel: t must be nonnegative");
    auto s = free_symbol(lat, p);
    std::vector<std::complex<double>> c(lat.N);
    for (int k = 0; k < lat.N; ++k) c[k] = std::exp(-t * s[k]);
    auto col = dft_1d(c, DftDirection::inverse); // N^{-1/2} sum_k e^{-t s_k} e^{2 pi i jk/N}
    std::vector<double> out(lat.N);
    const double scale = 1.0 / (std::sqrt((double)lat.N) * lat.dx());
    for (int j = 0; j < lat.N; ++j) out[j] = col[j].real() * scale;
    return out;
}

Eigen::MatrixXd circulant(const std::vector<double>& c) {
    const int N = (int)c.size();
    Eigen::MatrixXd C(N, N);
    for (int j = 0; j < N; ++j)
        for (int i = 0; i < N; ++i) C(i, j) = c[((i - j) % N + N) % N];
    return C;
}

std::vector<double> sample_potential(const PeriodicLattice& lat, const Potential& V, double theta, double alpha) {
    if (V.dim() != 1) throw DomainError("lattice potentials are one-dimensional");
    if (!(theta > 0 && theta <= 1)) throw DomainError("theta must lie in (0,1]");
    const double s = std::pow(theta, 1.0 / (2.0 * alpha));
    std::vector<double> v;
    for (double x : lat.nodes()) {
        double val = theta * V.at(s * x);
        if (!std::isfinite(val))
            throw DomainError("potential is singular at lattice node x = " + std::to_string(x) +
                              "; shift the lattice or regularize the potential");
        v.push_back(val);
    }
    return v;
}

namespace {

// free_kernel at arbitrary radii (free_kernel wants a strictly increasing grid)
std::vector<double> kernel_at(const FracParams& p, double t, const std::vector<double>& r) {
    std::vector<double> u = r;
    std::sort(u.begin(), u.end());
    u.erase(std::unique(u.begin(), u.end()), u.end());
    auto vals = free_kernel(p, t, u).radial.values;
    std::vector<double> out(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) out[i] = vals[std::lower_bound(u.begin(), u.end(), r[i]) - u.begin()];
    return out;
}

} // namespace

LatticeContinuumError lattice_continuum_error(const PeriodicLattice& lat, const FracParams& p, double t) {
    auto K = lattice_free_kernel(lat, p, t);
    const int N = lat.N;
    const double dx = lat.dx();
    std::vector<double> offsets(N);
    for (int j = 0; j < N; ++j) offsets[j] = std::fabs(j <= N / 2 ? j * dx : (j - N) * dx);
    auto K0 = kernel_at(p, t, offsets);
    // periodic images (a few periods each way) and the aliased band |k| > N/2 of the Fourier series
    std::vector<double> Kp = K0;
    // fractional alpha: images with t r^{-2alpha} small use the large-r expansion
    double c[9] = {0};
    if (!p.m)
        for (int k = 1; k <= 8; ++k) c[k] = free_kernel_tail_coefficient(p, k);
    const double a2 = 2.0 * p.alpha;
    auto tail = [&](double r) {
        const double tr = t * std::pow(r, -a2);
        double sum = 0.0, pw = 1.0;
        for (int k = 1; k <= 8; ++k) {
            pw *= tr;
            sum += c[k] * pw;
        }
        return std::pow(r, -(double)p.n) * sum;
    };
    const int last_image = p.m ? 6 : 2000;
    std::vector<double> exact_r;
    std::vector<std::pair<int, int>> exact_at;
    for (int j = 0; j < N; ++j) {
        const double o = j <= N / 2 ? j * dx : (j - N) * dx;
        for (int m = 1; m <= last_image; ++m)
            for (double r : {m * lat.L + o, m * lat.L - o}) {
                r = std::fabs(r);
                if (!p.m && t * std::pow(r, -a2) <= 0.02) Kp[j] += tail(r);
                else {
                    exact_r.push_back(r);
                    exact_at.push_back({j, m});
                }
            }
        if (!p.m) {
            const double k1 = p.tail_exponent();
            Kp[j] += 2.0 * c[1] * t * std::pow(lat.L, -k1) * std::pow(last_image + 0.5, 1.0 - k1) / (k1 - 1.0);
        }
    }
    if (!exact_r.empty()) {
        auto vals = kernel_at(p, t, exact_r);
        for (std::size_t i = 0; i < vals.size(); ++i) Kp[exact_at[i].first] += vals[i];
    }
    for (int j = 0; j < N; ++j) {
        double o = j <= N / 2 ? j * dx : (j - N) * dx;
        double band = 0.0;
        // lattice sum stops at |k| = N/2 (the k = -N/2 term is absent)
        for (int k = N / 2; k < 400 * N; ++k) {
            double xi = 2.0 * M_PI * k / lat.L;
            double term = std::exp(-t * std::pow(xi, 2.0 * p.alpha));
            if (k > N / 2) band += 2.0 * term * std::cos(xi * o);
            else band += term * std::cos(xi * o);
            if (term < 1e-18) break;
        }
        Kp[j] -= band / lat.L;
    }
    LatticeContinuumError e;
    double num = 0.0, den = 0.0;
    for (int j = 0; j < N; ++j) {
        e.max_rel = std::max(e.max_rel, std::fabs(K[j] - K0[j]) / K0[0]);
        e.periodized_max_rel = std::max(e.periodized_max_rel, std::fabs(K[j] - Kp[j]) / K0[0]);
        num += std::fabs(K[j] - K0[j]);
        den += std::fabs(K0[j]);
    }
    e.l1_rel = num / den;
    return e;
}

} // namespace fraclab
