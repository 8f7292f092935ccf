#pragma once

#include <complex>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fraclab/kernel_core.hpp"
#include "fraclab/lattice.hpp"
#include "fraclab/potential.hpp"

namespace fraclab {

// H = F* diag(|xi|^{2 alpha}) F + diag(theta V(theta^{1/2alpha} x_j)) on a periodic lattice,
// with its eigendecomposition H = U diag(lambda) U^T computed at construction.
struct DiscreteHamiltonian {
    PeriodicLattice lattice;
    FracParams params;
    double theta = 1.0;
    std::vector<double> V_values;
    double M = 1.0;
    Eigen::MatrixXd dense;
    Eigen::VectorXd eigenvalues; // ascending
    Eigen::MatrixXd eigenvectors;

    double lambda_min() const { return eigenvalues(0); }
    double lambda_max() const { return eigenvalues(eigenvalues.size() - 1); }
};

DiscreteHamiltonian build_hamiltonian(const PeriodicLattice& lat, const FracParams& p, const Potential& V,
                                      double theta = 1.0, double M = 1.0);
// Same operator with explicitly given diagonal values.
DiscreteHamiltonian build_hamiltonian_values(const PeriodicLattice& lat, const FracParams& p,
                                             std::vector<double> V_values, double theta = 1.0, double M = 1.0);

// f(H) = U diag(f(lambda)) U^T
Eigen::MatrixXcd spectral_function(const DiscreteHamiltonian& H, const std::function<std::complex<double>(double)>& f);
Eigen::MatrixXd spectral_function_real(const DiscreteHamiltonian& H, const std::function<double(double)>& f);
// e^{-tH}
Eigen::MatrixXd heat_matrix(const DiscreteHamiltonian& H, double t);

// Lattice with period L theta^{-1/2alpha} and the same N: there H_theta = theta H_1 exactly.
PeriodicLattice rescaled_lattice(const PeriodicLattice& lat1, double theta, double alpha);
// max relative deviation between the kernel of e^{-theta t H1} and the rescaled kernel of e^{-t H_theta}
double theta_rescale_check(const DiscreteHamiltonian& H1, const DiscreteHamiltonian& Htheta, double t);

// Operator norms on the lattice; p = +infinity allowed.
constexpr double kPInf = std::numeric_limits<double>::infinity();
double norm_1(const Eigen::MatrixXcd& A);   // max column sum
double norm_inf(const Eigen::MatrixXcd& A); // max row sum
double norm_2(const Eigen::MatrixXcd& A);   // largest singular value

struct PNorm {
    double value = 0.0;
    bool upper_bound = false; // interpolated, not exact
};
PNorm matrix_p_norm(const Eigen::MatrixXcd& A, double p);

// A = e^{-itH}(H+M)^{-beta}
Eigen::MatrixXcd smoothed_propagator(const DiscreteHamiltonian& H, double t, double beta);
PNorm propagator_smoothing_norm(const DiscreteHamiltonian& H, double t, double beta, double p);

double n_p(int n, double p); // n |1/p - 1/2|

struct SmoothingEstimate {
    double p = 1.0;
    double beta = 0.0;
    double gamma_fit = 0.0;
    double log_C = 0.0;
    double residual = 0.0;
    double n_p = 0.0;
    std::vector<double> t;
    std::vector<double> norm;
};
SmoothingEstimate growth_fit(const std::vector<double>& t, const std::vector<double>& norm, double p = 1.0,
                             double beta = 0.0, int n = 1);

// l^p over cells of the discrete L^q norm inside each cell; the slice has spacing dx.
double amalgam_norm(const std::vector<double>& slice, double dx, double cell_size, double p, double q);

struct Fit41 {
    double theta = 1.0;
    double C = 0.0;
    double L = 0.0;
    std::vector<double> t;
    std::vector<double> norm;  // max over y of ||K_theta(t, ., y)||_{l^1(L^p)}
    double margin = 0.0;       // min over samples of 1 - norm / bound
};
struct Verify41Report {
    double p = 1.0;
    std::vector<Fit41> fits;
    double C_spread = 0.0;     // max C / min C across theta
    double bound_spread = 0.0; // max over t of max/min bound curve across theta
    BoundReport bound;         // ratios norm / bound over all samples
};
// e^{-t H_theta} on a fixed lattice; (C, L) fitted per theta so the bound holds at every sample.
Verify41Report verify_41(const PeriodicLattice& lat, const FracParams& params, const Potential& V,
                         const std::vector<double>& theta_sweep, double p, const std::vector<double>& t_sweep,
                         double cell_size = 1.0);

struct ResolventPowerReport {
    double norm = 0.0;            // L^p -> l^p(L^q)
    double calculus_mismatch = 0.0; // spectral vs Gamma-integral, max entry / max entry
    bool below_threshold = false; // lambda <= (n/2alpha)(1/p - 1/q)
};
// (H+M)^{-lambda} by spectral calculus and by the Gamma-function integral
Eigen::MatrixXd resolvent_power_spectral(const DiscreteHamiltonian& H, double lambda);
Eigen::MatrixXd resolvent_power_gamma(const DiscreteHamiltonian& H, double lambda);
ResolventPowerReport resolvent_power_amalgam(const DiscreteHamiltonian& H, double lambda, double p, double q,
                                             double cell_size = 1.0);

// Smooth cutoff: 1 on [-1,1], 0 for |x| >= 2.
double dyadic_phi(double x);
// phi(x) - phi(2x) for x > 0, else 0; supported in (1/2, 2)
double dyadic_psi(double x);

struct DyadicDecomposition {
    double beta = 0.6;
    double M = 1.0;
    int K_max = 10;
    double f(double lambda) const;              // (lambda + M)^{-beta}
    double phi_k(int k, double lambda) const;   // phi for k = 0, psi(2^{-k} .) for k >= 1
    double f_k(int k, double lambda) const;     // phi f, psi f(2^k .)
    double partition_error = 0.0;               // max |sum phi_k - 1| on [-1, 2^{K}]
    double support_leak = 0.0;                  // max |f_k| outside (1/2, 2), k >= 1
};
DyadicDecomposition dyadic_pieces(double beta, double M, int K_max);

struct Thm12Report {
    SmoothingEstimate estimate;
    double reassembly_error = 0.0; // max over t of ||direct - dyadic sum||_max / ||direct||_max
    double identity_error = 0.0;   // max over spectrum of |sum f_k(2^{-k} lambda) - f(lambda)| / f(lambda)
};
Thm12Report assemble_thm12(const DiscreteHamiltonian& H, double beta, double p, const std::vector<double>& t_sweep);

} // namespace fraclab
