#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fraclab/errors.hpp"
#include "fraclab/kato.hpp"
#include "fraclab/kernel_core.hpp"
#include "fraclab/lattice.hpp"
#include "fraclab/potential.hpp"

namespace fraclab {

// Raised when omega K_V(t) >= 1: the series is not geometric and doubling must be used.
class NonGeometricError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

// Time mesh: steps ramping up from h0 / 1024 to h0 = step_fraction / lambda_max, uniform up to
// 1 / lambda_max, then geometric
// steps step_fraction * t; every anchor (output time) is a mesh node.
struct SpaceTimeGrid {
    PeriodicLattice lattice;
    std::vector<double> t_nodes; // strictly increasing, t_nodes[0] = 0
    std::vector<double> anchors; // output times, subset of t_nodes
    double step_fraction = 0.02;

    static SpaceTimeGrid make(const PeriodicLattice& lat, double lambda_max, std::vector<double> anchors,
                              double step_fraction = 0.02);
    void validate() const;
    std::size_t anchor_node(std::size_t a) const; // index of anchor a in t_nodes
};

// Inputs of the geometric tail bound.
struct SeriesBoundInputs {
    double C1 = 1.0;
    double omega_const = 1.0;
    std::function<double(double)> K_V; // continuum K_V(t); empty: bounds left at +inf
};

struct SeriesOptions {
    int N_terms = 6;
    std::vector<double> laplace_mu; // accumulate int_0^T e^{-mu t} K_j dt for these mu
    double step_fraction = 0.02;
    SeriesBoundInputs bounds;
};

struct DuhamelSeries {
    SpaceTimeGrid grid;
    FracParams params;
    Potential V = Potential::zero(1);
    std::vector<double> V_values;
    int N_terms = 0;
    std::vector<std::vector<double>> free_terms;      // K_0(t_a, x_j - x_0) per anchor
    std::vector<std::vector<Eigen::MatrixXd>> terms;  // terms[j][a], j >= 1: K_j(t_a, x, y)
    std::vector<double> laplace_mu;
    std::vector<std::vector<Eigen::MatrixXd>> laplace; // laplace[m][j], j = 0..N_terms, kernel units
    double laplace_T = 0.0;
    std::vector<double> omega_KV;         // per anchor (nan without bound inputs)
    std::vector<double> truncation_bound; // pointwise, per anchor
    std::vector<double> truncation_bound_L1;
    std::vector<double> K_V;              // per anchor (nan without bound inputs)
    SeriesOptions options;
    std::vector<std::string> warnings;

    Eigen::MatrixXd kernel(int j, std::size_t anchor) const; // full (x, y) array
    std::size_t anchor_index(double t) const;
};

// Resolution check for singular potentials; throws DomainError with the required dx.
void check_resolution(const PeriodicLattice& lat, const Potential& V);

DuhamelSeries build_series(const PeriodicLattice& lat, const FracParams& p, const Potential& V,
                           const std::vector<double>& anchors, const SeriesOptions& opt = {});
// One more term: the series rebuilt with N_terms + 1 (the march of level j needs level j-1 at every mesh node).
DuhamelSeries duhamel_step(const DuhamelSeries& prev);

struct SeriesSum {
    Eigen::MatrixXd kernel;
    double truncation_bound = 0.0;    // pointwise
    double truncation_bound_L1 = 0.0; // operator L1 -> L1
};
// sum_j (-1)^j K_j; throws NonGeometricError when omega K_V(t) >= 1.
SeriesSum series_sum(const DuhamelSeries& s, double t, int N_terms = -1);

// |K_j| / (C1 (omega K_V(t))^j I(t, x - y)) maximised over anchors and (x, y), periodic distance.
std::vector<BoundReport> verify_33(const DuhamelSeries& s, double C1, double omega_const, int j_max = 4);
// empirical C1 of the lattice free kernel: max over anchors of K_0 / I
double lattice_C1(const DuhamelSeries& s);

// I(t,x) I(s,y) / (I(t+s, x+y) max(I(t,x), I(s,y))) over seeded samples; worst tuple in worst_t / worst_r.
struct ProductInequalityReport {
    BoundReport report;
    double C4 = 0.0;       // stated constant
    double C4_sharp = 0.0; // 2^{n+2alpha-1} v 2^{n/2alpha}
    double worst_t = 0, worst_s = 0;
    std::vector<double> worst_x, worst_y;
};
ProductInequalityReport product_inequality_check(const FracParams& p, long n_samples, unsigned long long seed);
double product_ratio(const FracParams& p, double t, double s, const std::vector<double>& x,
                     const std::vector<double>& y);

struct ResolventKernel {
    FracParams params;
    double mu = 1.0;
    RadialGrid radial;
};
// R(mu, r) = int_0^inf e^{-t mu} K0(t, r) dt, trapezoid in log t on free_kernel values (r > 0).
ResolventKernel resolvent_kernel(const FracParams& p, double mu, const std::vector<double>& radii,
                                 const QuadratureSpec& spec = kernel_quadrature_spec());
// Empirical C2 = max R(mu, r) / J(1/mu, r); refinement: same sweep with r midpoints added.
struct ResolventBoundReport {
    BoundReport report;
    double refined_constant = 0.0;
    double refinement_change = 0.0;
};
ResolventBoundReport resolvent_bound_check(const FracParams& p, const std::vector<double>& mu_sweep,
                                           const std::vector<double>& r_sweep);

// Lattice resolvent terms R_0 = (H0 + mu)^{-1}, R_j = R_{j-1} V R_0, kernel units.
std::vector<Eigen::MatrixXd> lattice_resolvent_terms(const PeriodicLattice& lat, const FracParams& p,
                                                     const std::vector<double>& V_values, double mu, int j_max);
// max_j<=j_max ||Laplace[K_j] - R_j||_inf / ||R_j||_inf (per j); throws if T is too short for mu.
std::vector<double> laplace_consistency(const DuhamelSeries& s, double mu, int j_max = 2, double tol = 1e-2);

struct DoublingResult {
    Eigen::MatrixXd kernel;
    double t = 0.0;
    double bound_constant = 0.0; // 2 C4 C8 C^2
    double wrap_fraction = 0.0;  // free mass beyond |x| = L/2 at time t
};
double c8_constant(const FracParams& p); // int I(t, x) dx
// K(t) = int K(t/2, x, z) K(t/2, z, y) dz; throws when more than 1% of the mass wraps around the period.
DoublingResult doubling_extend(const Eigen::MatrixXd& K_half, double t_half, const PeriodicLattice& lat,
                               const FracParams& p, double bound_constant_in = 1.0);
double wrap_fraction(const PeriodicLattice& lat, const FracParams& p, double t);

// L1 -> L1 operator norm of a kernel matrix (max column sum times dx) and relative discrepancy.
double kernel_l1_norm(const Eigen::MatrixXd& K, double dx);
double kernel_l1_discrepancy(const Eigen::MatrixXd& K, const Eigen::MatrixXd& ref, double dx);

} // namespace fraclab
