#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "fraclab/grid.hpp"
#include "fraclab/quadrature.hpp"

namespace fraclab {

struct FracParams {
    double alpha = 0.5;
    int n = 1;
    std::optional<int> m; // set iff alpha is a positive integer

    static FracParams make(double alpha, int n);
    void validate() const;
    // decay exponent of the free kernel tail, n + 2 alpha
    double tail_exponent() const { return n + 2.0 * alpha; }
    // t^{1/2alpha}: the kernel's length scale at time t
    double length_scale(double t) const;
};

struct FreeKernelGrid {
    FracParams params;
    double t = 1.0;
    RadialGrid radial;
    ErrorEstimate quad_err;
};

struct SharpConstants {
    int m = 1;
    double varsigma = 0.25;
    double b = 1.0;
};

struct TwistedSymbol {
    int m = 1;
    double lambda = 1.0;
    std::vector<double> a{1.0};

    void validate() const;
    std::complex<double> operator()(const std::vector<double>& xi) const;
};

// Square section of the plane spanned by a and a unit vector orthogonal to it,
// |s|, |w| <= extent (in units of lambda), sampled on points x points and then refined.
struct TwistedSweep {
    double extent = 4.0;
    int points = 161;
};

struct BoundReport {
    double empirical_constant = 0.0;
    double worst_t = 0.0;
    double worst_r = 0.0;
    double margin = 0.0; // min over the sweep of 1 - ratio / empirical_constant
    long n_samples = 0;
    std::vector<double> per_t_max;   // sup for each t in the sweep, when applicable
    std::vector<double> samples;     // the tested ratios, sweep order
};

// Kernel-evaluation tolerances: relative, with a roundoff floor tied to K0(t, 0).
QuadratureSpec kernel_quadrature_spec();

// K0(t, r) with its quadrature error and log|K0| (finite even where the value underflows).
struct KernelPoint {
    double value = 0.0;
    double log_abs = 0.0;
    ErrorEstimate err;
};
KernelPoint free_kernel_point(const FracParams& p, double t, double r,
                              const QuadratureSpec& spec = kernel_quadrature_spec());
double free_kernel_value(const FracParams& p, double t, double r,
                         const QuadratureSpec& spec = kernel_quadrature_spec());
FreeKernelGrid free_kernel(const FracParams& p, double t, const std::vector<double>& radii,
                           const QuadratureSpec& spec = kernel_quadrature_spec());

// Gamma(n/2alpha) |S^{n-1}| / ((2pi)^n 2alpha) t^{-n/2alpha}
double free_kernel_origin_closed_form(const FracParams& p, double t);

// Large-|x| expansion sum_{k=1}^{terms} c_k t^k r^{-n-2 alpha k}; zero for integer alpha.
double free_kernel_tail_series(const FracParams& p, double t, double r, int terms);
double free_kernel_tail_coefficient(const FracParams& p, int k);

// int_{R^n} K0(t, x) dx by radial quadrature plus the expansion beyond the cutoff.
double free_kernel_mass(const FracParams& p, double t);

// 1-d: max_x |K0(t+s, x) - (K0(t) * K0(s))(x)| / max K0(t+s) by trapezoid convolution
// on the grid h Z, |z| <= z_max, x in [-x_max, x_max].
double chapman_kolmogorov_error(const FracParams& p, double t, double s, double h = 0.05,
                                double z_max = 40.0, double x_max = 5.0);

double comparison_I(const FracParams& p, double t, double r);
// t / (r^2 + t^{1/alpha})^{n/2 + alpha}
double comparability_profile(const FracParams& p, double t, double r);

SharpConstants sharp_constants(int m);

double twisted_symbol_min(const TwistedSymbol& symbol, const TwistedSweep& sweep = {});

// Default sweeps: t in {0.1, 1, 10}; r in [0, 12 t^{1/2alpha}] with 400 points.
std::vector<double> default_t_sweep();
std::vector<double> default_r_sweep(const FracParams& p, double t, std::size_t points = 400,
                                    double extent = 12.0);

// r_sweep is in units of t^{1/2alpha} when r_scaled, else absolute radii.
BoundReport verify_I_bound(const FracParams& p, const std::vector<double>& t_sweep,
                           const std::vector<double>& r_sweep, bool r_scaled = true,
                           const QuadratureSpec& spec = kernel_quadrature_spec());

// |K0(1, r)| r^{n + 2 alpha}
double tail_ratio(const FracParams& p, double r);

// |K0(t,r)| t^{n/2m} exp(varsigma_m r^{2m/(2m-1)} / t^{1/(2m-1)}), evaluated in log space.
BoundReport verify_polyharmonic_bound(int m, int n, double t, const std::vector<double>& r_sweep,
                                      const QuadratureSpec& spec = kernel_quadrature_spec());

struct EnvelopeFit {
    double slope = 0.0;          // fit of -log|K0| - q log r against r^{2m/(2m-1)}
    double raw_slope = 0.0;      // same without the algebraic prefactor term
    double prefactor_power = 0.0; // q = (m-1)/(2m-1), saddle-point prefactor
    double residual = 0.0;
    std::vector<double> r_max;   // envelope abscissae (local maxima of |K0|, or all samples if m = 1)
    std::vector<double> log_abs;
};
// n = 1 envelope decay fit over [r_lo, r_hi].
EnvelopeFit envelope_decay_fit(int m, double t, double r_lo, double r_hi,
                               const QuadratureSpec& spec = kernel_quadrature_spec());

// (2pi)^{-n} int e^{ix.xi} e^{-z|xi|^{2m}} dxi by the radial reduction with complex weight.
std::complex<double> complex_time_kernel(int m, int n, std::complex<double> z, double r,
                                         const QuadratureSpec& spec = kernel_quadrature_spec());
BoundReport complex_time_kernel_decay(int m, int n, std::complex<double> z,
                                      const std::vector<double>& r_sweep,
                                      const QuadratureSpec& spec = kernel_quadrature_spec());

} // namespace fraclab
