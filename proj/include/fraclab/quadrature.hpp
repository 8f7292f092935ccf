#pragma once

#include <limits>
#include <string>
#include <vector>

#include "fraclab/errors.hpp"
#include "fraclab/function_ref.hpp"

namespace fraclab {

enum class QuadScheme { gauss_kronrod_21 };

struct QuadratureSpec {
    QuadScheme scheme = QuadScheme::gauss_kronrod_21;
    double abs_tol = 1e-10;
    double rel_tol = 1e-8;
    int max_subdivisions = 2000;
    // oscillatory integrals: plain adaptive quadrature below this, zero-splitting above
    double tail_cutoff = 1.0;

    void validate() const;
    QuadratureSpec with_tol(double abs, double rel) const;
};

struct ErrorEstimate {
    double abs_err = 0.0;
    double rel_err = 0.0;
    bool converged = true;

    // combine errors of two pieces summed together
    ErrorEstimate& operator+=(const ErrorEstimate& o);
};

struct QuadResult {
    double value = 0.0;
    ErrorEstimate err;
};

class QuadratureError : public NumericalError {
public:
    QuadratureError(const std::string& what, QuadResult partial,
                    std::vector<double> last_partial_sums = {})
        : NumericalError(what), partial_(partial), last_sums_(std::move(last_partial_sums)) {}
    const QuadResult& partial() const { return partial_; }
    const std::vector<double>& last_partial_sums() const { return last_sums_; }

private:
    QuadResult partial_;
    std::vector<double> last_sums_;
};

// Declared power-law behaviour |f(x)| ~ |x - endpoint|^exponent.
struct EndpointSingularity {
    double exponent = 0.0;
    bool present = false;
    static EndpointSingularity none() { return {}; }
    static EndpointSingularity power(double p) { return {p, true}; }
};

constexpr double kInf = std::numeric_limits<double>::infinity();

// Adaptive Gauss-Kronrod quadrature on [a, b]; b may be +infinity.
// Throws QuadratureError when the tolerance is not met.
QuadResult integrate(FunctionRef<double(double)> f, double a, double b,
                     const QuadratureSpec& spec = {},
                     EndpointSingularity at_a = {}, EndpointSingularity at_b = {});

// Same, with an initial partition at the given interior breakpoints.
QuadResult integrate_with_breaks(FunctionRef<double(double)> f, double a, double b,
                                 const std::vector<double>& breaks,
                                 const QuadratureSpec& spec = {},
                                 EndpointSingularity at_a = {}, EndpointSingularity at_b = {});

// Non-throwing variant; inspect err.converged.
QuadResult integrate_nothrow(FunctionRef<double(double)> f, double a, double b,
                             const std::vector<double>& breaks, const QuadratureSpec& spec,
                             EndpointSingularity at_a = {}, EndpointSingularity at_b = {});

// int_0^inf g(r) J_nu(omega r) dr by zero-splitting plus Wynn epsilon.
QuadResult oscillatory_bessel_integral(FunctionRef<double(double)> g, double nu, double omega,
                                       const QuadratureSpec& spec = {});

// Wynn epsilon extrapolation of a sequence of partial sums.
struct WynnResult {
    double value;
    double error;
};
WynnResult wynn_epsilon(const std::vector<double>& partial_sums);

// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

} // namespace fraclab
