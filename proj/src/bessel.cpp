#include "fraclab/bessel.hpp"

#include <cmath>

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "fraclab/errors.hpp"

namespace fraclab {

double bessel_j(double nu, double x)
{
    if (nu < -0.5) throw DomainError("bessel_j: order below -1/2");
    if (x < 0.0 || std::isnan(x)) throw DomainError("bessel_j: negative argument");
    // half-integer orders in closed form; these sit in the n = 1 and n = 3 inner loops
    if (nu == -0.5) return x == 0.0 ? HUGE_VAL : std::sqrt(2.0 / (M_PI * x)) * std::cos(x);
    if (nu == 0.5) return x == 0.0 ? 0.0 : std::sqrt(2.0 / (M_PI * x)) * std::sin(x);
    if (x == 0.0) return nu == 0.0 ? 1.0 : 0.0;
    return boost::math::cyl_bessel_j(nu, x);
}

double bessel_j_zero(double nu, int k)
{
    if (k < 1) throw DomainError("bessel_j_zero: k must be >= 1");
    if (nu == -0.5) return (k - 0.5) * M_PI;
    if (nu == 0.5) return k * M_PI;
    if (nu < -0.5) throw DomainError("bessel_j_zero: order below -1/2");
    return boost::math::cyl_bessel_j_zero(nu, k);
}

double sphere_area(int n)
{
    if (n < 1) throw DomainError("sphere_area: n must be >= 1");
    return 2.0 * std::pow(M_PI, 0.5 * n) / std::tgamma(0.5 * n);
}

} // namespace fraclab
