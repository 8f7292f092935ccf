#pragma once

namespace fraclab {

// J_nu(x), nu >= -1/2, x >= 0.
double bessel_j(double nu, double x);

// k-th positive zero of J_nu (k >= 1).
double bessel_j_zero(double nu, int k);

// Surface area of the unit sphere S^{n-1}.
double sphere_area(int n);

} // namespace fraclab
