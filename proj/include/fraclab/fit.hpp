#pragma once

#include <vector>

namespace fraclab {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual_rms = 0.0;
};

// Ordinary least squares y = intercept + slope * x.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// Least squares for y = sum_k c_k basis_k(x); columns given explicitly.
std::vector<double> least_squares(const std::vector<std::vector<double>>& columns,
                                  const std::vector<double>& y, double* residual_rms = nullptr);

} // namespace fraclab
