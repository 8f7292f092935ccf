#pragma once

#include <complex>
#include <vector>

namespace fraclab {

struct RadialGrid {
    std::vector<double> radii;
    std::vector<double> values;
    std::vector<double> imag; // empty for real-valued data
    int dim = 1;

    bool is_complex() const { return !imag.empty(); }
    std::complex<double> at(std::size_t i) const {
        return {values[i], is_complex() ? imag[i] : 0.0};
    }
    void validate() const;
};

std::vector<double> linspace(double a, double b, std::size_t n);
std::vector<double> logspace(double a, double b, std::size_t n); // endpoints a, b > 0

// Every other point added in between: the refinement used for stability checks.
std::vector<double> refine_midpoints(const std::vector<double>& x);

} // namespace fraclab
