#pragma once

#include <vector>

#include <Eigen/Dense>

#include "fraclab/kernel_core.hpp"
#include "fraclab/potential.hpp"

namespace fraclab {

// Uniform periodic grid x_j = -L/2 + j dx, j = 0..N-1.
struct PeriodicLattice {
    int N = 256;
    double L = 40.0;

    static PeriodicLattice make(int N, double L);
    void validate() const;
    double dx() const { return L / N; }
    std::vector<double> nodes() const;
    // 2 pi k / L in transform order: k = 0, 1, ..., N/2, -N/2+1, ..., -1
    std::vector<double> frequencies() const;
    // |d| reduced to the nearest periodic image
    double wrap_distance(double d) const;
};

// |xi_k|^{2 alpha} in transform order
std::vector<double> free_symbol(const PeriodicLattice& lat, const FracParams& p);

// Lattice free kernel K(t, x_j - x_0), indexed by the offset j (periodic), i.e. the
// first column of e^{-t H0} divided by dx.
std::vector<double> lattice_free_kernel(const PeriodicLattice& lat, const FracParams& p, double t);

// Dense real circulant C_{ij} = c[(i - j) mod N].
Eigen::MatrixXd circulant(const std::vector<double>& first_column);

// Samples of V on the nodes, rejecting singular values.
std::vector<double> sample_potential(const PeriodicLattice& lat, const Potential& V, double theta = 1.0,
                                     double alpha = 1.0);

struct LatticeContinuumError {
    double max_rel = 0.0;    // max_x |K_lat - K0| / K0(t, 0)
    double l1_rel = 0.0;     // sum |K_lat - K0| dx / sum |K0| dx
    double periodized_max_rel = 0.0; // same as max_rel, after adding periodic images and the aliased band to K0
};
// Compares the lattice free kernel with free_kernel on the nodes.
LatticeContinuumError lattice_continuum_error(const PeriodicLattice& lat, const FracParams& p, double t);

} // namespace fraclab
