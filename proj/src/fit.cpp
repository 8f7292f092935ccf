#include "fraclab/fit.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "fraclab/errors.hpp"

namespace fraclab {

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y)
{
    double rms = 0.0;
    std::vector<double> ones(x.size(), 1.0);
    auto c = least_squares({ones, x}, y, &rms);
    return {c[1], c[0], rms};
}

std::vector<double> least_squares(const std::vector<std::vector<double>>& columns,
                                  const std::vector<double>& y, double* residual_rms)
{
    const std::size_t m = y.size(), k = columns.size();
    if (k == 0 || m < k) throw DomainError("least_squares: need at least as many samples as unknowns");
    Eigen::MatrixXd A(m, k);
    Eigen::VectorXd b(m);
    for (std::size_t j = 0; j < k; ++j) {
        if (columns[j].size() != m) throw DomainError("least_squares: column length mismatch");
        for (std::size_t i = 0; i < m; ++i) A(i, j) = columns[j][i];
    }
    for (std::size_t i = 0; i < m; ++i) b(i) = y[i];
    Eigen::VectorXd c = A.colPivHouseholderQr().solve(b);
    if (residual_rms) *residual_rms = std::sqrt((A * c - b).squaredNorm() / m);
    return {c.data(), c.data() + k};
}

} // namespace fraclab
