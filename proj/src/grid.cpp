#include "fraclab/grid.hpp"

#include <cmath>

#include "fraclab/errors.hpp"

namespace fraclab {

void RadialGrid::validate() const
{
    if (dim < 1) throw DomainError("RadialGrid: dim must be positive");
    if (values.size() != radii.size()) throw DomainError("RadialGrid: values/radii length mismatch");
    if (!imag.empty() && imag.size() != radii.size())
        throw DomainError("RadialGrid: imag/radii length mismatch");
    if (!radii.empty() && radii.front() < 0.0) throw DomainError("RadialGrid: negative radius");
    for (std::size_t i = 1; i < radii.size(); ++i)
        if (!(radii[i] > radii[i - 1])) throw DomainError("RadialGrid: radii not strictly increasing");
}

std::vector<double> linspace(double a, double b, std::size_t n)
{
    if (n == 0) return {};
    if (n == 1) return {a};
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = a + (b - a) * static_cast<double>(i) / (n - 1);
    x.back() = b;
    return x;
}

std::vector<double> logspace(double a, double b, std::size_t n)
{
    if (!(a > 0.0) || !(b > 0.0)) throw DomainError("logspace: endpoints must be positive");
    std::vector<double> x = linspace(std::log(a), std::log(b), n);
    for (double& v : x) v = std::exp(v);
    if (!x.empty()) { x.front() = a; x.back() = b; }
    return x;
}

std::vector<double> refine_midpoints(const std::vector<double>& x)
{
    std::vector<double> y;
    if (x.empty()) return y;
    y.reserve(2 * x.size() - 1);
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        y.push_back(x[i]);
        y.push_back(0.5 * (x[i] + x[i + 1]));
    }
    y.push_back(x.back());
    return y;
}

} // namespace fraclab
