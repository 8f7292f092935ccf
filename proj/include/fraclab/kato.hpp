#pragma once

#include <functional>
#include <string>
#include <vector>

#include "fraclab/kernel_core.hpp"
#include "fraclab/potential.hpp"

namespace fraclab {

using Point = std::vector<double>;

double omega_alpha(const FracParams& p, double r);
double J_profile(const FracParams& p, double t, double r);

// 2^{alpha-1} v 2^{n/2alpha}
double c4_constant(const FracParams& p);
// 2^{n+2alpha-1} v 2^{n/2alpha}: smallest constant valid for the profile product inequality
double c4_sharp(const FracParams& p);

struct KatoProfile {
    FracParams params;
    double C1 = 1.0;
    double C2 = 1.0;
    std::string C1_source = "unset";
    std::string C2_source = "unset";

    double C4() const { return c4_constant(params); }
    // e C1 C2 C4, always derived from the current C1, C2
    double omega_const() const;
    double J(double t, double r) const { return J_profile(params, t, r); }
    double omega(double r) const { return omega_alpha(params, r); }
};

// x-set for sup approximations: size points along the first axis over the potential's
// support (padded), plus component centres and singularities.
std::vector<Point> default_x_grid(const Potential& V, std::size_t size = 41);

double kato_modulus(const Potential& V, const FracParams& p, double delta, const std::vector<Point>& x_grid,
                    const QuadratureSpec& spec = {});

enum class KatoVerdict { member, non_member, inconclusive };
std::string to_string(KatoVerdict v);

struct KatoDiagnostics {
    KatoVerdict verdict = KatoVerdict::inconclusive;
    std::vector<double> deltas;
    std::vector<double> moduli;
    double fit_limit = 0.0; // L in m(delta) ~ L + C delta^q
    double fit_coeff = 0.0;
    double fit_power = 0.0;
    std::string reason;
};
KatoDiagnostics is_kato(const Potential& V, const FracParams& p, const std::vector<double>& delta_sequence,
                        const std::vector<Point>& x_grid = {});
std::vector<double> default_delta_sequence(); // 0.5 * 2^{-k}, k = 0..12

double kato_norm(const Potential& V, const KatoProfile& profile, double t, const std::vector<Point>& x_grid,
                 const QuadratureSpec& spec = {});
// int J(t, x - y)|V(y)| dy at a single x
double kato_norm_at(const Potential& V, const KatoProfile& profile, double t, const Point& x,
                    const QuadratureSpec& spec = {});

struct KatoNormCurve {
    Potential potential = Potential::zero(1);
    KatoProfile profile;
    std::vector<double> t;
    std::vector<double> K_V;
    std::size_t sup_grid_size = 0;
};
KatoNormCurve kato_norm_curve(const Potential& V, const KatoProfile& profile, const std::vector<double>& t_samples,
                              const std::vector<Point>& x_grid, const QuadratureSpec& spec = {});

struct VEpsilon {
    double epsilon = 0.5;
    double value = 0.0;
    bool warning = false; // omega K_V exceeds epsilon already at the smallest sample
};
// Bisection to 1e-4 between bracketing samples; uses the evaluator when given,
// otherwise log-log interpolation of the sampled curve.
VEpsilon v_epsilon(const KatoNormCurve& curve, double epsilon,
                   const std::function<double(double)>& K_V_of_t = {});

} // namespace fraclab
