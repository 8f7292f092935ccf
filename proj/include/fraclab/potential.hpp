#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace fraclab {

enum class PotentialKind { zero, constant, box, gaussian, inverse_power, periodic_bumps, composite };

std::string to_string(PotentialKind k);

// One radially symmetric piece amplitude * profile(|x - center|).
struct RadialComponent {
    enum class Profile { constant, box, gaussian, inverse_power, bump };
    Profile profile = Profile::constant;
    std::vector<double> center;
    double amplitude = 0.0;
    double radius = 1.0;   // box / bump radius, Gaussian width, cutoff for inverse power
    double exponent = 0.0; // inverse power only

    double value(double s) const;  // signed value at distance s from the center
    double reach() const;          // distance beyond which the profile vanishes (may be inf)
    bool singular() const { return profile == Profile::inverse_power && amplitude != 0.0 && exponent > 0.0; }
};

struct Singularity {
    std::vector<double> location;
    double exponent = 0.0; // |V| ~ |x - location|^{-exponent}
};

// Sum of radial components, immutable after construction. Kato functionals use
// sum_i |V_i| as |V|, exact for the shipped kinds (disjoint supports or one component).
class Potential {
public:
    static Potential zero(int n);
    static Potential constant(int n, double c);
    static Potential box(int n, double radius, double amplitude, std::vector<double> center = {});
    static Potential gaussian(int n, double width, double amplitude, std::vector<double> center = {});
    static Potential inverse_power(int n, double exponent, double amplitude, double cutoff = HUGE_VAL,
                                   std::vector<double> center = {});
    // count smooth bumps of the given radius at spacing period, centred on the origin (n = 1)
    static Potential periodic_bumps(double period, double radius, double amplitude, int count);
    static Potential sum(const std::vector<Potential>& parts);

    double operator()(const std::vector<double>& x) const;
    double at(double x) const; // one-dimensional convenience

    Potential scaled(double c) const;

    PotentialKind kind() const { return kind_; }
    int dim() const { return dim_; }
    const std::vector<RadialComponent>& components() const { return comps_; }
    std::vector<Singularity> singularities() const;
    double support_radius() const; // |x| beyond which V vanishes (may be inf)
    std::optional<double> sup_bound() const;
    std::string describe() const;

private:
    Potential(PotentialKind k, int n, std::vector<RadialComponent> c);
    void self_check() const;

    PotentialKind kind_ = PotentialKind::zero;
    int dim_ = 1;
    std::vector<RadialComponent> comps_;
};

// Declarative entry "kind=box radius=1 amplitude=2 center=0,0" or a bare kind name.
// Keys: kind, center, radius, width, amplitude, exponent, cutoff, period, count, value.
Potential parse_potential(const std::string& entry, int n);
// Text file, one entry per line; '#' starts a comment. Several entries are summed.
Potential load_potential_file(const std::string& path, int n);

} // namespace fraclab
