#include "fraclab/potential.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "fraclab/errors.hpp"

namespace fraclab {

std::string to_string(PotentialKind k) {
    switch (k) {
    case PotentialKind::zero: return "zero";
    case PotentialKind::constant: return "constant";
    case PotentialKind::box: return "box";
    case PotentialKind::gaussian: return "gaussian";
    case PotentialKind::inverse_power: return "inverse_power";
    case PotentialKind::periodic_bumps: return "periodic_bumps";
    case PotentialKind::composite: return "composite";
    }
    return "?";
}

double RadialComponent::value(double s) const {
    using P = Profile;
    switch (profile) {
    case P::constant: return amplitude;
    case P::box: return s < radius ? amplitude : 0.0;
    case P::gaussian: return amplitude * std::exp(-(s * s) / (radius * radius));
    case P::inverse_power:
        if (s >= radius) return 0.0;
        if (s == 0.0) return exponent > 0.0 ? std::copysign(HUGE_VAL, amplitude) : amplitude;
        return amplitude * std::pow(s, -exponent);
    case P::bump: {
        if (s >= radius) return 0.0;
        double u = s / radius;
        return amplitude * std::exp(1.0 - 1.0 / (1.0 - u * u));
    }
    }
    return 0.0;
}

double RadialComponent::reach() const {
    switch (profile) {
    case Profile::constant:
    case Profile::gaussian: return HUGE_VAL;
    default: return radius;
    }
}

namespace {

double distance(const std::vector<double>& x, const std::vector<double>& c) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - c[i]) * (x[i] - c[i]);
    return std::sqrt(s);
}

std::vector<double> fix_center(int n, std::vector<double> c) {
    if (c.empty()) c.assign(n, 0.0);
    if ((int)c.size() != n) throw DomainError("potential centre has " + std::to_string(c.size()) +
                                              " coordinates, expected " + std::to_string(n));
    return c;
}

void check_dim(int n) {
    if (n < 1 || n > 3) throw DomainError("potentials are supported for n in {1,2,3}");
}

} // namespace

Potential::Potential(PotentialKind k, int n, std::vector<RadialComponent> c)
    : kind_(k), dim_(n), comps_(std::move(c)) {
    check_dim(n);
    self_check();
}

Potential Potential::zero(int n) { return Potential(PotentialKind::zero, n, {}); }

Potential Potential::constant(int n, double c) {
    RadialComponent rc;
    rc.profile = RadialComponent::Profile::constant;
    rc.center.assign(n, 0.0);
    rc.amplitude = c;
    return Potential(PotentialKind::constant, n, {rc});
}

Potential Potential::box(int n, double radius, double amplitude, std::vector<double> center) {
    if (!(radius > 0)) throw DomainError("box radius must be positive");
    RadialComponent rc{RadialComponent::Profile::box, fix_center(n, std::move(center)), amplitude, radius, 0.0};
    return Potential(PotentialKind::box, n, {rc});
}

Potential Potential::gaussian(int n, double width, double amplitude, std::vector<double> center) {
    if (!(width > 0)) throw DomainError("gaussian width must be positive");
    RadialComponent rc{RadialComponent::Profile::gaussian, fix_center(n, std::move(center)), amplitude, width, 0.0};
    return Potential(PotentialKind::gaussian, n, {rc});
}

Potential Potential::inverse_power(int n, double exponent, double amplitude, double cutoff, std::vector<double> center) {
    if (!(exponent >= 0)) throw DomainError("inverse power exponent must be nonnegative");
    if (!(cutoff > 0)) throw DomainError("inverse power cutoff must be positive");
    RadialComponent rc{RadialComponent::Profile::inverse_power, fix_center(n, std::move(center)), amplitude, cutoff,
                       exponent};
    return Potential(PotentialKind::inverse_power, n, {rc});
}

Potential Potential::periodic_bumps(double period, double radius, double amplitude, int count) {
    if (!(radius > 0) || !(period > 0)) throw DomainError("bump radius and period must be positive");
    if (2 * radius > period) throw DomainError("bumps must not overlap (2 radius <= period)");
    if (count < 1) throw DomainError("bump count must be at least 1");
    std::vector<RadialComponent> comps;
    for (int k = 0; k < count; ++k) {
        double c = (k - 0.5 * (count - 1)) * period;
        comps.push_back({RadialComponent::Profile::bump, {c}, amplitude, radius, 0.0});
    }
    return Potential(PotentialKind::periodic_bumps, 1, std::move(comps));
}

Potential Potential::sum(const std::vector<Potential>& parts) {
    if (parts.empty()) throw DomainError("empty potential sum");
    if (parts.size() == 1) return parts.front();
    std::vector<RadialComponent> comps;
    for (const auto& p : parts) {
        if (p.dim() != parts.front().dim()) throw DomainError("summed potentials differ in dimension");
        comps.insert(comps.end(), p.comps_.begin(), p.comps_.end());
    }
    return Potential(PotentialKind::composite, parts.front().dim(), std::move(comps));
}

double Potential::operator()(const std::vector<double>& x) const {
    if ((int)x.size() != dim_) throw DomainError("point dimension mismatch");
    double v = 0.0;
    for (const auto& c : comps_) v += c.value(distance(x, c.center));
    return v;
}

double Potential::at(double x) const {
    if (dim_ != 1) throw DomainError("Potential::at is one-dimensional");
    return (*this)({x});
}

Potential Potential::scaled(double c) const {
    auto comps = comps_;
    for (auto& rc : comps) rc.amplitude *= c;
    return Potential(kind_, dim_, std::move(comps));
}

std::vector<Singularity> Potential::singularities() const {
    std::vector<Singularity> out;
    for (const auto& c : comps_)
        if (c.singular()) out.push_back({c.center, c.exponent});
    return out;
}

double Potential::support_radius() const {
    double r = 0.0;
    for (const auto& c : comps_) {
        if (c.amplitude == 0.0) continue;
        double reach = c.reach();
        if (!std::isfinite(reach)) return HUGE_VAL;
        double cn = 0.0;
        for (double v : c.center) cn += v * v;
        r = std::max(r, std::sqrt(cn) + reach);
    }
    return r;
}

std::optional<double> Potential::sup_bound() const {
    double s = 0.0;
    for (const auto& c : comps_) {
        if (c.singular()) return std::nullopt;
        s += std::fabs(c.amplitude);
    }
    return s;
}

std::string Potential::describe() const {
    std::ostringstream os;
    os << to_string(kind_) << " (n=" << dim_ << ", " << comps_.size() << " component"
       << (comps_.size() == 1 ? "" : "s") << ")";
    return os.str();
}

// Declared exponents must match the measured local growth within a factor 2.
void Potential::self_check() const {
    for (const auto& c : comps_) {
        if (!std::isfinite(c.amplitude)) throw DomainError("potential amplitude must be finite");
        if (!c.singular()) continue;
        double r1 = std::min(1e-3, 0.5 * c.radius), r2 = 0.1 * r1;
        auto probe = [&](double r) {
            std::vector<double> x = c.center;
            x[0] += r;
            return std::fabs((*this)(x));
        };
        double measured = std::log(probe(r2) / probe(r1)) / std::log(r1 / r2);
        if (!(measured >= 0.5 * c.exponent && measured <= 2.0 * c.exponent))
            throw DomainError("declared singular exponent " + std::to_string(c.exponent) +
                              " does not match measured local growth " + std::to_string(measured));
    }
}

namespace {

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t pos = 0;
        double v = std::stod(item, &pos);
        if (pos != item.size()) throw DomainError("bad number '" + item + "'");
        out.push_back(v);
    }
    return out;
}

double parse_number(const std::string& key, const std::string& s) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw DomainError("potential key '" + key + "': bad number '" + s + "'");
}

} // namespace

Potential parse_potential(const std::string& entry, int n) {
    std::istringstream is(entry);
    std::string tok, kind;
    std::vector<double> center;
    double radius = 1.0, width = 1.0, amplitude = 1.0, exponent = 1.0, cutoff = HUGE_VAL, period = 4.0;
    int count = 5;
    bool have_amplitude = false;
    while (is >> tok) {
        auto eq = tok.find('=');
        if (eq == std::string::npos) {
            if (!kind.empty()) throw DomainError("potential entry: unexpected token '" + tok + "'");
            kind = tok;
            continue;
        }
        std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
        if (key == "kind") kind = val;
        else if (key == "center") {
            try {
                center = parse_list(val);
            } catch (const std::exception&) {
                throw DomainError("potential key 'center': bad list '" + val + "'");
            }
        } else if (key == "radius") radius = parse_number(key, val);
        else if (key == "width") width = parse_number(key, val);
        else if (key == "amplitude" || key == "value") {
            amplitude = parse_number(key, val);
            have_amplitude = true;
        } else if (key == "exponent") exponent = parse_number(key, val);
        else if (key == "cutoff") cutoff = parse_number(key, val);
        else if (key == "period") period = parse_number(key, val);
        else if (key == "count") count = (int)parse_number(key, val);
        else throw DomainError("potential entry: unknown key '" + key + "'");
    }
    if (kind == "zero") return Potential::zero(n);
    if (kind == "constant") return Potential::constant(n, have_amplitude ? amplitude : 1.0);
    if (kind == "box") return Potential::box(n, radius, amplitude, center);
    if (kind == "gaussian") return Potential::gaussian(n, width, amplitude, center);
    if (kind == "inverse_power") return Potential::inverse_power(n, exponent, amplitude, cutoff, center);
    if (kind == "periodic_bumps" || kind == "bumps") {
        if (n != 1) throw DomainError("periodic_bumps is one-dimensional");
        return Potential::periodic_bumps(period, radius, amplitude, count);
    }
    throw DomainError("unknown potential kind '" + kind + "'");
}

Potential load_potential_file(const std::string& path, int n) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open potential file '" + path + "'");
    std::vector<Potential> parts;
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        parts.push_back(parse_potential(line, n));
    }
    if (parts.empty()) throw DomainError("potential file '" + path + "' has no entries");
    return Potential::sum(parts);
}

} // namespace fraclab
