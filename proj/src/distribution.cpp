#include "ehcap/distribution.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace ehcap {

double DensityGrid::trap_coeff(std::size_t i) const {
    const std::size_t n = amplitudes.size();
    if (n < 2) return 0.0;
    if (i == 0) return 0.5 * (amplitudes[1] - amplitudes[0]);
    if (i == n - 1) return 0.5 * (amplitudes[n - 1] - amplitudes[n - 2]);
    return 0.5 * (amplitudes[i + 1] - amplitudes[i - 1]);
}

double DensityGrid::mass() const {
    double m = 0.0;
    for (std::size_t i = 0; i < amplitudes.size(); ++i) m += weights[i] * trap_coeff(i);
    return m;
}

double DensityGrid::second_moment() const {
    double m = 0.0;
    for (std::size_t i = 0; i < amplitudes.size(); ++i)
        m += weights[i] * trap_coeff(i) * amplitudes[i] * amplitudes[i];
    return m;
}

double InputDistribution::total_mass() const {
    double m = zero_atom;
    for (const auto& mp : mass_points) m += mp.prob;
    if (density) m += density->mass();
    return m;
}

double InputDistribution::second_moment() const {
    double m = 0.0;
    for (const auto& mp : mass_points) m += mp.prob * mp.amplitude * mp.amplitude;
    if (density) m += density->second_moment();
    return m;
}

double InputDistribution::transmit_cost(double alpha) const {
    double m = 0.0;
    for (const auto& mp : mass_points)
        if (mp.amplitude != 0.0) m += mp.prob * (mp.amplitude * mp.amplitude + alpha);
    if (density)
        for (std::size_t i = 0; i < density->amplitudes.size(); ++i) {
            const double a = density->amplitudes[i];
            if (a != 0.0)
                m += density->weights[i] * density->trap_coeff(i) * (a * a + alpha);
        }
    return m;
}

std::pair<double, double> InputDistribution::amplitude_range() const {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    if (zero_atom > 0.0) lo = hi = 0.0;
    for (const auto& mp : mass_points) {
        lo = std::min(lo, mp.amplitude);
        hi = std::max(hi, mp.amplitude);
    }
    if (density && !density->amplitudes.empty()) {
        lo = std::min(lo, density->amplitudes.front());
        hi = std::max(hi, density->amplitudes.back());
    }
    if (lo > hi) lo = hi = 0.0;
    return {lo, hi};
}

void InputDistribution::validate(double tol) const {
    if (!(zero_atom >= 0.0) || zero_atom > 1.0 + tol)
        throw std::invalid_argument("input law: zero atom outside [0,1]");
    for (const auto& mp : mass_points) {
        if (!std::isfinite(mp.amplitude)) throw std::invalid_argument("input law: non-finite amplitude");
        if (!(mp.prob >= 0.0)) throw std::invalid_argument("input law: negative probability");
    }
    if (density) {
        if (density->amplitudes.size() != density->weights.size() || density->amplitudes.size() < 2)
            throw std::invalid_argument("input law: malformed density grid");
        for (std::size_t i = 0; i < density->amplitudes.size(); ++i) {
            if (!std::isfinite(density->amplitudes[i]))
                throw std::invalid_argument("input law: non-finite grid amplitude");
            if (i > 0 && !(density->amplitudes[i] > density->amplitudes[i - 1]))
                throw std::invalid_argument("input law: grid not strictly increasing");
            if (!(density->weights[i] >= 0.0))
                throw std::invalid_argument("input law: negative density");
        }
    }
    if (std::abs(total_mass() - 1.0) > tol)
        throw std::invalid_argument("input law: mass does not sum to 1");
}

std::vector<std::pair<double, double>> InputDistribution::atomize() const {
    std::vector<std::pair<double, double>> atoms;
    atoms.reserve(1 + mass_points.size() + (density ? density->amplitudes.size() : 0));
    if (zero_atom > 0.0) atoms.emplace_back(0.0, zero_atom);
    for (const auto& mp : mass_points)
        if (mp.prob > 0.0) atoms.emplace_back(mp.amplitude, mp.prob);
    if (density)
        for (std::size_t i = 0; i < density->amplitudes.size(); ++i) {
            const double w = density->weights[i] * density->trap_coeff(i);
            if (w > 0.0) atoms.emplace_back(density->amplitudes[i], w);
        }
    return atoms;
}

InputDistribution InputDistribution::point_mass_zero() {
    InputDistribution d;
    d.zero_atom = 1.0;
    return d;
}

InputDistribution InputDistribution::symmetric_pair(double amplitude) {
    InputDistribution d;
    d.mass_points = {{-amplitude, 0.5}, {amplitude, 0.5}};
    return d;
}

InputDistribution InputDistribution::gaussian_grid(double variance, int points, double span_sigmas) {
    if (!(variance > 0.0)) return point_mass_zero();
    const double sd = std::sqrt(variance);
    const double span = span_sigmas * sd;
    DensityGrid g;
    g.amplitudes.resize(points);
    g.weights.resize(points);
    const int m = (points - 1) / 2;
    for (int i = 0; i < points; ++i) {
        const double a = span * (static_cast<double>(i - m) / static_cast<double>(m));
        g.amplitudes[i] = a;
        g.weights[i] = std::exp(-0.5 * a * a / variance) / (sd * std::sqrt(2.0 * std::numbers::pi));
    }
    // renormalize the truncated tail mass onto the grid
    InputDistribution d;
    d.density = std::move(g);
    const double mass = d.density->mass();
    for (auto& w : d.density->weights) w /= mass;
    return d;
}

} // namespace ehcap
