#ifndef EHCAP_DISTRIBUTION_HPP
#define EHCAP_DISTRIBUTION_HPP

#include <optional>
#include <utility>
#include <vector>

namespace ehcap {

struct MassPoint {
    double amplitude = 0.0;
    double prob = 0.0;
};

// piecewise-linear density sampled on a sorted amplitude grid; mass integrates
// by the trapezoid rule, so node i carries weight f_i * trap_i
struct DensityGrid {
    std::vector<double> amplitudes;
    std::vector<double> weights; // density values f_i >= 0

    double trap_coeff(std::size_t i) const;
    double mass() const;
    double second_moment() const;
};

// Channel-input law: optional atom at zero (sleep), discrete mass points, and
// an optional continuous part on a grid.
struct InputDistribution {
    double zero_atom = 0.0;
    std::vector<MassPoint> mass_points;
    std::optional<DensityGrid> density;

    double total_mass() const;
    double off_zero_mass() const { return total_mass() - zero_atom; }
    double second_moment() const;
    // E[x^2 + alpha; x != 0] — transmit cost with per-use processing energy
    double transmit_cost(double alpha) const;
    std::pair<double, double> amplitude_range() const; // [min, max] over the support
    bool empty() const { return total_mass() <= 0.0; }

    void validate(double tol = 1e-9) const; // throws std::invalid_argument

    // flatten to (amplitude, weight) atoms: zero atom, mass points, then
    // density nodes carrying their trapezoid mass
    std::vector<std::pair<double, double>> atomize() const;

    static InputDistribution point_mass_zero();
    static InputDistribution symmetric_pair(double amplitude);
    // N(0, variance) sampled on a symmetric grid (density part only)
    static InputDistribution gaussian_grid(double variance, int points = 501,
                                           double span_sigmas = 8.0);
};

} // namespace ehcap

#endif
