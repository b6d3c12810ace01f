#ifndef EHCAP_HARVEST_HPP
#define EHCAP_HARVEST_HPP

#include <cstdint>
#include <variant>
#include <vector>

#include "ehcap/exec.hpp"
#include "ehcap/rng.hpp"

namespace ehcap {

// Stationary-ergodic models for the per-slot harvest increments Y_k.

struct DiscreteIid {
    std::vector<double> values;
    std::vector<double> probs;
};

struct ConstantIid {
    double y = 0.0;
};

// Y = scale * G^2 with G standard normal (chi-square, one degree of freedom)
struct ChiSquare1 {
    double scale = 1.0;
};

using PhaseModel = std::variant<DiscreteIid, ConstantIid, ChiSquare1>;

// deterministic phase schedule: slot k draws from phase (k mod period)
struct PeriodicMix {
    std::vector<PhaseModel> phases;
};

struct PosPartMoments {
    double eplus = 0.0;  // E[(Y - c)^+]
    double eminus = 0.0; // E[(c - Y)^+]
};

class HarvestModel {
public:
    using Kind = std::variant<DiscreteIid, ConstantIid, ChiSquare1, PeriodicMix>;

    explicit HarvestModel(Kind kind); // throws std::invalid_argument on bad parameters

    static HarvestModel discrete(std::vector<double> values, std::vector<double> probs);
    static HarvestModel discrete_uniform(std::vector<double> values);
    static HarvestModel constant(double y);
    static HarvestModel chi_square(double scale);
    static HarvestModel periodic(std::vector<HarvestModel> phases);

    const Kind& kind() const noexcept { return kind_; }
    std::size_t period() const noexcept;

    double mean() const;
    PosPartMoments pos_part_moments(double c) const;

    // largest support value; +inf for chi-square tails
    double max_support() const;

    // draw Y_k for slot k; pure in (seed, k), uses at most four counters per slot
    double sample_at(std::uint64_t seed, std::uint64_t k) const;

    // draw from the model's single-slot law, consuming the caller's stream
    double draw(CounterRng& rng) const;

    std::vector<double> sample_path(std::int64_t n, std::uint64_t seed,
                                    Exec mode = default_exec()) const;

private:
    Kind kind_;
};

} // namespace ehcap

#endif
