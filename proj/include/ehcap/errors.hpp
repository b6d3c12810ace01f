#ifndef EHCAP_ERRORS_HPP
#define EHCAP_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ehcap {

// a policy spent more energy than the buffer could supply
struct InfeasibleEnergyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// iterative solver hit its sweep bound before certifying the optimum
struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// entropy quadrature did not reach the requested tolerance
struct QuadratureError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// harvest-use policy saw a harvest value with no configured input law
struct MissingDistributionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// too few support points (or inconsistent cost) for a density fit
struct FitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace ehcap

#endif
