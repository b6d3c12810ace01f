#ifndef EHCAP_MUTUAL_INFO_HPP
#define EHCAP_MUTUAL_INFO_HPP

#include <utility>
#include <vector>

#include "ehcap/channel.hpp"
#include "ehcap/distribution.hpp"
#include "ehcap/exec.hpp"

namespace ehcap {

// Differential entropy h(W) of W = X + N where X is the (amplitude, mass)
// mixture `atoms` and N ~ N(0, sigma2). Trapezoid quadrature over
// [min amplitude - 8 sigma, max amplitude + 8 sigma], refined by doubling
// until successive estimates agree within `tol` nats.
double output_entropy(const std::vector<std::pair<double, double>>& atoms, const AwgnChannel& ch,
                      double tol = 1e-6, Exec mode = default_exec());

// I(X;W) = h(W) - h(N), clamped to >= 0.
double mutual_information(const InputDistribution& dist, const AwgnChannel& ch, double tol = 1e-6,
                          Exec mode = default_exec());

} // namespace ehcap

#endif
