#ifndef EHCAP_SOLVER_HPP
#define EHCAP_SOLVER_HPP

#include <vector>

#include "ehcap/channel.hpp"
#include "ehcap/distribution.hpp"
#include "ehcap/exec.hpp"

namespace ehcap {

struct BaOptions {
    int grid_points = 501;          // amplitudes per solve, odd so 0 is on the grid
    double tail_sigmas = 8.0;       // output window margin beyond the amplitude range
    double quad_spacing = 0.2;      // output quadrature spacing, in sigmas
    double gap_tol = 5e-5;          // stop when the Arimoto bound gap falls below this
    double inner_gap_tol = 1e-4;    // looser tolerance during the multiplier search
    double probe_gap_tol = 1e-2;    // cruder still when only the cost's sign matters
    int max_sweeps = 10000;         // per multiplier value
    double cost_tol = 1e-8;         // |E[cost] - limit| target (relative to max(1, limit))
    int max_multiplier_iters = 120;
    double consolidate_threshold = 1e-6;
};

struct CapacityResult {
    double rate = 0.0;            // nats per channel use
    InputDistribution dist;
    double certificate_gap = 0.0; // max Kuhn-Tucker violation over the grid, nats
    int iterations = 0;           // total Blahut-Arimoto sweeps
    double multiplier = 0.0;      // Lagrange multiplier on the cost constraint
    double avg_cost = 0.0;        // E[cost] at the solution
};

// Raw grid solution before any mass consolidation.
struct GridSolution {
    std::vector<double> grid;
    std::vector<double> p;
    std::vector<double> info_density; // D_i = D(P_{W|x_i} || q)
    double rate = 0.0;
    double lambda = 0.0;
    double avg_cost = 0.0;
    double certificate_gap = 0.0;
    int sweeps = 0;
};

// n odd; exact 0 at the centre, exact +/- half_width at the ends
std::vector<double> symmetric_grid(double half_width, int n);

// Maximize I(X;W) over laws on `grid` subject to sum_i p_i cost_i <= limit
// (limit = +inf or empty cost: unconstrained). When clamped_zero_atom >= 0 the
// probability of the exact grid point 0 is pinned to that value and the
// remaining mass is optimized. The multiplier is found by Illinois
// regula-falsi on E[cost], falling back to bisection.
GridSolution ba_solve(const std::vector<double>& grid, const std::vector<double>& cost,
                      double limit, const AwgnChannel& ch, const BaOptions& opt = {},
                      Exec mode = default_exec(), double clamped_zero_atom = -1.0);

} // namespace ehcap

#endif
