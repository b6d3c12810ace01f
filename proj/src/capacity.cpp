#include "ehcap/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <stdexcept>

#include "ehcap/errors.hpp"

namespace ehcap {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }
double std_normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

CapacityResult zero_result() {
    CapacityResult r;
    r.dist = InputDistribution::point_mass_zero();
    return r;
}

// Grids finer than ~sigma/3 buy no mutual-information accuracy (the kernel
// smooths them out) but make the solver's normal equations nearly singular,
// so wide sleep-capacity grids are capped at that density.
int capped_grid_points(int requested, double half_width, double sigma) {
    const double spacing = 0.35 * sigma;
    int needed = static_cast<int>(std::ceil(2.0 * half_width / spacing)) + 1;
    if (needed % 2 == 0) ++needed;
    needed = std::max(needed, 51);
    return std::min(requested, needed);
}

CapacityResult from_grid(const GridSolution& gs) {
    CapacityResult r;
    r.rate = std::max(gs.rate, 0.0);
    r.certificate_gap = gs.certificate_gap;
    r.iterations = gs.sweeps;
    r.multiplier = gs.lambda;
    r.avg_cost = gs.avg_cost;
    return r;
}

// merge adjacent grid atoms above threshold into local centroids
InputDistribution consolidate_atoms(const GridSolution& gs, double threshold) {
    InputDistribution dist;
    const std::size_t n = gs.grid.size();
    double kept = 0.0;
    std::size_t i = 0;
    while (i < n) {
        if (gs.p[i] <= threshold) {
            ++i;
            continue;
        }
        double mass = 0.0, centroid = 0.0;
        while (i < n && gs.p[i] > threshold) {
            mass += gs.p[i];
            centroid += gs.p[i] * gs.grid[i];
            ++i;
        }
        centroid /= mass;
        if (std::abs(centroid) < 1e-12) centroid = 0.0;
        dist.mass_points.push_back({centroid, mass});
        kept += mass;
    }
    if (kept <= 0.0) return InputDistribution::point_mass_zero();
    for (auto& mp : dist.mass_points) mp.prob /= kept;
    return dist;
}

// zero atom plus a gridded density for the ON part. With pin_zero the centre
// mass is the sleep atom verbatim; otherwise the atom is the excess of the
// centre mass over the local density interpolation.
InputDistribution extract_sleep_density(const GridSolution& gs, bool pin_zero = false) {
    InputDistribution dist;
    const std::size_t n = gs.grid.size();
    const std::size_t m = n / 2; // symmetric grid, exact zero at the centre
    const double interp = pin_zero ? 0.0 : 0.5 * (gs.p[m - 1] + gs.p[m + 1]);
    dist.zero_atom = pin_zero ? gs.p[m] : std::max(gs.p[m] - interp, 0.0);

    DensityGrid g;
    g.amplitudes = gs.grid;
    g.weights.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double mass = (i == m) ? gs.p[m] - dist.zero_atom : gs.p[i];
        double trap;
        if (i == 0)
            trap = 0.5 * (gs.grid[1] - gs.grid[0]);
        else if (i == n - 1)
            trap = 0.5 * (gs.grid[n - 1] - gs.grid[n - 2]);
        else
            trap = 0.5 * (gs.grid[i + 1] - gs.grid[i - 1]);
        g.weights[i] = trap > 0.0 ? std::max(mass, 0.0) / trap : 0.0;
    }
    dist.density = std::move(g);
    return dist;
}

// equal-probability discretization of the harvest law, chi-square bins keep
// their conditional means so E[Y] is preserved exactly
std::vector<std::pair<double, double>> harvest_atoms(const HarvestModel& model, int chi_atoms) {
    std::vector<std::pair<double, double>> atoms;
    const auto add_phase = [&](const PhaseModel& phase, double phase_weight) {
        if (const auto* d = std::get_if<DiscreteIid>(&phase)) {
            for (std::size_t i = 0; i < d->values.size(); ++i)
                if (d->probs[i] > 0.0) atoms.emplace_back(d->values[i], phase_weight * d->probs[i]);
        } else if (const auto* c = std::get_if<ConstantIid>(&phase)) {
            atoms.emplace_back(c->y, phase_weight);
        } else if (const auto* x = std::get_if<ChiSquare1>(&phase)) {
            const double s = x->scale;
            if (s == 0.0) {
                atoms.emplace_back(0.0, phase_weight);
                return;
            }
            const int bins = std::max(chi_atoms, 64);
            // |G| quantile edges: 2 Phi(a_j) - 1 = j / bins
            std::vector<double> edge(static_cast<std::size_t>(bins) + 1);
            edge[0] = 0.0;
            edge[static_cast<std::size_t>(bins)] = kInf;
            for (int j = 1; j < bins; ++j) {
                const double target = 0.5 * (1.0 + static_cast<double>(j) / bins);
                double lo = 0.0, hi = 40.0;
                for (int it = 0; it < 200; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    (std_normal_cdf(mid) < target ? lo : hi) = mid;
                }
                edge[static_cast<std::size_t>(j)] = 0.5 * (lo + hi);
            }
            for (int j = 0; j < bins; ++j) {
                const double a = edge[static_cast<std::size_t>(j)];
                const double b = edge[static_cast<std::size_t>(j) + 1];
                // int_a^b g^2 phi(g) dg = Phi(b) - Phi(a) + a phi(a) - b phi(b)
                const double cb = std::isinf(b) ? 1.0 : std_normal_cdf(b);
                const double tb = std::isinf(b) ? 0.0 : b * std_normal_pdf(b);
                const double seg = (cb - std_normal_cdf(a)) + a * std_normal_pdf(a) - tb;
                const double y = s * 2.0 * bins * seg; // conditional mean of the bin
                atoms.emplace_back(std::max(y, 0.0), phase_weight / bins);
            }
        }
    };
    if (const auto* mix = std::get_if<PeriodicMix>(&model.kind())) {
        const double w = 1.0 / static_cast<double>(mix->phases.size());
        for (const auto& ph : mix->phases) add_phase(ph, w);
    } else {
        std::visit(
            [&](const auto& m) {
                using T = std::decay_t<decltype(m)>;
                if constexpr (!std::is_same_v<T, PeriodicMix>) add_phase(PhaseModel{m}, 1.0);
            },
            model.kind());
    }
    return atoms;
}

} // namespace

double awgn_capacity(double power, const AwgnChannel& ch) {
    ch.validate();
    if (!(power >= 0.0)) throw std::invalid_argument("awgn_capacity: power must be >= 0");
    return 0.5 * std::log1p(power / ch.sigma2);
}

CapacityResult peak_average_capacity(double peak, double avg_power, const AwgnChannel& ch,
                                     const BaOptions& opt, Exec mode) {
    ch.validate();
    if (!(peak >= 0.0)) throw std::invalid_argument("peak_average_capacity: peak must be >= 0");
    if (peak == 0.0 || avg_power <= 0.0) return zero_result();

    const auto grid = symmetric_grid(peak, opt.grid_points);
    std::vector<double> cost(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) cost[i] = grid[i] * grid[i];
    const auto gs = ba_solve(grid, cost, avg_power, ch, opt, mode);
    auto result = from_grid(gs);
    result.dist = consolidate_atoms(gs, opt.consolidate_threshold);
    return result;
}

HuCapacity hu_capacity(const HarvestModel& model, const AwgnChannel& ch, const BaOptions& opt,
                       int chi_atoms, Exec mode) {
    HuCapacity out;
    std::map<double, CapacityResult> memo;
    for (const auto& [y, prob] : harvest_atoms(model, chi_atoms)) {
        auto it = memo.find(y);
        if (it == memo.end()) {
            auto r = peak_average_capacity(std::sqrt(y), y, ch, opt, mode);
            it = memo.emplace(y, std::move(r)).first;
        }
        out.rate += prob * it->second.rate;
        out.per_value.push_back({y, prob, it->second});
    }
    return out;
}

CapacityResult pe_capacity(double ey, double ez, const AwgnChannel& ch, bool sleep_allowed,
                           const PeOptions& opt, Exec mode) {
    ch.validate();
    if (!(ey >= 0.0) || !(ez >= 0.0))
        throw std::invalid_argument("pe_capacity: energies must be >= 0");
    if (ey <= 0.0) return zero_result();

    if (!sleep_allowed) {
        if (ey <= ez) return zero_result();
        CapacityResult r;
        r.rate = awgn_capacity(ey - ez, ch);
        r.dist = InputDistribution::gaussian_grid(ey - ez);
        r.avg_cost = ey;
        return r;
    }

    const double half = opt.grid_half_width > 0.0 ? opt.grid_half_width
                                                  : 8.0 * std::sqrt(ch.sigma2 + ey);
    BaOptions ba = opt.ba;
    ba.grid_points = capped_grid_points(ba.grid_points, half, ch.sigma());
    const auto grid = symmetric_grid(half, ba.grid_points);
    std::vector<double> cost(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        cost[i] = grid[i] == 0.0 ? 0.0 : grid[i] * grid[i] + ez;
    const auto gs = ba_solve(grid, cost, ey, ch, ba, mode);
    auto result = from_grid(gs);
    result.dist = extract_sleep_density(gs);
    return result;
}

CapacityResult pe_capacity_fixed_sleep(double ey, double ez, double sleep_p,
                                       const AwgnChannel& ch, const PeOptions& opt, Exec mode) {
    ch.validate();
    if (!(sleep_p >= 0.0) || sleep_p > 1.0)
        throw std::invalid_argument("pe_capacity_fixed_sleep: p must be in [0,1]");
    if (ey <= 0.0 || sleep_p >= 1.0) return zero_result();
    // awake (1-p) of the time costs at least (1-p) ez: infeasible -> rate 0
    if ((1.0 - sleep_p) * ez >= ey) return zero_result();

    const double half = opt.grid_half_width > 0.0 ? opt.grid_half_width
                                                  : 8.0 * std::sqrt(ch.sigma2 + ey);
    BaOptions ba = opt.ba;
    ba.grid_points = capped_grid_points(ba.grid_points, half, ch.sigma());
    const auto grid = symmetric_grid(half, ba.grid_points);
    std::vector<double> cost(grid.size());
    double cheapest = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        cost[i] = grid[i] == 0.0 ? 0.0 : grid[i] * grid[i] + ez;
        if (grid[i] != 0.0) cheapest = std::min(cheapest, cost[i]);
    }
    // awake (1-p) of the time costs at least (1-p) (spacing^2 + ez) on this
    // grid; below that budget the pinned policy is not sustainable here
    if ((1.0 - sleep_p) * cheapest >= ey) return zero_result();
    const auto gs = ba_solve(grid, cost, ey, ch, ba, mode, sleep_p);
    auto result = from_grid(gs);
    result.dist = extract_sleep_density(gs, true);
    return result;
}

KtDensityReport kt_density_check(const CapacityResult& result, double ey, double ez,
                                 const AwgnChannel& ch) {
    ch.validate();
    if (!result.dist.density)
        throw FitError("kt_density_check: result carries no continuous part");
    const auto& g = *result.dist.density;
    const double p = result.dist.zero_atom;
    if (p >= 1.0) throw FitError("kt_density_check: pure sleep solution");

    double fmax = 0.0;
    for (double f : g.weights) fmax = std::max(fmax, f);
    const double floor = 1e-6 * fmax;
    const double mix = p / (1.0 - p);

    // ln(f + mix * phi) = ln k1 - k2 a^2 on the support: least squares in the
    // law's own measure (mass weights), which keeps the fit meaningful when
    // the grid solution is a spiky representative of the smooth optimum
    double s0 = 0, s1 = 0, s2 = 0, sy = 0, sxy = 0;
    int pts = 0;
    for (std::size_t i = 0; i < g.amplitudes.size(); ++i) {
        if (g.weights[i] <= floor) continue;
        const double w = g.weights[i] * g.trap_coeff(i);
        const double a2 = g.amplitudes[i] * g.amplitudes[i];
        const double lhs = std::log(g.weights[i] + mix * gaussian_pdf(g.amplitudes[i], ch.sigma2));
        s0 += w;
        s1 += w * a2;
        s2 += w * a2 * a2;
        sy += w * lhs;
        sxy += w * a2 * lhs;
        ++pts;
    }
    if (pts < 3) throw FitError("kt_density_check: fewer than 3 support points");
    const double det = s0 * s2 - s1 * s1;
    const double slope = (s0 * sxy - s1 * sy) / det;
    const double intercept = (s2 * sy - s1 * sxy) / det;

    KtDensityReport rep;
    rep.k1 = std::exp(intercept);
    rep.k2 = -slope;
    rep.support_points = pts;
    for (std::size_t i = 0; i < g.amplitudes.size(); ++i) {
        if (g.weights[i] <= floor) continue;
        const double a = g.amplitudes[i];
        const double model =
            std::max(rep.k1 * std::exp(-rep.k2 * a * a) - mix * gaussian_pdf(a, ch.sigma2), 0.0);
        rep.max_deviation = std::max(rep.max_deviation, std::abs(g.weights[i] - model));
    }
    rep.cost_error = std::abs(result.dist.transmit_cost(ez) - ey);
    return rep;
}

OnOffSplit onoff_decomposition(const InputDistribution& dist, const AwgnChannel& ch, double tol,
                               Exec mode) {
    dist.validate();
    OnOffSplit split;

    // mass points sitting exactly at 0 belong to the OFF symbol
    double p = dist.zero_atom;
    InputDistribution off;
    for (const auto& mp : dist.mass_points) {
        if (mp.amplitude == 0.0)
            p += mp.prob;
        else
            off.mass_points.push_back(mp);
    }
    off.density = dist.density;

    const double on_mass = 1.0 - p;
    if (on_mass <= 1e-12) return split; // degenerate: everything is OFF

    for (auto& mp : off.mass_points) mp.prob /= on_mass;
    if (off.density)
        for (auto& w : off.density->weights) w /= on_mass;

    split.i_gaussian_part = mutual_information(off, ch, tol, mode);
    if (p <= 1e-12) {
        split.i_total = split.i_gaussian_part;
        split.i_onoff = 0.0;
        return split;
    }
    split.i_total = mutual_information(dist, ch, tol, mode);
    const double h_w = output_entropy(dist.atomize(), ch, tol, mode);
    const double h_gn = output_entropy(off.atomize(), ch, tol, mode);
    split.i_onoff = std::max(h_w - p * ch.noise_entropy() - on_mass * h_gn, 0.0);
    return split;
}

double hus_budget(const HarvestModel& model, double beta1, double beta2) {
    if (!(beta1 > 0.0) || beta1 > 1.0) throw std::invalid_argument("hus_budget: beta1 in (0,1]");
    if (!(beta2 >= 0.0)) throw std::invalid_argument("hus_budget: beta2 >= 0");

    const auto g = [&](double c) {
        const auto m = model.pos_part_moments(c);
        return beta1 * m.eplus - m.eminus - beta2;
    };
    if (g(0.0) <= 0.0) return 0.0;

    double hi = model.max_support();
    if (!std::isfinite(hi)) {
        hi = std::max(1.0, 2.0 * model.mean());
        int guard = 0;
        while (g(hi) > 0.0) {
            hi *= 2.0;
            if (++guard > 200) throw SolverError("hus_budget: bracket expansion failed");
        }
    }
    double lo = 0.0;
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double rate_table(RateFamily family, const HarvestModel& model, const RateParams& params,
                  const AwgnChannel& ch, const BaOptions& opt, Exec mode) {
    const double ey = model.mean();
    switch (family) {
        case RateFamily::ideal: return awgn_capacity(ey, ch);
        case RateFamily::processing: return awgn_capacity(std::max(ey - params.ez, 0.0), ch);
        case RateFamily::hsu:
            return awgn_capacity(std::max(params.beta1 * ey - params.beta2, 0.0), ch);
        case RateFamily::hus:
            return awgn_capacity(hus_budget(model, params.beta1, params.beta2), ch);
        case RateFamily::finite_buffer:
            if (!std::isfinite(params.gamma)) return awgn_capacity(ey, ch);
            return peak_average_capacity(std::sqrt(params.gamma), ey, ch, opt, mode).rate;
    }
    return 0.0;
}

} // namespace ehcap
