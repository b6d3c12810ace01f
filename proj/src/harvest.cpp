#include "ehcap/harvest.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace ehcap {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double std_normal_pdf(double g) {
    return std::exp(-0.5 * g * g) / std::sqrt(2.0 * std::numbers::pi);
}

// classic adaptive Simpson with tolerance halving
double simpson_panel(double a, double fa, double b, double fb, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

template <class F>
double adaptive_simpson_rec(const F& f, double a, double fa, double b, double fb, double m,
                            double fm, double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = simpson_panel(a, fa, m, fm, flm);
    const double right = simpson_panel(m, fm, b, fb, frm);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return adaptive_simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

// fixed panels (width <= 0.5) so narrow bumps cannot slip between the initial
// sample points, then adaptive refinement inside each panel
template <class F>
double adaptive_simpson(const F& f, double a, double b, double tol) {
    if (!(b > a)) return 0.0;
    const int panels = std::max(1, static_cast<int>(std::ceil((b - a) / 0.5)));
    const double width = (b - a) / panels;
    const double panel_tol = tol / panels;
    double total = 0.0;
    for (int i = 0; i < panels; ++i) {
        const double lo = a + i * width, hi = (i + 1 == panels) ? b : lo + width;
        const double m = 0.5 * (lo + hi);
        const double fa = f(lo), fb = f(hi), fm = f(m);
        const double whole = simpson_panel(lo, fa, hi, fb, fm);
        total += adaptive_simpson_rec(f, lo, fa, hi, fb, m, fm, whole, panel_tol, 40);
    }
    return total;
}

void validate_phase(const PhaseModel& phase) {
    if (const auto* d = std::get_if<DiscreteIid>(&phase)) {
        if (d->values.empty() || d->values.size() != d->probs.size())
            throw std::invalid_argument("discrete harvest: values/probs size mismatch");
        double total = 0.0;
        for (std::size_t i = 0; i < d->values.size(); ++i) {
            if (!(d->values[i] >= 0.0) || !std::isfinite(d->values[i]))
                throw std::invalid_argument("discrete harvest: negative or non-finite value");
            if (!(d->probs[i] >= 0.0)) throw std::invalid_argument("discrete harvest: negative prob");
            total += d->probs[i];
        }
        if (std::abs(total - 1.0) > 1e-12)
            throw std::invalid_argument("discrete harvest: probs must sum to 1");
    } else if (const auto* c = std::get_if<ConstantIid>(&phase)) {
        if (!(c->y >= 0.0) || !std::isfinite(c->y))
            throw std::invalid_argument("constant harvest: y must be >= 0");
    } else if (const auto* x = std::get_if<ChiSquare1>(&phase)) {
        if (!(x->scale >= 0.0) || !std::isfinite(x->scale))
            throw std::invalid_argument("chi-square harvest: scale must be >= 0");
    }
}

double phase_mean(const PhaseModel& phase) {
    return std::visit(
        [](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, DiscreteIid>) {
                double s = 0.0;
                for (std::size_t i = 0; i < m.values.size(); ++i) s += m.values[i] * m.probs[i];
                return s;
            } else if constexpr (std::is_same_v<T, ConstantIid>) {
                return m.y;
            } else {
                return m.scale; // E[G^2] = 1
            }
        },
        phase);
}

PosPartMoments phase_pos_part(const PhaseModel& phase, double c) {
    return std::visit(
        [c](const auto& m) -> PosPartMoments {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, DiscreteIid>) {
                PosPartMoments out;
                for (std::size_t i = 0; i < m.values.size(); ++i) {
                    out.eplus += m.probs[i] * std::max(m.values[i] - c, 0.0);
                    out.eminus += m.probs[i] * std::max(c - m.values[i], 0.0);
                }
                return out;
            } else if constexpr (std::is_same_v<T, ConstantIid>) {
                return {std::max(m.y - c, 0.0), std::max(c - m.y, 0.0)};
            } else {
                const double s = m.scale;
                if (s == 0.0) return {0.0, c};
                // substitute y = s g^2; the 1/sqrt(y) singularity disappears
                const double a = std::sqrt(c / s);
                const auto upper = [&](double g) { return 2.0 * (s * g * g - c) * std_normal_pdf(g); };
                const auto lower = [&](double g) { return 2.0 * (c - s * g * g) * std_normal_pdf(g); };
                PosPartMoments out;
                out.eplus = adaptive_simpson(upper, a, a + 16.0, 1e-10);
                out.eminus = adaptive_simpson(lower, 0.0, a, 1e-10);
                return out;
            }
        },
        phase);
}

double phase_max_support(const PhaseModel& phase) {
    return std::visit(
        [](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, DiscreteIid>) {
                double hi = 0.0;
                for (double v : m.values) hi = std::max(hi, v);
                return hi;
            } else if constexpr (std::is_same_v<T, ConstantIid>) {
                return m.y;
            } else {
                return m.scale == 0.0 ? 0.0 : kInf;
            }
        },
        phase);
}

double phase_draw(const PhaseModel& phase, CounterRng& rng) {
    return std::visit(
        [&rng](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, DiscreteIid>) {
                const double u = rng.uniform();
                double acc = 0.0;
                for (std::size_t i = 0; i < m.values.size(); ++i) {
                    acc += m.probs[i];
                    if (u < acc) return m.values[i];
                }
                return m.values.back();
            } else if constexpr (std::is_same_v<T, ConstantIid>) {
                return m.y;
            } else {
                const double g = rng.normal();
                return m.scale * g * g;
            }
        },
        phase);
}

} // namespace

HarvestModel::HarvestModel(Kind kind) : kind_(std::move(kind)) {
    if (const auto* mix = std::get_if<PeriodicMix>(&kind_)) {
        if (mix->phases.empty()) throw std::invalid_argument("periodic harvest: needs >= 1 phase");
        for (const auto& p : mix->phases) validate_phase(p);
    } else {
        std::visit(
            [](const auto& m) {
                using T = std::decay_t<decltype(m)>;
                if constexpr (!std::is_same_v<T, PeriodicMix>) validate_phase(PhaseModel{m});
            },
            kind_);
    }
}

HarvestModel HarvestModel::discrete(std::vector<double> values, std::vector<double> probs) {
    return HarvestModel(DiscreteIid{std::move(values), std::move(probs)});
}

HarvestModel HarvestModel::discrete_uniform(std::vector<double> values) {
    std::vector<double> probs(values.size(), values.empty() ? 0.0 : 1.0 / values.size());
    return discrete(std::move(values), std::move(probs));
}

HarvestModel HarvestModel::constant(double y) { return HarvestModel(ConstantIid{y}); }

HarvestModel HarvestModel::chi_square(double scale) { return HarvestModel(ChiSquare1{scale}); }

HarvestModel HarvestModel::periodic(std::vector<HarvestModel> phases) {
    PeriodicMix mix;
    mix.phases.reserve(phases.size());
    for (auto& ph : phases) {
        if (std::holds_alternative<PeriodicMix>(ph.kind_))
            throw std::invalid_argument("periodic harvest: phases must not be periodic");
        std::visit(
            [&mix](auto& m) {
                using T = std::decay_t<decltype(m)>;
                if constexpr (!std::is_same_v<T, PeriodicMix>) mix.phases.push_back(std::move(m));
            },
            ph.kind_);
    }
    return HarvestModel(std::move(mix));
}

std::size_t HarvestModel::period() const noexcept {
    if (const auto* mix = std::get_if<PeriodicMix>(&kind_)) return mix->phases.size();
    return 1;
}

double HarvestModel::mean() const {
    if (const auto* mix = std::get_if<PeriodicMix>(&kind_)) {
        double s = 0.0;
        for (const auto& p : mix->phases) s += phase_mean(p);
        return s / static_cast<double>(mix->phases.size());
    }
    return std::visit(
        [](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, PeriodicMix>) return 0.0;
            else return phase_mean(PhaseModel{m});
        },
        kind_);
}

PosPartMoments HarvestModel::pos_part_moments(double c) const {
    if (!(c >= 0.0)) throw std::invalid_argument("pos_part_moments: c must be >= 0");
    if (const auto* mix = std::get_if<PeriodicMix>(&kind_)) {
        PosPartMoments out;
        for (const auto& p : mix->phases) {
            const auto m = phase_pos_part(p, c);
            out.eplus += m.eplus;
            out.eminus += m.eminus;
        }
        const double inv = 1.0 / static_cast<double>(mix->phases.size());
        out.eplus *= inv;
        out.eminus *= inv;
        return out;
    }
    return std::visit(
        [c](const auto& m) -> PosPartMoments {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, PeriodicMix>) return {};
            else return phase_pos_part(PhaseModel{m}, c);
        },
        kind_);
}

double HarvestModel::max_support() const {
    if (const auto* mix = std::get_if<PeriodicMix>(&kind_)) {
        double hi = 0.0;
        for (const auto& p : mix->phases) hi = std::max(hi, phase_max_support(p));
        return hi;
    }
    return std::visit(
        [](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, PeriodicMix>) return 0.0;
            else return phase_max_support(PhaseModel{m});
        },
        kind_);
}

double HarvestModel::sample_at(std::uint64_t seed, std::uint64_t k) const {
    CounterRng rng(seed, 4 * k); // four counters reserved per slot
    if (const auto* mix = std::get_if<PeriodicMix>(&kind_))
        return phase_draw(mix->phases[k % mix->phases.size()], rng);
    return draw(rng);
}

double HarvestModel::draw(CounterRng& rng) const {
    if (const auto* mix = std::get_if<PeriodicMix>(&kind_)) {
        // no slot index available: draw the phase uniformly (stationary mixture)
        const auto idx = static_cast<std::size_t>(rng.uniform() * static_cast<double>(mix->phases.size()));
        return phase_draw(mix->phases[std::min(idx, mix->phases.size() - 1)], rng);
    }
    return std::visit(
        [&rng](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, PeriodicMix>) return 0.0;
            else return phase_draw(PhaseModel{m}, rng);
        },
        kind_);
}

std::vector<double> HarvestModel::sample_path(std::int64_t n, std::uint64_t seed, Exec mode) const {
    if (n < 1) throw std::invalid_argument("sample_path: n must be >= 1");
    std::vector<double> path(static_cast<std::size_t>(n));
    parallel_for(n, mode, [&](std::int64_t k) {
        path[static_cast<std::size_t>(k)] = sample_at(seed, static_cast<std::uint64_t>(k));
    });
    return path;
}

} // namespace ehcap
