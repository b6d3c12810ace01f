#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ehcap/errors.hpp"
#include "ehcap/policy.hpp"
#include "ehcap/sim.hpp"
#include "testutil.hpp"

using namespace ehcap;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
HarvestModel example1() { return HarvestModel::discrete_uniform({0.25, 0.5, 0.75, 1.0}); }
} // namespace

TEST_CASE("truncated gaussian clips to the available energy") {
    const Policy pol = TruncatedGaussian{1.0};

    CounterRng empty(3, 0);
    const auto none = next_symbol(pol, 0.0, 0.0, empty);
    CHECK(none.x == 0.0);
    CHECK(none.t == 0.0);
    CHECK(!none.slept);

    // with unlimited energy the raw draw passes through untouched
    CounterRng a(3, 0), b(3, 0);
    const double raw = b.normal();
    const auto free = next_symbol(pol, kInf, 0.0, a);
    CHECK(free.x == raw);
    CHECK(free.t == raw * raw);
    CHECK(!free.truncated);

    // tight energy: |x| = sqrt(e_avail), spend equals x^2
    CounterRng c(3, 0);
    const auto clipped = next_symbol(pol, 1e-4, 0.0, c);
    CHECK(close_to(std::abs(clipped.x), 1e-2, 1e-12));
    CHECK(clipped.truncated);
    CHECK(clipped.t == clipped.x * clipped.x);
}

TEST_CASE("sleep-wake corner cases") {
    CounterRng rng(5, 0);
    const Policy always = SleepWake{1.0, GaussianOn{1.0}, HarvestModel::constant(0.0)};
    const auto d = next_symbol(always, 10.0, 1.0, rng);
    CHECK(d.x == 0.0);
    CHECK(d.t == 0.0);
    CHECK(d.slept);

    // forced sleep when the buffer cannot even pay the processing energy
    const Policy pe = SleepWake{0.0, GaussianOn{1.0}, HarvestModel::constant(2.0)};
    CounterRng rng2(5, 0);
    const auto f = next_symbol(pe, 1.0, 1.0, rng2);
    CHECK(f.slept);
    CHECK(f.t == 0.0);

    // awake: spend is x^2 + z whenever a symbol leaves the antenna
    CounterRng rng3(5, 0);
    const auto g = next_symbol(pe, 100.0, 1.0, rng3);
    CHECK(!g.slept);
    CHECK(g.t == g.x * g.x + 2.0);
    CHECK(g.t <= 100.0);
}

TEST_CASE("sleep-wake with p=0 and z=0 replays the truncated gaussian path") {
    const auto model = example1();
    const auto cfg = BufferConfig::ideal();
    const AwgnChannel ch{1.0};
    const Policy tg = TruncatedGaussian{0.5};
    const Policy sw = SleepWake{0.0, GaussianOn{0.5}, HarvestModel::constant(0.0)};
    const auto tr_a = run(model, cfg, tg, ch, 5000, 12);
    const auto tr_b = run(model, cfg, sw, ch, 5000, 12);
    CHECK(tr_a.x == tr_b.x);
    CHECK(tr_a.t == tr_b.t);
    CHECK(tr_a.e == tr_b.e);
    CHECK(tr_a.w == tr_b.w);
}

TEST_CASE("harvest-use draws stay inside the per-slot peak") {
    HarvestUse hu;
    hu.laws.emplace_back(0.25, InputDistribution::symmetric_pair(0.5));
    hu.laws.emplace_back(1.0, InputDistribution::symmetric_pair(1.0));
    const Policy pol = hu;
    for (int k = 0; k < 200; ++k) {
        const double y = (k % 2 == 0) ? 0.25 : 1.0;
        CounterRng slot(8, 8 * static_cast<std::uint64_t>(k));
        const auto d = next_symbol(pol, y, y, slot);
        CHECK(std::abs(d.x) <= std::sqrt(y) + 1e-12);
        CHECK(d.t <= y + 1e-12);
    }
    CounterRng slot(8, 0);
    CHECK_THROWS_AS(next_symbol(pol, 0.5, 0.5, slot), MissingDistributionError);
}

TEST_CASE("general laws sample by inverse cdf with matching frequencies") {
    InputDistribution law;
    law.zero_atom = 0.2;
    law.mass_points = {{-1.0, 0.3}, {2.0, 0.5}};
    CounterRng rng(21, 0);
    int n0 = 0, n1 = 0, n2 = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double x = sample_input(law, rng);
        if (x == 0.0)
            ++n0;
        else if (x == -1.0)
            ++n1;
        else
            ++n2;
    }
    CHECK(close_to(n0 / double(n), 0.2, 0.005));
    CHECK(close_to(n1 / double(n), 0.3, 0.005));
    CHECK(close_to(n2 / double(n), 0.5, 0.005));
}

TEST_CASE("budget families") {
    BudgetInputs in;
    in.ey = 1.0;
    CHECK(close_to(budget(BudgetFamily::ideal, in), 0.999, 1e-12));
    in.ez = 1.0;
    CHECK(budget(BudgetFamily::processing, in) == 0.0);
    BudgetInputs hsu;
    hsu.ey = 1.0;
    hsu.beta1 = 0.7;
    hsu.beta2 = 0.1;
    CHECK(close_to(budget(BudgetFamily::hsu, hsu), 0.6 * 0.999, 1e-12));
    BudgetInputs hus;
    hus.c = 0.5;
    CHECK(close_to(budget(BudgetFamily::hus, hus), 0.5 * 0.999, 1e-12));
}

TEST_CASE("truncation events die out under a backed-off budget") {
    const auto model = example1();
    const auto cfg = BufferConfig::ideal();
    const AwgnChannel ch{1.0};
    const double p = budget(BudgetFamily::ideal, {model.mean()});
    const auto tr = run(model, cfg, TruncatedGaussian{p}, ch, 100000, 17);
    const auto rep = report(tr, ch);
    CHECK(rep.truncation_rate < 0.01);

    // long-run spend stays within three standard errors of the budget
    const std::size_t start = tr.size() / 2;
    const std::size_t m = tr.size() - start;
    double mean = 0.0;
    for (std::size_t k = start; k < tr.size(); ++k) mean += tr.t[k];
    mean /= static_cast<double>(m);
    double var = 0.0;
    for (std::size_t k = start; k < tr.size(); ++k) var += (tr.t[k] - mean) * (tr.t[k] - mean);
    var /= static_cast<double>(m - 1);
    CHECK(mean <= p + 3.0 * std::sqrt(var / static_cast<double>(m)));
}

TEST_CASE("feasibility: emitted spend never exceeds availability") {
    const auto model = example1();
    const AwgnChannel ch{1.0};
    std::vector<std::pair<BufferConfig, Policy>> combos;
    combos.emplace_back(BufferConfig::ideal(), TruncatedGaussian{0.6});
    combos.emplace_back(BufferConfig{Architecture::hu, 1.0, 0.0}, TruncatedGaussian{0.625});
    combos.emplace_back(BufferConfig{Architecture::hus, 0.7, 0.01}, BudgetedGaussian{0.4});
    combos.emplace_back(BufferConfig{Architecture::hsu, 0.8, 0.02, 4.0},
                        SleepWake{0.2, GaussianOn{0.4}, HarvestModel::constant(0.05)});
    combos.emplace_back(BufferConfig{Architecture::hu, 1.0, 0.0}, SignedSqrtHarvest{});
    for (const auto& [cfg, pol] : combos) {
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const auto tr = run(model, cfg, pol, ch, 2000, seed);
            for (std::size_t k = 0; k < tr.size(); ++k)
                CHECK(tr.t[k] <= tr.avail[k] + kFeasibilityTol);
        }
    }
}
