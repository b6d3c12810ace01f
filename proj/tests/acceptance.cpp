// End-to-end acceptance suite. Each numbered criterion prints exactly one
// PASS/FAIL line; the process exits with the number of failed criteria.
// argv[1] (optional): path to the CLI binary for the subprocess determinism
// check; the in-process check runs either way.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "ehcap/capacity.hpp"
#include "ehcap/cli.hpp"
#include "ehcap/sim.hpp"
#include "oracles.hpp"

using namespace ehcap;

namespace {

int g_failures = 0;

void run_criterion(int index, const std::string& what,
                   const std::function<bool(std::string&)>& body) {
    std::string note;
    bool ok = false;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        ok = body(note);
    } catch (const std::exception& e) {
        note = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!ok) ++g_failures;
    std::printf("%s criterion %d (%.1fs): %s%s%s\n", ok ? "PASS" : "FAIL", index, secs,
                what.c_str(), note.empty() ? "" : " -- ", note.c_str());
    std::fflush(stdout);
}

HarvestModel example1() { return HarvestModel::discrete_uniform({0.25, 0.5, 0.75, 1.0}); }

bool within(double a, double b, double tol) { return std::abs(a - b) <= tol; }

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

} // namespace

int main(int argc, char** argv) {
    const std::string cli_path = argc > 1 ? argv[1] : "";

    run_criterion(1, "closed-form capacity matches 0.5 ln(1 + E[Y]/sigma2) on 20 random pairs",
                  [](std::string& note) {
                      const auto t0 = std::chrono::steady_clock::now();
                      CounterRng rng(1001);
                      for (int i = 0; i < 20; ++i) {
                          const double ey = 5.0 * rng.uniform();
                          const double s2 = 0.1 + 3.0 * rng.uniform();
                          const double got = awgn_capacity(ey, {s2});
                          const double want = 0.5 * std::log(1.0 + ey / s2);
                          if (!within(got, want, 1e-12)) {
                              note = "mismatch at ey=" + std::to_string(ey);
                              return false;
                          }
                      }
                      const double secs = std::chrono::duration<double>(
                                              std::chrono::steady_clock::now() - t0)
                                              .count();
                      if (secs >= 1.0) {
                          note = "runtime bound (1 s) exceeded";
                          return false;
                      }
                      return true;
                  });

    run_criterion(
        2, "achievability: backed-off gaussian on the ideal store reaches capacity (5 seeds)",
        [](std::string& note) {
            const auto t0 = std::chrono::steady_clock::now();
            const auto model = example1();
            const double ey = model.mean();
            const double power = ey * (1.0 - 1e-3);
            const double cap = awgn_capacity(ey, {1.0});
            for (std::uint64_t seed = 1; seed <= 5; ++seed) {
                const auto tr =
                    run(model, BufferConfig::ideal(), TruncatedGaussian{power}, {1.0}, 1'000'000,
                        seed);
                const auto rep = report(tr, {1.0}, 201);
                if (!rep.feasible) {
                    note = "infeasible path at seed " + std::to_string(seed);
                    return false;
                }
                if (rep.truncation_rate >= 0.01) {
                    note = "truncation rate " + std::to_string(rep.truncation_rate);
                    return false;
                }
                if (!within(rep.empirical_rate, cap, 0.01)) {
                    note = "empirical rate " + std::to_string(rep.empirical_rate) + " vs " +
                           std::to_string(cap);
                    return false;
                }
            }
            const double secs =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            if (secs >= 60.0) {
                note = "runtime bound (60 s) exceeded";
                return false;
            }
            return true;
        });

    run_criterion(3, "peak-constrained solver matches exhaustive 2/3-point search to 1e-4",
                  [](std::string& note) {
                      const auto t0 = std::chrono::steady_clock::now();
                      const AwgnChannel ch{1.0};
                      for (double peak : {0.3, 0.5, 1.0}) {
                          const auto r = peak_average_capacity(
                              peak, std::numeric_limits<double>::infinity(), ch);
                          const double brute =
                              oracle::best_small_support_rate(peak, 1e30, ch.sigma2);
                          if (!within(r.rate, brute, 1e-4)) {
                              note = "A=" + std::to_string(peak) + ": solver " +
                                     std::to_string(r.rate) + " vs oracle " +
                                     std::to_string(brute);
                              return false;
                          }
                          if (r.certificate_gap > 1e-4) {
                              note = "certificate gap " + std::to_string(r.certificate_gap);
                              return false;
                          }
                      }
                      const double secs = std::chrono::duration<double>(
                                              std::chrono::steady_clock::now() - t0)
                                              .count();
                      if (secs >= 60.0) {
                          note = "runtime bound (60 s) exceeded";
                          return false;
                      }
                      return true;
                  });

    run_criterion(
        4, "harvest-use special cases: constant harvest and chi-square matched signaling",
        [](std::string& note) {
            const AwgnChannel ch{1.0};
            const double ey = 0.625;
            const auto hu = hu_capacity(HarvestModel::constant(ey), ch);
            const auto direct = peak_average_capacity(std::sqrt(ey), ey, ch);
            if (!within(hu.rate, direct.rate, 1e-6)) {
                note = "constant harvest mismatch";
                return false;
            }
            // X = +/- sqrt(Y) with Y chi-square: quantile atoms built from the
            // normal CDF, conditional means in closed form
            const int bins = 512;
            InputDistribution matched;
            double prev_edge = 0.0;
            for (int j = 0; j < bins; ++j) {
                double b_edge;
                if (j + 1 == bins) {
                    b_edge = std::numeric_limits<double>::infinity();
                } else {
                    const double target = 0.5 * (1.0 + static_cast<double>(j + 1) / bins);
                    double lo = 0.0, hi = 40.0;
                    for (int it = 0; it < 200; ++it) {
                        const double mid = 0.5 * (lo + hi);
                        (oracle::Phi(mid) < target ? lo : hi) = mid;
                    }
                    b_edge = 0.5 * (lo + hi);
                }
                const double cb = std::isinf(b_edge) ? 1.0 : oracle::Phi(b_edge);
                const double tb = std::isinf(b_edge) ? 0.0 : b_edge * oracle::phi(b_edge);
                const double seg =
                    (cb - oracle::Phi(prev_edge)) + prev_edge * oracle::phi(prev_edge) - tb;
                const double ybar = 2.0 * bins * seg;
                const double a = std::sqrt(std::max(ybar, 0.0));
                matched.mass_points.push_back({-a, 0.5 / bins});
                matched.mass_points.push_back({a, 0.5 / bins});
                prev_edge = b_edge;
            }
            const double mi = mutual_information(matched, ch);
            if (!within(mi, awgn_capacity(1.0, ch), 0.01)) {
                note = "matched signaling " + std::to_string(mi);
                return false;
            }
            return true;
        });

    run_criterion(
        5, "processing energy: no-cost limit, starved node, on-off split identity",
        [](std::string& note) {
            const AwgnChannel ch{1.0};
            for (double ey : {0.5, 1.0, 2.0}) {
                const auto r = pe_capacity(ey, 0.0, ch, true);
                if (!within(r.rate, awgn_capacity(ey, ch), 1e-3)) {
                    note = "ez=0 mismatch at ey=" + std::to_string(ey);
                    return false;
                }
            }
            if (pe_capacity(0.5, 1.0, ch, false).rate != 0.0) {
                note = "no-sleep rate should be 0";
                return false;
            }
            if (!(pe_capacity(0.5, 1.0, ch, true).rate > 0.0)) {
                note = "sleep capacity should be positive";
                return false;
            }
            CounterRng rng(77);
            for (int i = 0; i < 10; ++i) {
                const double p = 0.05 + 0.85 * rng.uniform();
                const double var = 0.3 + 2.7 * rng.uniform();
                InputDistribution mix = InputDistribution::gaussian_grid(var);
                mix.zero_atom = p;
                for (auto& w : mix.density->weights) w *= 1.0 - p;
                const auto s = onoff_decomposition(mix, ch);
                const double recombined = s.i_onoff + (1.0 - p) * s.i_gaussian_part;
                if (!within(s.i_total, recombined, 2e-3)) {
                    note = "identity off by " + std::to_string(s.i_total - recombined);
                    return false;
                }
            }
            return true;
        });

    run_criterion(
        6, "sleep capacity is monotone and midpoint concave over a 10-point harvest grid",
        [](std::string& note) {
            const AwgnChannel ch{1.0};
            PeOptions opt;
            opt.grid_half_width = 8.0 * std::sqrt(ch.sigma2 + 4.0);
            std::vector<double> eys, rates;
            for (int i = 0; i < 10; ++i) eys.push_back(0.4 + 0.4 * i);
            for (double ey : eys) rates.push_back(pe_capacity(ey, 1.0, ch, true, opt).rate);
            for (std::size_t i = 1; i < rates.size(); ++i)
                if (rates[i] < rates[i - 1] - 1e-9) {
                    note = "not monotone at index " + std::to_string(i);
                    return false;
                }
            for (std::size_t i = 1; i + 1 < rates.size(); ++i) {
                if (rates[i] < 0.5 * (rates[i - 1] + rates[i + 1]) - 2e-3) {
                    note = "concavity violated at index " + std::to_string(i);
                    return false;
                }
            }
            return true;
        });

    run_criterion(
        7, "architecture comparison: ordering, crossover and the 0.580882 budget",
        [](std::string& note) {
            const auto t0 = std::chrono::steady_clock::now();
            const AwgnChannel ch{1.0};
            const auto model = example1();
            const double ey = model.mean();
            const double r_hu = hu_capacity(model, ch).rate;

            bool crossed = false;
            double prev_sign = 0.0;
            for (int i = 0; i < 20; ++i) {
                const double b1 = 0.05 + (1.0 - 0.05) * i / 19.0;
                const double c = hus_budget(model, b1, 0.0);
                const double r_hsu = awgn_capacity(std::max(b1 * ey, 0.0), ch);
                const double r_hus = awgn_capacity(c, ch);
                if (r_hus < r_hsu - 1e-12) {
                    note = "ordering violated at beta1=" + std::to_string(b1);
                    return false;
                }
                if (i == 19 && !within(r_hus, r_hsu, 1e-9)) {
                    note = "beta1=1 rates differ by " + std::to_string(r_hus - r_hsu);
                    return false;
                }
                const double sign = r_hu - r_hsu;
                if (i > 0 && sign * prev_sign < 0.0) crossed = true;
                prev_sign = sign;
            }
            if (!crossed) {
                note = "no crossover between no-buffer and store-first rates";
                return false;
            }
            if (!within(hus_budget(model, 0.7, 0.0), 1.975 / 3.4, 1e-6)) {
                note = "budget " + std::to_string(hus_budget(model, 0.7, 0.0));
                return false;
            }
            const double secs =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            if (secs >= 120.0) {
                note = "runtime bound (120 s) exceeded";
                return false;
            }
            return true;
        });

    run_criterion(
        8, "sleep-wake sweep: heavy sleep when starved, none when rich, optimal curve dominates",
        [](std::string& note) {
            const AwgnChannel ch{1.0};
            const double ez = 1.0;
            std::vector<double> eys;
            for (int i = 0; i < 9; ++i)
                eys.push_back(0.2 * std::pow(250.0, static_cast<double>(i) / 8.0));
            eys.front() = 0.2;
            eys.back() = 50.0;

            PeOptions opt;
            opt.grid_half_width = 8.0 * std::sqrt(ch.sigma2 + eys.back());
            for (double ey : eys) {
                const auto best = pe_capacity(ey, ez, ch, true, opt);
                const auto fixed = pe_capacity_fixed_sleep(ey, ez, 0.25, ch, opt);
                const double nosleep = awgn_capacity(std::max(ey - ez, 0.0), ch);
                if (best.rate < nosleep - 1e-6 || best.rate < fixed.rate - 1e-6) {
                    note = "optimal curve dips below a pinned curve at ey=" + std::to_string(ey);
                    return false;
                }
                if (ey == 0.2 && best.dist.zero_atom < 0.5) {
                    note = "sleep probability " + std::to_string(best.dist.zero_atom) +
                           " at ey=0.2";
                    return false;
                }
                if (ey == 50.0 && best.dist.zero_atom > 0.01) {
                    note = "sleep probability " + std::to_string(best.dist.zero_atom) +
                           " at ey=50";
                    return false;
                }
            }
            return true;
        });

    run_criterion(
        9, "fixed seeds give byte-identical CSV from every subcommand",
        [&cli_path](std::string& note) {
            const std::vector<std::vector<std::string>> commands = {
                {"capacity", "--harvest", "constant:1"},
                {"capacity", "--ez", "1", "--sweep", "ey:0.5:2:3", "--grid-points", "201"},
                {"architectures", "--sweep", "beta1:0.25:1:4", "--grid-points", "201"},
                {"simulate", "--steps", "2000", "--seed", "3"},
            };
            for (const auto& cmd : commands) {
                std::ostringstream a, b, devnull;
                if (cli::run(cmd, a, devnull) != 0 || cli::run(cmd, b, devnull) != 0) {
                    note = "command failed: " + cmd[0];
                    return false;
                }
                if (a.str() != b.str()) {
                    note = "in-process outputs differ for " + cmd[0];
                    return false;
                }
            }
            if (!cli_path.empty()) {
                const std::string f1 = "acceptance_cli_1.csv", f2 = "acceptance_cli_2.csv";
                const std::string base = "\"" + cli_path +
                                         "\" simulate --steps 2000 --seed 3 --out ";
                if (std::system((base + f1 + " > /dev/null 2>&1").c_str()) != 0 ||
                    std::system((base + f2 + " > /dev/null 2>&1").c_str()) != 0) {
                    note = "subprocess run failed";
                    return false;
                }
                const bool same = slurp(f1) == slurp(f2) && !slurp(f1).empty();
                std::remove(f1.c_str());
                std::remove(f2.c_str());
                if (!same) {
                    note = "subprocess trace files differ";
                    return false;
                }
            }
            return true;
        });

    if (g_failures == 0)
        std::printf("all 9 acceptance criteria passed\n");
    else
        std::printf("%d acceptance criteria FAILED\n", g_failures);
    return g_failures;
}
