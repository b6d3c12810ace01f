// Compares the serial reference kernels with the OpenMP path. Both must agree
// bit for bit: parallel loops only fill independent slots and reductions run
// serially in index order.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

#include "ehcap/capacity.hpp"
#include "ehcap/mutual_info.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using ehcap::Exec;

double time_ms(const std::function<void()>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

struct Case {
    std::string name;
    std::function<double(Exec)> run; // returns a checksum
};

} // namespace

int main(int argc, char** argv) {
    bool quick = false;
    for (int i = 1; i < argc; ++i)
        if (std::strcmp(argv[i], "--quick") == 0) quick = true;

    const ehcap::AwgnChannel ch{1.0};
    const auto example1 = ehcap::HarvestModel::discrete_uniform({0.25, 0.5, 0.75, 1.0});
    const std::int64_t path_n = quick ? 200'000 : 20'000'000;

    std::vector<Case> cases;
    cases.push_back({"harvest sample_path", [&](Exec mode) {
                         const auto path = example1.sample_path(path_n, 7, mode);
                         double s = 0.0;
                         for (double v : path) s += v;
                         return s;
                     }});
    cases.push_back({"mutual_information (gaussian grid)", [&](Exec mode) {
                         const auto dist =
                             ehcap::InputDistribution::gaussian_grid(2.0, quick ? 501 : 2001);
                         return ehcap::mutual_information(dist, ch, 1e-6, mode);
                     }});
    cases.push_back({"peak_average_capacity A=2 P=1", [&](Exec mode) {
                         ehcap::BaOptions opt;
                         opt.grid_points = quick ? 301 : 501;
                         return ehcap::peak_average_capacity(2.0, 1.0, ch, opt, mode).rate;
                     }});
    cases.push_back({"pe_capacity ey=2 ez=1", [&](Exec mode) {
                         ehcap::PeOptions opt;
                         opt.ba.grid_points = quick ? 301 : 501;
                         return ehcap::pe_capacity(2.0, 1.0, ch, true, opt, mode).rate;
                     }});
    if (!quick) // wide-support instance: the one place the solver kernels scale
        cases.push_back({"pe_capacity ey=30 (wide grid)", [&](Exec mode) {
                             return ehcap::pe_capacity(30.0, 1.0, ch, true, {}, mode).rate;
                         }});

#ifdef _OPENMP
    std::printf("openmp threads: %d\n", omp_get_max_threads());
#else
    std::printf("openmp: not enabled (parallel mode falls back to serial)\n");
#endif
    std::printf("%-38s %12s %12s %9s %7s\n", "kernel", "serial ms", "parallel ms", "speedup",
                "match");

    bool all_match = true;
    for (auto& c : cases) {
        double serial_val = 0.0, parallel_val = 0.0;
        const double ts = time_ms([&] { serial_val = c.run(Exec::serial); });
        const double tp = time_ms([&] { parallel_val = c.run(Exec::parallel); });
        const bool match = serial_val == parallel_val;
        all_match = all_match && match;
        std::printf("%-38s %12.2f %12.2f %8.2fx %7s\n", c.name.c_str(), ts, tp,
                    tp > 0.0 ? ts / tp : 0.0, match ? "yes" : "NO");
    }
    if (!all_match) {
        std::printf("FAIL: serial and parallel kernels disagree\n");
        return 1;
    }
    return 0;
}
