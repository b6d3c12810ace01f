#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "ehcap/cli.hpp"
#include "testutil.hpp"

using namespace ehcap;

namespace {

struct CliResult {
    int code = 0;
    std::string out;
    std::string err;
};

CliResult call(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

struct TempFile {
    std::string path;
    explicit TempFile(std::string p) : path(std::move(p)) {}
    ~TempFile() { std::remove(path.c_str()); }
};

} // namespace

TEST_CASE("harvest spec strings") {
    CHECK(cli::parse_harvest("constant:0.5").mean() == 0.5);
    CHECK(cli::parse_harvest("discrete:0.25,0.5,0.75,1").mean() == 0.625);
    CHECK(cli::parse_harvest("discrete:1,2@0.25,0.75").mean() == 1.75);
    CHECK(cli::parse_harvest("chisq:2").mean() == 2.0);
    CHECK(cli::parse_harvest("periodic:constant:0|constant:1").mean() == 0.5);
    CHECK_THROWS(cli::parse_harvest("nope:1"));
    CHECK_THROWS(cli::parse_harvest("discrete:1,2@0.5,0.6"));
    CHECK_THROWS(cli::parse_harvest("constant:abc"));
}

TEST_CASE("single-point capacity in bits is exactly one half at unit snr") {
    const auto r = call({"capacity", "--harvest", "constant:1", "--sigma2", "1", "--unit", "bits"});
    REQUIRE(r.code == cli::kOk);
    const auto rows = parse_csv(r.out);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0][0] == "parameter");
    CHECK(rows[1][1] == "0.5");
}

TEST_CASE("unit conversion divides rates by ln 2 exactly") {
    const auto nats = call({"capacity", "--harvest", "constant:1"});
    const auto bits = call({"capacity", "--harvest", "constant:1", "--unit", "bits"});
    const double rn = std::stod(parse_csv(nats.out)[1][1]);
    const double rb = std::stod(parse_csv(bits.out)[1][1]);
    CHECK(close_to(rb, rn / std::numbers::ln2, 1e-9));
}

TEST_CASE("sleep-wake sweep emits the three comparison columns") {
    const auto r = call({"capacity", "--ez", "1", "--sweep", "ey:0.5:2:4", "--grid-points", "201"});
    REQUIRE(r.code == cli::kOk);
    const auto rows = parse_csv(r.out);
    REQUIRE(rows.size() == 5);
    CHECK(rows[0] == std::vector<std::string>{"ey", "rate_nosleep", "rate_fixed_sleep",
                                              "rate_optimal", "p_sleep", "certificate_gap"});
    // at ey = 0.5 < ez the no-sleep rate is zero but sleeping earns something
    CHECK(std::stod(rows[1][1]) == 0.0);
    CHECK(std::stod(rows[1][3]) > 0.0);
    // optimal-p column dominates the pinned ones everywhere
    for (std::size_t i = 1; i < rows.size(); ++i) {
        CHECK(std::stod(rows[i][3]) >= std::stod(rows[i][1]) - 1e-6);
        CHECK(std::stod(rows[i][3]) >= std::stod(rows[i][2]) - 1e-6);
    }
}

TEST_CASE("architecture sweep reproduces the qualitative ordering") {
    const auto r = call({"architectures", "--sweep", "beta1:0.05:1:8", "--grid-points", "301"});
    REQUIRE(r.code == cli::kOk);
    const auto rows = parse_csv(r.out);
    REQUIRE(rows.size() == 9);
    CHECK(rows[0] == std::vector<std::string>{"beta1", "r_hu", "r_hsu", "r_hus"});
    const double r_hu_first = std::stod(rows[1][1]);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        CHECK(std::stod(rows[i][1]) == r_hu_first); // no-store rate ignores beta1
        CHECK(std::stod(rows[i][3]) >= std::stod(rows[i][2]) - 1e-9);
    }
    // poor storage: better off without the buffer
    CHECK(std::stod(rows[1][1]) > std::stod(rows[1][2]));
    // perfect storage: both buffered architectures meet
    const auto& last = rows.back();
    CHECK(close_to(std::stod(last[2]), std::stod(last[3]), 1e-8));
}

TEST_CASE("simulate writes the trace schema and a summary row") {
    TempFile trace("cli_test_trace.csv");
    const auto r = call({"simulate", "--policy", "sleepwake", "--sleep-p", "1", "--steps", "10",
                         "--seed", "5", "--out", trace.path});
    REQUIRE(r.code == cli::kOk);
    const auto rows = parse_csv(slurp(trace.path));
    REQUIRE(rows.size() == 11);
    CHECK(rows[0] == std::vector<std::string>{"k", "e", "y", "t", "x", "w", "slept", "truncated"});
    for (std::size_t i = 1; i < rows.size(); ++i) {
        CHECK(rows[i][3] == "0"); // t column all zero under forced sleep
        CHECK(rows[i][6] == "1");
    }
    const auto summary = parse_csv(r.out);
    REQUIRE(summary.size() == 2);
    CHECK(summary[0][0] == "mean_t");
    CHECK(summary[1][4] == "1"); // feasible
}

TEST_CASE("default store-first simulation is feasible and reproducible") {
    TempFile a("cli_test_a.csv"), b("cli_test_b.csv");
    const auto r1 = call({"simulate", "--steps", "5000", "--seed", "7", "--out", a.path});
    const auto r2 = call({"simulate", "--steps", "5000", "--seed", "7", "--out", b.path});
    REQUIRE(r1.code == cli::kOk);
    REQUIRE(r2.code == cli::kOk);
    CHECK(r1.out == r2.out);
    CHECK(slurp(a.path) == slurp(b.path));
    CHECK(parse_csv(r1.out)[1][4] == "1");
}

TEST_CASE("capacity and architecture outputs are byte-stable") {
    const std::vector<std::string> cap = {"capacity",   "--ez",          "1",  "--sweep",
                                          "ey:0.5:2:3", "--grid-points", "201"};
    CHECK(call(cap).out == call(cap).out);
    const std::vector<std::string> arch = {"architectures", "--sweep", "beta1:0.2:1:4",
                                           "--grid-points", "201"};
    CHECK(call(arch).out == call(arch).out);
}

TEST_CASE("plot script emission") {
    TempFile csv("cli_test_plot.csv"), gp("cli_test_plot.gp");
    const auto r = call({"architectures", "--sweep", "beta1:0.5:1:2", "--grid-points", "101",
                         "--out", csv.path, "--plot-script", gp.path});
    REQUIRE(r.code == cli::kOk);
    const auto script = slurp(gp.path);
    CHECK(script.find("cli_test_plot.csv") != std::string::npos);
    CHECK(script.find("plot ") != std::string::npos);
}

TEST_CASE("invalid specs exit with code 2") {
    CHECK(call({"capacity", "--harvest", "bogus:1"}).code == cli::kInvalidSpec);
    CHECK(call({"capacity", "--unit", "furlongs"}).code == cli::kInvalidSpec);
    CHECK(call({"capacity", "--sweep", "ey:1:2:1"}).code == cli::kInvalidSpec);
    CHECK(call({"capacity", "--sweep", "beta1:1:2:4"}).code == cli::kInvalidSpec);
    CHECK(call({"simulate", "--arch", "warp"}).code == cli::kInvalidSpec);
    CHECK(call({"simulate", "--policy", "warp"}).code == cli::kInvalidSpec);
    CHECK(call({"--no-such-flag"}).code == cli::kInvalidSpec);
    CHECK(call({}).code == cli::kInvalidSpec);
}

TEST_CASE("help succeeds") { CHECK(call({"--help"}).code == 0); }
