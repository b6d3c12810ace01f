#include "ehcap/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "ehcap/capacity.hpp"
#include "ehcap/csv.hpp"
#include "ehcap/errors.hpp"

namespace ehcap::cli {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<std::string> split(const std::string& s, char delim) {
    std::vector<std::string> parts;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, delim)) parts.push_back(item);
    if (!s.empty() && s.back() == delim) parts.emplace_back();
    return parts;
}

double parse_number(const std::string& s, const char* what) {
    if (s == "inf") return kInf;
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument(std::string(what) + ": cannot parse '" + s + "'");
    }
}

struct SweepSpec {
    std::string var;
    double min = 0.0;
    double max = 0.0;
    int steps = 0;
};

SweepSpec parse_sweep(const std::string& s) {
    const auto parts = split(s, ':');
    if (parts.size() != 4) throw std::invalid_argument("sweep: expected var:min:max:steps");
    SweepSpec sw;
    sw.var = parts[0];
    sw.min = parse_number(parts[1], "sweep min");
    sw.max = parse_number(parts[2], "sweep max");
    sw.steps = static_cast<int>(parse_number(parts[3], "sweep steps"));
    if (!std::isfinite(sw.min) || !std::isfinite(sw.max) || sw.min > sw.max)
        throw std::invalid_argument("sweep: bounds must be finite with min <= max");
    if (sw.steps < 2) throw std::invalid_argument("sweep: steps must be >= 2");
    return sw;
}

std::vector<double> sweep_points(const SweepSpec& sw, bool log_spaced) {
    std::vector<double> pts(static_cast<std::size_t>(sw.steps));
    if (log_spaced) {
        if (!(sw.min > 0.0)) throw std::invalid_argument("sweep: log spacing needs min > 0");
        const double l0 = std::log(sw.min), l1 = std::log(sw.max);
        for (int i = 0; i < sw.steps; ++i)
            pts[static_cast<std::size_t>(i)] =
                std::exp(l0 + (l1 - l0) * static_cast<double>(i) / (sw.steps - 1));
        pts.front() = sw.min;
        pts.back() = sw.max;
    } else {
        for (int i = 0; i < sw.steps; ++i)
            pts[static_cast<std::size_t>(i)] =
                sw.min + (sw.max - sw.min) * static_cast<double>(i) / (sw.steps - 1);
        pts.back() = sw.max;
    }
    return pts;
}

// file target falling back to a stream
class OutTarget {
public:
    OutTarget(const std::string& path, std::ostream& fallback) : os_(&fallback) {
        if (!path.empty()) {
            file_.open(path, std::ios::binary | std::ios::trunc);
            if (!file_) throw std::invalid_argument("cannot open output file: " + path);
            os_ = &file_;
        }
    }
    std::ostream& stream() { return *os_; }

private:
    std::ofstream file_;
    std::ostream* os_;
};

void write_plot_script(const std::string& path, const std::string& csv, int n_cols) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::invalid_argument("cannot open plot script file: " + path);
    f << "set datafile separator ','\n"
      << "set key autotitle columnhead\n"
      << "set grid\n"
      << "plot ";
    for (int c = 2; c <= n_cols; ++c) {
        if (c > 2) f << ", ";
        f << "'" << (csv.empty() ? "-" : csv) << "' using 1:" << c << " with lines";
    }
    f << "\n";
}

struct CommonArgs {
    double sigma2 = 1.0;
    std::string harvest = "discrete:0.25,0.5,0.75,1";
    std::string unit = "nats";
    std::string out;
    std::string plot_script;
    int grid_points = 501;
};

double unit_divisor(const std::string& unit) {
    if (unit == "nats") return 1.0;
    if (unit == "bits") return std::numbers::ln2;
    throw std::invalid_argument("unit must be nats or bits");
}

struct CapacityArgs : CommonArgs {
    double ez = 0.0;
    std::string sweep;
    bool log_sweep = false;
    bool no_sleep = false;
    double fixed_p = 0.25;
    double grid_half_width = 0.0;
};

int cmd_capacity(const CapacityArgs& a, std::ostream& out) {
    const AwgnChannel ch{a.sigma2};
    ch.validate();
    const double div = unit_divisor(a.unit);
    OutTarget target(a.out, out);
    CsvWriter csv(target.stream());

    BaOptions ba;
    ba.grid_points = a.grid_points;

    if (a.sweep.empty()) {
        const auto model = parse_harvest(a.harvest);
        const double ey = model.mean();
        double rate = 0.0, p_sleep = 0.0, gap = 0.0;
        if (a.ez > 0.0) {
            PeOptions opt{ba, a.grid_half_width};
            const auto r = pe_capacity(ey, a.ez, ch, !a.no_sleep, opt);
            rate = r.rate;
            p_sleep = r.dist.zero_atom;
            gap = r.certificate_gap;
        } else {
            rate = awgn_capacity(ey, ch);
        }
        csv.field("parameter").field("rate").field("p_sleep").field("certificate_gap");
        csv.endrow();
        csv.field(ey).field(rate / div).field(p_sleep).field(gap);
        csv.endrow();
        if (!a.plot_script.empty()) write_plot_script(a.plot_script, a.out, 2);
        return kOk;
    }

    const auto sw = parse_sweep(a.sweep);
    if (sw.var != "ey") throw std::invalid_argument("capacity sweep variable must be ey");
    const auto pts = sweep_points(sw, a.log_sweep);

    if (a.ez > 0.0) {
        // sleep-wake comparison: no sleep (closed form), pinned p, optimal p
        const double shared_half = a.grid_half_width > 0.0
                                       ? a.grid_half_width
                                       : 8.0 * std::sqrt(ch.sigma2 + pts.back());
        PeOptions opt{ba, shared_half};
        struct Row {
            double ey, nosleep, fixed, optimal, p, gap;
        };
        std::vector<Row> rows(pts.size());
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const double ey = pts[i];
            const auto fixed = pe_capacity_fixed_sleep(ey, a.ez, a.fixed_p, ch, opt);
            const auto best = pe_capacity(ey, a.ez, ch, true, opt);
            rows[i] = {ey,         awgn_capacity(std::max(ey - a.ez, 0.0), ch),
                       fixed.rate, best.rate,
                       best.dist.zero_atom, best.certificate_gap};
        }
        csv.field("ey")
            .field("rate_nosleep")
            .field("rate_fixed_sleep")
            .field("rate_optimal")
            .field("p_sleep")
            .field("certificate_gap");
        csv.endrow();
        for (const auto& r : rows) {
            csv.field(r.ey)
                .field(r.nosleep / div)
                .field(r.fixed / div)
                .field(r.optimal / div)
                .field(r.p)
                .field(r.gap);
            csv.endrow();
        }
        if (!a.plot_script.empty()) write_plot_script(a.plot_script, a.out, 4);
    } else {
        csv.field("ey").field("rate").field("p_sleep").field("certificate_gap");
        csv.endrow();
        for (double ey : pts) {
            csv.field(ey).field(awgn_capacity(ey, ch) / div).field(0.0).field(0.0);
            csv.endrow();
        }
        if (!a.plot_script.empty()) write_plot_script(a.plot_script, a.out, 2);
    }
    return kOk;
}

struct ArchArgs : CommonArgs {
    double beta2 = 0.0;
    std::string sweep = "beta1:0.05:1:20";
    int chi_atoms = 64;
};

int cmd_architectures(const ArchArgs& a, std::ostream& out) {
    const AwgnChannel ch{a.sigma2};
    ch.validate();
    const double div = unit_divisor(a.unit);
    const auto model = parse_harvest(a.harvest);
    const double ey = model.mean();

    const auto sw = parse_sweep(a.sweep);
    if (sw.var != "beta1") throw std::invalid_argument("architectures sweep variable must be beta1");
    if (!(sw.min > 0.0) || sw.max > 1.0)
        throw std::invalid_argument("architectures: beta1 must stay in (0,1]");
    const auto pts = sweep_points(sw, false);

    BaOptions ba;
    ba.grid_points = a.grid_points;
    const double r_hu = hu_capacity(model, ch, ba, a.chi_atoms).rate;

    OutTarget target(a.out, out);
    CsvWriter csv(target.stream());
    csv.field("beta1").field("r_hu").field("r_hsu").field("r_hus");
    csv.endrow();
    for (double b1 : pts) {
        const double r_hsu = awgn_capacity(std::max(b1 * ey - a.beta2, 0.0), ch);
        const double r_hus = awgn_capacity(hus_budget(model, b1, a.beta2), ch);
        csv.field(b1).field(r_hu / div).field(r_hsu / div).field(r_hus / div);
        csv.endrow();
    }
    if (!a.plot_script.empty()) write_plot_script(a.plot_script, a.out, 4);
    return kOk;
}

struct SimArgs : CommonArgs {
    std::string arch = "hsu";
    double beta1 = 1.0;
    double beta2 = 0.0;
    double gamma = kInf;
    std::string policy = "trunc";
    double power = 0.0; // 0: derive from the architecture budget
    double sleep_p = 0.0;
    double ez = 0.0;
    std::int64_t steps = 10000;
    std::uint64_t seed = 1;
    int bins = 201;
    std::string summary_out;
};

int cmd_simulate(const SimArgs& a, std::ostream& out) {
    const AwgnChannel ch{a.sigma2};
    ch.validate();
    const double div = unit_divisor(a.unit);
    const auto model = parse_harvest(a.harvest);
    const double ey = model.mean();

    BufferConfig cfg;
    if (a.arch == "hsu")
        cfg.arch = Architecture::hsu;
    else if (a.arch == "hu")
        cfg.arch = Architecture::hu;
    else if (a.arch == "hus")
        cfg.arch = Architecture::hus;
    else
        throw std::invalid_argument("arch must be hsu, hu or hus");
    cfg.beta1 = a.beta1;
    cfg.beta2 = a.beta2;
    cfg.gamma = a.gamma;
    cfg.validate();

    double power = a.power;
    if (power <= 0.0) {
        BudgetInputs in;
        in.ey = ey;
        in.ez = a.ez;
        in.beta1 = a.beta1;
        in.beta2 = a.beta2;
        if (a.policy == "sleepwake") {
            power = budget(BudgetFamily::processing, in);
        } else if (cfg.arch == Architecture::hus) {
            in.c = hus_budget(model, a.beta1, a.beta2);
            power = budget(BudgetFamily::hus, in);
        } else if (cfg.arch == Architecture::hsu) {
            power = budget(BudgetFamily::hsu, in);
        } else {
            power = budget(BudgetFamily::ideal, in);
        }
    }

    Policy policy;
    if (a.policy == "trunc") {
        policy = TruncatedGaussian{power};
    } else if (a.policy == "budgeted") {
        policy = BudgetedGaussian{power};
    } else if (a.policy == "sleepwake") {
        policy = SleepWake{a.sleep_p, GaussianOn{std::max(power, 0.0)},
                           HarvestModel::constant(a.ez)};
    } else if (a.policy == "signsqrt") {
        policy = SignedSqrtHarvest{};
    } else {
        throw std::invalid_argument("policy must be trunc, budgeted, sleepwake or signsqrt");
    }

    const auto trace = run(model, cfg, policy, ch, a.steps, a.seed);
    {
        OutTarget target(a.out, out);
        write_trace_csv(target.stream(), trace);
    }

    const auto rep = report(trace, ch, a.bins);
    const auto write_summary = [&](std::ostream& os) {
        CsvWriter csv(os);
        csv.field("mean_t").field("drift").field("truncation_rate").field("empirical_rate").field(
            "feasible");
        csv.endrow();
        csv.field(rep.mean_t)
            .field(rep.drift)
            .field(rep.truncation_rate)
            .field(rep.empirical_rate / div)
            .field(rep.feasible ? 1 : 0);
        csv.endrow();
    };
    if (!a.summary_out.empty()) {
        OutTarget target(a.summary_out, out);
        write_summary(target.stream());
    }
    if (!a.out.empty() || a.summary_out.empty()) write_summary(out);
    return kOk;
}

} // namespace

HarvestModel parse_harvest(const std::string& spec) {
    const auto colon = spec.find(':');
    const std::string head = spec.substr(0, colon);
    const std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);
    if (head == "constant") {
        return HarvestModel::constant(parse_number(rest, "constant harvest"));
    }
    if (head == "chisq") {
        return HarvestModel::chi_square(parse_number(rest, "chisq harvest"));
    }
    if (head == "discrete") {
        const auto at = rest.find('@');
        const auto value_part = split(rest.substr(0, at), ',');
        std::vector<double> values;
        for (const auto& v : value_part) values.push_back(parse_number(v, "discrete value"));
        if (at == std::string::npos) return HarvestModel::discrete_uniform(std::move(values));
        std::vector<double> probs;
        for (const auto& p : split(rest.substr(at + 1), ','))
            probs.push_back(parse_number(p, "discrete prob"));
        return HarvestModel::discrete(std::move(values), std::move(probs));
    }
    if (head == "periodic") {
        std::vector<HarvestModel> phases;
        for (const auto& ph : split(rest, '|')) phases.push_back(parse_harvest(ph));
        return HarvestModel::periodic(std::move(phases));
    }
    throw std::invalid_argument("harvest spec: unknown kind '" + head + "'");
}

void write_trace_csv(std::ostream& out, const SimTrace& trace) {
    CsvWriter csv(out);
    csv.field("k").field("e").field("y").field("t").field("x").field("w").field("slept").field(
        "truncated");
    csv.endrow();
    for (std::size_t k = 0; k < trace.size(); ++k) {
        csv.field(static_cast<long long>(k))
            .field(trace.e[k])
            .field(trace.y[k])
            .field(trace.t[k])
            .field(trace.x[k])
            .field(trace.w[k])
            .field(static_cast<int>(trace.slept[k]))
            .field(static_cast<int>(trace.truncated[k]));
        csv.endrow();
    }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"energy-harvesting AWGN capacity toolkit"};
    app.name("ehcap");
    app.require_subcommand(1);

    CapacityArgs cap;
    auto* c = app.add_subcommand("capacity", "rate tables and sleep-wake sweeps");
    c->add_option("--sigma2", cap.sigma2, "noise variance");
    c->add_option("--harvest", cap.harvest, "harvest model spec");
    c->add_option("--ez", cap.ez, "mean processing energy E[Z]");
    c->add_option("--sweep", cap.sweep, "ey:min:max:steps");
    c->add_flag("--log-sweep", cap.log_sweep, "log-spaced sweep points");
    c->add_flag("--no-sleep", cap.no_sleep, "disable the sleep mode");
    c->add_option("--fixed-p", cap.fixed_p, "pinned sleep probability column");
    c->add_option("--grid-points", cap.grid_points, "solver amplitude grid size");
    c->add_option("--grid-half-width", cap.grid_half_width, "solver amplitude grid half width");
    c->add_option("--unit", cap.unit, "nats or bits");
    c->add_option("--out", cap.out, "output CSV path (default stdout)");
    c->add_option("--plot-script", cap.plot_script, "write a gnuplot script here");

    ArchArgs arch;
    auto* r = app.add_subcommand("architectures", "compare HU / HSU / HUS rates");
    r->add_option("--sigma2", arch.sigma2, "noise variance");
    r->add_option("--harvest", arch.harvest, "harvest model spec");
    r->add_option("--beta2", arch.beta2, "leakage per slot");
    r->add_option("--sweep", arch.sweep, "beta1:min:max:steps");
    r->add_option("--chi-atoms", arch.chi_atoms, "quantile atoms for chi-square harvests");
    r->add_option("--grid-points", arch.grid_points, "solver amplitude grid size");
    r->add_option("--unit", arch.unit, "nats or bits");
    r->add_option("--out", arch.out, "output CSV path (default stdout)");
    r->add_option("--plot-script", arch.plot_script, "write a gnuplot script here");

    SimArgs sim;
    auto* s = app.add_subcommand("simulate", "Monte-Carlo feasibility run");
    s->add_option("--sigma2", sim.sigma2, "noise variance");
    s->add_option("--harvest", sim.harvest, "harvest model spec");
    s->add_option("--arch", sim.arch, "hsu, hu or hus");
    s->add_option("--beta1", sim.beta1, "storage efficiency");
    s->add_option("--beta2", sim.beta2, "leakage per slot");
    s->add_option("--gamma", sim.gamma, "buffer capacity");
    s->add_option("--policy", sim.policy, "trunc, budgeted, sleepwake or signsqrt");
    s->add_option("--power", sim.power, "signaling variance (0: use the budget)");
    s->add_option("--sleep-p", sim.sleep_p, "voluntary sleep probability");
    s->add_option("--ez", sim.ez, "per-slot processing energy");
    s->add_option("--steps,-n", sim.steps, "number of slots");
    s->add_option("--seed", sim.seed, "random seed");
    s->add_option("--bins", sim.bins, "histogram bins for the empirical rate");
    s->add_option("--unit", sim.unit, "nats or bits");
    s->add_option("--out", sim.out, "trace CSV path (default stdout)");
    s->add_option("--summary-out", sim.summary_out, "summary CSV path");

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(std::move(rev));
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kInvalidSpec;
    }

    try {
        if (c->parsed()) return cmd_capacity(cap, out);
        if (r->parsed()) return cmd_architectures(arch, out);
        if (s->parsed()) return cmd_simulate(sim, out);
    } catch (const InfeasibleEnergyError& e) {
        err << "infeasible: " << e.what() << "\n";
        return kInfeasible;
    } catch (const SolverError& e) {
        err << "solver failure: " << e.what() << "\n";
        return kSolverFailure;
    } catch (const QuadratureError& e) {
        err << "solver failure: " << e.what() << "\n";
        return kSolverFailure;
    } catch (const MissingDistributionError& e) {
        err << "invalid spec: " << e.what() << "\n";
        return kInvalidSpec;
    } catch (const std::invalid_argument& e) {
        err << "invalid spec: " << e.what() << "\n";
        return kInvalidSpec;
    }
    return kInvalidSpec;
}

} // namespace ehcap::cli
