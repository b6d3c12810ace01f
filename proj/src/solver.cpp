#include "ehcap/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "ehcap/errors.hpp"

namespace ehcap {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kQFloor = 1e-300;
const double kLogQFloor = std::log(kQFloor);

// Per-grid state: the transition kernel is fixed by (grid, sigma2), so solves
// at different multipliers and the certificate evaluation all reuse it.
class BaWorkspace {
public:
    BaWorkspace(const std::vector<double>& grid, const AwgnChannel& ch, const BaOptions& opt,
                Exec mode)
        : x_(grid), opt_(opt), mode_(mode), sigma2_(ch.sigma2) {
        const double sigma = ch.sigma();
        double lo = x_.front(), hi = x_.back();
        for (double v : x_) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        lo -= opt.tail_sigmas * sigma;
        hi += opt.tail_sigmas * sigma;
        nw_ = 257;
        while ((hi - lo) / static_cast<double>(nw_ - 1) > opt.quad_spacing * sigma)
            nw_ = 2 * (nw_ - 1) + 1;
        nx_ = static_cast<std::int64_t>(x_.size());
        // below ~100k kernel cells a sweep is microseconds of work and the
        // fork/join tax dominates; run those workspaces serially
        if (nx_ * nw_ < 100'000) mode_ = Exec::serial;
        w_.resize(nw_);
        quadw_.assign(nw_, 0.0);
        const double h = (hi - lo) / static_cast<double>(nw_ - 1);
        for (std::int64_t k = 0; k < nw_; ++k) {
            w_[k] = lo + h * static_cast<double>(k);
            quadw_[k] = (k == 0 || k == nw_ - 1) ? 0.5 * h : h;
        }
        // K row-major over outputs, Kt row-major over inputs
        K_.resize(static_cast<std::size_t>(nx_) * nw_);
        Kt_.resize(static_cast<std::size_t>(nx_) * nw_);
        const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi * sigma2_);
        const double inv_two_s2 = 0.5 / sigma2_;
        parallel_for(nx_, mode_, [&](std::int64_t i) {
            for (std::int64_t k = 0; k < nw_; ++k) {
                const double d = w_[k] - x_[i];
                K_[static_cast<std::size_t>(i) * nw_ + k] = norm * std::exp(-d * d * inv_two_s2);
            }
        });
        parallel_for(nw_, mode_, [&](std::int64_t k) {
            for (std::int64_t i = 0; i < nx_; ++i)
                Kt_[static_cast<std::size_t>(k) * nx_ + i] =
                    K_[static_cast<std::size_t>(i) * nw_ + k];
        });
        phi_logphi_ = -0.5 * std::log(2.0 * std::numbers::pi * sigma2_) - 0.5;
        q_.resize(nw_);
        lq_.resize(nw_);
        d_.resize(nx_);
    }

    std::int64_t nx() const { return nx_; }
    const std::vector<double>& info_density() const { return d_; }

    struct RunResult {
        double rate = 0.0;
        double avg_cost = 0.0;
        double gap = kInf; // Arimoto bound gap at the final iterate
        int sweeps = 0;
    };

    // Statistics of the current law without touching it.
    RunResult evaluate(std::vector<double>& p, const std::vector<double>& cost, double lambda,
                       double clamp0, std::int64_t zero_idx) {
        return run(p, cost, lambda, clamp0, zero_idx, kInf, 1);
    }

    // Blahut-Arimoto at fixed lambda with safeguarded overrelaxation: an
    // exponent step theta > 1 has the same fixed points (s_i constant on the
    // support either way) but moves the slow modes of spread-out optima much
    // faster; steps that lower the Lagrangian are rolled back. Masses are
    // floored so no point is ever absorbed at zero, and the stopping gap is
    // the Arimoto dual bound at the current iterate, which is valid whatever
    // the step history was. sweep_budget >= 0 caps the work and returns the
    // best estimate so far (good enough while steering the multiplier);
    // otherwise failing to reach gap_tol throws.
    RunResult run(std::vector<double>& p, const std::vector<double>& cost, double lambda,
                  double clamp0, std::int64_t zero_idx, double gap_tol, int sweep_budget = -1) {
        RunResult res;
        const bool clamped = clamp0 >= 0.0;
        const double off_mass = clamped ? 1.0 - clamp0 : 1.0;
        const int max_sweeps = sweep_budget >= 0 ? sweep_budget : opt_.max_sweeps;
        std::vector<double> s(static_cast<std::size_t>(nx_));
        std::vector<double> p_best;
        double theta = 1.0;
        double best_lag = -kInf;
        for (int sweep = 0; sweep < max_sweeps; ++sweep) {
            compute_divergences(p);
            double rate = 0.0, avg_cost = 0.0;
            for (std::int64_t i = 0; i < nx_; ++i) {
                rate += p[i] * d_[i];
                if (!cost.empty()) avg_cost += p[i] * cost[i];
            }
            double smax = -kInf;
            for (std::int64_t i = 0; i < nx_; ++i) {
                s[i] = d_[i] - (cost.empty() ? 0.0 : lambda * cost[i]);
                if (clamped && i == zero_idx) continue;
                if (s[i] > smax) smax = s[i];
            }
            double lagrangian = 0.0; // includes the pinned atom's term
            for (std::int64_t i = 0; i < nx_; ++i) lagrangian += p[i] * s[i];
            double obj = lagrangian;
            if (clamped) {
                if (off_mass <= 0.0) { // pure sleep, nothing to optimize
                    res.rate = rate;
                    res.avg_cost = avg_cost;
                    res.gap = 0.0;
                    res.sweeps = sweep + 1;
                    return res;
                }
                obj = (lagrangian - p[zero_idx] * s[zero_idx]) / off_mass;
            }
            res.rate = rate;
            res.avg_cost = avg_cost;
            res.gap = smax - obj;
            res.sweeps = sweep + 1;
            if (res.gap <= gap_tol) return res;

            if (lagrangian < best_lag && theta > 1.0 && !p_best.empty()) {
                p = p_best; // overshot the incumbent: back off and retry from it
                theta = std::max(1.0, 0.5 * theta);
                continue;
            }
            if (lagrangian >= best_lag) {
                best_lag = lagrangian;
                p_best = p;
            }
            theta = std::min(theta * 1.3, 256.0);

            double z = 0.0;
            for (std::int64_t i = 0; i < nx_; ++i) {
                if (clamped && i == zero_idx) continue;
                p[i] *= std::exp(std::max(theta * (s[i] - smax), -690.0));
                z += p[i];
            }
            const double floor = 1e-14 * off_mass;
            double z2 = 0.0;
            for (std::int64_t i = 0; i < nx_; ++i) {
                if (clamped && i == zero_idx) continue;
                p[i] = std::max(p[i] * (off_mass / z), floor);
                z2 += p[i];
            }
            const double scale = off_mass / z2;
            for (std::int64_t i = 0; i < nx_; ++i) {
                if (clamped && i == zero_idx) continue;
                p[i] *= scale;
            }
        }
        if (sweep_budget >= 0) return res;
        throw SolverError("Blahut-Arimoto did not converge within the sweep bound");
    }

    // Newton/KKT polish on the current support. Solves
    //   [C 1; 1' 0] [delta; mu] = [s; 0],  C_ab = int phi_a phi_b / q,
    // the exact second-order system for maximizing I - lambda E[cost] on the
    // simplex, with a backtracking line search on the Lagrangian. Quadratic
    // convergence replaces the multiplicative crawl of underfed atoms. Falls
    // out early (caller falls back to sweeps) if a step cannot improve.
    RunResult newton_polish(std::vector<double>& p, const std::vector<double>& cost, double lambda,
                            double clamp0, std::int64_t zero_idx, double gap_tol,
                            int max_iters = 250) {
        const bool clamped = clamp0 >= 0.0;
        const double off = clamped ? 1.0 - clamp0 : 1.0;
        RunResult ev;
        std::vector<double> p_best_gap;
        std::vector<std::int64_t> cached_free;
        std::vector<double> cached_base;
        double cached_diag = 0.0;
        double best_gap = kInf;
        int stall = 0;
        double ridge = 1e-8; // Levenberg-Marquardt damping, relative to diag(C)
        for (int iter = 0; iter < max_iters; ++iter) {
            ev = evaluate(p, cost, lambda, clamp0, zero_idx);
            if (ev.gap < best_gap) {
                if (ev.gap < 0.98 * best_gap) stall = 0;
                best_gap = ev.gap;
                p_best_gap = p;
            } else if (++stall > 50) {
                break; // oscillating without progress
            }
            if (ev.gap <= gap_tol) return ev;

            std::vector<double> s(static_cast<std::size_t>(nx_));
            double lag0 = 0.0;
            for (std::int64_t i = 0; i < nx_; ++i) {
                s[i] = d_[i] - (cost.empty() ? 0.0 : lambda * cost[i]);
                lag0 += p[i] * s[i];
            }
            // working set: points that carry mass or that the dual value says
            // are close to deserving some
            double cond = 0.0;
            for (std::int64_t i = 0; i < nx_; ++i)
                if (!(clamped && i == zero_idx)) cond += p[i] * s[i];
            cond /= off;
            std::vector<std::int64_t> free;
            double frozen = off;
            for (std::int64_t i = 0; i < nx_; ++i) {
                if (clamped && i == zero_idx) continue;
                if (p[i] > 1e-9 * off || s[i] > cond) {
                    free.push_back(i);
                    frozen -= p[i];
                }
            }
            const std::size_t n = free.size();
            if (n < 2) return ev;

            // C_ab over the free points; neighbouring grid atoms are nearly
            // indistinguishable through the channel, so C is badly conditioned
            // and the raw Newton step needs damping before it is usable. The
            // matrix is refreshed only when the working set moves or goes
            // stale: it serves as an SPD model and the line search guards it.
            const std::size_t m = n + 1;
            if (free != cached_free || iter % 4 == 0) {
                cached_free = free;
                cached_base.assign(n * n, 0.0);
                cached_diag = 0.0;
                for (std::size_t r = 0; r < n; ++r) {
                    const double* kr = &K_[static_cast<std::size_t>(free[r]) * nw_];
                    for (std::size_t c = r; c < n; ++c) {
                        const double* kc = &K_[static_cast<std::size_t>(free[c]) * nw_];
                        double acc = 0.0;
                        for (std::int64_t k = 0; k < nw_; ++k)
                            acc += quadw_[k] * kr[k] * kc[k] / std::max(q_[k], kQFloor);
                        cached_base[r * n + c] = acc;
                        cached_base[c * n + r] = acc;
                    }
                    cached_diag += cached_base[r * n + r];
                }
                cached_diag /= static_cast<double>(n);
            }
            const std::vector<double>& base = cached_base;
            const double diag_scale = cached_diag;

            bool accepted = false;
            std::vector<double> trial(p.size());
            for (int attempt = 0; attempt < 12 && !accepted; ++attempt) {
                // assemble the damped KKT system
                std::vector<double> a(m * m, 0.0), rhs(m, 0.0);
                for (std::size_t r = 0; r < n; ++r) {
                    for (std::size_t c = 0; c < n; ++c) a[r * m + c] = base[r * n + c];
                    a[r * m + r] += ridge * diag_scale;
                    a[r * m + n] = 1.0;
                    a[n * m + r] = 1.0;
                    rhs[r] = s[free[r]];
                }
                // gaussian elimination with partial pivoting
                bool singular = false;
                for (std::size_t col = 0; col < m && !singular; ++col) {
                    std::size_t piv = col;
                    for (std::size_t r = col + 1; r < m; ++r)
                        if (std::abs(a[r * m + col]) > std::abs(a[piv * m + col])) piv = r;
                    if (std::abs(a[piv * m + col]) < 1e-300) {
                        singular = true;
                        break;
                    }
                    if (piv != col) {
                        for (std::size_t c = 0; c < m; ++c)
                            std::swap(a[col * m + c], a[piv * m + c]);
                        std::swap(rhs[col], rhs[piv]);
                    }
                    for (std::size_t r = col + 1; r < m; ++r) {
                        const double f = a[r * m + col] / a[col * m + col];
                        if (f == 0.0) continue;
                        for (std::size_t c = col; c < m; ++c) a[r * m + c] -= f * a[col * m + c];
                        rhs[r] -= f * rhs[col];
                    }
                }
                if (singular) {
                    ridge *= 100.0;
                    continue;
                }
                std::vector<double> delta(m);
                for (std::size_t r = m; r-- > 0;) {
                    double acc = rhs[r];
                    for (std::size_t c = r + 1; c < m; ++c) acc -= a[r * m + c] * delta[c];
                    delta[r] = acc / a[r * m + r];
                }

                // project onto the nonnegative orthant and backtrack on ascent
                double alpha = 1.0;
                for (int bt = 0; bt < 10 && !accepted; ++bt) {
                    trial = p;
                    for (std::size_t r = 0; r < n; ++r)
                        trial[free[r]] = std::max(p[free[r]] + alpha * delta[r], 0.0);
                    double mass = 0.0;
                    for (std::size_t r = 0; r < n; ++r) mass += trial[free[r]];
                    const double target = off - frozen;
                    if (mass > 0.0 && target > 0.0)
                        for (std::size_t r = 0; r < n; ++r) trial[free[r]] *= target / mass;
                    compute_divergences(trial);
                    double lag1 = 0.0;
                    for (std::int64_t i = 0; i < nx_; ++i)
                        lag1 += trial[i] * (d_[i] - (cost.empty() ? 0.0 : lambda * cost[i]));
                    if (lag1 >= lag0 - 1e-12) {
                        p = trial;
                        accepted = true;
                        ridge = std::max(ridge / 3.0, 1e-12);
                    } else {
                        alpha *= 0.5;
                    }
                }
                if (!accepted) ridge *= 100.0;
            }
            if (!accepted) break;
        }
        if (!p_best_gap.empty()) p = p_best_gap;
        return evaluate(p, cost, lambda, clamp0, zero_idx);
    }

    // Joint Newton on (p, lambda) near the constrained optimum: the KKT system
    // gains a row driving E[cost] onto the limit and a column for the
    // multiplier move, so the residual |E[cost] - limit| converges to machine
    // scale instead of the lambda-bisection wiggle. The merit combines the
    // stationarity gap with the weighted constraint residual.
    RunResult newton_joint(std::vector<double>& p, const std::vector<double>& cost,
                           double& lambda, double limit, double clamp0, std::int64_t zero_idx,
                           double gap_tol, int max_iters = 30) {
        const bool clamped = clamp0 >= 0.0;
        const double off = clamped ? 1.0 - clamp0 : 1.0;
        const double wgt = std::max(lambda, 1.0);
        RunResult ev;
        std::vector<std::int64_t> cached_free;
        std::vector<double> cached_base;
        double cached_diag = 0.0;
        double ridge = 1e-9;
        for (int iter = 0; iter < max_iters; ++iter) {
            ev = evaluate(p, cost, lambda, clamp0, zero_idx);
            const double resid0 = ev.gap + wgt * std::abs(ev.avg_cost - limit);
            if (ev.gap <= gap_tol && wgt * std::abs(ev.avg_cost - limit) <= 0.25 * gap_tol)
                return ev;

            std::vector<double> s(static_cast<std::size_t>(nx_));
            for (std::int64_t i = 0; i < nx_; ++i) s[i] = d_[i] - lambda * cost[i];
            double cond = 0.0;
            for (std::int64_t i = 0; i < nx_; ++i)
                if (!(clamped && i == zero_idx)) cond += p[i] * s[i];
            cond /= off;
            std::vector<std::int64_t> free;
            double frozen = off;
            for (std::int64_t i = 0; i < nx_; ++i) {
                if (clamped && i == zero_idx) continue;
                if (p[i] > 1e-9 * off || s[i] > cond) {
                    free.push_back(i);
                    frozen -= p[i];
                }
            }
            const std::size_t n = free.size();
            if (n < 2) return ev;

            const std::size_t m = n + 2; // [delta_p; mu; delta_lambda]
            if (free != cached_free || iter % 4 == 0) {
                cached_free = free;
                cached_base.assign(n * n, 0.0);
                cached_diag = 0.0;
                for (std::size_t r = 0; r < n; ++r) {
                    const double* kr = &K_[static_cast<std::size_t>(free[r]) * nw_];
                    for (std::size_t c = r; c < n; ++c) {
                        const double* kc = &K_[static_cast<std::size_t>(free[c]) * nw_];
                        double acc = 0.0;
                        for (std::int64_t k = 0; k < nw_; ++k)
                            acc += quadw_[k] * kr[k] * kc[k] / std::max(q_[k], kQFloor);
                        cached_base[r * n + c] = acc;
                        cached_base[c * n + r] = acc;
                    }
                    cached_diag += cached_base[r * n + r];
                }
                cached_diag /= static_cast<double>(n);
            }
            const std::vector<double>& base = cached_base;
            const double diag_scale = cached_diag;

            bool accepted = false;
            std::vector<double> trial(p.size());
            for (int attempt = 0; attempt < 10 && !accepted; ++attempt) {
                std::vector<double> a(m * m, 0.0), rhs(m, 0.0);
                for (std::size_t r = 0; r < n; ++r) {
                    for (std::size_t c = 0; c < n; ++c) a[r * m + c] = base[r * n + c];
                    a[r * m + r] += ridge * diag_scale;
                    a[r * m + n] = 1.0;       // mass multiplier column
                    a[r * m + n + 1] = cost[free[r]]; // lambda column
                    a[n * m + r] = 1.0;               // mass row
                    a[(n + 1) * m + r] = cost[free[r]]; // cost row
                    rhs[r] = s[free[r]];
                }
                rhs[n] = 0.0;
                rhs[n + 1] = limit - ev.avg_cost;

                bool singular = false;
                for (std::size_t col = 0; col < m && !singular; ++col) {
                    std::size_t piv = col;
                    for (std::size_t r = col + 1; r < m; ++r)
                        if (std::abs(a[r * m + col]) > std::abs(a[piv * m + col])) piv = r;
                    if (std::abs(a[piv * m + col]) < 1e-300) {
                        singular = true;
                        break;
                    }
                    if (piv != col) {
                        for (std::size_t c = 0; c < m; ++c)
                            std::swap(a[col * m + c], a[piv * m + c]);
                        std::swap(rhs[col], rhs[piv]);
                    }
                    for (std::size_t r = col + 1; r < m; ++r) {
                        const double f = a[r * m + col] / a[col * m + col];
                        if (f == 0.0) continue;
                        for (std::size_t c = col; c < m; ++c) a[r * m + c] -= f * a[col * m + c];
                        rhs[r] -= f * rhs[col];
                    }
                }
                if (singular) {
                    ridge *= 100.0;
                    continue;
                }
                std::vector<double> delta(m);
                for (std::size_t r = m; r-- > 0;) {
                    double acc = rhs[r];
                    for (std::size_t c = r + 1; c < m; ++c) acc -= a[r * m + c] * delta[c];
                    delta[r] = acc / a[r * m + r];
                }

                double alpha = 1.0;
                for (int bt = 0; bt < 8 && !accepted; ++bt) {
                    trial = p;
                    for (std::size_t r = 0; r < n; ++r)
                        trial[free[r]] = std::max(p[free[r]] + alpha * delta[r], 0.0);
                    double mass = 0.0;
                    for (std::size_t r = 0; r < n; ++r) mass += trial[free[r]];
                    const double target = off - frozen;
                    if (mass > 0.0 && target > 0.0)
                        for (std::size_t r = 0; r < n; ++r) trial[free[r]] *= target / mass;
                    const double lambda_try = std::max(lambda + alpha * delta[n + 1], 0.0);
                    const auto ev_try = evaluate(trial, cost, lambda_try, clamp0, zero_idx);
                    const double resid1 = ev_try.gap + wgt * std::abs(ev_try.avg_cost - limit);
                    if (resid1 <= resid0 * (1.0 - 1e-3) || resid1 <= 0.5 * gap_tol) {
                        p = trial;
                        lambda = lambda_try;
                        accepted = true;
                        ridge = std::max(ridge / 3.0, 1e-12);
                    } else {
                        alpha *= 0.5;
                    }
                }
                if (!accepted) ridge *= 100.0;
            }
            if (!accepted) return evaluate(p, cost, lambda, clamp0, zero_idx);
        }
        return evaluate(p, cost, lambda, clamp0, zero_idx);
    }

private:
    void compute_divergences(const std::vector<double>& p) {
        parallel_for(nw_, mode_, [&](std::int64_t k) {
            const double* row = &Kt_[static_cast<std::size_t>(k) * nx_];
            double acc = 0.0;
            for (std::int64_t i = 0; i < nx_; ++i) acc += p[i] * row[i];
            q_[k] = acc;
            lq_[k] = acc > kQFloor ? std::log(acc) : kLogQFloor;
        });
        parallel_for(nx_, mode_, [&](std::int64_t i) {
            const double* row = &K_[static_cast<std::size_t>(i) * nw_];
            double acc = 0.0;
            for (std::int64_t k = 0; k < nw_; ++k) acc += quadw_[k] * row[k] * lq_[k];
            d_[i] = phi_logphi_ - acc;
        });
    }

    std::vector<double> x_;
    BaOptions opt_;
    Exec mode_;
    double sigma2_;
    std::int64_t nx_ = 0, nw_ = 0;
    std::vector<double> w_, quadw_, K_, Kt_, q_, lq_, d_;
    double phi_logphi_ = 0.0;
};

// Exponential tilt p_i -> p_i exp(eta c_i) with eta chosen so E[cost] lands
// exactly on the limit. E[cost] is strictly increasing in eta, so this is a
// clean scalar bisection over plain vector arithmetic. Used as a final
// correction: for a near-stationary law the slack trades for rate at first
// order while the stationarity residual moves at second order.
void tilt_cost_to_limit(std::vector<double>& p, const std::vector<double>& cost, double limit,
                        double clamp0, std::int64_t zero_idx) {
    const bool clamped = clamp0 >= 0.0;
    const double off = clamped ? 1.0 - clamp0 : 1.0;
    const auto cost_at = [&](double eta) {
        double z = 0.0, acc = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (clamped && static_cast<std::int64_t>(i) == zero_idx) continue;
            const double w = p[i] * std::exp(eta * cost[i]);
            z += w;
            acc += w * cost[i];
        }
        return z > 0.0 ? off * acc / z : 0.0;
    };
    double lo = 0.0, hi = 0.0;
    int guard = 0;
    if (cost_at(0.0) < limit) {
        hi = 1e-8;
        while (cost_at(hi) < limit) {
            hi *= 2.0;
            if (++guard > 120) return; // cannot reach the limit on this support
        }
    } else {
        lo = -1e-8;
        while (cost_at(lo) > limit) {
            lo *= 2.0;
            if (++guard > 120) return;
        }
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (cost_at(mid) < limit ? lo : hi) = mid;
    }
    const double eta = 0.5 * (lo + hi);
    double z = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (clamped && static_cast<std::int64_t>(i) == zero_idx) continue;
        p[i] *= std::exp(eta * cost[i]);
        z += p[i];
    }
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (clamped && static_cast<std::int64_t>(i) == zero_idx) continue;
        p[i] *= off / z;
    }
}

std::vector<double> uniform_start(std::int64_t nx, double clamp0, std::int64_t zero_idx) {
    std::vector<double> p(static_cast<std::size_t>(nx));
    if (clamp0 >= 0.0) {
        const double rest = (1.0 - clamp0) / static_cast<double>(nx - 1);
        for (auto& v : p) v = rest;
        p[static_cast<std::size_t>(zero_idx)] = clamp0;
    } else {
        for (auto& v : p) v = 1.0 / static_cast<double>(nx);
    }
    return p;
}

// Final solve at a fixed multiplier, certified on the full grid. The full-grid
// dynamics crawl near spread-out optima (mass at the support boundary climbs
// from the floor at rate exp(theta * gap) per sweep), so: discover the support
// loosely, converge the restricted problem tightly, then evaluate the dual
// bound over the whole grid and re-expand with any point it says is owed mass.
class FinalSolver {
public:
    FinalSolver(BaWorkspace& ws, const std::vector<double>& grid, const std::vector<double>& cost,
                const AwgnChannel& ch, const BaOptions& opt, Exec mode, double clamp0,
                std::int64_t zero_idx)
        : ws_(ws), grid_(grid), cost_(cost), ch_(ch), opt_(opt), mode_(mode), clamp0_(clamp0),
          zero_idx_(zero_idx) {}

    int total_sweeps = 0;

    // capped sweeps alternating with Newton; best effort, the caller's
    // certificate check decides what is acceptable
    BaWorkspace::RunResult converge(BaWorkspace& ws, std::vector<double>& p,
                                    const std::vector<double>& cost, double lambda, double clamp0,
                                    std::int64_t zero_idx, double tol) {
        auto r = ws.run(p, cost, lambda, clamp0, zero_idx, tol, 400);
        total_sweeps += r.sweeps;
        for (int round = 0; round < 4; ++round) {
            if (r.gap <= tol) return r;
            r = ws.newton_polish(p, cost, lambda, clamp0, zero_idx, tol);
            total_sweeps += r.sweeps;
            if (r.gap <= tol) return r;
            r = ws.run(p, cost, lambda, clamp0, zero_idx, tol, round < 3 ? 1000 : 4000);
            total_sweeps += r.sweeps;
        }
        return r;
    }

    BaWorkspace::RunResult solve(std::vector<double>& p, double lambda) {
        const double off_mass = clamp0_ >= 0.0 ? 1.0 - clamp0_ : 1.0;
        auto loose = ws_.run(p, cost_, lambda, clamp0_, zero_idx_,
                             std::max(opt_.inner_gap_tol, 1e-4), 2500);
        total_sweeps += loose.sweeps;
        if (loose.gap <= opt_.gap_tol) return loose;

        std::vector<char> active(p.size(), 0);
        const double act_floor = 1e-10 * off_mass;
        for (std::size_t i = 0; i < p.size(); ++i) active[i] = p[i] > act_floor;
        if (clamp0_ >= 0.0) active[static_cast<std::size_t>(zero_idx_)] = 1;

        for (int round = 0; round < 8; ++round) {
            restricted_solve(p, lambda, active);
            auto ev = ws_.evaluate(p, cost_, lambda, clamp0_, zero_idx_);
            total_sweeps += ev.sweeps;
            if (ev.gap <= opt_.gap_tol) return ev;

            // activate every point the dual bound says is underfed
            const auto& d = ws_.info_density();
            double obj = 0.0;
            if (clamp0_ >= 0.0) {
                for (std::size_t i = 0; i < p.size(); ++i)
                    if (static_cast<std::int64_t>(i) != zero_idx_)
                        obj += p[i] * (d[i] - lambda * cost_[i]);
                obj /= off_mass;
            } else {
                for (std::size_t i = 0; i < p.size(); ++i)
                    obj += p[i] * (d[i] - (cost_.empty() ? 0.0 : lambda * cost_[i]));
            }
            bool grew = false;
            for (std::size_t i = 0; i < p.size(); ++i) {
                const double s = d[i] - (cost_.empty() ? 0.0 : lambda * cost_[i]);
                if (s - obj > 0.25 * opt_.gap_tol) {
                    if (!active[i]) grew = true;
                    active[i] = 1;
                    if (i > 0) active[i - 1] = 1;
                    if (i + 1 < p.size()) active[i + 1] = 1;
                }
            }
            if (!grew) {
                // support is right but the restricted solve plateaued: polish
                // on the full grid before giving up
                ev = converge(ws_, p, cost_, lambda, clamp0_, zero_idx_, opt_.gap_tol);
                if (ev.gap <= 4.0 * opt_.gap_tol) return ev;
                break;
            }
        }
        // a stubborn instance: acceptable if the dual bound is still tight
        // enough to stand behind, otherwise refuse to hand back a result
        auto ev = ws_.evaluate(p, cost_, lambda, clamp0_, zero_idx_);
        total_sweeps += ev.sweeps;
        if (ev.gap <= 4.0 * opt_.gap_tol) return ev;
        throw SolverError("Blahut-Arimoto did not converge within the sweep bound");
    }

private:
    void restricted_solve(std::vector<double>& p, double lambda, const std::vector<char>& active) {
        std::vector<std::size_t> map;
        map.reserve(p.size());
        for (std::size_t i = 0; i < p.size(); ++i)
            if (active[i]) map.push_back(i);
        if (map.size() < 2 || map.size() == p.size()) {
            converge(ws_, p, cost_, lambda, clamp0_, zero_idx_, opt_.gap_tol);
            return;
        }

        std::vector<double> sub_grid(map.size()), sub_cost, sub_p(map.size());
        if (!cost_.empty()) sub_cost.resize(map.size());
        std::int64_t sub_zero = -1;
        const double off_mass = clamp0_ >= 0.0 ? 1.0 - clamp0_ : 1.0;
        double live = 0.0;
        for (std::size_t j = 0; j < map.size(); ++j) {
            sub_grid[j] = grid_[map[j]];
            if (!cost_.empty()) sub_cost[j] = cost_[map[j]];
            sub_p[j] = std::max(p[map[j]], 1e-12);
            if (static_cast<std::int64_t>(map[j]) == zero_idx_) sub_zero = static_cast<std::int64_t>(j);
            else live += sub_p[j];
        }
        // renormalize the free mass onto the active set
        for (std::size_t j = 0; j < map.size(); ++j) {
            if (static_cast<std::int64_t>(j) == sub_zero && clamp0_ >= 0.0)
                sub_p[j] = clamp0_;
            else
                sub_p[j] *= off_mass / live;
        }

        BaWorkspace sub_ws(sub_grid, ch_, opt_, mode_);
        converge(sub_ws, sub_p, sub_cost, lambda, clamp0_, sub_zero, 0.5 * opt_.gap_tol);

        std::fill(p.begin(), p.end(), 0.0);
        for (std::size_t j = 0; j < map.size(); ++j) p[map[j]] = sub_p[j];
    }

    BaWorkspace& ws_;
    const std::vector<double>& grid_;
    const std::vector<double>& cost_;
    const AwgnChannel& ch_;
    const BaOptions& opt_;
    Exec mode_;
    double clamp0_;
    std::int64_t zero_idx_;
};

} // namespace

std::vector<double> symmetric_grid(double half_width, int n) {
    std::vector<double> x(static_cast<std::size_t>(n));
    const int m = (n - 1) / 2;
    for (int j = 0; j <= m; ++j) {
        const double v = half_width * (static_cast<double>(j) / static_cast<double>(m));
        x[static_cast<std::size_t>(m + j)] = v;
        x[static_cast<std::size_t>(m - j)] = -v;
    }
    return x;
}

GridSolution ba_solve(const std::vector<double>& grid, const std::vector<double>& cost,
                      double limit, const AwgnChannel& ch, const BaOptions& opt, Exec mode,
                      double clamped_zero_atom) {
    ch.validate();
    if (grid.size() < 2) throw std::invalid_argument("ba_solve: grid needs >= 2 points");
    if (!cost.empty() && cost.size() != grid.size())
        throw std::invalid_argument("ba_solve: cost/grid size mismatch");

    std::int64_t zero_idx = -1;
    if (clamped_zero_atom >= 0.0) {
        for (std::size_t i = 0; i < grid.size(); ++i)
            if (grid[i] == 0.0) zero_idx = static_cast<std::int64_t>(i);
        if (zero_idx < 0) throw std::invalid_argument("ba_solve: clamped atom needs 0 on the grid");
    }

    BaWorkspace ws(grid, ch, opt, mode);
    FinalSolver finisher(ws, grid, cost, ch, opt, mode, clamped_zero_atom, zero_idx);
    GridSolution sol;
    sol.grid = grid;

    const bool constrained = !cost.empty() && std::isfinite(limit);

    auto probe_at = [&](std::vector<double>& p, double lambda, double gap_tol, int budget) {
        auto r = ws.run(p, cost, lambda, clamped_zero_atom, zero_idx, gap_tol, budget);
        finisher.total_sweeps += r.sweeps;
        return r;
    };

    std::vector<double> p = uniform_start(ws.nx(), clamped_zero_atom, zero_idx);
    double lambda = 0.0;
    BaWorkspace::RunResult res;
    if (!constrained) {
        res = finisher.solve(p, 0.0);
    } else {
        // cheap probe: only the sign of (avg_cost - limit) matters here
        res = probe_at(p, 0.0, opt.probe_gap_tol, 600);
        if (res.avg_cost <= limit) {
            res = finisher.solve(p, 0.0); // constraint slack: confirm at full quality
            if (res.avg_cost > limit) res = {};   // tightened solve crossed the line
        }
        if (res.avg_cost > limit || res.sweeps == 0) {
            const double cost_tol = opt.cost_tol * std::max(1.0, limit);
            // avg cost falls roughly like 1/(2 lambda): bracket and root-find
            // in log(lambda), seeded by the gaussian closed form
            const double seed = 1.0 / (2.0 * (limit + ch.sigma2));
            double u_lo = std::log(seed), u_hi = u_lo;
            double f_lo, f_hi;
            std::vector<double> p_lo = p, p_hi = p;
            f_lo = probe_at(p_lo, seed, opt.inner_gap_tol, 600).avg_cost - limit;
            if (f_lo > 0.0) { // lambda too small: walk up until feasible
                p_hi = p_lo;
                f_hi = f_lo;
                for (int tries = 0; f_hi > 0.0; ++tries) {
                    if (tries > 60) throw SolverError("multiplier bracket expansion failed");
                    u_lo = u_hi;
                    f_lo = f_hi;
                    p_lo = p_hi;
                    u_hi += std::numbers::ln2 * 2.0;
                    f_hi = probe_at(p_hi, std::exp(u_hi), opt.inner_gap_tol, 600).avg_cost - limit;
                }
            } else { // feasible already: walk down until the constraint binds
                f_hi = f_lo;
                p_hi = p_lo;
                for (int tries = 0; f_lo <= 0.0; ++tries) {
                    if (tries > 60) {
                        f_lo = 1.0; // cost saturates below the limit
                        break;
                    }
                    u_hi = u_lo;
                    f_hi = f_lo;
                    p_hi = p_lo;
                    u_lo -= std::numbers::ln2 * 2.0;
                    f_lo = probe_at(p_lo, std::exp(u_lo), opt.inner_gap_tol, 600).avg_cost - limit;
                }
            }
            // Illinois regula-falsi on u = log(lambda); f decreasing
            double side = 0.0;
            for (int it = 0; it < opt.max_multiplier_iters; ++it) {
                double mid;
                if (f_lo - f_hi > 0.0) {
                    mid = u_lo + (u_hi - u_lo) * f_lo / (f_lo - f_hi);
                    if (!(mid > u_lo && mid < u_hi)) mid = 0.5 * (u_lo + u_hi);
                } else {
                    mid = 0.5 * (u_lo + u_hi);
                }
                std::vector<double> p_mid = p_hi;
                const double f_mid =
                    probe_at(p_mid, std::exp(mid), opt.inner_gap_tol, 1500).avg_cost - limit;
                if (f_mid > 0.0) {
                    u_lo = mid;
                    f_lo = f_mid;
                    if (side == -1.0) f_hi *= 0.5; // Illinois damping
                    side = -1.0;
                } else {
                    u_hi = mid;
                    f_hi = f_mid;
                    p_hi = p_mid;
                    if (side == 1.0) f_lo *= 0.5;
                    side = 1.0;
                    if (-f_mid <= cost_tol) break; // feasible and tight
                }
                if (u_hi - u_lo <= 1e-12) break;
            }
            lambda = std::exp(u_hi);
            p = p_hi;
            res = finisher.solve(p, lambda);

            const auto is_done = [&] {
                // both the multiplier-weighted slack (certificate) and the
                // absolute budget residual (cost contracts) must be small
                return res.gap <= opt.gap_tol &&
                       lambda * std::abs(limit - res.avg_cost) <= 0.25 * opt.gap_tol &&
                       std::abs(limit - res.avg_cost) <= 1e-6 * std::max(1.0, limit) &&
                       res.avg_cost <= limit + cost_tol;
            };
            // Joint Newton on (p, lambda) drives E[cost] onto the limit to
            // machine scale where it converges; the feasible-side bisection on
            // lambda mops up the instances where it stalls. Residual cost
            // slack otherwise lands in the certificate as lambda (limit - E).
            for (int round = 0; round < 3 && !is_done(); ++round) {
                res = ws.newton_joint(p, cost, lambda, limit, clamped_zero_atom, zero_idx,
                                      opt.gap_tol);
                finisher.total_sweeps += res.sweeps;
                if (is_done()) break;
                res = finisher.solve(p, lambda);
            }
            if (!is_done()) {
                double u_bad = -kInf, u_good = kInf; // infeasible / feasible side
                double u_cur = std::log(lambda);
                std::vector<double> p_good;
                BaWorkspace::RunResult res_good;
                bool have_good = false;
                for (int it = 0; it < 24; ++it) {
                    const double c = res.avg_cost;
                    if (c <= limit + cost_tol) {
                        u_good = u_cur;
                        p_good = p;
                        res_good = res;
                        have_good = true;
                        if (lambda * (limit - c) <= 0.25 * opt.gap_tol) break;
                    } else {
                        u_bad = u_cur;
                    }
                    double u_next;
                    if (std::isfinite(u_bad) && std::isfinite(u_good)) {
                        if (u_good - u_bad < 1e-13) break;
                        u_next = 0.5 * (u_bad + u_good);
                    } else {
                        u_next = u_cur + ((c > limit) ? 0.04 : -0.04);
                    }
                    u_cur = u_next;
                    lambda = std::exp(u_cur);
                    res = finisher.solve(p, lambda);
                }
                if (have_good && res.avg_cost > limit + cost_tol) {
                    lambda = std::exp(u_good);
                    p = p_good;
                    res = finisher.solve(p, lambda);
                }
                // one more joint-Newton attempt from the bracketed point
                if (!is_done()) {
                    res = ws.newton_joint(p, cost, lambda, limit, clamped_zero_atom, zero_idx,
                                          opt.gap_tol);
                    finisher.total_sweeps += res.sweeps;
                }
            }
            // residual budget error: tilt the law onto the budget surface
            if (!is_done() && std::abs(res.avg_cost - limit) <= 0.05 * std::max(1.0, limit)) {
                tilt_cost_to_limit(p, cost, limit, clamped_zero_atom, zero_idx);
                res = ws.evaluate(p, cost, lambda, clamped_zero_atom, zero_idx);
                finisher.total_sweeps += res.sweeps;
            }
            // never hand back an over-spending law
            for (int g = 0; g < 8 && res.avg_cost > limit + cost_tol; ++g) {
                lambda *= 1.0005;
                res = finisher.solve(p, lambda);
            }
        }
    }

    // symmetric grid and even cost: averaging a law with its mirror image can
    // only help (concavity plus reversal invariance), and it returns the clean
    // symmetric optimum the discretized problem deserves
    {
        bool symmetric = true;
        const std::size_t n = grid.size();
        for (std::size_t i = 0; i < n && symmetric; ++i) {
            if (std::abs(grid[i] + grid[n - 1 - i]) > 1e-12 * (1.0 + std::abs(grid[i])))
                symmetric = false;
            if (!cost.empty() && std::abs(cost[i] - cost[n - 1 - i]) > 1e-12 * (1.0 + cost[i]))
                symmetric = false;
        }
        if (symmetric) {
            for (std::size_t i = 0; i < n / 2; ++i) {
                const double avg = 0.5 * (p[i] + p[n - 1 - i]);
                p[i] = avg;
                p[n - 1 - i] = avg;
            }
            res = ws.evaluate(p, cost, lambda, clamped_zero_atom, zero_idx);
            finisher.total_sweeps += res.sweeps;
        }
    }

    sol.p = std::move(p);
    sol.info_density = ws.info_density();
    sol.rate = res.rate;
    sol.lambda = lambda;
    sol.avg_cost = res.avg_cost;
    sol.sweeps = finisher.total_sweeps;

    if (clamped_zero_atom >= 0.0) {
        // pinned-atom solve: face stationarity plus constraint slack
        sol.certificate_gap =
            res.gap + (constrained ? lambda * std::max(limit - res.avg_cost, 0.0) : 0.0);
        return sol;
    }
    // Dual certificate: for any lambda >= 0 and output law q,
    //   C <= max_i [D_i - lambda (c_i - limit)],
    // so this gap bounds the distance to the true constrained optimum.
    double bound = -kInf;
    for (std::size_t i = 0; i < sol.grid.size(); ++i) {
        const double c = cost.empty() ? 0.0 : cost[i];
        const double ref = constrained ? limit : (cost.empty() ? 0.0 : sol.avg_cost);
        bound = std::max(bound, sol.info_density[i] - lambda * (c - ref));
    }
    sol.certificate_gap = bound - sol.rate;
    return sol;
}

} // namespace ehcap
