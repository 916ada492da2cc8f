#include "offsim/powersolver.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdio>

namespace offsim::power {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLog2e = 1.4426950408889634;  // 1/ln 2
constexpr double kFeasTol = 1e-9;
constexpr double kGapTol = 1e-12;   // target m/t of the final barrier stage
constexpr double kDecrTol = 1e-11;  // Newton decrement^2 / 2 stopping level
constexpr int kNewtonCap = 200;     // per barrier stage

using Eigen::MatrixXd;
using Eigen::VectorXd;

// One normalized convexified constraint,
//   value(rho) = [c0 + w.rho - sum_t W log2(sigma2 + q_t.rho)] / n <= bound,
// over the active coordinates only. Rate floors carry one log term (their
// own denominator), capacity rows one per crossing stream. All q >= 0, so
// every log term is concave and value() is convex.
struct Row {
    double n = 1.0;
    double c0 = 0.0;
    VectorXd w;
    std::vector<VectorXd> qs;
    double bandwidth = 0.0;
    double sigma2 = 0.0;

    double value(const VectorXd& rho) const {
        double v = c0 + w.dot(rho);
        for (const auto& q : qs) v -= bandwidth * std::log2(sigma2 + q.dot(rho));
        return v / n;
    }
    VectorXd grad(const VectorXd& rho) const {
        VectorXd g = w;
        for (const auto& q : qs) g -= (bandwidth * kLog2e / (sigma2 + q.dot(rho))) * q;
        return g / n;
    }
    void add_hess(const VectorXd& rho, double scale, Eigen::Ref<MatrixXd> out) const {
        for (const auto& q : qs) {
            double den = sigma2 + q.dot(rho);
            out.noalias() += (scale * bandwidth * kLog2e / (n * den * den)) * (q * q.transpose());
        }
    }
};

struct Built {
    std::vector<Row> rows;
    bool inf_floor = false;
    VectorXd hi;  // per active coordinate; lower bound is 0
};

std::vector<double> cleaned_full(const Problem& pb, const std::vector<double>& rho) {
    std::vector<double> out(pb.env->num_users, 0.0);
    for (std::size_t i = 0; i < pb.active.size(); ++i) {
        int k = pb.active[i];
        if (k < static_cast<int>(rho.size()) && std::isfinite(rho[k])) out[k] = rho[k];
    }
    return out;
}

Built build_rows(const Problem& pb, const std::vector<double>& anchor) {
    const auto& env = *pb.env;
    const int n_act = static_cast<int>(pb.active.size());
    Built b;
    b.hi.resize(n_act);
    std::vector<int> pos(env.num_users, -1);
    for (int i = 0; i < n_act; ++i) {
        pos[pb.active[i]] = i;
        b.hi[i] = env.p_max_w[pb.active[i]];
    }

    std::vector<double> gbuf;
    for (int i = 0; i < n_act; ++i) {
        int k = pb.active[i];
        double c = pb.floor_bps[i];
        if (std::isinf(c)) {
            b.inf_floor = true;
            continue;
        }
        Row r;
        // never below the bandwidth: a floor near zero would otherwise leave
        // the row in raw bps and swamp the barrier scale
        r.n = std::max({1.0, std::abs(c), env.bandwidth_hz});
        r.bandwidth = env.bandwidth_hz;
        r.sigma2 = env.noise_w;
        radio::grad_g(env, anchor, k, gbuf);
        double dot = 0.0;
        r.w.resize(n_act);
        for (int j = 0; j < n_act; ++j) {
            r.w[j] = gbuf[pb.active[j]];
            dot += r.w[j] * anchor[pb.active[j]];
        }
        r.c0 = c + radio::g_val(env, anchor, k) - dot;
        VectorXd q(n_act);
        for (int j = 0; j < n_act; ++j) q[j] = env.gain[k][pb.active[j]];
        r.qs.push_back(std::move(q));
        b.rows.push_back(std::move(r));
    }

    auto add_cap = [&](const Problem::AggRow& ar) {
        std::vector<int> mem;
        for (int k : ar.members)
            if (k >= 0 && k < env.num_users && pos[k] >= 0) mem.push_back(k);
        if (mem.empty()) return;
        Row r;
        r.n = std::max(1.0, std::abs(ar.cap_bps));
        r.bandwidth = env.bandwidth_hz;
        r.sigma2 = env.noise_w;
        r.c0 = -ar.cap_bps;
        r.w = VectorXd::Zero(n_act);
        for (int k : mem) {
            radio::grad_h(env, anchor, k, gbuf);
            double dot = 0.0;
            for (int j = 0; j < n_act; ++j) {
                r.w[j] += gbuf[pb.active[j]];
                dot += gbuf[pb.active[j]] * anchor[pb.active[j]];
            }
            r.c0 += radio::h_val(env, anchor, k) - dot;
            VectorXd q(n_act);
            for (int j = 0; j < n_act; ++j)
                q[j] = (pb.active[j] == k) ? 0.0 : env.gain[k][pb.active[j]];
            r.qs.push_back(std::move(q));
        }
        b.rows.push_back(std::move(r));
    };
    for (const auto& ar : pb.link_rows) add_cap(ar);
    for (const auto& ar : pb.fronthaul_rows) add_cap(ar);
    return b;
}

double measured_violation(const Built& b, const VectorXd& rho) {
    double s = b.inf_floor ? kInf : -kInf;
    for (const auto& r : b.rows) s = std::max(s, r.value(rho));
    return s;
}

bool ldlt_solve(MatrixXd& h, const VectorXd& g, VectorXd& delta) {
    Eigen::LDLT<MatrixXd> f(h);
    delta = f.solve(-g);
    if (f.info() == Eigen::Success && delta.allFinite()) return true;
    double ridge = 1e-12 * std::max(1.0, h.diagonal().maxCoeff());
    h.diagonal().array() += ridge;
    Eigen::LDLT<MatrixXd> f2(h);
    delta = f2.solve(-g);
    return f2.info() == Eigen::Success && delta.allFinite();
}

// One centering stage: Newton with backtracking on the standard barrier
//   B(x) = t * obj(x) + phi(x)
// where eval fills (B, grad, hess) at x and returns false outside the domain.
template <class Eval>
bool center(const Eval& eval, VectorXd& x, int& steps, bool& capped, double decr_stop) {
    VectorXd g, delta;
    MatrixXd h;
    double b0 = 0.0;
    for (int it = 0; it < kNewtonCap; ++it) {
        if (!eval(x, b0, &g, &h)) return false;
        if (!ldlt_solve(h, g, delta)) return false;
        ++steps;
        double decr2 = -g.dot(delta);
#ifdef OFFSIM_PS_TRACE
        if (it == kNewtonCap - 1 || !(decr2 > decr_stop))
            std::fprintf(stderr, "   stage it=%d decr2=%.3e B=%.9e\n", it, decr2, b0);
#endif
        if (!(decr2 > decr_stop)) return true;
        double alpha = 1.0, b1 = 0.0;
        bool moved = false;
        while (alpha >= 1e-16) {
            VectorXd trial = x + alpha * delta;
            if (eval(trial, b1, nullptr, nullptr) && b1 <= b0 + 1e-4 * alpha * g.dot(delta)) {
                x = trial;
                moved = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!moved) return true;  // stuck at numerical resolution; accept x
    }
    capped = true;
    return true;
}

VectorXd interior_start(const Built& b, const Problem& pb, const std::vector<double>& anchor) {
    const int n = static_cast<int>(pb.active.size());
    VectorXd x(n);
    for (int i = 0; i < n; ++i) {
        double hi = b.hi[i];
        x[i] = std::min(std::max(anchor[pb.active[i]], hi * 1e-12), hi * (1.0 - 1e-12));
    }
    return x;
}

SolveResult pack(const Problem& pb, const Built& b, const VectorXd& x, int steps, bool capped) {
    SolveResult out;
    out.rho.assign(pb.env->num_users, 0.0);
    out.objective = 0.0;
    for (std::size_t i = 0; i < pb.active.size(); ++i) {
        out.rho[pb.active[i]] = x[static_cast<int>(i)];
        out.objective += x[static_cast<int>(i)];
    }
    out.max_violation = measured_violation(b, x);
    out.newton_steps = steps;
    out.status = out.max_violation <= kFeasTol
                     ? Status::feasible
                     : (capped ? Status::iteration_capped : Status::infeasible);
    return out;
}

// Phase 1 core: minimize the worst normalized violation s over (rho, s) with
// the box kept hard. Returns the interior-point iterate; the caller derives
// status from the measured violation.
VectorXd run_phase1(const Built& b, const Problem& pb, const std::vector<double>& anchor,
                    int& steps, bool& capped) {
    const int n = static_cast<int>(pb.active.size());
    VectorXd x = interior_start(b, pb, anchor);
    double s0 = -kInf;
    for (const auto& r : b.rows) s0 = std::max(s0, r.value(x));
    s0 += 0.1 * std::max(1.0, std::abs(s0));

    VectorXd z(n + 1);
    z.head(n) = x;
    z[n] = s0;

    const double m = static_cast<double>(b.rows.size() + 2 * n);
    for (double t = 1.0; ; t *= 10.0) {
        auto ev = [&, t](const VectorXd& zz, double& bval, VectorXd* g, MatrixXd* h) -> bool {
            const VectorXd rho = zz.head(n);
            const double s = zz[n];
            if (g) {
                *g = VectorXd::Zero(n + 1);
                (*g)[n] = t;
                *h = MatrixXd::Zero(n + 1, n + 1);
            }
            double acc = t * s;
            for (const auto& r : b.rows) {
                double slack = s - r.value(rho);
                if (!(slack > 0.0)) return false;
                acc -= std::log(slack);
                if (g) {
                    VectorXd gr = r.grad(rho);
                    g->head(n) += gr / slack;
                    (*g)[n] -= 1.0 / slack;
                    h->topLeftCorner(n, n).noalias() += (gr * gr.transpose()) / (slack * slack);
                    r.add_hess(rho, 1.0 / slack, h->topLeftCorner(n, n));
                    h->col(n).head(n) -= gr / (slack * slack);
                    h->row(n).head(n) -= gr.transpose() / (slack * slack);
                    (*h)(n, n) += 1.0 / (slack * slack);
                }
            }
            for (int i = 0; i < n; ++i) {
                double up = b.hi[i] - rho[i];
                if (!(rho[i] > 0.0) || !(up > 0.0)) return false;
                acc -= std::log(rho[i]) + std::log(up);
                if (g) {
                    (*g)[i] += -1.0 / rho[i] + 1.0 / up;
                    (*h)(i, i) += 1.0 / (rho[i] * rho[i]) + 1.0 / (up * up);
                }
            }
            bval = acc;
            return std::isfinite(acc);
        };
        // decrement^2 / (2t) bounds the objective suboptimality of the stage
        if (!center(ev, z, steps, capped, std::max(2.0 * kDecrTol, 2e-12 * t))) break;
        if (m / t <= kGapTol) break;
    }
    return z.head(n);
}

// Phase 2 core: minimize sum(rho) with every row held below `margin`.
VectorXd run_phase2(const Built& b, const Problem& pb, const VectorXd& start, double margin,
                    int& steps, bool& capped) {
    const int n = static_cast<int>(pb.active.size());
    VectorXd x = start;
    const double m = static_cast<double>(b.rows.size() + 2 * n);
    for (double t = 1.0; ; t *= 10.0) {
        auto ev = [&, t](const VectorXd& rho, double& bval, VectorXd* g, MatrixXd* h) -> bool {
            if (g) {
                *g = VectorXd::Constant(n, t);
                *h = MatrixXd::Zero(n, n);
            }
            double acc = t * rho.sum();
            for (const auto& r : b.rows) {
                double slack = margin - r.value(rho);
                if (!(slack > 0.0)) return false;
                acc -= std::log(slack);
                if (g) {
                    VectorXd gr = r.grad(rho);
                    *g += gr / slack;
                    h->noalias() += (gr * gr.transpose()) / (slack * slack);
                    r.add_hess(rho, 1.0 / slack, *h);
                }
            }
            for (int i = 0; i < n; ++i) {
                double up = b.hi[i] - rho[i];
                if (!(rho[i] > 0.0) || !(up > 0.0)) return false;
                acc -= std::log(rho[i]) + std::log(up);
                if (g) {
                    (*g)[i] += -1.0 / rho[i] + 1.0 / up;
                    (*h)(i, i) += 1.0 / (rho[i] * rho[i]) + 1.0 / (up * up);
                }
            }
            bval = acc;
            return std::isfinite(acc);
        };
        if (!center(ev, x, steps, capped, std::max(2.0 * kDecrTol, 2e-12 * t))) break;
        if (m / t <= kGapTol) break;
    }
    return x;
}

}  // namespace

SolveResult solve_feasibility(const Problem& pb, const std::vector<double>& rho_lin) {
    SolveResult out;
    if (pb.env == nullptr || pb.active.empty()) {
        out.status = Status::feasible;
        out.rho.assign(pb.env ? pb.env->num_users : 0, 0.0);
        out.max_violation = -kInf;
        return out;
    }
    auto anchor = cleaned_full(pb, rho_lin);
    Built b = build_rows(pb, anchor);
    if (b.rows.empty()) {
        // only unreachable floors remain; nothing to optimize
        out.rho = anchor;
        out.max_violation = kInf;
        out.status = Status::infeasible;
        return out;
    }
    int steps = 0;
    bool capped = false;
    VectorXd x = run_phase1(b, pb, anchor, steps, capped);
    out = pack(pb, b, x, steps, capped);
    if (b.inf_floor) {
        out.max_violation = kInf;
        out.status = Status::infeasible;
    }
    return out;
}

SolveResult solve_min_power(const Problem& pb, const std::vector<double>& rho_lin) {
    SolveResult out;
    if (pb.env == nullptr || pb.active.empty()) {
        out.status = Status::feasible;
        out.rho.assign(pb.env ? pb.env->num_users : 0, 0.0);
        out.max_violation = -kInf;
        return out;
    }
    auto anchor = cleaned_full(pb, rho_lin);
    Built b = build_rows(pb, anchor);
    if (b.rows.empty() || b.inf_floor) {
        out.rho = anchor;
        out.max_violation = kInf;
        out.status = Status::infeasible;
        return out;
    }
    int steps = 0;
    bool capped = false;
    VectorXd x = run_phase1(b, pb, anchor, steps, capped);
    double s1 = measured_violation(b, x);
    if (!(s1 <= kFeasTol)) {
        out = pack(pb, b, x, steps, capped);
        return out;
    }
    double margin = std::max(s1, 0.0) + 1e-12;
    x = run_phase2(b, pb, x, margin, steps, capped);
    return pack(pb, b, x, steps, capped);
}

double min_slack_original(const Problem& pb, const std::vector<double>& rho) {
    if (pb.env == nullptr) return 0.0;
    const auto& env = *pb.env;
    double worst = kInf;
    for (std::size_t i = 0; i < pb.active.size(); ++i) {
        int k = pb.active[i];
        double c = pb.floor_bps[i];
        if (std::isinf(c)) return -kInf;
        double r = radio::rate(env, rho, k);
        worst = std::min(worst, (r - c) / std::max({1.0, std::abs(c), env.bandwidth_hz}));
        double p = rho[k];
        worst = std::min(worst,
                         std::min(p, env.p_max_w[k] - p) / std::max(1.0, env.p_max_w[k]));
    }
    auto cap_row = [&](const Problem::AggRow& ar) {
        double sum = 0.0;
        for (int k : ar.members) sum += radio::rate(env, rho, k);
        worst = std::min(worst, (ar.cap_bps - sum) / std::max(1.0, std::abs(ar.cap_bps)));
    };
    for (const auto& ar : pb.link_rows) cap_row(ar);
    for (const auto& ar : pb.fronthaul_rows) cap_row(ar);
    return worst;
}

CcpResult ccp_minimize(const Problem& pb, const std::vector<double>& rho_init, double eps,
                       int i_rho_max) {
    CcpResult out;
    out.rho = cleaned_full(pb, rho_init);
    double cur = 0.0;
    for (int k : pb.active) cur += out.rho[k];
    out.trace_sum_rho.push_back(cur);
    out.min_orig_slack = min_slack_original(pb, out.rho);
    for (int i = 0; i < i_rho_max; ++i) {
        auto res = solve_min_power(pb, out.rho);
        ++out.iters;
        if (res.status != Status::feasible) break;
        double slack = min_slack_original(pb, res.rho);
        if (slack < -kFeasTol) break;  // conservativeness guard; keep previous
        double dec = cur - res.objective;
        if (dec < 0.0) break;  // never accept an increase
        out.rho = res.rho;
        cur = res.objective;
        out.trace_sum_rho.push_back(cur);
        out.min_orig_slack = std::min(out.min_orig_slack, slack);
        if (dec <= eps) break;
    }
    out.status = out.min_orig_slack >= -kFeasTol ? Status::feasible : Status::infeasible;
    return out;
}

FeasStepResult ccp_feasibility(const Problem& pb, const std::vector<double>& rho_anchor) {
    FeasStepResult out;
    auto anchor = cleaned_full(pb, rho_anchor);
    Built b = build_rows(pb, anchor);
    VectorXd xa(static_cast<int>(pb.active.size()));
    for (std::size_t i = 0; i < pb.active.size(); ++i)
        xa[static_cast<int>(i)] = anchor[pb.active[i]];
    double s_anchor = pb.active.empty() ? -kInf : measured_violation(b, xa);

    auto res = solve_feasibility(pb, anchor);
    bool finite = true;
    for (double v : res.rho) finite = finite && std::isfinite(v);
    out.accepted = finite && res.max_violation <= s_anchor + 1e-12;
    if (out.accepted) {
        out.rho = res.rho;
        out.max_violation = res.max_violation;
        out.status = res.status;
    } else {
        out.rho = anchor;
        out.max_violation = s_anchor;
        out.status = s_anchor <= kFeasTol ? Status::feasible : Status::infeasible;
    }
    out.min_orig_slack = min_slack_original(pb, out.rho);
    return out;
}

}  // namespace offsim::power
