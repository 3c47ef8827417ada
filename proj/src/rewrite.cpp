#include "ips/rewrite.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ips/errors.hpp"
#include "ips/systems.hpp"

namespace ips::rewrite {

using yangbaxter::ExtendedRate;
using yangbaxter::kInfinityBoundary;
using yangbaxter::rate_down;
using yangbaxter::rate_up;

namespace {

double qpow(double q, long long k) {
    double r = 1.0;
    for (long long i = 0; i < k; ++i) r *= q;
    return r;
}

}  // namespace

// ---------------------------------------------------------------- d/u tables

double d_quantity(int j1, double q, double beta, double s0, double s1, int b, int c) {
    if (j1 == 0) {
        if (c < 0 || c > b + 1) throw Error("d_quantity: need 0 <= c <= b+1");
        if (c == b + 1) return 0.0;  // pushing down
        if (c == 0) return std::numeric_limits<double>::infinity();  // blocking
        return (1.0 + beta * s0 * s0 * qpow(q, c)) * (1.0 - qpow(q, b + 1 - c)) /
               (beta * (s0 * s0 - s1 * s1 * qpow(q, b - c)) * (1.0 - qpow(q, c)));
    }
    if (c < 0 || c > b) throw Error("d_quantity: need 0 <= c <= b for j1 = 1");
    if (c == b) return 0.0;  // pushing down
    return (1.0 - s0 * s0 * qpow(q, c)) * (1.0 - qpow(q, b - c)) /
           ((beta + qpow(q, c)) * (s0 * s0 - s1 * s1 * qpow(q, b - c - 1)));
}

double u_quantity(int j1, double q, double beta, double s0, double s1, int b, int c) {
    if (j1 == 0) {
        if (c < 0 || c > b + 1) throw Error("u_quantity: need 0 <= c <= b+1");
        if (c == b + 1) return 0.0;  // pushing up
        return (1.0 + beta * s1 * s1 * qpow(q, b)) * (1.0 - qpow(q, b + 1 - c)) /
               (beta * (s0 * s0 - s1 * s1 * qpow(q, b - c)) * (1.0 - qpow(q, b + 1)));
    }
    if (c < 0 || c > b) throw Error("u_quantity: need 0 <= c <= b for j1 = 1");
    if (c == b) return 0.0;  // pushing up
    return (1.0 - s1 * s1 * qpow(q, b - 1)) * (1.0 - qpow(q, b - c)) /
           ((beta + qpow(q, b)) * (s0 * s0 - s1 * s1 * qpow(q, b - c - 1)));
}

// ---------------------------------------------------------------- discrete rewriting

DiscreteTrajectory simulate_discrete(Rng& rng, const BetaSpec& spec, const PathConfig& g0,
                                     int M) {
    operators::ModelSpec model = spec.model();
    DiscreteTrajectory traj;
    traj.reserve(M + 1);
    traj.push_back(g0);
    for (int t = 0; t < M; ++t) traj.push_back(operators::transfer_sample(rng, model, traj.back()));
    return traj;
}

DiscreteTrajectory rewrite_past_discrete(Rng& rng, const BetaSpec& spec, int n,
                                         const DiscreteTrajectory& traj, const PathConfig& d_end) {
    const int M = static_cast<int>(traj.size()) - 1;
    DiscreteTrajectory out(traj.size());
    out[M] = d_end;
    for (int t = M - 1; t >= 0; --t)
        out[t] = operators::down_step(rng, spec, n, traj[t], traj[t + 1], out[t + 1]);
    return out;
}

DiscreteTrajectory rewrite_future_discrete(Rng& rng, const BetaSpec& spec, int n,
                                           const DiscreteTrajectory& traj,
                                           const PathConfig& g_start) {
    const int M = static_cast<int>(traj.size()) - 1;
    DiscreteTrajectory out(traj.size());
    out[0] = g_start;
    for (int t = 1; t <= M; ++t)
        out[t] = operators::up_step(rng, spec, n, out[t - 1], traj[t - 1], traj[t]);
    return out;
}

// ---------------------------------------------------------------- chamber walks

namespace {

// merged neighbour/old-path event times relevant to the walk of particle n
std::vector<std::pair<double, int>> walk_events(const Trajectory& traj, int n, double lo,
                                                double hi) {
    std::vector<std::pair<double, int>> ev;
    for (int m = std::max(1, n - 1); m <= n + 1; ++m)
        for (double t : traj.jumps_of(m))
            if (t > lo && t < hi) ev.emplace_back(t, m);
    std::sort(ev.begin(), ev.end());
    return ev;
}

/// Reverse-time walk of a replacement path for particle n in the chamber
/// x_{n+1}(t) < L <= x_n(t), from (t_hi, start_level) down to t = 0.
/// Jumps down at rate_down(q, rates, a, b, c); pushed down whenever the old
/// path's increments cross it from above. Returns the new path's increment
/// times below t_hi (ascending).
std::vector<double> down_walk(Rng& rng, double q, const RatePair& rates, const Trajectory& traj,
                              int n, double t_hi, long long start_level) {
    std::vector<double> out;
    auto ev = walk_events(traj, n, 0.0, t_hi);
    long long L = start_level;
    double t = t_hi;
    int ei = static_cast<int>(ev.size()) - 1;
    while (true) {
        long long xn = traj.pos(n, t);
        long long xlo = traj.pos(n + 1, t);
        long long c = L - xlo - 1;
        long long b = xn - xlo - 1;
        if (c < 0 || c > b) throw ChamberViolation("down_walk: chamber inequality violated");
        int a = (n == 1) ? kInfinityBoundary
                         : static_cast<int>(traj.pos(n - 1, t) - xn - 1);
        ExtendedRate r = rate_down(q, rates, a, static_cast<int>(b), static_cast<int>(c));
        if (r.infinite) throw ChamberViolation("down_walk: pushing rate inside an interval");
        double t_cross = (ei >= 0) ? ev[ei].first : 0.0;
        if (r.value > 0.0) {
            double s = t - rng.exponential(r.value);
            if (s > t_cross) {
                L -= 1;
                out.push_back(s);
                t = s;
                continue;
            }
        }
        if (ei < 0) break;
        // cross the event at t_cross
        t = t_cross;
        int who = ev[ei].second;
        --ei;
        if (who == n && traj.pos(n, t) + 1 == L && traj.pos_right(n, t) == L) {
            // the top wall drops through the walk: pushed down, same instant
            L -= 1;
            out.push_back(t);
        }
    }
    std::reverse(out.begin(), out.end());
    return out;
}

/// Forward-time walk for particle n in the chamber y_n(t) <= L < y_{n-1}(t),
/// from (t_lo, start_level) up to the horizon. Jumps up at
/// rate_up(q, rates, a, b, c); pushed up by the old path's increments.
std::vector<double> up_walk(Rng& rng, double q, const RatePair& rates, const Trajectory& traj,
                            int n, double t_lo, long long start_level) {
    std::vector<double> out;
    auto ev = walk_events(traj, n, t_lo, traj.horizon);
    long long L = start_level;
    double t = t_lo;
    std::size_t ei = 0;
    while (true) {
        long long ylo = traj.pos_right(n + 1, t);
        long long yn = traj.pos_right(n, t);
        long long b = L - ylo - 1;
        long long c = yn - ylo - 1;
        if (c < 0 || c > b) throw ChamberViolation("up_walk: chamber inequality violated");
        int a;
        if (n == 1)
            a = kInfinityBoundary;
        else {
            long long gap = traj.pos_right(n - 1, t) - L - 1;
            if (gap < 0) throw ChamberViolation("up_walk: above the upper wall");
            a = static_cast<int>(gap);
        }
        ExtendedRate r = rate_up(q, rates, a, static_cast<int>(b), static_cast<int>(c));
        if (r.infinite) throw ChamberViolation("up_walk: pushing rate inside an interval");
        double t_cross = (ei < ev.size()) ? ev[ei].first : traj.horizon;
        if (r.value > 0.0) {
            double s = t + rng.exponential(r.value);
            if (s < t_cross) {
                L += 1;
                out.push_back(s);
                t = s;
                continue;
            }
        }
        if (ei >= ev.size()) break;
        t = t_cross;
        int who = ev[ei].second;
        ++ei;
        if (who == n && traj.pos_right(n, t) == L + 1) {
            // the bottom wall rises through the walk: pushed up, same instant
            L += 1;
            out.push_back(t);
        }
    }
    return out;
}

Trajectory replace_particle(const Trajectory& traj, int n, long long new_x0,
                            std::vector<double> new_jumps) {
    Trajectory out = traj;
    out.ensure(n);
    out.x0[n - 1] = new_x0;
    out.jumps[n - 1] = std::move(new_jumps);
    return out;
}

}  // namespace

Trajectory rewrite_past_ct(Rng& rng, double q, const RatePair& rates, int n,
                           const Trajectory& traj, long long xn_end) {
    const double M = traj.horizon;
    if (!(traj.pos(n + 1, M) < xn_end && xn_end <= traj.pos(n, M)))
        throw ChamberViolation("rewrite_past_ct: terminal point outside the chamber");
    std::vector<double> path = down_walk(rng, q, rates, traj, n, M, xn_end);
    long long x0 = xn_end - static_cast<long long>(path.size());
    Trajectory out = replace_particle(traj, n, x0, std::move(path));
    out.validate();
    return out;
}

Trajectory rewrite_future_ct(Rng& rng, double q, const RatePair& rates, int n,
                             const Trajectory& traj, long long yn_start) {
    if (!(traj.initial(n) <= yn_start &&
          (n == 1 || yn_start < traj.initial(n - 1))))
        throw ChamberViolation("rewrite_future_ct: starting point outside the chamber");
    std::vector<double> path = up_walk(rng, q, rates, traj, n, 0.0, yn_start);
    Trajectory out = replace_particle(traj, n, yn_start, std::move(path));
    out.validate();
    return out;
}

// ---------------------------------------------------------------- slowdown

namespace {

struct Segment {
    double lo = 0, hi = 0;
    double density = 0;  // bulk-jump intensity per unit (t, tau) area
};

std::vector<Segment> slowdown_segments(const Trajectory& traj, double q, int n) {
    std::vector<double> ts = traj.event_times();
    ts.insert(ts.begin(), 0.0);
    ts.push_back(traj.horizon);
    std::vector<Segment> segs;
    for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
        if (ts[i + 1] <= ts[i]) continue;
        double tm = 0.5 * (ts[i] + ts[i + 1]);
        long long gap = traj.pos(n, tm) - traj.pos(n + 1, tm) - 1;
        if (gap <= 0) continue;
        double above = (n == 1) ? 1.0 : 1.0 - qpow(q, traj.pos(n - 1, tm) - traj.pos(n, tm));
        double density = n * above * (1.0 - qpow(q, gap)) / (1.0 - q);
        if (density > 0) segs.push_back({ts[i], ts[i + 1], density});
    }
    return segs;
}

std::vector<Segment> speedup_segments(const Trajectory& traj, double q, int n) {
    std::vector<double> ts = traj.event_times();
    ts.insert(ts.begin(), 0.0);
    ts.push_back(traj.horizon);
    std::vector<Segment> segs;
    for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
        if (ts[i + 1] <= ts[i]) continue;
        double tm = 0.5 * (ts[i] + ts[i + 1]);
        double above =
            (n == 1) ? 1.0 : 1.0 - qpow(q, traj.pos(n - 1, tm) - traj.pos(n, tm) - 1);
        if (above <= 0) continue;
        double below = 1.0 - qpow(q, traj.pos(n, tm) - traj.pos(n + 1, tm));
        double density = n * above * below / (1.0 - q);
        if (density > 0) segs.push_back({ts[i], ts[i + 1], density});
    }
    return segs;
}

double total_weight(const std::vector<std::vector<Segment>>& all) {
    double c = 0;
    for (auto& per : all)
        for (auto& s : per) c += (s.hi - s.lo) * s.density;
    return c;
}

}  // namespace

Trajectory slowdown_apply(Rng& rng, double q, double tau_end, Trajectory traj) {
    const double M = traj.horizon;
    double tau = 0.0;
    while (true) {
        int P = traj.particles();
        // terminal jumps: backwards dynamics on the configuration at the horizon
        std::vector<double> term_rate(P + 1, 0.0);
        double term_total = 0.0;
        for (int n = 1; n <= P; ++n) {
            long long g = traj.pos_right(n, M) - traj.pos_right(n + 1, M) - 1;
            term_rate[n] = static_cast<double>(n) * static_cast<double>(g);
            term_total += term_rate[n];
        }
        // bulk jumps: segment-attached clocks scaled by e^{-tau}
        std::vector<std::vector<Segment>> segs(P + 1);
        for (int n = 1; n <= P; ++n) segs[n] = slowdown_segments(traj, q, n);
        double C = total_weight(segs);
        if (term_total <= 0 && C <= 0) break;
        // exact time-change inversion for the next event
        double E = rng.exponential(1.0);
        double delta;
        if (term_total <= 0) {
            double budget = C * std::exp(-tau);
            if (E >= budget) break;  // bulk clock runs dry only as tau -> inf
            delta = -std::log(1.0 - E / budget);
        } else {
            double lo = 0, hi = 1;
            auto f = [&](double d) {
                return term_total * d + C * (std::exp(-tau) - std::exp(-tau - d)) - E;
            };
            while (f(hi) < 0 && hi < 1e12) hi *= 2;
            for (int it = 0; it < 200; ++it) {
                double mid = 0.5 * (lo + hi);
                (f(mid) < 0 ? lo : hi) = mid;
            }
            delta = 0.5 * (lo + hi);
        }
        if (tau + delta >= tau_end) break;
        tau += delta;
        double bulk_total = C * std::exp(-tau);
        if (rng.uniform() * (term_total + bulk_total) < term_total) {
            // terminal jump: backwards move of the configuration at the horizon
            double u = rng.uniform() * term_total;
            int n = 1;
            for (; n < P; ++n) {
                u -= term_rate[n];
                if (u <= 0) break;
            }
            int g = static_cast<int>(traj.pos_right(n, M) - traj.pos_right(n + 1, M) - 1);
            double v = rng.uniform(), cum = 0.0;
            int k = g;
            for (int kk = 1; kk <= g; ++kk) {
                cum += systems::backwards_target_prob(q, g, kk);
                if (v < cum) {
                    k = kk;
                    break;
                }
            }
            long long target = traj.pos_right(n, M) - k;
            RatePair prop{std::exp(-tau), std::exp(-tau)};
            std::vector<double> path = down_walk(rng, q, prop, traj, n, M, target);
            traj = replace_particle(traj, n, target - static_cast<long long>(path.size()),
                                    std::move(path));
        } else {
            // bulk jump: pick the particle and segment, then a uniform instant
            double u = rng.uniform() * C;
            int n = 1;
            double t_star = -1;
            for (; n <= P; ++n) {
                for (auto& s : segs[n]) {
                    double w = (s.hi - s.lo) * s.density;
                    if (u <= w) {
                        t_star = s.lo + u / s.density;
                        break;
                    }
                    u -= w;
                }
                if (t_star >= 0) break;
            }
            if (t_star < 0) continue;  // numerical edge of the selection scan
            long long lvl = traj.pos(n, t_star) - 1;
            std::vector<double> keep;
            for (double s : traj.jumps_of(n))
                if (s >= t_star) keep.push_back(s);
            long long end_pos = traj.pos_right(n, M);
            RatePair prop{std::exp(-tau), std::exp(-tau)};
            std::vector<double> below = down_walk(rng, q, prop, traj, n, t_star, lvl);
            std::vector<double> path = std::move(below);
            path.push_back(t_star);
            path.insert(path.end(), keep.begin(), keep.end());
            traj = replace_particle(traj, n, end_pos - static_cast<long long>(path.size()),
                                    std::move(path));
        }
    }
    traj.validate();
    return traj;
}

Trajectory speedup_apply(Rng& rng, double q, double tau_end, Trajectory traj) {
    for (int n = 1; n <= traj.particles(); ++n)
        if (traj.initial(n) != -n)
            throw StepStartRequired("speedup_apply: trajectory must start from the step");
    double tau = 0.0;
    while (true) {
        traj.ensure(traj.particles() + 1);
        int P = traj.particles();
        std::vector<std::vector<Segment>> segs(P + 1);
        for (int n = 1; n <= P; ++n) segs[n] = speedup_segments(traj, q, n);
        double C = total_weight(segs);
        if (C <= 0) break;
        double E = rng.exponential(1.0);
        double delta = std::log(std::exp(tau) + E / C) - tau;
        if (tau + delta >= tau_end) break;
        tau += delta;
        double u = rng.uniform() * C;
        int n = 1;
        double t_star = -1;
        for (; n <= P; ++n) {
            for (auto& s : segs[n]) {
                double w = (s.hi - s.lo) * s.density;
                if (u <= w) {
                    t_star = s.lo + u / s.density;
                    break;
                }
                u -= w;
            }
            if (t_star >= 0) break;
        }
        if (t_star < 0) continue;
        long long lvl = traj.pos(n, t_star) + 1;
        std::vector<double> keep;
        for (double s : traj.jumps_of(n))
            if (s < t_star) keep.push_back(s);
        RatePair prop{std::exp(tau), std::exp(tau)};
        std::vector<double> above = up_walk(rng, q, prop, traj, n, t_star, lvl);
        std::vector<double> path = std::move(keep);
        path.push_back(t_star);
        path.insert(path.end(), above.begin(), above.end());
        traj = replace_particle(traj, n, traj.initial(n), std::move(path));
    }
    traj.validate();
    return traj;
}

// ---------------------------------------------------------------- Poisson couplings

namespace {

long long level_at(const std::vector<double>& jumps, double t) {
    long long lvl = 0;
    for (double s : jumps) {
        if (s < t)
            ++lvl;
        else
            break;
    }
    return lvl;
}

/// Avalanche of the growth process: bump at t_star, then a rate-`slope`
/// walk racing the old path until they meet or the horizon is reached.
std::vector<double> avalanche(Rng& rng, const std::vector<double>& old_jumps, double t_star,
                              double slope, double horizon) {
    std::vector<double> out;
    for (double s : old_jumps)
        if (s < t_star) out.push_back(s);
    out.push_back(t_star);
    long long lvl_new = level_at(old_jumps, t_star) + 1;
    long long lvl_old = lvl_new - 1;
    std::size_t oi = 0;
    while (oi < old_jumps.size() && old_jumps[oi] < t_star) ++oi;
    double t = t_star;
    double next_own = t + rng.exponential(slope);
    while (t < horizon) {
        double t_old = (oi < old_jumps.size()) ? old_jumps[oi] : horizon;
        if (next_own < std::min(t_old, horizon)) {
            t = next_own;
            ++lvl_new;
            out.push_back(t);
            next_own = t + rng.exponential(slope);
        } else if (t_old < horizon) {
            t = t_old;
            ++lvl_old;
            ++oi;
            if (lvl_old == lvl_new) {
                // merged: follow the old path for the rest of the horizon
                out.insert(out.end(), old_jumps.begin() + oi, old_jumps.end());
                return out;
            }
        } else {
            break;
        }
    }
    return out;
}

}  // namespace

std::vector<double> poisson_grow(Rng& rng, double tau_hat_end, std::vector<double> jumps,
                                 double horizon) {
    // unit-rate planar Poisson field on [0,horizon] x [0,tau_hat_end]
    std::vector<std::pair<double, double>> pts;  // (tau_hat, t)
    long long count = rng.poisson(horizon * tau_hat_end);
    pts.reserve(count);
    for (long long i = 0; i < count; ++i)
        pts.emplace_back(rng.uniform() * tau_hat_end, rng.uniform() * horizon);
    std::sort(pts.begin(), pts.end());
    for (auto& [tau_hat, t_star] : pts)
        jumps = avalanche(rng, jumps, t_star, tau_hat + 1.0, horizon);
    return jumps;
}

DilationResult poisson_dilation_step(Rng& rng, const std::vector<double>& jumps) {
    double t_star = rng.uniform();
    double zeta = rng.exponential(1.0);
    double w = 1.0 / (1.0 + zeta);
    if (t_star > w) return {jumps, true};
    std::vector<double> grown = avalanche(rng, jumps, t_star, zeta + 1.0, w);
    DilationResult out;
    out.noop = false;
    for (double s : grown)
        if (s <= w) out.jumps.push_back(s * (1.0 + zeta));
    return out;
}

}  // namespace ips::rewrite
