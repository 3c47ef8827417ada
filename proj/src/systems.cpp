#include "ips/systems.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <unordered_map>

#include "ips/errors.hpp"
#include "ips/qkernel.hpp"

namespace ips {

// ---------------------------------------------------------------- Trajectory

Trajectory::Trajectory(double horizon_, const operators::ParticleConfig& start)
    : horizon(horizon_) {
    x0.resize(start.stored());
    for (int n = 1; n <= start.stored(); ++n) x0[n - 1] = start.pos(n);
    jumps.resize(x0.size());
}

void Trajectory::ensure(int n) {
    while (static_cast<int>(x0.size()) < n) {
        x0.push_back(-static_cast<long long>(x0.size()) - 1);
        jumps.emplace_back();
    }
}

long long Trajectory::initial(int n) const {
    return n <= particles() ? x0[n - 1] : -n;
}

long long Trajectory::pos(int n, double t) const {
    long long p = initial(n);
    if (n <= particles())
        for (double s : jumps[n - 1]) {
            if (s < t)
                ++p;
            else
                break;
        }
    return p;
}

long long Trajectory::pos_right(int n, double t) const {
    long long p = initial(n);
    if (n <= particles())
        for (double s : jumps[n - 1]) {
            if (s <= t)
                ++p;
            else
                break;
        }
    return p;
}

const std::vector<double>& Trajectory::jumps_of(int n) const {
    static const std::vector<double> empty;
    return n <= particles() ? jumps[n - 1] : empty;
}

void Trajectory::add_jump(int n, double t) {
    ensure(n);
    auto& v = jumps[n - 1];
    v.insert(std::upper_bound(v.begin(), v.end(), t), t);
}

operators::ParticleConfig Trajectory::config(double t) const {
    std::vector<long long> x(particles());
    for (int n = 1; n <= particles(); ++n) x[n - 1] = pos(n, t);
    return operators::ParticleConfig(std::move(x));
}

operators::ParticleConfig Trajectory::config_right(double t) const {
    std::vector<long long> x(particles());
    for (int n = 1; n <= particles(); ++n) x[n - 1] = pos_right(n, t);
    return operators::ParticleConfig(std::move(x));
}

std::vector<double> Trajectory::event_times() const {
    std::vector<double> ts;
    for (auto& v : jumps) ts.insert(ts.end(), v.begin(), v.end());
    std::sort(ts.begin(), ts.end());
    return ts;
}

void Trajectory::validate() const {
    auto ts = event_times();
    for (std::size_t i = 0; i + 1 < ts.size(); ++i)
        if (ts[i] == ts[i + 1]) throw Error("Trajectory: simultaneous increments");
    for (auto& v : jumps)
        for (std::size_t i = 0; i + 1 < v.size(); ++i)
            if (v[i] >= v[i + 1]) throw Error("Trajectory: unsorted jump times");
    std::vector<double> checkpoints = ts;
    checkpoints.push_back(horizon);
    for (double t : checkpoints)
        for (int n = 1; n + 1 <= particles() + 1; ++n)
            if (pos(n, t) <= pos(n + 1, t)) throw Error("Trajectory: ordering violated");
}

namespace systems {

using qkernel::kInfinity;
using qkernel::PhiParams;
using qkernel::PhiRegime;
using qkernel::phi_sample;
using qkernel::phi_weight;
using qkernel::q_pochhammer;

namespace {

double qpow(double q, long long k) {
    double r = 1.0;
    for (long long i = 0; i < k; ++i) r *= q;
    return r;
}

int sample_phi_row(Rng& rng, double q, double mu, double nu, int m) {
    PhiParams p{q, mu, nu, qkernel::classify_phi_regime(q, mu, nu)};
    return phi_sample(rng, p, m);
}

}  // namespace

// ---------------------------------------------------------------- q-Hahn

ParticleConfig qhahn_step(Rng& rng, double q, double gamma, const Sequence& s,
                          const ParticleConfig& x) {
    if (gamma < 1.0) throw RegimeViolation("qhahn_step: gamma must be >= 1");
    int P = x.stored() + 1;
    std::vector<long long> nx(P);
    for (int n = 1; n <= P; ++n) {
        double sn = s.at(n - 1);
        if (gamma * sn * sn >= 1.0)
            throw RegimeViolation("qhahn_step: gamma s^2 must stay below 1");
        int gap = (n == 1) ? kInfinity : static_cast<int>(x.pos(n - 1) - x.pos(n) - 1);
        int h = (gap == 0) ? 0 : sample_phi_row(rng, q, gamma * sn * sn, sn * sn, gap);
        nx[n - 1] = x.pos(n) + h;
    }
    return ParticleConfig(std::move(nx));
}

ModelSpec qhahn_model(double q, double gamma, const Sequence& s) {
    return ModelSpec::make_analytic(q, gamma, s, s);
}

// ---------------------------------------------------------------- geometric q-TASEP

ParticleConfig geo_qtasep_step(Rng& rng, double q, const Sequence& a, const ParticleConfig& x) {
    int P = x.stored() + 1;
    std::vector<long long> nx(P);
    for (int n = 1; n <= P; ++n) {
        double an = a.at(n - 1);
        if (an <= 0.0 || an >= 1.0) throw RegimeViolation("geo_qtasep_step: need 0 < a < 1");
        int gap = (n == 1) ? kInfinity : static_cast<int>(x.pos(n - 1) - x.pos(n) - 1);
        int h = (gap == 0) ? 0 : sample_phi_row(rng, q, an, 0.0, gap);
        nx[n - 1] = x.pos(n) + h;
    }
    return ParticleConfig(std::move(nx));
}

operators::SparseRow geo_transfer_row(double q, const Sequence& a, const PathConfig& g,
                                      double eps_tail) {
    // independent per-site splits h_i ~ phi_{q, a_i, 0}(. | g_i), taking
    // g'_i = g_i - h_i + h_{i-1}; the site-0 row is infinite and pruned.
    operators::SparseRow out;
    int L = g.support() + 1;
    std::vector<std::vector<double>> site_w(L + 1);
    for (int i = 1; i <= L; ++i) {
        int gi = g.site(i);
        site_w[i].resize(gi + 1);
        for (int h = 0; h <= gi; ++h)
            site_w[i][h] = phi_weight(PhiParams{q, a.at(i), 0.0}, h, gi);
    }
    double cum0 = 0.0;
    for (int h0 = 0;; ++h0) {
        double w0 = phi_weight(PhiParams{q, a.at(0), 0.0}, h0, kInfinity);
        cum0 += w0;
        // enumerate all per-site choices
        std::vector<int> h(L + 1, 0);
        std::function<void(int, double)> rec = [&](int i, double w) {
            if (w < eps_tail) {
                out.tail += w;
                return;
            }
            if (i > L) {
                std::vector<int> occ(L + 1, 0);
                int prev = h0;
                bool ok = true;
                for (int k = 1; k <= L; ++k) {
                    int v = g.site(k) - h[k] + prev;
                    if (v < 0) {
                        ok = false;
                        break;
                    }
                    occ[k - 1] = v;
                    prev = h[k];
                }
                if (ok && prev == 0) out.entries.emplace_back(PathConfig(occ), w);
                return;
            }
            for (int hi = 0; hi <= g.site(i); ++hi) {
                h[i] = hi;
                rec(i + 1, w * site_w[i][hi]);
            }
        };
        if (w0 > 0) rec(1, w0);
        if (1.0 - cum0 < eps_tail) {
            out.tail += 1.0 - cum0;
            break;
        }
        if (h0 > 100000) throw NonTermination("geo_transfer_row: inflow did not exhaust");
    }
    // merge duplicates (distinct h-patterns can give the same g')
    std::unordered_map<PathConfig, double, operators::PathConfigHash> acc;
    for (auto& [cfg, w] : out.entries) acc[cfg] += w;
    out.entries.assign(acc.begin(), acc.end());
    return out;
}

double geo_shift_weight(double q, const Sequence& a, const PathConfig& g, const PathConfig& d) {
    // product of swap factors phi_{q, a_m/a_0, 0}(h_m | .) over the tower
    int M = 1 + std::max(g.support(), d.support());
    double w = 1.0;
    long long h_prev = 0;
    for (int m = 1; m <= M; ++m) {
        long long h = 0;
        for (int l = m; l <= d.support(); ++l) h += d.site(l);
        for (int l = m + 1; l <= g.support(); ++l) h -= g.site(l);
        if (h < 0) return 0.0;
        double mu = a.at(m) / a.at(0);
        if (m == 1) {
            w *= phi_weight(PhiParams{q, mu, 0.0}, static_cast<int>(h), g.site(1));
        } else {
            // R(d_{m-1}, h_{m-1}; g_m, h_m) = 1{h_m <= g_m} phi(h_m | g_m)
            if (h > g.site(m)) return 0.0;
            w *= phi_weight(PhiParams{q, mu, 0.0}, static_cast<int>(h), g.site(m));
        }
        if (w == 0.0) return 0.0;
        h_prev = h;
    }
    (void)h_prev;
    return w;
}

operators::SparseRow geo_shift_row(double q, const Sequence& a, const PathConfig& g) {
    // the shift only moves mass down/left: targets are dominated by g
    operators::SparseRow out;
    std::vector<int> cur(g.support(), 0);
    std::function<void(int)> rec = [&](int site) {
        if (site > g.support()) {
            PathConfig d(cur);
            double w = geo_shift_weight(q, a, g, d);
            if (w > 0) out.entries.emplace_back(std::move(d), w);
            return;
        }
        // h_m <= g_m bounds each tower edge; d-site values bounded by total mass
        long long cap = g.total();
        for (int v = 0; v <= cap; ++v) {
            cur[site - 1] = v;
            rec(site + 1);
        }
        cur[site - 1] = 0;
    };
    rec(1);
    double sum = 0;
    for (auto& [cfg, w] : out.entries) sum += w;
    out.tail = std::max(0.0, 1.0 - sum);
    return out;
}

operators::IntertwiningReport verify_intertwining_geo(double q, const Sequence& a,
                                                      const std::vector<PathConfig>& interior) {
    operators::IntertwiningReport rep;
    Sequence a_sh = a.shifted(1);
    for (const PathConfig& g : interior) {
        std::unordered_map<PathConfig, double, operators::PathConfigHash> lhs, rhs;
        operators::SparseRow rowT = geo_transfer_row(q, a, g);
        rep.tail_bound += rowT.tail;
        for (auto& [g1, w1] : rowT.entries) {
            operators::SparseRow rowB = geo_shift_row(q, a, g1);
            rep.tail_bound += w1 * rowB.tail;
            for (auto& [g2, w2] : rowB.entries) lhs[g2] += w1 * w2;
        }
        operators::SparseRow rowB = geo_shift_row(q, a, g);
        rep.tail_bound += rowB.tail;
        for (auto& [g1, w1] : rowB.entries) {
            operators::SparseRow rowT2 = geo_transfer_row(q, a_sh, g1);
            rep.tail_bound += w1 * rowT2.tail;
            for (auto& [g2, w2] : rowT2.entries) rhs[g2] += w1 * w2;
        }
        for (auto& [cfg, v] : lhs) {
            auto it = rhs.find(cfg);
            rep.residual = std::max(rep.residual, std::abs(v - (it == rhs.end() ? 0.0 : it->second)));
        }
        for (auto& [cfg, v] : rhs)
            if (!lhs.count(cfg)) rep.residual = std::max(rep.residual, std::abs(v));
    }
    return rep;
}

// ---------------------------------------------------------------- continuous time

ParticleConfig ct_qtasep_simulate(Rng& rng, double q, const Sequence& alpha,
                                  const ParticleConfig& x0, double t_end, Trajectory* record) {
    std::vector<long long> x;
    for (int n = 1; n <= x0.stored(); ++n) x.push_back(x0.pos(n));
    auto ensure = [&](int n) {
        while (static_cast<int>(x.size()) < n) x.push_back(-static_cast<long long>(x.size()) - 1);
    };
    if (record) *record = Trajectory(t_end, x0);
    double t = 0.0;
    while (true) {
        ensure(static_cast<int>(x.size()) + 1);
        // jump rates: particle n moves at alpha_{n-1} (1 - q^{gap ahead})
        std::vector<double> rate(x.size() + 1, 0.0);
        double total = 0.0;
        for (int n = 1; n <= static_cast<int>(x.size()); ++n) {
            long long gap = (n == 1) ? -1 : x[n - 2] - x[n - 1] - 1;
            double r = (n == 1) ? alpha.at(0) : alpha.at(n - 1) * (1.0 - qpow(q, gap));
            rate[n] = r;
            total += r;
        }
        if (total <= 0.0) break;
        t += rng.exponential(total);
        if (t >= t_end) break;
        double u = rng.uniform() * total;
        int n = 1;
        for (; n < static_cast<int>(x.size()); ++n) {
            u -= rate[n];
            if (u <= 0) break;
        }
        x[n - 1] += 1;
        if (record) {
            record->ensure(n);
            record->add_jump(n, t);
        }
        if (n == static_cast<int>(x.size())) ensure(n + 1);
    }
    return ParticleConfig(std::move(x));
}

double backwards_target_prob(double q, int g, int k) {
    // probability that the firing particle lands k sites down, 1 <= k <= g
    return q_pochhammer(q, q, g) /
           (static_cast<double>(g) * (1.0 - qpow(q, k)) * q_pochhammer(q, q, g - k));
}

ParticleConfig backwards_qtasep_simulate(Rng& rng, double q, const ParticleConfig& x0,
                                         double tau_end) {
    std::vector<long long> x;
    for (int n = 1; n <= x0.stored(); ++n) x.push_back(x0.pos(n));
    double t = 0.0;
    while (true) {
        double total = 0.0;
        std::vector<double> rate(x.size() + 1, 0.0);
        for (int n = 1; n <= static_cast<int>(x.size()); ++n) {
            long long xn1 = (n < static_cast<int>(x.size())) ? x[n] : -(n + 1);
            long long g = x[n - 1] - xn1 - 1;
            rate[n] = static_cast<double>(n) * static_cast<double>(g);
            total += rate[n];
        }
        if (total <= 0.0) break;
        t += rng.exponential(total);
        if (t >= tau_end) break;
        double u = rng.uniform() * total;
        int n = 1;
        for (; n < static_cast<int>(x.size()); ++n) {
            u -= rate[n];
            if (u <= 0) break;
        }
        long long xn1 = (n < static_cast<int>(x.size())) ? x[n] : -(n + 1);
        int g = static_cast<int>(x[n - 1] - xn1 - 1);
        double v = rng.uniform();
        double cum = 0.0;
        int k = g;
        for (int kk = 1; kk <= g; ++kk) {
            cum += backwards_target_prob(q, g, kk);
            if (v < cum) {
                k = kk;
                break;
            }
        }
        x[n - 1] -= k;
    }
    return ParticleConfig(std::move(x));
}

// ---------------------------------------------------------------- Schur model

ModelSpec SchurParams::model() const {
    if (nu <= 0.0 || nu >= 1.0) throw RegimeViolation("SchurParams: nu must lie in (0,1)");
    double root = std::sqrt(nu);
    return ModelSpec::make(0.0, 1, a.scaled(1.0 / root), Sequence::constant(-root));
}

void SchurParams::require_shift_domain() const {
    double a0 = a.at(0);
    for (int n = 1; n <= 128; ++n) {
        double r = a.at(n) / a0;
        if (r > 1.0 + 1e-12 || r < 2.0 - 1.0 / nu - 1e-12)
            throw RegimeViolation("SchurParams: shift needs 2 - 1/nu <= a_n/a_0 <= 1");
    }
}

PathConfig schur_step(Rng& rng, const SchurParams& p, const PathConfig& g) {
    const double nu = p.nu;
    // emissions from the reservoir (site 0) and each nonempty stack, then
    // travel over the time-t configuration
    std::vector<std::pair<int, int>> deposits;  // (site, count)
    std::vector<int> emitted(g.support() + 1, 0);
    auto travel = [&](int from) {
        int site = from + 1;
        while (true) {
            if (site <= g.support() && g.site(site) > 0) return site;  // joins the next stack
            double ai = p.a.at(site);
            if (rng.uniform() < (1.0 - nu) / (1.0 + ai)) return site;  // drops on an empty site
            ++site;
            if (site > g.support() + 10000000)
                throw NonTermination("schur_step: traveller escaped");
        }
    };
    if (rng.uniform() < p.a.at(0) / (1.0 + p.a.at(0))) deposits.push_back({travel(0), 1});
    for (int i = 1; i <= g.support(); ++i) {
        if (g.site(i) == 0) continue;
        if (rng.uniform() < p.a.at(i) / (1.0 + p.a.at(i))) {
            emitted[i] = 1;
            deposits.push_back({travel(i), 1});
        }
    }
    PathConfig out = g;
    for (int i = 1; i <= g.support(); ++i)
        if (emitted[i]) out.set_site(i, out.site(i) - 1);
    for (auto [site, cnt] : deposits) out.set_site(site, out.site(site) + cnt);
    return out;
}

double schur_empty_fix_probability(const SchurParams& p) {
    double z = p.a.at(1) / p.a.at(0);
    return (1.0 - p.nu) / (1.0 - p.nu * z);
}

// ---------------------------------------------------------------- generators

std::pair<GeneratorMatrix, GeneratorMatrix> build_generators(double q, const Sequence& alpha,
                                                             int N, long long K) {
    auto shared = std::make_shared<Enumeration>(Enumeration::displacement_window(N, K));
    const Enumeration& E = *shared;
    int n_states = E.size();
    GeneratorMatrix T{shared, linalg::Matrix(n_states, n_states), std::vector<double>(n_states, 0.0)};
    GeneratorMatrix B{shared, linalg::Matrix(n_states, n_states), std::vector<double>(n_states, 0.0)};
    for (int i = 0; i < n_states; ++i) {
        const PathConfig& g = E.states[i];
        int parts = g.support();
        // forward moves: particle n jumps right at alpha_{n-1}(1 - q^{g_{n-1}})
        for (int n = 1; n <= parts + 1; ++n) {
            double r;
            if (n == 1)
                r = alpha.at(0);
            else {
                int gap = g.site(n - 1);
                if (gap == 0) continue;
                r = alpha.at(n - 1) * (1.0 - qpow(q, gap));
            }
            PathConfig t = g;
            if (n >= 2) t.set_site(n - 1, t.site(n - 1) - 1);
            t.set_site(n, t.site(n) + 1);
            int j = E.idx(t);
            if (j >= 0) {
                T.gen(i, j) += r;
                T.gen(i, i) -= r;
            } else {
                T.leak_rate[i] += r;
                T.gen(i, i) -= r;
            }
        }
        // backward moves: particle n fires at n g_n, lands k sites down
        for (int n = 1; n <= parts; ++n) {
            int gn = g.site(n);
            if (gn == 0) continue;
            for (int k = 1; k <= gn; ++k) {
                double r = static_cast<double>(n) * gn * backwards_target_prob(q, gn, k);
                PathConfig t = g;
                t.set_site(n, gn - k);
                if (n >= 2) t.set_site(n - 1, t.site(n - 1) + k);
                int j = E.idx(t);
                if (j >= 0) {
                    B.gen(i, j) += r;
                    B.gen(i, i) -= r;
                } else {
                    B.leak_rate[i] += r;
                    B.gen(i, i) -= r;
                }
            }
        }
    }
    return {std::move(T), std::move(B)};
}

LaxReport verify_lax(double q, long long K, double t, double tau, int interior_parts,
                     long long interior_weight) {
    auto [Tg, Bg] = build_generators(q, Sequence::constant(1.0), static_cast<int>(K), K);
    const Enumeration& E = *Tg.states;
    linalg::Matrix Et = linalg::expm(Tg.gen.scaled(t));
    linalg::Matrix Eb = linalg::expm(Bg.gen.scaled(tau));
    linalg::Matrix Et2 = linalg::expm(Tg.gen.scaled(t * std::exp(-tau)));
    linalg::Matrix lhs = Et * Eb;
    linalg::Matrix rhs = Eb * Et2;
    linalg::Matrix lax_l = (Tg.gen * Et).scaled(t);
    linalg::Matrix lax_r = Bg.gen * Et - Et * Bg.gen;
    LaxReport rep;
    for (int i = 0; i < E.size(); ++i) {
        const PathConfig& g = E.states[i];
        if (g.support() > interior_parts || g.weighted() > interior_weight) continue;
        ++rep.interior_rows;
        double mass = 0;
        for (int j = 0; j < E.size(); ++j) mass += Et(i, j);
        rep.interior_mass = std::min(rep.interior_mass, mass);
        for (int j = 0; j < E.size(); ++j) {
            rep.semigroup_residual =
                std::max(rep.semigroup_residual, std::abs(lhs(i, j) - rhs(i, j)));
            rep.lax_residual = std::max(rep.lax_residual, std::abs(lax_l(i, j) - lax_r(i, j)));
        }
    }
    if (rep.interior_rows == 0 || rep.interior_mass < 1.0 - 1e-6)
        throw TruncationTooTight("verify_lax: interior mass below threshold");
    return rep;
}

}  // namespace systems
}  // namespace ips
