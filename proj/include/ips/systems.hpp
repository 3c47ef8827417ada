#pragma once

#include <memory>
#include <utility>

#include "ips/linalg.hpp"
#include "ips/operators.hpp"
#include "ips/rng.hpp"
#include "ips/trajectory.hpp"

namespace ips::systems {

using operators::Enumeration;
using operators::ModelSpec;
using operators::ParticleConfig;
using operators::PathConfig;
using operators::Sequence;

// -- q-Hahn TASEP --------------------------------------------------------------

/// One parallel q-Hahn TASEP step: particle x_n jumps by
/// h ~ phi_{q, gamma s_{n-1}^2, s_{n-1}^2}(. | x_{n-1}-x_n-1), the first
/// particle with an infinite row.
ParticleConfig qhahn_step(Rng& rng, double q, double gamma, const Sequence& s,
                          const ParticleConfig& x);

/// The u = s transfer operator specification backing the q-Hahn TASEP.
ModelSpec qhahn_model(double q, double gamma, const Sequence& s);

// -- geometric q-TASEP ----------------------------------------------------------

/// One discrete-time geometric q-TASEP step: h ~ phi_{q, a_{n-1}, 0}(. | gap).
ParticleConfig geo_qtasep_step(Rng& rng, double q, const Sequence& a, const ParticleConfig& x);

/// Exact row of the geometric q-TASEP transfer operator on path configs.
operators::SparseRow geo_transfer_row(double q, const Sequence& a, const PathConfig& g,
                                      double eps_tail = 1e-16);

/// Exact matrix element of the geometric q-TASEP shift operator (swaps with
/// weights phi_{q, a_m/a_0, 0}).
double geo_shift_weight(double q, const Sequence& a, const PathConfig& g, const PathConfig& d);
operators::SparseRow geo_shift_row(double q, const Sequence& a, const PathConfig& g);

/// Residual of T^{qT} B^{qT} = B^{qT} T^{qT}_{shifted} on the given states.
operators::IntertwiningReport verify_intertwining_geo(double q, const Sequence& a,
                                                      const std::vector<PathConfig>& interior);

// -- continuous-time q-TASEP and its backwards dynamics ---------------------------

/// Event-driven continuous-time q-TASEP: particle x_n jumps +1 at rate
/// alpha_{n-1} (1 - q^{x_{n-1}-x_n-1}); returns the final configuration and
/// optionally records the whole trajectory.
ParticleConfig ct_qtasep_simulate(Rng& rng, double q, const Sequence& alpha,
                                  const ParticleConfig& x0, double t_end,
                                  Trajectory* record = nullptr);

/// Backwards q-TASEP: particle x_n fires at rate n g_n and jumps left to x'
/// with the inverse q-factorial law; q = 0 is the backwards Hammersley process.
ParticleConfig backwards_qtasep_simulate(Rng& rng, double q, const ParticleConfig& x0,
                                         double tau_end);

/// Probability that a backwards jump of particle n lands at distance k,
/// conditioned on the firing (so summing over k = 1..g gives 1).
double backwards_target_prob(double q, int g, int k);

// -- Schur vertex model -----------------------------------------------------------

struct SchurParams {
    double nu = 0;  // in (0,1)
    Sequence a;     // a_i >= 0, uniformly bounded

    ModelSpec model() const;  // q = 0, J = 1, s = -sqrt(nu), u_i = a_i/sqrt(nu)
    /// Shift use requires 2 - 1/nu <= a_n/a_0 <= 1.
    void require_shift_domain() const;
};

/// One parallel Schur vertex model step by the emission description.
PathConfig schur_step(Rng& rng, const SchurParams& p, const PathConfig& g);

/// P(B^{Schur} leaves the empty configuration unchanged) = (1-nu)/(1-nu a_1/a_0).
double schur_empty_fix_probability(const SchurParams& p);

// -- truncated generators and the Lax check -----------------------------------------

/// Generator matrix over an enumeration: rows sum to zero up to the
/// leak rate of moves exiting the window.
struct GeneratorMatrix {
    std::shared_ptr<const Enumeration> states;
    linalg::Matrix gen;
    std::vector<double> leak_rate;
};

/// Truncated generators of the q-TASEP (rightward) and the backwards
/// q-TASEP (leftward) on the displacement window (support <= N, weight <= K).
std::pair<GeneratorMatrix, GeneratorMatrix> build_generators(double q, const Sequence& alpha,
                                                             int N, long long K);

struct LaxReport {
    double semigroup_residual = 0;  // |e^{tT} e^{tauB} - e^{tauB} e^{e^{-tau} t T}|
    double lax_residual = 0;        // |t T e^{tT} - (B e^{tT} - e^{tT} B)|
    double interior_mass = 1;       // min row mass of e^{tT} over interior rows
    int interior_rows = 0;
};

/// Verify the semigroup intertwining and the Lax equation on a truncation.
/// Interior rows are those with at most `interior_parts` displaced particles
/// and displacement <= interior_weight.
LaxReport verify_lax(double q, long long K, double t, double tau, int interior_parts = 2,
                     long long interior_weight = 2);

}  // namespace ips::systems
