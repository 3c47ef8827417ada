#pragma once

#include <vector>

#include "ips/operators.hpp"
#include "ips/rng.hpp"
#include "ips/trajectory.hpp"
#include "ips/yangbaxter.hpp"

namespace ips::rewrite {

using operators::BetaSpec;
using operators::ParticleConfig;
using operators::PathConfig;
using yangbaxter::RatePair;

// -- explicit two-particle transition quantities ------------------------------

/// d^{j1}_{b,c} of the future-to-past walk at n = 1; may be +infinity
/// (blocking at c = 0) and is 0 at the pushing edge.
double d_quantity(int j1, double q, double beta, double s0, double s1, int b, int c);

/// u^{j1}_{b,c} of the past-to-future walk at n = 1; always finite.
double u_quantity(int j1, double q, double beta, double s0, double s1, int b, int c);

// -- discrete-time rewriting (J = 1, u_i = -beta s_i subfamily) -----------------

using DiscreteTrajectory = std::vector<PathConfig>;

DiscreteTrajectory simulate_discrete(Rng& rng, const BetaSpec& spec, const PathConfig& g0, int M);

/// Rewriting history from future to past: given the trajectory of the
/// original system and a swapped terminal configuration, resample the
/// whole history by sequential down steps. Returns the swapped-parameter
/// trajectory.
DiscreteTrajectory rewrite_past_discrete(Rng& rng, const BetaSpec& spec, int n,
                                         const DiscreteTrajectory& traj, const PathConfig& d_end);

/// Rewriting history from past to future by sequential up steps.
DiscreteTrajectory rewrite_future_discrete(Rng& rng, const BetaSpec& spec, int n,
                                           const DiscreteTrajectory& traj,
                                           const PathConfig& g_start);

// -- continuous-time rewriting for the q-TASEP ---------------------------------

/// Replace particle n's path by the reverse-time chamber walk started from
/// position xn_end at the horizon; blocking at the lower wall, sticking to
/// the upper wall (pushed by its increments).
Trajectory rewrite_past_ct(Rng& rng, double q, const RatePair& rates, int n,
                           const Trajectory& traj, long long xn_end);

/// Forward-time mirror: replace particle n's path by the upward walk from
/// position yn_start at time 0.
Trajectory rewrite_future_ct(Rng& rng, double q, const RatePair& rates, int n,
                             const Trajectory& traj, long long yn_start);

// -- trajectory-level slowdown and speedup dynamics -----------------------------

/// Slowdown dynamics run for duration tau: terminal backwards jumps,
/// segment-attached bulk jumps with the e^{-tau} clock, and instantaneous
/// reverse-time jump propagation absorbed on the old path.
Trajectory slowdown_apply(Rng& rng, double q, double tau, Trajectory traj);

/// Speedup dynamics for trajectories started from the step configuration.
Trajectory speedup_apply(Rng& rng, double q, double tau, Trajectory traj);

// -- Poisson-process couplings ----------------------------------------------------

/// Drive a slope-1 Poisson path on [0,horizon] through the avalanche growth
/// process up to field time tau_hat; the output is a slope-(tau_hat+1) walk.
std::vector<double> poisson_grow(Rng& rng, double tau_hat_end, std::vector<double> jumps,
                                 double horizon);

struct DilationResult {
    std::vector<double> jumps;
    bool noop = false;
};

/// One step of the dilation Markov chain on slope-1 paths over [0,1].
DilationResult poisson_dilation_step(Rng& rng, const std::vector<double>& jumps);

}  // namespace ips::rewrite
