#pragma once

#include <vector>

#include "ips/operators.hpp"

namespace ips {

/// Piecewise-constant multi-particle path on [0, horizon]. Particle n starts
/// at x0[n-1] (or -n beyond the stored prefix) and gains +1 at each of its
/// jump times. Positions are left-continuous: pos(n, t) counts jumps < t,
/// so at a jump time the pre-jump position is reported.
struct Trajectory {
    double horizon = 0;
    std::vector<long long> x0;
    std::vector<std::vector<double>> jumps;

    Trajectory() = default;
    Trajectory(double horizon_, const operators::ParticleConfig& start);

    int particles() const { return static_cast<int>(x0.size()); }
    void ensure(int n);

    long long initial(int n) const;
    long long pos(int n, double t) const;
    long long pos_right(int n, double t) const;
    operators::ParticleConfig config(double t) const;        // left-continuous
    operators::ParticleConfig config_right(double t) const;  // right-continuous

    const std::vector<double>& jumps_of(int n) const;
    void add_jump(int n, double t);

    /// All jump times across particles, ascending.
    std::vector<double> event_times() const;

    /// Order and single-increment-per-instant invariants; throws on failure.
    void validate() const;
};

}  // namespace ips
