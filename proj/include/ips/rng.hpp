#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace ips {

/// Counter-based Philox4x32-10 stream. Streams are cheap to create and
/// split: replica i of a master seed gets its own key, so any execution
/// order of replicas reproduces identical draws.
class Rng {
  public:
    Rng() : Rng(0, 0) {}

    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) {
        std::uint64_t h = mix64(seed ^ mix64(stream + 0x9E3779B97F4A7C15ull));
        key_[0] = static_cast<std::uint32_t>(h);
        key_[1] = static_cast<std::uint32_t>(h >> 32);
        counter_ = 0;
        idx_ = 4;
    }

    static Rng child(std::uint64_t master_seed, std::uint64_t replica) {
        return Rng(master_seed, replica + 1);
    }

    std::uint32_t next_u32() {
        if (idx_ == 4) {
            block_ = philox_block(counter_++, key_);
            idx_ = 0;
        }
        return block_[idx_++];
    }

    std::uint64_t next_u64() {
        std::uint64_t lo = next_u32();
        std::uint64_t hi = next_u32();
        return (hi << 32) | lo;
    }

    /// Uniform on (0,1), 53-bit resolution, never exactly 0 or 1.
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double exponential(double rate) { return -std::log(uniform()) / rate; }

    /// Uniform integer in {0,...,n-1}.
    std::uint64_t uniform_int(std::uint64_t n) {
        // rejection from the top to avoid modulo bias
        std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t v;
        do {
            v = next_u64();
        } while (v >= limit);
        return v % n;
    }

    long long poisson(double mean) {
        // exponential inter-arrival chain; fine for the modest means we use
        long long k = 0;
        double t = exponential(1.0);
        while (t < mean) {
            ++k;
            t += exponential(1.0);
        }
        return k;
    }

    /// Sorted arrival times of a rate-`rate` Poisson process on (0, horizon).
    std::vector<double> poisson_times(double rate, double horizon) {
        std::vector<double> ts;
        double t = exponential(rate);
        while (t < horizon) {
            ts.push_back(t);
            t += exponential(rate);
        }
        return ts;
    }

  private:
    static std::uint64_t mix64(std::uint64_t z) {
        z += 0x9E3779B97F4A7C15ull;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    static std::array<std::uint32_t, 4> philox_block(std::uint64_t counter,
                                                     std::array<std::uint32_t, 2> key) {
        constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
        constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
        std::array<std::uint32_t, 4> x = {static_cast<std::uint32_t>(counter),
                                          static_cast<std::uint32_t>(counter >> 32), 0u, 0u};
        std::uint32_t k0 = key[0], k1 = key[1];
        for (int round = 0; round < 10; ++round) {
            std::uint64_t p0 = static_cast<std::uint64_t>(M0) * x[0];
            std::uint64_t p1 = static_cast<std::uint64_t>(M1) * x[2];
            std::array<std::uint32_t, 4> y;
            y[0] = static_cast<std::uint32_t>(p1 >> 32) ^ x[1] ^ k0;
            y[1] = static_cast<std::uint32_t>(p1);
            y[2] = static_cast<std::uint32_t>(p0 >> 32) ^ x[3] ^ k1;
            y[3] = static_cast<std::uint32_t>(p0);
            x = y;
            k0 += W0;
            k1 += W1;
        }
        return x;
    }

    std::array<std::uint32_t, 2> key_;
    std::uint64_t counter_;
    std::array<std::uint32_t, 4> block_{};
    int idx_;
};

}  // namespace ips
