#pragma once

#include "mofq/tensor.hpp"

#include <cstdint>
#include <string>
#include <string_view>

namespace mofq {

/*
 * Self-contained PRNG so generated tensors are bit-reproducible and do
 * not depend on any platform's <random> distributions.
 *
 * Stream: xoshiro256++ (Blackman/Vigna), state seeded with four
 * successive outputs of splitmix64(seed). Unit draws map one 64-bit
 * output to (0,1) as ((x >> 11) + 0.5) * 2^-53, so log() of a draw is
 * always defined.
 */
class xoshiro256pp {
  public:
    explicit xoshiro256pp(uint64_t seed);
    uint64_t next();
    double next_unit(); // in (0,1), never 0 or 1

  private:
    uint64_t s_[4];
};

uint64_t splitmix64_next(uint64_t& state);

// Deterministic sub-seed for independent streams (weights of layer k,
// calibration batch b, ...) derived from one user-facing seed.
uint64_t derive_seed(uint64_t base, uint64_t tag);

/*
 * Synthetic data specs. Per-element draw protocol, in stream order:
 *   uniform(lo,hi):      u1                  -> lo + (hi - lo) * u1
 *   gaussian(mu,sigma):  u1,u2               -> mu + sigma * z, z = sqrt(-2 ln u1) cos(2 pi u2)
 *   lognormal(mu,sigma): u1,u2,u3            -> s * exp(mu + sigma * z), s = -1 if u3 < 0.5 else +1
 *   student_t(df):       u1,u2               -> sqrt(df * (u1^(-2/df) - 1)) cos(2 pi u2)  (Bailey's polar method)
 */
struct dist_spec {
    enum class kind { uniform, gaussian, lognormal, student_t };

    kind which = kind::uniform;
    double a = -1.0; // lo / mu / df
    double b = 1.0;  // hi / sigma

    // "uniform(-1,1)", "gaussian(0,0.5)", "lognormal(0,2)", "student_t(4)"
    static dist_spec parse(std::string_view text);
    std::string str() const;
};

tensor gen_synthetic(const dist_spec& spec, std::vector<int64_t> shape, uint64_t seed);

} // namespace mofq
