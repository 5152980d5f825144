#pragma once

#include <cstdint>

namespace plmdp {

/// Standard normal quantile function (Wichura's PPND16 rational
/// approximations), accurate to near machine precision on (0, 1).
double normal_quantile(double u);

/// Standard normal CDF.
double normal_cdf(double x);

/// Counter-based generator keyed by (base_seed, design_id, replicate):
/// draw i is a pure function of the key and i (splitmix64 stream), so
/// replicates are reproducible independently of scheduling and can run
/// in parallel without a shared stream.
class CounterRng {
public:
    CounterRng(std::uint64_t base_seed, std::uint64_t design_id, std::uint64_t replicate);

    std::uint64_t bits_at(std::uint64_t counter) const;
    double uniform_at(std::uint64_t counter) const;  // (0, 1)

    // Sequential wrappers advancing an internal counter.
    double uniform() { return uniform_at(counter_++); }
    double normal() { return normal_quantile(uniform()); }
    // Standard normal conditioned on [-bound, bound], via the inverse CDF.
    double truncated_normal(double bound);

    std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace plmdp
