#pragma once

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

#include <complex>
#include <cstdint>
#include <random>

namespace heatflow {

/// SplitMix64 finalizer; used to derive independent stream seeds.
std::uint64_t splitmix64(std::uint64_t x);

/// Seeded generator. Every random object in the library is a deterministic
/// function of the (seed, stream) pair that built its Rng, so parallel sample
/// loops reproduce bit-for-bit regardless of scheduling.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

    /// Standard normal.
    double normal() { return normal_(engine_); }
    /// Uniform on [0, 1).
    double uniform() { return uniform_(engine_); }
    /// Circular complex Gaussian with E|z|^2 = variance.
    std::complex<double> complex_normal(double variance = 1.0);

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    boost::random::normal_distribution<double> normal_;
    boost::random::uniform_01<double> uniform_;
};

}  // namespace heatflow
