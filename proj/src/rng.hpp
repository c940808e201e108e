#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace nowcast {

// Deterministic random source. Streams are keyed by (seed, stream) through a
// splitmix64 expansion so chains can run in parallel without sharing state,
// and every distribution below is sampled by explicit algorithms (not
// std::<random> distributions, whose output is implementation-defined) so a
// given seed reproduces bit-identical results everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64();
  double uniform();                  // [0, 1)
  double uniform_open();             // (0, 1]
  double normal();                   // standard normal, polar method
  double exponential();              // rate 1
  double gamma(double shape, double rate);
  double beta(double a, double b);
  double inverse_gamma(double shape, double scale);
  std::int64_t poisson(double mean);
  std::int64_t binomial(std::int64_t n, double p);
  // Splits n into counts with the given cell probabilities (must sum to ~1).
  std::vector<std::int64_t> multinomial(std::int64_t n, const std::vector<double>& p);

 private:
  std::mt19937_64 gen_;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace nowcast
