#include "rng.hpp"

#include <cmath>
#include <stdexcept>

namespace nowcast {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t s = seed ^ (0x6a09e667f3bcc909ull * (stream + 1));
  std::uint64_t key[4];
  for (auto& k : key) k = splitmix64(s);
  std::seed_seq seq{static_cast<std::uint32_t>(key[0]), static_cast<std::uint32_t>(key[0] >> 32),
                    static_cast<std::uint32_t>(key[1]), static_cast<std::uint32_t>(key[1] >> 32),
                    static_cast<std::uint32_t>(key[2]), static_cast<std::uint32_t>(key[2] >> 32),
                    static_cast<std::uint32_t>(key[3]), static_cast<std::uint32_t>(key[3] >> 32)};
  gen_.seed(seq);
}

std::uint64_t Rng::next_u64() { return gen_(); }

double Rng::uniform() {
  // 53-bit mantissa in [0, 1).
  return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

double Rng::uniform_open() { return 1.0 - uniform(); }

double Rng::normal() {
  if (has_spare_normal_) {
    has_spare_normal_ = false;
    return spare_normal_;
  }
  // Marsaglia polar method.
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  double m = std::sqrt(-2.0 * std::log(s) / s);
  spare_normal_ = v * m;
  has_spare_normal_ = true;
  return u * m;
}

double Rng::exponential() { return -std::log(uniform_open()); }

double Rng::gamma(double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0)) throw std::invalid_argument("gamma: shape and rate must be positive");
  if (shape < 1.0) {
    // Boost to shape+1 and shrink back (Marsaglia-Tsang trick).
    double u = uniform_open();
    return gamma(shape + 1.0, rate) * std::pow(u, 1.0 / shape);
  }
  // Marsaglia-Tsang squeeze method.
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    double u = uniform_open();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v / rate;
  }
}

double Rng::beta(double a, double b) {
  double x = gamma(a, 1.0);
  double y = gamma(b, 1.0);
  if (x + y == 0.0) {
    // Both shapes tiny enough that the gammas underflow; the distribution is
    // numerically the Bernoulli(a/(a+b)) limit on {0,1}.
    return uniform() < a / (a + b) ? 1.0 : 0.0;
  }
  return x / (x + y);
}

double Rng::inverse_gamma(double shape, double scale) {
  return scale / gamma(shape, 1.0);
}

std::int64_t Rng::poisson(double mean) {
  if (!(mean >= 0.0)) throw std::invalid_argument("poisson: mean must be >= 0");
  if (mean == 0.0) return 0;
  if (mean < 30.0) {
    // Inversion by sequential search.
    double p = std::exp(-mean);
    double f = p;
    double u = uniform();
    std::int64_t k = 0;
    while (u > f) {
      ++k;
      p *= mean / static_cast<double>(k);
      f += p;
      if (k > 10000) break;  // cumulative roundoff guard
    }
    return k;
  }
  // Hörmann's PTRS transformed-rejection sampler.
  const double b = 0.931 + 2.53 * std::sqrt(mean);
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    double u = uniform() - 0.5;
    double v = uniform_open();
    double us = 0.5 - std::abs(u);
    double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= v_r) return static_cast<std::int64_t>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
        k * std::log(mean) - mean - std::lgamma(k + 1.0)) {
      return static_cast<std::int64_t>(k);
    }
  }
}

std::int64_t Rng::binomial(std::int64_t n, double p) {
  if (n < 0) throw std::invalid_argument("binomial: n must be >= 0");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("binomial: p must be in [0, 1]");
  if (n == 0 || p == 0.0) return 0;
  if (p == 1.0) return n;
  if (p > 0.5) return n - binomial(n, 1.0 - p);
  if (n <= 64) {
    std::int64_t k = 0;
    for (std::int64_t i = 0; i < n; ++i)
      if (uniform() < p) ++k;
    return k;
  }
  // Recursive median split: the (i = n/2 + 1)-th order statistic of n uniforms
  // is Beta(i, n + 1 - i); conditioning on it splits the count exactly.
  std::int64_t i = n / 2 + 1;
  double x = beta(static_cast<double>(i), static_cast<double>(n + 1 - i));
  if (x >= p) return binomial(i - 1, p / x);
  return i + binomial(n - i, (p - x) / (1.0 - x));
}

std::vector<std::int64_t> Rng::multinomial(std::int64_t n, const std::vector<double>& p) {
  std::vector<std::int64_t> out(p.size(), 0);
  double remaining = 1.0;
  std::int64_t left = n;
  for (std::size_t j = 0; j + 1 < p.size() && left > 0; ++j) {
    double q = p[j] / remaining;
    if (q > 1.0) q = 1.0;
    if (q < 0.0) q = 0.0;
    out[j] = binomial(left, q);
    left -= out[j];
    remaining -= p[j];
    if (remaining <= 0.0) break;
  }
  if (!p.empty()) out.back() += left;
  return out;
}

}  // namespace nowcast
