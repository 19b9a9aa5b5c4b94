#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace tlqr::rng {

// Roles a sub-stream can play. Every (seed, study, purpose) triple maps to
// an independent stream, so parallel replications draw identical numbers
// regardless of scheduling.
enum class Purpose : std::uint64_t {
  kDesign = 1,       // covariate rows
  kSubsetDraw = 2,   // random coefficient subsets H_k
  kCoefNoise = 3,    // Laplace perturbations
  kErrors = 4,       // model noise
  kHoldout = 5,      // held-out evaluation rows
  kSplit = 6,        // target sample split
  kCvFolds = 7,      // cross-validation fold shuffle
  kReplication = 8,  // per-replication master seeds
};

std::uint64_t mix64(std::uint64_t x);

// Collapse a (base, a, b, c) key into one well-mixed 64-bit seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a,
                          std::uint64_t b = 0, std::uint64_t c = 0);

// Deterministic random stream. All distribution transforms are written out
// explicitly (no std::*_distribution) so that identical seeds give identical
// draws on every platform.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) : gen_(mix64(seed)) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  // Uniform on (0, 1); never returns 0.
  double uniform01_open() {
    return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller (no state carried between calls).
  double normal();

  // Laplace(0, b) parameterized by mean absolute deviation b:
  // density (1/(2b)) exp(-|x|/b).
  double laplace(double b);

  double cauchy(double location, double scale);

  // Uniform integer in [0, n), rejection sampled (no modulo bias).
  std::uint64_t uniform_int(std::uint64_t n);

  // Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_int(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 gen_;
};

Stream substream(std::uint64_t base, std::uint64_t study, Purpose purpose);

// Quantile function of the standard normal (Wichura's PPND16 algorithm,
// accurate to ~1e-15 for p in (0, 1)).
double normal_quantile(double p);

// Quantile function of Cauchy(0, 1).
double cauchy_quantile(double p);

}  // namespace tlqr::rng
