#pragma once

// Truncated Karhunen-Loeve noise: Q W = sum_k sqrt(eta_k) e_k beta_k with
// complex Brownian coefficients beta_k = beta_k^1 + i beta_k^2.
//
// Increments are counter addressed. The standard normal pair behind
// (seed, realization, step, mode) is
//
//   key = mix(mix(mix(mix(seed) ^ realization) ^ step) ^ mode)
//   u1  = (mix(key ^ 1) >> 11 + 1) * 2^-53          in (0, 1]
//   u2  = (mix(key ^ 2) >> 11)     * 2^-53          in [0, 1)
//   (z1, z2) = sqrt(-2 ln u1) (cos 2 pi u2, sin 2 pi u2)
//
// where mix is the splitmix64 finaliser. Each real component of a fine
// increment is sqrt(tau) z, so E|d beta_k|^2 = 2 tau.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "dsnls/model.hpp"

namespace dsnls {

inline constexpr std::string_view kRngAlgorithm = "splitmix64-counter/box-muller v1";

/// splitmix64 output finaliser.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-addressable source of fine increments for one realization.
class IncrementStream {
 public:
  IncrementStream(std::uint64_t seed, std::uint64_t realization, int modes, double tau);

  int modes() const { return modes_; }
  double tau() const { return tau_; }

  /// Writes the P complex increments of fine step `step` into out.
  void fill(std::uint64_t step, std::span<Complex> out) const;

 private:
  std::uint64_t stream_key_;
  int modes_;
  double tau_;
  double scale_;
};

class BrownianPath {
 public:
  BrownianPath(double tau, int modes, std::size_t steps, std::uint64_t seed, std::uint64_t realization);

  double tau() const { return tau_; }
  int modes() const { return modes_; }
  std::size_t steps() const { return steps_; }
  std::uint64_t seed() const { return seed_; }
  std::uint64_t realization() const { return realization_; }

  std::span<const Complex> increment(std::size_t n) const {
    return {data_.data() + n * static_cast<std::size_t>(modes_), static_cast<std::size_t>(modes_)};
  }
  std::span<Complex> increment(std::size_t n) {
    return {data_.data() + n * static_cast<std::size_t>(modes_), static_cast<std::size_t>(modes_)};
  }

  friend bool operator==(const BrownianPath&, const BrownianPath&) = default;

 private:
  double tau_;
  int modes_;
  std::size_t steps_;
  std::uint64_t seed_;
  std::uint64_t realization_;
  std::vector<Complex> data_;
};

/// Throws std::invalid_argument unless tau_fine > 0 and steps >= 1.
BrownianPath generate_path(const NoiseSpec& noise, double tau_fine, std::size_t steps, std::uint64_t realization);

/// Block sums of `ratio` consecutive increments, accumulated left to right.
/// Throws std::invalid_argument unless ratio >= 1 divides path.steps().
BrownianPath coarsen(const BrownianPath& path, std::size_t ratio);

/// Precomputed eps * sigma * Lambda, Lambda = diag(sqrt(eta_k)).
class ForcingOperator {
 public:
  ForcingOperator(const Grid& grid, const NoiseSpec& noise, double epsilon);
  ForcingOperator(const RealMatrix& sigma, std::span<const double> eta, double epsilon);

  std::size_t nodes() const { return weights_.rows(); }
  std::size_t modes() const { return weights_.cols(); }
  double epsilon() const { return epsilon_; }

  /// out = eps sigma Lambda delta_beta. Throws std::invalid_argument on shape mismatch.
  void apply(std::span<const Complex> delta_beta, std::span<Complex> out) const;

 private:
  RealMatrix weights_;
  double epsilon_;
};

ComplexVector forcing(const RealMatrix& sigma, const NoiseSpec& noise, double epsilon,
                      std::span<const Complex> delta_beta);

/// Audit dump: step,k,re,im (k is 1-based).
void write_increments_csv(std::ostream& out, const BrownianPath& path);

}  // namespace dsnls
