#include "dsnls/noise.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>

#include "dsnls/csv.hpp"

namespace dsnls {

IncrementStream::IncrementStream(std::uint64_t seed, std::uint64_t realization, int modes, double tau)
    : stream_key_(mix64(mix64(seed) ^ realization)), modes_(modes), tau_(tau), scale_(std::sqrt(tau)) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw std::invalid_argument("increment step must be positive");
  if (modes < 1) throw std::invalid_argument("increment stream needs at least one mode");
}

void IncrementStream::fill(std::uint64_t step, std::span<Complex> out) const {
  if (out.size() != static_cast<std::size_t>(modes_)) throw std::invalid_argument("increment buffer has wrong size");
  constexpr double two_pow_minus_53 = 0x1.0p-53;
  const std::uint64_t step_key = mix64(stream_key_ ^ step);
  for (std::size_t k = 0; k < out.size(); ++k) {
    const std::uint64_t key = mix64(step_key ^ static_cast<std::uint64_t>(k));
    const double u1 = static_cast<double>((mix64(key ^ 1ULL) >> 11) + 1) * two_pow_minus_53;
    const double u2 = static_cast<double>(mix64(key ^ 2ULL) >> 11) * two_pow_minus_53;
    const double radius = scale_ * std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    out[k] = Complex{radius * std::cos(angle), radius * std::sin(angle)};
  }
}

BrownianPath::BrownianPath(double tau, int modes, std::size_t steps, std::uint64_t seed, std::uint64_t realization)
    : tau_(tau),
      modes_(modes),
      steps_(steps),
      seed_(seed),
      realization_(realization),
      data_(steps * static_cast<std::size_t>(modes), Complex{}) {}

BrownianPath generate_path(const NoiseSpec& noise, double tau_fine, std::size_t steps, std::uint64_t realization) {
  if (!(tau_fine > 0.0) || !std::isfinite(tau_fine)) throw std::invalid_argument("tau_fine must be positive");
  if (steps < 1) throw std::invalid_argument("a Brownian path needs at least one step");
  BrownianPath path(tau_fine, noise.modes, steps, noise.seed, realization);
  const IncrementStream stream(noise.seed, realization, noise.modes, tau_fine);
  for (std::size_t n = 0; n < steps; ++n) stream.fill(n, path.increment(n));
  return path;
}

BrownianPath coarsen(const BrownianPath& path, std::size_t ratio) {
  if (ratio < 1 || path.steps() % ratio != 0) {
    throw std::invalid_argument("coarsening ratio " + std::to_string(ratio) + " does not divide " +
                                std::to_string(path.steps()) + " steps");
  }
  const std::size_t coarse_steps = path.steps() / ratio;
  BrownianPath out(path.tau() * static_cast<double>(ratio), path.modes(), coarse_steps, path.seed(), path.realization());
  for (std::size_t m = 0; m < coarse_steps; ++m) {
    auto dst = out.increment(m);
    for (std::size_t i = 0; i < ratio; ++i) {
      const auto src = path.increment(m * ratio + i);
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
    }
  }
  return out;
}

ForcingOperator::ForcingOperator(const Grid& grid, const NoiseSpec& noise, double epsilon)
    : ForcingOperator(eigenfunction_matrix(grid, noise.modes), noise.eta, epsilon) {}

ForcingOperator::ForcingOperator(const RealMatrix& sigma, std::span<const double> eta, double epsilon)
    : weights_(sigma.rows(), sigma.cols()), epsilon_(epsilon) {
  if (eta.size() != sigma.cols()) throw std::invalid_argument("eigenvalue count does not match sigma columns");
  if (!(epsilon >= 0.0)) throw std::invalid_argument("epsilon must be nonnegative");
  for (std::size_t j = 0; j < sigma.rows(); ++j) {
    for (std::size_t k = 0; k < sigma.cols(); ++k) weights_(j, k) = epsilon * sigma(j, k) * std::sqrt(eta[k]);
  }
}

void ForcingOperator::apply(std::span<const Complex> delta_beta, std::span<Complex> out) const {
  if (delta_beta.size() != weights_.cols() || out.size() != weights_.rows()) {
    throw std::invalid_argument("forcing: shape mismatch");
  }
  for (std::size_t j = 0; j < weights_.rows(); ++j) {
    const auto w = weights_.row(j);
    double re = 0.0;
    double im = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) {
      re += w[k] * delta_beta[k].real();
      im += w[k] * delta_beta[k].imag();
    }
    out[j] = Complex{re, im};
  }
}

ComplexVector forcing(const RealMatrix& sigma, const NoiseSpec& noise, double epsilon,
                      std::span<const Complex> delta_beta) {
  const ForcingOperator op(sigma, noise.eta, epsilon);
  ComplexVector out(sigma.rows());
  op.apply(delta_beta, out);
  return out;
}

void write_increments_csv(std::ostream& out, const BrownianPath& path) {
  out << "step,k,re,im\n";
  for (std::size_t n = 0; n < path.steps(); ++n) {
    const auto inc = path.increment(n);
    for (std::size_t k = 0; k < inc.size(); ++k) {
      out << n << ',' << (k + 1) << ',' << format_double(inc[k].real()) << ',' << format_double(inc[k].imag()) << '\n';
    }
  }
}

}  // namespace dsnls
