#include "dsnls/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>
#include <stdexcept>

#include "dsnls/csv.hpp"
#include "dsnls/errors.hpp"

namespace dsnls {

namespace {

double squared_norm(std::span<const Complex> v) {
  double s = 0.0;
  for (const auto& z : v) s += std::norm(z);
  return s;
}

// (u ^ B u')(xi, zeta) = sum_ab B_ab (u_a(xi) u'_b(zeta) - u_a(zeta) u'_b(xi))
using Matrix4 = std::array<std::array<double, 4>, 4>;

constexpr Matrix4 kM = {{{0, -1, 0, 0}, {1, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}}};
constexpr Matrix4 kK1 = {{{0, 0, 1, 0}, {0, 0, 0, 1}, {0, 0, 0, 0}, {0, 0, 0, 0}}};
constexpr Matrix4 kK2 = {{{0, 0, 0, 0}, {0, 0, 0, 0}, {-1, 0, 0, 0}, {0, -1, 0, 0}}};

double wedge(const ZCoordinates& u_xi, const ZCoordinates& u_zeta, const Matrix4& b, const ZCoordinates& w_xi,
             const ZCoordinates& w_zeta) {
  double s = 0.0;
  for (std::size_t a = 0; a < 4; ++a) {
    for (std::size_t c = 0; c < 4; ++c) {
      if (b[a][c] != 0.0) s += b[a][c] * (u_xi[a] * w_zeta[c] - u_zeta[a] * w_xi[c]);
    }
  }
  return s;
}

ZCoordinates combine(const ZCoordinates& next, const ZCoordinates& prev, double decay) {
  ZCoordinates out{};
  for (std::size_t a = 0; a < 4; ++a) out[a] = 0.5 * (next[a] + decay * prev[a]);
  return out;
}

ComplexVector random_vector(std::mt19937_64& rng, std::size_t n, double amplitude) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ComplexVector v(n);
  for (auto& z : v) z = amplitude * Complex{u(rng), u(rng)};
  return v;
}

}  // namespace

double discrete_charge(std::span<const Complex> psi, double h) { return h * squared_norm(psi); }

double mean_charge_law(double t, double charge0, const ModelParams& params, double eta_total) {
  if (!(t >= 0.0)) throw std::invalid_argument("time must be nonnegative");
  if (!(params.alpha > 0.0)) throw std::invalid_argument("charge law needs alpha > 0");
  const double decay = std::exp(-2.0 * params.alpha * t);
  return decay * charge0 + params.epsilon * params.epsilon * eta_total / params.alpha * (1.0 - decay);
}

double charge_limit_discrete(const Grid& grid, const NoiseSpec& noise, const ModelParams& params) {
  if (!(params.alpha > 0.0)) throw std::invalid_argument("charge limit needs alpha > 0");
  const auto sigma = eigenfunction_matrix(grid, noise.modes);
  double sum = 0.0;
  for (std::size_t j = 0; j < sigma.rows(); ++j) {
    for (std::size_t k = 0; k < sigma.cols(); ++k) sum += noise.eta[k] * sigma(j, k) * sigma(j, k);
  }
  return params.epsilon * params.epsilon * grid.h() / params.alpha * sum;
}

double discrete_charge_law(double t, double charge0, double alpha, double plateau) {
  const double decay = std::exp(-2.0 * alpha * t);
  return decay * charge0 + plateau * (1.0 - decay);
}

double step_energy_residual(std::span<const Complex> psi_n, std::span<const Complex> psi_np1,
                            std::span<const Complex> psi_tilde_damped, std::span<const Complex> forcing_vec,
                            const ModelParams& params, double tau) {
  const std::size_t n = psi_n.size();
  if (psi_np1.size() != n || psi_tilde_damped.size() != n || forcing_vec.size() != n) {
    throw std::invalid_argument("energy residual: shape mismatch");
  }
  double mid_sq = 0.0;
  double mid_dot_g = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const Complex mid = 0.5 * (psi_np1[j] + psi_tilde_damped[j]);
    mid_sq += std::norm(mid);
    mid_dot_g += (std::conj(mid) * forcing_vec[j]).real();
  }
  const double at = params.alpha * tau;
  return squared_norm(psi_np1) - std::exp(-at) * squared_norm(psi_n) + at * mid_sq - 2.0 * mid_dot_g;
}

std::vector<ZCoordinates> TangentState::z_view(double h) const {
  const std::size_t J = dpsi.size();
  std::vector<ZCoordinates> z(J + 2, ZCoordinates{});
  for (std::size_t j = 1; j <= J; ++j) {
    z[j][0] = dpsi[j - 1].real();
    z[j][1] = dpsi[j - 1].imag();
  }
  for (std::size_t j = 1; j <= J + 1; ++j) {
    z[j][2] = (z[j][0] - z[j - 1][0]) / h;
    z[j][3] = (z[j][1] - z[j - 1][1]) / h;
  }
  return z;
}

ComplexVector rotation_tangent(std::span<const Complex> psi, std::span<const Complex> dpsi, int lambda, double tau,
                               double scale, double scale_differential) {
  if (psi.size() != dpsi.size()) throw std::invalid_argument("rotation tangent: shape mismatch");
  ComplexVector out(psi.size());
  for (std::size_t j = 0; j < psi.size(); ++j) {
    const double modulus_sq = std::norm(psi[j]);
    const double angle = scale * (lambda * modulus_sq * tau);
    const double dangle =
        lambda * tau * (scale * 2.0 * (std::conj(psi[j]) * dpsi[j]).real() + modulus_sq * scale_differential);
    out[j] = Complex{std::cos(angle), std::sin(angle)} * (dpsi[j] + Complex{0.0, dangle} * psi[j]);
  }
  return out;
}

TangentState linear_substep_tangent(const TangentState& dpsi, const LinearPropagator& prop) {
  if (dpsi.dpsi.size() != prop.size()) throw std::invalid_argument("tangent: shape mismatch");
  const double damping = std::exp(-0.5 * prop.alpha() * prop.tau());
  ComplexVector damped(dpsi.dpsi.size());
  for (std::size_t j = 0; j < damped.size(); ++j) damped[j] = damping * dpsi.dpsi[j];
  TangentState out{ComplexVector(damped.size())};
  prop.propagate(damped, out.dpsi);
  return out;
}

TangentState tangent_step(std::span<const Complex> psi_n, const TangentState& dpsi, const LinearPropagator& prop,
                          const ModelParams& params, const std::optional<CutoffFunction>& truncation) {
  if (psi_n.size() != prop.size() || dpsi.dpsi.size() != prop.size()) {
    throw std::invalid_argument("tangent step: shape mismatch");
  }
  double scale = 1.0;
  double scale_differential = 0.0;
  if (truncation) {
    const double norm = std::sqrt(squared_norm(psi_n));
    const double r = norm / truncation->radius;
    scale = (*truncation)(r);
    if (norm > 0.0) {
      double dnorm = 0.0;
      for (std::size_t j = 0; j < psi_n.size(); ++j) dnorm += (std::conj(psi_n[j]) * dpsi.dpsi[j]).real();
      dnorm /= norm;
      scale_differential = truncation->derivative(r) / truncation->radius * dnorm;
    }
  }
  const TangentState rotated{rotation_tangent(psi_n, dpsi.dpsi, params.lambda, prop.tau(), scale, scale_differential)};
  return linear_substep_tangent(rotated, prop);
}

double area_form(Complex xi, Complex zeta) { return xi.real() * zeta.imag() - xi.imag() * zeta.real(); }

double nonlinear_symplectic_residual(std::span<const Complex> psi, const TangentState& xi, const TangentState& zeta,
                                     int lambda, double tau) {
  if (xi.dpsi.size() != psi.size() || zeta.dpsi.size() != psi.size()) {
    throw std::invalid_argument("symplectic residual: shape mismatch");
  }
  const auto dxi = rotation_tangent(psi, xi.dpsi, lambda, tau);
  const auto dzeta = rotation_tangent(psi, zeta.dpsi, lambda, tau);
  double worst = 0.0;
  for (std::size_t j = 0; j < psi.size(); ++j) {
    worst = std::max(worst, std::abs(area_form(dxi[j], dzeta[j]) - area_form(xi.dpsi[j], zeta.dpsi[j])));
  }
  return worst;
}

ConformalResidual conformal_ms_residual(const TwoFormSample& sample, double tau, double h, double alpha) {
  const std::size_t J = sample.xi_n.dpsi.size();
  if (sample.xi_np1.dpsi.size() != J || sample.zeta_n.dpsi.size() != J || sample.zeta_np1.dpsi.size() != J) {
    throw std::invalid_argument("conformal residual: tangent sizes differ");
  }
  if (sample.node < 1 || static_cast<std::size_t>(sample.node) > J) {
    throw std::invalid_argument("conformal residual: node must lie in 1..J");
  }
  if (!(tau > 0.0) || !(h > 0.0)) throw std::invalid_argument("conformal residual: tau and h must be positive");

  const auto xn = sample.xi_n.z_view(h);
  const auto xp = sample.xi_np1.z_view(h);
  const auto zn = sample.zeta_n.z_view(h);
  const auto zp = sample.zeta_np1.z_view(h);
  const double half_decay = std::exp(-0.5 * alpha * tau);
  const double decay = std::exp(-alpha * tau);
  const auto j = static_cast<std::size_t>(sample.node);

  const double omega_next = 0.5 * wedge(xp[j], zp[j], kM, xp[j], zp[j]);
  const double omega_prev = 0.5 * wedge(xn[j], zn[j], kM, xn[j], zn[j]);

  auto half = [&](const std::vector<ZCoordinates>& next, const std::vector<ZCoordinates>& prev, std::size_t i) {
    return combine(next[i], prev[i], half_decay);
  };
  const ZCoordinates mx = half(xp, xn, j);
  const ZCoordinates mz = half(zp, zn, j);
  const ZCoordinates mx_right = half(xp, xn, j + 1);
  const ZCoordinates mz_right = half(zp, zn, j + 1);
  const ZCoordinates mx_left = half(xp, xn, j - 1);
  const ZCoordinates mz_left = half(zp, zn, j - 1);

  ConformalResidual r;
  r.temporal_conformal = (omega_next - decay * omega_prev) / tau;
  r.temporal_printed = decay * (omega_next - omega_prev) / tau;
  r.spatial = (wedge(mx, mz, kK1, mx_right, mz_right) - wedge(mx, mz, kK2, mx_left, mz_left)) / h;
  r.dissipation = 0.5 * alpha * wedge(mx, mz, kM, mx, mz);
  r.residual_conformal = std::abs(r.temporal_conformal + r.spatial + r.dissipation);
  r.residual_printed = std::abs(r.temporal_printed + r.spatial + r.dissipation);
  r.scale = std::max({std::abs(omega_next / tau), std::abs(decay * omega_prev / tau), std::abs(r.spatial),
                      std::abs(r.dissipation)});
  return r;
}

MatrixNormCheck matrix_norm_A(int J, double tolerance) {
  if (J < 1) throw std::invalid_argument("matrix dimension must be at least 1");
  MatrixNormCheck check;
  // 4 sin^2(J pi / (2 (J + 1))) written as 2 + 2 cos(pi / (J + 1)), which is
  // exact in double for J = 1 and J = 2.
  check.closed_form = 2.0 + 2.0 * std::cos(std::numbers::pi / (J + 1));

  // Power iteration on -A (symmetric positive definite), stopped on the
  // eigen-residual; |rayleigh - lambda| <= ||(-A)x - rayleigh x|| for unit x.
  const auto n = static_cast<std::size_t>(J);
  std::vector<double> x(n);
  std::vector<double> y(n);
  std::uint64_t state = 0x5eed0fa11ULL;
  for (auto& v : x) {
    state = mix64(state);
    v = static_cast<double>(state >> 11) * 0x1.0p-53 - 0.5;
  }
  auto normalise = [](std::vector<double>& v) {
    double s2 = 0.0;
    for (double e : v) s2 += e * e;
    const double inv = 1.0 / std::sqrt(s2);
    for (double& e : v) e *= inv;
  };
  normalise(x);
  const double target = 0.1 * tolerance;
  const std::size_t max_iterations = 50'000'000;
  double rayleigh = 0.0;
  std::size_t it = 0;
  for (; it < max_iterations; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      double v = 2.0 * x[i];
      if (i > 0) v -= x[i - 1];
      if (i + 1 < n) v -= x[i + 1];
      y[i] = v;
    }
    rayleigh = 0.0;
    for (std::size_t i = 0; i < n; ++i) rayleigh += x[i] * y[i];
    double res2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = y[i] - rayleigh * x[i];
      res2 += d * d;
    }
    if (std::sqrt(res2) <= target) break;
    x.swap(y);
    normalise(x);
  }
  check.power_iteration = rayleigh;
  check.iterations = it;
  if (it == max_iterations) throw NumericalFailure("power iteration for ||A|| did not converge");
  if (std::abs(check.power_iteration - check.closed_form) > tolerance) {
    throw NumericalFailure("||A||: closed form " + format_double(check.closed_form) + " and power iteration " +
                           format_double(check.power_iteration) + " disagree");
  }
  if (!(check.closed_form < 4.0) || !(check.power_iteration < 4.0)) {
    throw NumericalFailure("||A|| reached the bound 4 for J = " + std::to_string(J));
  }
  return check;
}

std::optional<std::size_t> first_bound_violation(std::span<const double> times, std::span<const double> charges,
                                                 double alpha, double charge0, double bound) {
  if (times.size() != charges.size()) throw std::invalid_argument("bound monitor: times and charges differ in length");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (charges[i] > std::exp(-alpha * times[i]) * charge0 + bound) return i;
  }
  return std::nullopt;
}

std::vector<DiagnosticRow> run_identity_suite(const IdentitySuiteOptions& options) {
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<DiagnosticRow> rows;

  // Energy identity over random steps.
  {
    DiagnosticRow noisy{"energy_identity", 0, 0, 0.0, 1e-10, true};
    DiagnosticRow quiet{"energy_identity_noiseless", 0, 0, 0.0, 1e-12, true};
    std::uniform_int_distribution<int> nodes(1, options.max_nodes);
    std::uniform_int_distribution<int> modes(1, 20);
    for (int s = 0; s < options.random_steps; ++s) {
      const bool noiseless = s % 4 == 0;
      const Grid grid(nodes(rng));
      ModelParams params{0.05 + 1.95 * unit(rng), unit(rng) < 0.5 ? -1 : 1, noiseless ? 0.0 : 2.0 * unit(rng)};
      const double tau = std::pow(10.0, -4.0 + 3.0 * unit(rng));
      const NoiseSpec noise(spectrum(SpectrumDescriptor::power_law(2.0 + 4.0 * unit(rng)), modes(rng)), 1);
      const LinearPropagator prop(grid, tau, params.alpha);
      const ForcingOperator op(grid, noise, params.epsilon);
      const auto psi = random_vector(rng, static_cast<std::size_t>(grid.size()), 0.5 + 1.5 * unit(rng));
      const IncrementStream stream(options.seed, static_cast<std::uint64_t>(s), noise.modes, tau);
      ComplexVector dbeta(static_cast<std::size_t>(noise.modes));
      stream.fill(0, dbeta);
      ComplexVector g(psi.size());
      op.apply(dbeta, g);
      const auto detail = step_detailed(psi, prop, params, g);
      const double rel = std::abs(step_energy_residual(psi, detail.next, detail.damped_rotated, g, params, tau)) /
                         squared_norm(psi);
      auto& row = noiseless ? quiet : noisy;
      if (rel > row.residual) {
        row.residual = rel;
        row.step = s;
        row.node = grid.size();
      }
    }
    noisy.pass = noisy.residual <= noisy.tolerance;
    quiet.pass = quiet.residual <= quiet.tolerance;
    rows.push_back(noisy);
    rows.push_back(quiet);
  }

  // Cayley isometry of the undamped linear substep over 10^4 steps.
  {
    const Grid grid(32);
    const LinearPropagator prop(grid, 1e-3, 0.0);
    auto psi = random_vector(rng, 32, 1.0);
    const double n0 = std::sqrt(squared_norm(psi));
    ComplexVector next(psi.size());
    DiagnosticRow row{"cayley_isometry", 0, 0, 0.0, 1e-12, true};
    for (int n = 1; n <= 10'000; ++n) {
      prop.propagate(psi, next);
      psi.swap(next);
      const double drift = std::abs(std::sqrt(squared_norm(psi)) / n0 - 1.0);
      if (drift > row.residual) {
        row.residual = drift;
        row.step = n;
      }
    }
    row.pass = row.residual <= row.tolerance;
    rows.push_back(row);
  }

  // Phase rotation: node moduli and node-wise area form.
  {
    DiagnosticRow modulus{"rotation_modulus", 0, 0, 0.0, 1e-14, true};
    DiagnosticRow area{"rotation_symplectic", 0, 0, 0.0, 1e-12, true};
    for (int s = 0; s < options.two_form_samples; ++s) {
      const auto n = static_cast<std::size_t>(1 + s % 32);
      const auto psi = random_vector(rng, n, 1.0);
      const double tau = 0.1 * unit(rng);
      const int lambda = s % 2 ? 1 : -1;
      const auto rotated = nonlinear_step(psi, lambda, tau);
      for (std::size_t j = 0; j < n; ++j) {
        const double d = std::abs(std::abs(rotated[j]) - std::abs(psi[j]));
        if (d > modulus.residual) {
          modulus.residual = d;
          modulus.step = s;
          modulus.node = static_cast<std::int64_t>(j + 1);
        }
      }
      const TangentState xi{random_vector(rng, n, 1.0)};
      const TangentState zeta{random_vector(rng, n, 1.0)};
      const double r = nonlinear_symplectic_residual(psi, xi, zeta, lambda, tau);
      if (r > area.residual) {
        area.residual = r;
        area.step = s;
      }
    }
    modulus.pass = modulus.residual <= modulus.tolerance;
    area.pass = area.residual <= area.tolerance;
    rows.push_back(modulus);
    rows.push_back(area);
  }

  // Conformal multi-symplectic law on the damped midpoint substep.
  {
    DiagnosticRow conformal{"conformal_ms", 0, 0, 0.0, 1e-10, true};
    DiagnosticRow printed{"conformal_ms_printed_prefactor_rejected", 0, 0, 1e300, 1e-10, true};
    std::uniform_int_distribution<int> nodes(3, 32);
    for (int s = 0; s < options.two_form_samples; ++s) {
      const Grid grid(nodes(rng));
      const auto J = static_cast<std::size_t>(grid.size());
      const double alpha = 0.5;
      const double tau = std::pow(2.0, -2.0 - 8.0 * unit(rng));
      const LinearPropagator prop(grid, tau, alpha);
      const auto psi = random_vector(rng, J, 1.0);
      TwoFormSample sample;
      sample.xi_n.dpsi = rotation_tangent(psi, random_vector(rng, J, 1.0), 1, tau);
      sample.zeta_n.dpsi = rotation_tangent(psi, random_vector(rng, J, 1.0), 1, tau);
      sample.xi_np1 = linear_substep_tangent(sample.xi_n, prop);
      sample.zeta_np1 = linear_substep_tangent(sample.zeta_n, prop);
      for (std::size_t j = 2; j + 1 <= J; ++j) {
        sample.node = static_cast<int>(j);
        const auto r = conformal_ms_residual(sample, tau, grid.h(), alpha);
        if (r.relative_conformal() > conformal.residual) {
          conformal.residual = r.relative_conformal();
          conformal.step = s;
          conformal.node = static_cast<std::int64_t>(j);
        }
        if (r.relative_printed() < printed.residual) {
          printed.residual = r.relative_printed();
          printed.step = s;
          printed.node = static_cast<std::int64_t>(j);
        }
      }
    }
    conformal.pass = conformal.residual <= conformal.tolerance;
    printed.pass = printed.residual > printed.tolerance;
    rows.push_back(conformal);
    rows.push_back(printed);
  }

  // Spectral bound on A.
  for (int J = 1; J <= 1024; J *= 2) {
    DiagnosticRow row{"norm_bound_A", 0, J, 0.0, 1e-10, true};
    try {
      const auto check = matrix_norm_A(J);
      row.residual = std::abs(check.closed_form - check.power_iteration);
    } catch (const NumericalFailure&) {
      row.residual = 1.0;
      row.pass = false;
    }
    rows.push_back(row);
  }
  return rows;
}

void write_diagnostics_csv(std::ostream& out, std::span<const DiagnosticRow> rows) {
  CsvTable table({"check", "step", "node", "residual", "tolerance", "pass"});
  for (const auto& r : rows) {
    table.add_row({r.check, std::to_string(r.step), std::to_string(r.node), format_double(r.residual),
                   format_double(r.tolerance), r.pass ? "pass" : "fail"});
  }
  table.write(out);
}

}  // namespace dsnls
