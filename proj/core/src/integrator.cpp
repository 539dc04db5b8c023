#include "dsnls/integrator.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

#include "dsnls/csv.hpp"
#include "dsnls/errors.hpp"

namespace dsnls {

namespace {

// exp(-alpha tau / 2) * exp(i scale lambda |psi_j|^2 tau) psi_j
void rotate(std::span<const Complex> psi, double scale, int lambda, double tau, double damping,
            std::span<Complex> out) {
  for (std::size_t j = 0; j < psi.size(); ++j) {
    const double angle = scale * (lambda * std::norm(psi[j]) * tau);
    out[j] = damping * (Complex{std::cos(angle), std::sin(angle)} * psi[j]);
  }
}

double euclidean_norm(std::span<const Complex> v) {
  double s = 0.0;
  for (const auto& z : v) s += std::norm(z);
  return std::sqrt(s);
}

void require_size(std::span<const Complex> v, std::size_t n, const char* what) {
  if (v.size() != n) {
    throw std::invalid_argument(std::string(what) + " has length " + std::to_string(v.size()) + ", expected " +
                                std::to_string(n));
  }
}

}  // namespace

LinearPropagator::LinearPropagator(const Grid& grid, double tau, double alpha)
    : tau_(tau), alpha_(alpha), h_(grid.h()) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw std::invalid_argument("time step must be positive");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("damping must be nonnegative");
  const double r = tau / (2.0 * h_ * h_);
  off_diag_ = Complex{0.0, -r};
  diag_minus_ = Complex{1.0 + 0.25 * alpha * tau, 2.0 * r};
  diag_plus_ = Complex{1.0 - 0.25 * alpha * tau, -2.0 * r};

  const auto n = static_cast<std::size_t>(grid.size());
  upper_.resize(n);
  pivot_inverse_.resize(n);
  Complex previous_upper{};
  for (std::size_t j = 0; j < n; ++j) {
    const Complex pivot = j == 0 ? diag_minus_ : diag_minus_ - off_diag_ * previous_upper;
    if (!(std::abs(pivot) > 0.0) || !std::isfinite(std::abs(pivot))) {
      throw NumericalFailure("singular pivot in tridiagonal factorisation at row " + std::to_string(j));
    }
    pivot_inverse_[j] = 1.0 / pivot;
    upper_[j] = off_diag_ * pivot_inverse_[j];
    previous_upper = upper_[j];
  }
}

LinearPropagator make_propagator(const Grid& grid, double tau, double alpha) { return {grid, tau, alpha}; }

void LinearPropagator::apply_plus(std::span<const Complex> x, std::span<Complex> out) const {
  const std::size_t n = size();
  require_size(x, n, "L+ operand");
  require_size(out, n, "L+ output");
  const Complex off = -off_diag_;
  for (std::size_t j = 0; j < n; ++j) {
    Complex neighbours{};
    if (j > 0) neighbours += x[j - 1];
    if (j + 1 < n) neighbours += x[j + 1];
    out[j] = diag_plus_ * x[j] + off * neighbours;
  }
}

void LinearPropagator::apply_minus(std::span<const Complex> x, std::span<Complex> out) const {
  const std::size_t n = size();
  require_size(x, n, "L- operand");
  require_size(out, n, "L- output");
  for (std::size_t j = 0; j < n; ++j) {
    Complex neighbours{};
    if (j > 0) neighbours += x[j - 1];
    if (j + 1 < n) neighbours += x[j + 1];
    out[j] = diag_minus_ * x[j] + off_diag_ * neighbours;
  }
}

void LinearPropagator::solve(std::span<const Complex> rhs, std::span<Complex> out) const {
  const std::size_t n = size();
  require_size(rhs, n, "right-hand side");
  require_size(out, n, "solution");
  Complex previous{};
  for (std::size_t j = 0; j < n; ++j) {
    previous = (rhs[j] - off_diag_ * previous) * pivot_inverse_[j];
    out[j] = previous;
  }
  for (std::size_t j = n - 1; j-- > 0;) out[j] -= upper_[j] * out[j + 1];
}

void LinearPropagator::propagate(std::span<const Complex> x, std::span<Complex> out) const {
  std::vector<Complex> tmp(size());
  apply_plus(x, tmp);
  solve(tmp, out);
}

State nonlinear_step(std::span<const Complex> psi, int lambda, double tau) {
  if (!(tau >= 0.0)) throw std::invalid_argument("time step must be nonnegative");
  State out(psi.size());
  rotate(psi, 1.0, lambda, tau, 1.0, out);
  return out;
}

double CutoffFunction::operator()(double x) const {
  if (x <= 1.0) return 1.0;
  if (x >= 2.0) return 0.0;
  const double left = std::exp(-1.0 / (2.0 - x));
  const double right = std::exp(-1.0 / (x - 1.0));
  return left / (left + right);
}

double CutoffFunction::derivative(double x) const {
  if (x <= 1.0 || x >= 2.0) return 0.0;
  const double a = 2.0 - x;
  const double b = x - 1.0;
  const double left = std::exp(-1.0 / a);
  const double right = std::exp(-1.0 / b);
  // b'(t) = b(t) / t^2; d/dx left = -left / a^2, d/dx right = right / b^2.
  const double denom = left + right;
  return (-left / (a * a) * right - left * right / (b * b)) / (denom * denom);
}

double cutoff_theta(double x, const CutoffFunction& cut) {
  if (!(cut.radius > 0.0)) throw std::invalid_argument("cut-off radius must be positive");
  return cut(x);
}

Stepper::Stepper(const LinearPropagator& prop, const ModelParams& params, std::optional<CutoffFunction> truncation)
    : prop_(&prop),
      params_(params),
      truncation_(truncation),
      damping_(std::exp(-0.5 * prop.alpha() * prop.tau())),
      rotated_(prop.size()),
      rhs_(prop.size()) {
  if (truncation_ && !(truncation_->radius > 0.0)) throw std::invalid_argument("cut-off radius must be positive");
}

void Stepper::advance(std::span<Complex> psi, std::span<const Complex> forcing_vec) {
  require_size(psi, prop_->size(), "state");
  require_size(forcing_vec, prop_->size(), "forcing vector");
  last_scale_ = truncation_ ? (*truncation_)(euclidean_norm(psi) / truncation_->radius) : 1.0;
  rotate(psi, last_scale_, params_.lambda, prop_->tau(), damping_, rotated_);
  prop_->apply_plus(rotated_, rhs_);
  for (std::size_t j = 0; j < rhs_.size(); ++j) rhs_[j] += forcing_vec[j];
  prop_->solve(rhs_, psi);
}

StepDetail step_detailed(std::span<const Complex> psi, const LinearPropagator& prop, const ModelParams& params,
                         std::span<const Complex> forcing_vec) {
  Stepper stepper(prop, params);
  StepDetail out{State(psi.begin(), psi.end()), {}};
  stepper.advance(out.next, forcing_vec);
  out.damped_rotated.assign(stepper.damped_rotated().begin(), stepper.damped_rotated().end());
  return out;
}

State step(std::span<const Complex> psi, const LinearPropagator& prop, const ModelParams& params,
           std::span<const Complex> forcing_vec) {
  Stepper stepper(prop, params);
  State out(psi.begin(), psi.end());
  stepper.advance(out, forcing_vec);
  return out;
}

State step_truncated(std::span<const Complex> psi, const LinearPropagator& prop, const ModelParams& params,
                     const CutoffFunction& cut, std::span<const Complex> forcing_vec) {
  Stepper stepper(prop, params, cut);
  State out(psi.begin(), psi.end());
  stepper.advance(out, forcing_vec);
  return out;
}

bool all_finite(std::span<const Complex> values) {
  for (const auto& z : values)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  return true;
}

Trajectory integrate(std::span<const Complex> psi0, const LinearPropagator& prop, const ModelParams& params,
                     const ForcingOperator& forcing_op, const BrownianPath& path, const IntegrateOptions& options) {
  if (options.record_stride < 1) throw std::invalid_argument("record stride must be at least 1");
  if (forcing_op.modes() != static_cast<std::size_t>(path.modes())) {
    throw std::invalid_argument("path mode count does not match forcing operator");
  }
  if (std::abs(path.tau() - prop.tau()) > 1e-12 * prop.tau()) {
    throw std::invalid_argument("path step does not match propagator step");
  }
  Stepper stepper(prop, params, options.truncation);
  State psi(psi0.begin(), psi0.end());
  std::vector<Complex> g(prop.size());

  Trajectory traj;
  traj.steps.push_back(0);
  traj.states.push_back(psi);
  const std::size_t n_steps = path.steps();
  for (std::size_t n = 0; n < n_steps; ++n) {
    forcing_op.apply(path.increment(n), g);
    stepper.advance(psi, g);
    if (!all_finite(psi)) throw BlowUpError(static_cast<std::int64_t>(n + 1), "non-finite state at step " + std::to_string(n + 1));
    if ((n + 1) % options.record_stride == 0 || n + 1 == n_steps) {
      traj.steps.push_back(n + 1);
      traj.states.push_back(psi);
    }
  }
  return traj;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory, double tau) {
  out << "step,t,node,re,im\n";
  for (std::size_t i = 0; i < trajectory.steps.size(); ++i) {
    const auto n = trajectory.steps[i];
    const auto t = format_double(static_cast<double>(n) * tau);
    const auto& psi = trajectory.states[i];
    for (std::size_t j = 0; j < psi.size(); ++j) {
      out << n << ',' << t << ',' << (j + 1) << ',' << format_double(psi[j].real()) << ','
          << format_double(psi[j].imag()) << '\n';
    }
  }
}

}  // namespace dsnls
