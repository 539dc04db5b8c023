#pragma once

// Splitting scheme for the damped stochastic NLS on the finite-difference grid:
//
//   psi~^n    = exp(i lambda F(psi^n) tau) psi^n                 (phase rotation)
//   psi^{n+1} = L-^{-1} [ L+ exp(-alpha tau / 2) psi~^n + g^n ]   (damped midpoint)
//
// with F = diag |psi_j|^2, A = tridiag(1, -2, 1),
//   L- = I - i tau/(2h^2) A + (alpha tau / 4) I,
//   L+ = I + i tau/(2h^2) A - (alpha tau / 4) I,
// and g^n = eps sigma Lambda delta_{n+1} beta.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "dsnls/model.hpp"
#include "dsnls/noise.hpp"

namespace dsnls {

/// L- factorised once (complex Thomas elimination) together with L+.
/// Immutable; safe to share between threads.
class LinearPropagator {
 public:
  /// Throws std::invalid_argument unless tau > 0 and alpha >= 0, and
  /// NumericalFailure if a pivot vanishes.
  LinearPropagator(const Grid& grid, double tau, double alpha);

  std::size_t size() const { return pivot_inverse_.size(); }
  double tau() const { return tau_; }
  double alpha() const { return alpha_; }
  double h() const { return h_; }

  /// out = L+ x.
  void apply_plus(std::span<const Complex> x, std::span<Complex> out) const;
  /// out = L- x.
  void apply_minus(std::span<const Complex> x, std::span<Complex> out) const;
  /// out = L-^{-1} rhs. `out` may alias `rhs`.
  void solve(std::span<const Complex> rhs, std::span<Complex> out) const;
  /// out = L-^{-1} L+ x (Cayley-type linear substep without damping factor).
  void propagate(std::span<const Complex> x, std::span<Complex> out) const;

 private:
  double tau_;
  double alpha_;
  double h_;
  Complex off_diag_;       // -i tau / (2 h^2), both off-diagonals of L-
  Complex diag_minus_;     // 1 + i tau / h^2 + alpha tau / 4
  Complex diag_plus_;      // 1 - i tau / h^2 - alpha tau / 4
  std::vector<Complex> upper_;          // modified super-diagonal c'_j
  std::vector<Complex> pivot_inverse_;  // 1 / (d - a c'_{j-1})
};

LinearPropagator make_propagator(const Grid& grid, double tau, double alpha);

/// psi~_j = exp(i lambda |psi_j|^2 tau) psi_j.
State nonlinear_step(std::span<const Complex> psi, int lambda, double tau);

/// Smooth cut-off theta(|v| / R): 1 on [0,1], 0 on [2,inf), and
/// b(2-x) / (b(2-x) + b(x-1)) in between with b(t) = exp(-1/t).
struct CutoffFunction {
  double radius = 1.0;

  double operator()(double x) const;
  /// d theta / dx.
  double derivative(double x) const;
};

double cutoff_theta(double x, const CutoffFunction& cut);

/// Result of one step, keeping the damped rotated state exp(f(psi^n)) psi^n
/// needed by the energy identity.
struct StepDetail {
  State next;
  State damped_rotated;
};

/// Throws std::invalid_argument on a shape mismatch.
State step(std::span<const Complex> psi, const LinearPropagator& prop, const ModelParams& params,
           std::span<const Complex> forcing_vec);
StepDetail step_detailed(std::span<const Complex> psi, const LinearPropagator& prop, const ModelParams& params,
                         std::span<const Complex> forcing_vec);

/// Same as step with the rotation angle scaled by theta(|psi^n| / R).
State step_truncated(std::span<const Complex> psi, const LinearPropagator& prop, const ModelParams& params,
                     const CutoffFunction& cut, std::span<const Complex> forcing_vec);

/// Reusable single-trajectory stepper. Owns its buffers, so one per thread.
class Stepper {
 public:
  Stepper(const LinearPropagator& prop, const ModelParams& params, std::optional<CutoffFunction> truncation = {});

  /// psi <- scheme(psi, forcing). In place.
  void advance(std::span<Complex> psi, std::span<const Complex> forcing_vec);
  /// Nonlinear rotation scale used for the last advance (theta value, 1 untruncated).
  double last_rotation_scale() const { return last_scale_; }
  /// exp(f(psi^n)) psi^n from the last advance.
  std::span<const Complex> damped_rotated() const { return rotated_; }

 private:
  const LinearPropagator* prop_;
  ModelParams params_;
  std::optional<CutoffFunction> truncation_;
  double damping_;
  double last_scale_ = 1.0;
  std::vector<Complex> rotated_;
  std::vector<Complex> rhs_;
};

struct IntegrateOptions {
  std::optional<CutoffFunction> truncation;
  std::size_t record_stride = 1;
};

struct Trajectory {
  std::vector<std::size_t> steps;
  std::vector<State> states;
};

/// Runs path.steps() steps from psi0, recording every record_stride-th state
/// plus the final one. Throws BlowUpError carrying the first step index that
/// produced a non-finite value.
Trajectory integrate(std::span<const Complex> psi0, const LinearPropagator& prop, const ModelParams& params,
                     const ForcingOperator& forcing_op, const BrownianPath& path, const IntegrateOptions& options = {});

/// Snapshot rows: step,t,node,re,im (node is 1-based).
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory, double tau);

bool all_finite(std::span<const Complex> values);

}  // namespace dsnls
