#pragma once

// Structural checks for the splitting scheme: charge evolution, the pathwise
// per-step energy identity, tangent (variational) maps and the discrete
// conformal multi-symplectic conservation law, and the spectral bound on A.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dsnls/integrator.hpp"
#include "dsnls/model.hpp"
#include "dsnls/noise.hpp"

namespace dsnls {

/// h * sum_j |psi_j|^2.
double discrete_charge(std::span<const Complex> psi, double h);

/// exp(-2 alpha t) charge0 + eps^2 eta / alpha (1 - exp(-2 alpha t)).
double mean_charge_law(double t, double charge0, const ModelParams& params, double eta_total);

/// Stationary discrete charge eps^2 h / alpha * sum_j sum_k eta_k e_k(x_j)^2.
double charge_limit_discrete(const Grid& grid, const NoiseSpec& noise, const ModelParams& params);

/// Exact mean-charge curve of the semi-discrete system:
/// exp(-2 alpha t) charge0 + plateau (1 - exp(-2 alpha t)), plateau from
/// charge_limit_discrete.
double discrete_charge_law(double t, double charge0, double alpha, double plateau);

/// |psi^{n+1}|^2 - exp(-alpha tau)|psi^n|^2 + alpha tau |mid|^2 - 2 Re<mid, g>
/// with mid = (psi^{n+1} + exp(f(psi^n)) psi^n) / 2. Zero in exact arithmetic.
double step_energy_residual(std::span<const Complex> psi_n, std::span<const Complex> psi_np1,
                            std::span<const Complex> psi_tilde_damped, std::span<const Complex> forcing_vec,
                            const ModelParams& params, double tau);

/// Per-node z-coordinates (p, q, v, w) of a tangent vector.
using ZCoordinates = std::array<double, 4>;

/// A variation d psi of the numerical solution.
struct TangentState {
  ComplexVector dpsi;

  /// z-view for nodes 0..J+1 (index 0 and J+1 are the Dirichlet ghosts):
  /// dp_j = Re dpsi_j, dq_j = Im dpsi_j, dv_j = (dp_j - dp_{j-1}) / h,
  /// dw_j = (dq_j - dq_{j-1}) / h, with dp_0 = dq_0 = dp_{J+1} = dq_{J+1} = 0.
  std::vector<ZCoordinates> z_view(double h) const;
};

/// Derivative of psi_j -> exp(i s lambda |psi_j|^2 tau) psi_j applied to dpsi,
/// where s = `scale` is the cut-off value and `scale_differential` is ds along
/// dpsi (zero without truncation).
ComplexVector rotation_tangent(std::span<const Complex> psi, std::span<const Complex> dpsi, int lambda, double tau,
                               double scale = 1.0, double scale_differential = 0.0);

/// Exact Jacobian of one step applied to dpsi. Additive noise drops out.
/// With a cut-off the Jacobian includes the derivative of theta(|psi|/R).
TangentState tangent_step(std::span<const Complex> psi_n, const TangentState& dpsi, const LinearPropagator& prop,
                          const ModelParams& params, const std::optional<CutoffFunction>& truncation = {});

/// Tangent of the damped midpoint substep alone:
/// L-^{-1} L+ exp(-alpha tau / 2) dpsi.
TangentState linear_substep_tangent(const TangentState& dpsi, const LinearPropagator& prop);

/// Node-wise area form omega_j(xi, zeta) = xi_p zeta_q - xi_q zeta_p.
double area_form(Complex xi, Complex zeta);

/// max_j |omega_j(D xi, D zeta) - omega_j(xi, zeta)| for D the Jacobian of
/// the phase rotation at psi.
double nonlinear_symplectic_residual(std::span<const Complex> psi, const TangentState& xi, const TangentState& zeta,
                                     int lambda, double tau);

/// Two tangent vectors before (level n, after the rotation) and after the
/// damped midpoint substep, evaluated at 1-based node j.
struct TwoFormSample {
  TangentState xi_n;
  TangentState xi_np1;
  TangentState zeta_n;
  TangentState zeta_np1;
  int node = 1;
};

/// Terms of the discrete conformal multi-symplectic law at one node, with
/// omega = (1/2) dz ^ M dz and kappa built from K1, K2.
struct ConformalResidual {
  double temporal_conformal = 0.0;  // (omega^{n+1} - exp(-alpha tau) omega^n) / tau
  double temporal_printed = 0.0;    // exp(-alpha tau) (omega^{n+1} - omega^n) / tau
  double spatial = 0.0;             // dz_j ^ (K1 dz_{j+1} - K2 dz_{j-1}) / h at n+1/2
  double dissipation = 0.0;         // (alpha / 2) dz_j ^ M dz_j at n+1/2
  double residual_conformal = 0.0;  // |temporal_conformal + spatial + dissipation|
  double residual_printed = 0.0;    // |temporal_printed + spatial + dissipation|
  double scale = 0.0;               // largest absolute term

  double relative_conformal() const { return scale > 0.0 ? residual_conformal / scale : residual_conformal; }
  double relative_printed() const { return scale > 0.0 ? residual_printed / scale : residual_printed; }
};

/// Evaluates both readings of the exponential prefactor. Nodes 1..J are
/// accepted; the zero Dirichlet ghosts make the boundary rows exact as well.
/// Throws std::invalid_argument for nodes outside 1..J or size mismatches.
ConformalResidual conformal_ms_residual(const TwoFormSample& sample, double tau, double h, double alpha);

struct MatrixNormCheck {
  double closed_form = 0.0;
  double power_iteration = 0.0;
  std::size_t iterations = 0;
};

/// ||A||_2 by the closed form 4 sin^2(J pi / (2 (J + 1))) = 2 + 2 cos(pi / (J + 1)) and by power
/// iteration on -A. Throws NumericalFailure when they differ by more than
/// `tolerance` or either reaches 4.
MatrixNormCheck matrix_norm_A(int J, double tolerance = 1e-10);

/// First index where charges[i] > exp(-alpha t_i) charge0 + bound, if any.
std::optional<std::size_t> first_bound_violation(std::span<const double> times, std::span<const double> charges,
                                                 double alpha, double charge0, double bound);

struct DiagnosticRow {
  std::string check;
  std::int64_t step = 0;
  std::int64_t node = 0;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct IdentitySuiteOptions {
  int random_steps = 1000;
  int two_form_samples = 100;
  int max_nodes = 64;
  std::uint64_t seed = 20240611;
};

/// Machine-precision identity checks: energy residual over random steps,
/// Cayley isometry, rotation symplecticity, conformal MS residual and the
/// norm bound on A. One row per check, holding its worst residual.
std::vector<DiagnosticRow> run_identity_suite(const IdentitySuiteOptions& options = {});

void write_diagnostics_csv(std::ostream& out, std::span<const DiagnosticRow> rows);

}  // namespace dsnls
