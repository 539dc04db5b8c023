#pragma once

// Model, grid and spectrum types for the damped stochastic cubic Schroedinger
// equation
//
//   d psi - i (psi_xx + i alpha psi + lambda |psi|^2 psi) dt = eps Q dW
//
// on [0,1] with homogeneous Dirichlet conditions, discretised on J interior
// nodes x_j = j h, (J + 1) h = 1.

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace dsnls {

using Complex = std::complex<double>;
using ComplexVector = std::vector<Complex>;

/// Node values psi_1..psi_J of the discrete solution.
using State = ComplexVector;

struct ModelParams {
  double alpha = 0.5;   // damping, > 0 for the model; 0 is accepted by low-level kernels
  int lambda = 1;       // focusing (+1) or defocusing (-1)
  double epsilon = 0.0; // noise amplitude

  /// Throws std::invalid_argument unless alpha > 0, lambda in {-1,+1}, epsilon >= 0.
  void validate() const;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

class Grid {
 public:
  /// Throws std::invalid_argument when interior_nodes < 1.
  explicit Grid(int interior_nodes);

  int size() const { return static_cast<int>(nodes_.size()); }
  double h() const { return h_; }
  /// Node x_{i+1} for zero-based i.
  double node(int i) const { return nodes_[static_cast<std::size_t>(i)]; }
  std::span<const double> nodes() const { return nodes_; }

 private:
  double h_;
  std::vector<double> nodes_;
};

Grid make_grid(int interior_nodes);

/// Dense row-major real matrix; only what the eigenbasis needs.
class RealMatrix {
 public:
  RealMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> data_;
};

/// sigma_{jk} = sqrt(2) sin(k pi x_j), j = 1..J, k = 1..P.
RealMatrix eigenfunction_matrix(const Grid& grid, int modes);

struct SpectrumDescriptor {
  enum class Kind { PowerLaw, Explicit };

  Kind kind = Kind::PowerLaw;
  double exponent = 6.0;
  std::vector<double> values;

  static SpectrumDescriptor power_law(double exponent);
  static SpectrumDescriptor explicit_list(std::vector<double> values);

  /// "power 6" or "list 1, 0.5, 0.25".
  std::string to_string() const;
  static SpectrumDescriptor parse(const std::string& text);

  friend bool operator==(const SpectrumDescriptor&, const SpectrumDescriptor&) = default;
};

/// Eigenvalues eta_1..eta_P of the noise covariance. Explicit lists must
/// have exactly P nonnegative entries.
std::vector<double> spectrum(const SpectrumDescriptor& descriptor, int modes);

struct NoiseSpec {
  int modes = 1;
  std::vector<double> eta;
  std::uint64_t seed = 0;

  NoiseSpec() = default;
  NoiseSpec(std::vector<double> eigenvalues, std::uint64_t base_seed);

  /// eta^(P), the truncated trace.
  double total() const;
  /// Ergodicity needs every retained mode excited.
  bool all_modes_positive() const;
};

struct InitialProfile {
  enum class Kind { Sine, Preset, Explicit };

  Kind kind = Kind::Sine;
  int preset = 0;
  ComplexVector values;

  static InitialProfile sine() { return {}; }
  static InitialProfile named(int index);
  static InitialProfile explicit_values(ComplexVector values);

  /// "sine", "initial1".."initial5"; explicit vectors have no name.
  std::string name() const;
  static InitialProfile parse(const std::string& text);

  friend bool operator==(const InitialProfile&, const InitialProfile&) = default;
};

/// Evaluates the profile at the grid nodes.
///
/// The named ergodicity presets are defined on an arbitrary node count J:
///   initial1 = (1, 0, ..., 0)
///   initial2 = (3e-4 i, 0, ..., 0)
///   initial3 = sin(j pi / (J + 1))
///   initial4 = (2 + i) / 20 * j
///   initial5 = exp(-i j / 50)
/// which reproduces the classical 100-node vectors when J = 100.
State sample_initial(const Grid& grid, const InitialProfile& profile);

}  // namespace dsnls
