#include "dsnls/model.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "dsnls/csv.hpp"

namespace dsnls {

void ModelParams::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("alpha must be positive and finite");
  if (lambda != 1 && lambda != -1) throw std::invalid_argument("lambda must be +1 or -1");
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw std::invalid_argument("epsilon must be nonnegative");
}

Grid::Grid(int interior_nodes) {
  if (interior_nodes < 1) throw std::invalid_argument("grid needs at least one interior node");
  h_ = 1.0 / static_cast<double>(interior_nodes + 1);
  nodes_.resize(static_cast<std::size_t>(interior_nodes));
  for (int j = 1; j <= interior_nodes; ++j) nodes_[static_cast<std::size_t>(j - 1)] = j * h_;
}

Grid make_grid(int interior_nodes) { return Grid(interior_nodes); }

RealMatrix eigenfunction_matrix(const Grid& grid, int modes) {
  if (modes < 1) throw std::invalid_argument("eigenfunction matrix needs at least one mode");
  const auto J = static_cast<std::size_t>(grid.size());
  const auto P = static_cast<std::size_t>(modes);
  RealMatrix sigma(J, P);
  for (std::size_t j = 0; j < J; ++j) {
    for (std::size_t k = 0; k < P; ++k) {
      sigma(j, k) = std::numbers::sqrt2 * std::sin(static_cast<double>(k + 1) * std::numbers::pi * grid.node(static_cast<int>(j)));
    }
  }
  return sigma;
}

SpectrumDescriptor SpectrumDescriptor::power_law(double exponent) {
  SpectrumDescriptor d;
  d.kind = Kind::PowerLaw;
  d.exponent = exponent;
  return d;
}

SpectrumDescriptor SpectrumDescriptor::explicit_list(std::vector<double> values) {
  SpectrumDescriptor d;
  d.kind = Kind::Explicit;
  d.exponent = 0.0;
  d.values = std::move(values);
  return d;
}

std::string SpectrumDescriptor::to_string() const {
  if (kind == Kind::PowerLaw) return "power " + format_double(exponent);
  std::string out = "list ";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += format_double(values[i]);
  }
  return out;
}

SpectrumDescriptor SpectrumDescriptor::parse(const std::string& text) {
  const auto body = trim(text);
  const auto space = body.find_first_of(" \t:");
  const auto head = body.substr(0, space);
  const auto rest = space == std::string_view::npos ? std::string_view{} : trim(body.substr(space + 1));
  if (head == "power") {
    double r = 0.0;
    if (!parse_real(rest, r)) throw std::invalid_argument("bad power-law exponent '" + std::string(rest) + "'");
    return power_law(r);
  }
  if (head == "list") {
    std::vector<double> values;
    for (const auto& item : split(rest, ',')) {
      double v = 0.0;
      if (!parse_real(item, v)) throw std::invalid_argument("bad spectrum entry '" + item + "'");
      values.push_back(v);
    }
    return explicit_list(std::move(values));
  }
  throw std::invalid_argument("unknown spectrum kind '" + std::string(head) + "' (expected power or list)");
}

std::vector<double> spectrum(const SpectrumDescriptor& descriptor, int modes) {
  if (modes < 1) throw std::invalid_argument("spectrum needs at least one mode");
  std::vector<double> eta(static_cast<std::size_t>(modes));
  if (descriptor.kind == SpectrumDescriptor::Kind::PowerLaw) {
    for (int k = 1; k <= modes; ++k) eta[static_cast<std::size_t>(k - 1)] = std::pow(static_cast<double>(k), -descriptor.exponent);
    return eta;
  }
  if (descriptor.values.size() != eta.size()) {
    throw std::invalid_argument("explicit spectrum has " + std::to_string(descriptor.values.size()) +
                                " entries but P = " + std::to_string(modes));
  }
  for (double v : descriptor.values) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("spectrum entries must be nonnegative");
  }
  return descriptor.values;
}

NoiseSpec::NoiseSpec(std::vector<double> eigenvalues, std::uint64_t base_seed)
    : modes(static_cast<int>(eigenvalues.size())), eta(std::move(eigenvalues)), seed(base_seed) {
  if (eta.empty()) throw std::invalid_argument("noise needs at least one mode");
  for (double v : eta) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("noise eigenvalues must be nonnegative");
  }
}

double NoiseSpec::total() const { return std::accumulate(eta.begin(), eta.end(), 0.0); }

bool NoiseSpec::all_modes_positive() const {
  for (double v : eta)
    if (!(v > 0.0)) return false;
  return true;
}

InitialProfile InitialProfile::named(int index) {
  if (index < 1 || index > 5) throw std::invalid_argument("initial presets are numbered 1..5");
  InitialProfile p;
  p.kind = Kind::Preset;
  p.preset = index;
  return p;
}

InitialProfile InitialProfile::explicit_values(ComplexVector values) {
  InitialProfile p;
  p.kind = Kind::Explicit;
  p.values = std::move(values);
  return p;
}

std::string InitialProfile::name() const {
  switch (kind) {
    case Kind::Sine: return "sine";
    case Kind::Preset: return "initial" + std::to_string(preset);
    case Kind::Explicit: return "explicit";
  }
  return "explicit";
}

InitialProfile InitialProfile::parse(const std::string& text) {
  const auto t = trim(text);
  if (t == "sine") return sine();
  if (t.size() == 8 && t.starts_with("initial") && t[7] >= '1' && t[7] <= '5') return named(t[7] - '0');
  throw std::invalid_argument("unknown initial profile '" + std::string(t) + "' (expected sine or initial1..initial5)");
}

State sample_initial(const Grid& grid, const InitialProfile& profile) {
  const auto J = static_cast<std::size_t>(grid.size());
  State psi(J, Complex{});
  constexpr double pi = std::numbers::pi;
  switch (profile.kind) {
    case InitialProfile::Kind::Sine:
      for (std::size_t j = 0; j < J; ++j) psi[j] = std::sin(pi * grid.node(static_cast<int>(j)));
      break;
    case InitialProfile::Kind::Preset:
      for (std::size_t i = 0; i < J; ++i) {
        const double j = static_cast<double>(i + 1);
        switch (profile.preset) {
          case 1: psi[i] = i == 0 ? Complex{1.0, 0.0} : Complex{}; break;
          case 2: psi[i] = i == 0 ? Complex{0.0, 3e-4} : Complex{}; break;
          case 3: psi[i] = std::sin(j * pi / static_cast<double>(J + 1)); break;
          case 4: psi[i] = Complex{2.0, 1.0} / 20.0 * j; break;
          case 5: psi[i] = std::exp(Complex{0.0, -j / 50.0}); break;
          default: throw std::invalid_argument("initial presets are numbered 1..5");
        }
      }
      break;
    case InitialProfile::Kind::Explicit:
      if (profile.values.size() != J) {
        throw std::invalid_argument("explicit initial vector has length " + std::to_string(profile.values.size()) +
                                    ", grid has " + std::to_string(J) + " nodes");
      }
      psi = profile.values;
      break;
  }
  return psi;
}

}  // namespace dsnls
