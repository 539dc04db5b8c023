#include "dsnls/harness.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "dsnls/diagnostics.hpp"
#include "dsnls/errors.hpp"
#include "dsnls/noise.hpp"

#ifndef DSNLS_VERSION_STRING
#define DSNLS_VERSION_STRING "unknown"
#endif

namespace dsnls {

namespace {

constexpr double kStepTolerance = 1e-9;

std::vector<std::size_t> record_points(std::size_t total, std::size_t stride) {
  std::vector<std::size_t> out;
  for (std::size_t n = stride; n <= total; n += stride) out.push_back(n);
  if (out.empty() || out.back() != total) out.push_back(total);
  return out;
}

std::optional<CutoffFunction> cutoff_of(const ExperimentConfig& config) {
  if (!config.truncation_radius) return std::nullopt;
  return CutoffFunction{*config.truncation_radius};
}

void check_finite(std::span<const Complex> psi, std::size_t step) {
  if (!all_finite(psi)) {
    throw BlowUpError(static_cast<std::int64_t>(step), "non-finite state at step " + std::to_string(step));
  }
}

template <class Clock>
double seconds_since(typename Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

std::string library_version() { return DSNLS_VERSION_STRING; }

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Simulate: return "simulate";
    case ExperimentKind::Charge: return "charge";
    case ExperimentKind::Ergodic: return "ergodic";
    case ExperimentKind::Error: return "error";
    case ExperimentKind::Order: return "order";
  }
  return "simulate";
}

ExperimentKind parse_experiment_kind(const std::string& text) {
  for (auto k : {ExperimentKind::Simulate, ExperimentKind::Charge, ExperimentKind::Ergodic, ExperimentKind::Error,
                 ExperimentKind::Order}) {
    if (text == to_string(k)) return k;
  }
  throw std::invalid_argument("unknown experiment kind '" + text + "'");
}

std::string to_string(Observable obs) {
  return obs == Observable::ExpNegNormSquared ? "exp_neg_norm2" : "sin_norm2";
}

Observable parse_observable(const std::string& text) {
  if (text == "exp_neg_norm2") return Observable::ExpNegNormSquared;
  if (text == "sin_norm2") return Observable::SinNormSquared;
  throw std::invalid_argument("unknown observable '" + text + "' (expected exp_neg_norm2 or sin_norm2)");
}

double evaluate(Observable obs, std::span<const Complex> psi) {
  double s = 0.0;
  for (const auto& z : psi) s += std::norm(z);
  return obs == Observable::ExpNegNormSquared ? std::exp(-s) : std::sin(s);
}

NoiseSpec ExperimentConfig::noise() const { return NoiseSpec(dsnls::spectrum(this->spectrum, modes), seed); }

std::vector<double> ExperimentConfig::effective_horizons() const {
  return horizons.empty() ? std::vector<double>{horizon} : horizons;
}

std::size_t whole_steps(double span, double step, const char* what) {
  if (!(step > 0.0) || !(span >= 0.0)) throw std::invalid_argument(std::string(what) + ": steps must be positive");
  const double ratio = span / step;
  const double rounded = std::round(ratio);
  if (std::abs(ratio - rounded) > kStepTolerance * std::max(1.0, rounded)) {
    throw std::invalid_argument(std::string(what) + ": " + format_double(span) + " is not a whole multiple of " +
                                format_double(step));
  }
  return static_cast<std::size_t>(rounded);
}

void ExperimentConfig::validate() const {
  params.validate();
  if (nodes < 1) throw std::invalid_argument("grid.J must be at least 1");
  if (modes < 1) throw std::invalid_argument("noise.P must be at least 1");
  (void)noise();
  if (!(tau > 0.0)) throw std::invalid_argument("time.tau must be positive");
  if (!(horizon > 0.0)) throw std::invalid_argument("time.T must be positive");
  whole_steps(horizon, tau, "T / tau");
  if (realizations < 1) throw std::invalid_argument("experiment.realizations must be at least 1");
  if (workers < 0) throw std::invalid_argument("experiment.workers must be nonnegative");
  if (record_stride < 1) throw std::invalid_argument("experiment.record_stride must be at least 1");
  if (truncation_radius && !(*truncation_radius > 0.0)) throw std::invalid_argument("truncation radius must be positive");
  if (initials.empty()) throw std::invalid_argument("at least one initial profile is required");
  const Grid g = grid();
  for (const auto& init : initials) (void)sample_initial(g, init);

  if (kind == ExperimentKind::Ergodic) {
    if (observables.empty()) throw std::invalid_argument("ergodic runs need at least one observable");
    if (!noise().all_modes_positive()) throw std::invalid_argument("ergodic runs need eta_k > 0 for every mode");
  }
  if (kind == ExperimentKind::Error || kind == ExperimentKind::Order) {
    const double ref = effective_reference_tau();
    if (ladder.empty()) throw std::invalid_argument("error runs need a tau ladder");
    for (double step : ladder) {
      if (step + 1e-15 < ref) throw std::invalid_argument("ladder step " + format_double(step) + " is finer than the reference step");
      whole_steps(step, ref, "ladder step / reference step");
    }
    for (double t : effective_horizons()) {
      if (!(t > 0.0) || t > horizon * (1.0 + kStepTolerance)) {
        throw std::invalid_argument("error horizon " + format_double(t) + " must lie in (0, T]");
      }
      for (double step : ladder) whole_steps(t, step, "horizon / ladder step");
      whole_steps(t, ref, "horizon / reference step");
    }
    if (kind == ExperimentKind::Order) {
      std::size_t usable = 0;
      for (double step : ladder) usable += std::abs(step - ref) > 1e-15 ? 1 : 0;
      if (usable < 3) throw std::invalid_argument("order fits need at least 3 ladder steps coarser than the reference");
    }
  }
}

Statistic jackknife(std::span<const double> samples, const std::function<double(double)>& transform) {
  const std::size_t m = samples.size();
  if (m == 0) throw std::invalid_argument("jackknife needs at least one sample");
  double sum = 0.0;
  for (double x : samples) sum += x;
  Statistic out;
  out.mean = transform(sum / static_cast<double>(m));
  if (m == 1) return out;
  std::vector<double> loo(m);
  double loo_mean = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    loo[i] = transform((sum - samples[i]) / static_cast<double>(m - 1));
    loo_mean += loo[i];
  }
  loo_mean /= static_cast<double>(m);
  double ss = 0.0;
  for (double v : loo) ss += (v - loo_mean) * (v - loo_mean);
  out.std_error = std::sqrt(static_cast<double>(m - 1) / static_cast<double>(m) * ss);
  return out;
}

Statistic jackknife_mean(std::span<const double> samples) {
  return jackknife(samples, [](double x) { return x; });
}

unsigned resolve_workers(int requested) {
  if (requested > 0) return static_cast<unsigned>(requested);
  return std::max(1u, std::thread::hardware_concurrency());
}

ChargeSeries run_charge(const ExperimentConfig& config) {
  config.validate();
  const Grid grid = config.grid();
  const NoiseSpec noise = config.noise();
  const LinearPropagator prop(grid, config.tau, config.params.alpha);
  const ForcingOperator forcing_op(grid, noise, config.params.epsilon);
  const std::size_t total = whole_steps(config.horizon, config.tau, "T / tau");
  const State psi0 = sample_initial(grid, config.initials.front());
  const auto cut = cutoff_of(config);

  ChargeSeries out;
  out.steps.push_back(0);
  for (auto n : record_points(total, config.record_stride)) out.steps.push_back(n);
  for (auto n : out.steps) out.times.push_back(static_cast<double>(n) * config.tau);
  out.initial_charge = discrete_charge(psi0, grid.h());
  out.plateau = charge_limit_discrete(grid, noise, config.params);

  const bool noisy = config.params.epsilon > 0.0;
  auto samples = run_ensemble(static_cast<std::size_t>(config.realizations), resolve_workers(config.workers),
                              [&](std::size_t r) {
                                Stepper stepper(prop, config.params, cut);
                                const IncrementStream stream(noise.seed, r, noise.modes, config.tau);
                                State psi = psi0;
                                ComplexVector dbeta(static_cast<std::size_t>(noise.modes));
                                ComplexVector g(psi.size());
                                std::vector<double> charges;
                                charges.reserve(out.steps.size());
                                charges.push_back(out.initial_charge);
                                std::size_t next_record = 1;
                                for (std::size_t n = 0; n < total; ++n) {
                                  if (noisy) {
                                    stream.fill(n, dbeta);
                                    forcing_op.apply(dbeta, g);
                                  }
                                  stepper.advance(psi, g);
                                  check_finite(psi, n + 1);
                                  if (next_record < out.steps.size() && out.steps[next_record] == n + 1) {
                                    charges.push_back(discrete_charge(psi, grid.h()));
                                    ++next_record;
                                  }
                                }
                                return charges;
                              });

  std::vector<double> column(samples.size());
  for (std::size_t t = 0; t < out.steps.size(); ++t) {
    for (std::size_t r = 0; r < samples.size(); ++r) column[r] = samples[r][t];
    out.charge.push_back(jackknife_mean(column));
  }
  return out;
}

double ErgodicCurves::spread(std::size_t observable, std::size_t record) const {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& per_initial : averages) {
    const double v = per_initial[observable][record].mean;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return hi - lo;
}

ErgodicCurves run_ergodic(const ExperimentConfig& config) {
  config.validate();
  const Grid grid = config.grid();
  const NoiseSpec noise = config.noise();
  const LinearPropagator prop(grid, config.tau, config.params.alpha);
  const ForcingOperator forcing_op(grid, noise, config.params.epsilon);
  const std::size_t total = whole_steps(config.horizon, config.tau, "T / tau");
  const auto cut = cutoff_of(config);
  const auto m = static_cast<std::size_t>(config.realizations);
  const std::size_t n_init = config.initials.size();
  const std::size_t n_obs = config.observables.size();

  ErgodicCurves out;
  out.steps = record_points(total, config.record_stride);
  for (auto n : out.steps) out.times.push_back(static_cast<double>(n) * config.tau);
  out.observables = config.observables;
  std::vector<State> starts;
  for (const auto& init : config.initials) {
    out.initial_names.push_back(init.name());
    starts.push_back(sample_initial(grid, init));
  }

  const bool noisy = config.params.epsilon > 0.0;
  // samples[i * M + r][o][t]
  auto samples = run_ensemble(n_init * m, resolve_workers(config.workers), [&](std::size_t task) {
    const std::size_t init = task / m;
    Stepper stepper(prop, config.params, cut);
    const IncrementStream stream(noise.seed, task, noise.modes, config.tau);
    State psi = starts[init];
    ComplexVector dbeta(static_cast<std::size_t>(noise.modes));
    ComplexVector g(psi.size());
    std::vector<double> running(n_obs, 0.0);
    std::vector<std::vector<double>> averages(n_obs);
    std::size_t next_record = 0;
    for (std::size_t n = 0; n < total; ++n) {
      // Accumulate f(psi^n) before stepping: average over n = 0..N-1.
      for (std::size_t o = 0; o < n_obs; ++o) running[o] += evaluate(config.observables[o], psi);
      if (next_record < out.steps.size() && out.steps[next_record] == n + 1) {
        for (std::size_t o = 0; o < n_obs; ++o) averages[o].push_back(running[o] / static_cast<double>(n + 1));
        ++next_record;
      }
      if (n + 1 == total) break;
      if (noisy) {
        stream.fill(n, dbeta);
        forcing_op.apply(dbeta, g);
      }
      stepper.advance(psi, g);
      check_finite(psi, n + 1);
    }
    return averages;
  });

  out.averages.assign(n_init, std::vector<std::vector<Statistic>>(n_obs));
  std::vector<double> column(m);
  for (std::size_t i = 0; i < n_init; ++i) {
    for (std::size_t o = 0; o < n_obs; ++o) {
      for (std::size_t t = 0; t < out.steps.size(); ++t) {
        for (std::size_t r = 0; r < m; ++r) column[r] = samples[i * m + r][o][t];
        out.averages[i][o].push_back(jackknife_mean(column));
      }
    }
  }
  return out;
}

std::vector<ErrorEntry> run_ms_error(const ExperimentConfig& config) {
  config.validate();
  const Grid grid = config.grid();
  const NoiseSpec noise = config.noise();
  const double ref_tau = config.effective_reference_tau();
  const auto horizons = config.effective_horizons();
  const auto cut = cutoff_of(config);
  const ForcingOperator forcing_op(grid, noise, config.params.epsilon);
  const State psi0 = sample_initial(grid, config.initials.front());

  const LinearPropagator ref_prop(grid, ref_tau, config.params.alpha);
  std::vector<LinearPropagator> props;
  std::vector<std::size_t> ratios;
  for (double step : config.ladder) {
    props.emplace_back(grid, step, config.params.alpha);
    ratios.push_back(whole_steps(step, ref_tau, "ladder step / reference step"));
  }
  std::vector<std::size_t> horizon_steps;
  for (double t : horizons) horizon_steps.push_back(whole_steps(t, ref_tau, "horizon / reference step"));
  const std::size_t total = *std::max_element(horizon_steps.begin(), horizon_steps.end());
  const std::size_t levels = props.size();
  const double h = grid.h();

  const bool noisy = config.params.epsilon > 0.0;
  // samples[r][level * H + horizon] = h |psi_ref - psi_level|^2
  auto samples = run_ensemble(static_cast<std::size_t>(config.realizations), resolve_workers(config.workers),
                              [&](std::size_t r) {
    const auto P = static_cast<std::size_t>(noise.modes);
    const IncrementStream stream(noise.seed, r, noise.modes, ref_tau);
    Stepper ref_stepper(ref_prop, config.params, cut);
    std::vector<Stepper> steppers;
    for (const auto& p : props) steppers.emplace_back(p, config.params, cut);
    State ref = psi0;
    std::vector<State> coarse(levels, psi0);
    std::vector<ComplexVector> accumulated(levels, ComplexVector(P));
    ComplexVector dbeta(P);
    ComplexVector g(psi0.size());
    std::vector<double> errors(levels * horizons.size(), 0.0);

    for (std::size_t n = 0; n < total; ++n) {
      if (noisy) {
        stream.fill(n, dbeta);
        forcing_op.apply(dbeta, g);
      }
      ref_stepper.advance(ref, g);
      check_finite(ref, n + 1);
      for (std::size_t l = 0; l < levels; ++l) {
        if (noisy) {
          for (std::size_t k = 0; k < P; ++k) accumulated[l][k] += dbeta[k];
        }
        if ((n + 1) % ratios[l] == 0) {
          ComplexVector gl(psi0.size());
          if (noisy) {
            forcing_op.apply(accumulated[l], gl);
            std::fill(accumulated[l].begin(), accumulated[l].end(), Complex{});
          }
          steppers[l].advance(coarse[l], gl);
          check_finite(coarse[l], n + 1);
        }
      }
      for (std::size_t k = 0; k < horizons.size(); ++k) {
        if (horizon_steps[k] != n + 1) continue;
        for (std::size_t l = 0; l < levels; ++l) {
          double s = 0.0;
          for (std::size_t j = 0; j < ref.size(); ++j) s += std::norm(ref[j] - coarse[l][j]);
          errors[l * horizons.size() + k] = h * s;
        }
      }
    }
    return errors;
  });

  std::vector<ErrorEntry> out;
  std::vector<double> column(samples.size());
  for (std::size_t l = 0; l < levels; ++l) {
    for (std::size_t k = 0; k < horizons.size(); ++k) {
      for (std::size_t r = 0; r < samples.size(); ++r) column[r] = samples[r][l * horizons.size() + k];
      out.push_back({config.ladder[l], horizons[k], jackknife(column, [](double x) { return std::sqrt(x); })});
    }
  }
  return out;
}

OrderFit order_fit(std::span<const std::pair<double, double>> tau_error) {
  OrderFit fit;
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& [tau, err] : tau_error) {
    if (!(tau > 0.0)) throw std::invalid_argument("order fit: step sizes must be positive");
    if (!(err > 0.0)) {
      fit.warnings.push_back("excluded non-positive error at tau = " + format_double(tau));
      continue;
    }
    xs.push_back(std::log(tau));
    ys.push_back(std::log(err));
  }
  if (xs.size() < 3) throw std::invalid_argument("order fit needs at least 3 positive errors");
  const auto n = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("order fit needs at least two distinct step sizes");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double d = ys[i] - (fit.intercept + fit.slope * xs[i]);
    ss += d * d;
  }
  fit.residual = std::sqrt(ss / n);
  fit.used = xs.size();
  return fit;
}

SimulationResult run_simulation(const ExperimentConfig& config, std::size_t realization) {
  config.validate();
  const Grid grid = config.grid();
  const NoiseSpec noise = config.noise();
  const LinearPropagator prop(grid, config.tau, config.params.alpha);
  const ForcingOperator forcing_op(grid, noise, config.params.epsilon);
  const std::size_t total = whole_steps(config.horizon, config.tau, "T / tau");
  const auto path = generate_path(noise, config.tau, total, realization);
  SimulationResult out;
  out.trajectory = integrate(sample_initial(grid, config.initials.front()), prop, config.params, forcing_op, path,
                             IntegrateOptions{cutoff_of(config), config.record_stride});
  for (const auto& s : out.trajectory.states) out.charge.push_back(discrete_charge(s, grid.h()));
  return out;
}

namespace {

RunRecord make_record(const ExperimentConfig& config) {
  RunRecord rec;
  rec.config = config;
  rec.library_version = library_version();
  rec.rng_algorithm = std::string(kRngAlgorithm);
  rec.seed = config.seed;
  return rec;
}

std::string fmt(std::size_t v) { return std::to_string(v); }

}  // namespace

RunRecord charge_experiment(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const auto series = run_charge(config);
  RunRecord rec = make_record(config);
  CsvTable table({"step", "t", "mean_charge", "std_error", "plateau", "discrete_law"});
  for (std::size_t i = 0; i < series.steps.size(); ++i) {
    table.add_row({fmt(series.steps[i]), format_double(series.times[i]), format_double(series.charge[i].mean),
                   format_double(series.charge[i].std_error), format_double(series.plateau),
                   format_double(discrete_charge_law(series.times[i], series.initial_charge, config.params.alpha,
                                                     series.plateau))});
  }
  rec.tables.emplace_back("charge", std::move(table));
  rec.wall_seconds = seconds_since<std::chrono::steady_clock>(start);
  return rec;
}

RunRecord ergodic_experiment(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const auto curves = run_ergodic(config);
  RunRecord rec = make_record(config);
  CsvTable table({"step", "t", "initial", "observable", "temporal_average", "std_error"});
  for (std::size_t i = 0; i < curves.initial_names.size(); ++i) {
    for (std::size_t o = 0; o < curves.observables.size(); ++o) {
      for (std::size_t t = 0; t < curves.steps.size(); ++t) {
        const auto& s = curves.averages[i][o][t];
        table.add_row({fmt(curves.steps[t]), format_double(curves.times[t]), curves.initial_names[i],
                       to_string(curves.observables[o]), format_double(s.mean), format_double(s.std_error)});
      }
    }
  }
  CsvTable spread({"step", "t", "observable", "spread"});
  for (std::size_t o = 0; o < curves.observables.size(); ++o) {
    for (std::size_t t = 0; t < curves.steps.size(); ++t) {
      spread.add_row({fmt(curves.steps[t]), format_double(curves.times[t]), to_string(curves.observables[o]),
                      format_double(curves.spread(o, t))});
    }
  }
  rec.tables.emplace_back("ergodic", std::move(table));
  rec.tables.emplace_back("ergodic_spread", std::move(spread));
  rec.wall_seconds = seconds_since<std::chrono::steady_clock>(start);
  return rec;
}

RunRecord ms_error(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const auto entries = run_ms_error(config);
  RunRecord rec = make_record(config);
  CsvTable table({"tau", "T", "error", "std_error"});
  for (const auto& e : entries) {
    table.add_row({format_double(e.tau), format_double(e.horizon), format_double(e.error.mean),
                   format_double(e.error.std_error)});
  }
  rec.tables.emplace_back("error", std::move(table));
  rec.wall_seconds = seconds_since<std::chrono::steady_clock>(start);
  return rec;
}

RunRecord order_experiment(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentConfig cfg = config;
  cfg.horizons = {config.horizon};
  const auto entries = run_ms_error(cfg);
  RunRecord rec = make_record(config);
  CsvTable table({"tau", "error", "std_error"});
  std::vector<std::pair<double, double>> points;
  for (const auto& e : entries) {
    table.add_row({format_double(e.tau), format_double(e.error.mean), format_double(e.error.std_error)});
    points.emplace_back(e.tau, e.error.mean);
  }
  const auto fit = order_fit(points);
  CsvTable fit_table({"slope", "intercept", "residual", "points"});
  fit_table.add_row({format_double(fit.slope), format_double(fit.intercept), format_double(fit.residual), fmt(fit.used)});
  rec.tables.emplace_back("order", std::move(table));
  rec.tables.emplace_back("fit", std::move(fit_table));
  rec.wall_seconds = seconds_since<std::chrono::steady_clock>(start);
  return rec;
}

RunRecord simulate_experiment(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const auto sim = run_simulation(config);
  RunRecord rec = make_record(config);
  CsvTable traj({"step", "t", "node", "re", "im"});
  CsvTable charge({"step", "t", "charge"});
  for (std::size_t i = 0; i < sim.trajectory.steps.size(); ++i) {
    const auto n = sim.trajectory.steps[i];
    const auto t = format_double(static_cast<double>(n) * config.tau);
    const auto& psi = sim.trajectory.states[i];
    for (std::size_t j = 0; j < psi.size(); ++j) {
      traj.add_row({fmt(n), t, fmt(j + 1), format_double(psi[j].real()), format_double(psi[j].imag())});
    }
    charge.add_row({fmt(n), t, format_double(sim.charge[i])});
  }
  rec.tables.emplace_back("trajectory", std::move(traj));
  rec.tables.emplace_back("charge", std::move(charge));
  rec.wall_seconds = seconds_since<std::chrono::steady_clock>(start);
  return rec;
}

RunRecord run_experiment(const ExperimentConfig& config) {
  switch (config.kind) {
    case ExperimentKind::Simulate: return simulate_experiment(config);
    case ExperimentKind::Charge: return charge_experiment(config);
    case ExperimentKind::Ergodic: return ergodic_experiment(config);
    case ExperimentKind::Error: return ms_error(config);
    case ExperimentKind::Order: return order_experiment(config);
  }
  throw std::invalid_argument("unknown experiment kind");
}

}  // namespace dsnls
