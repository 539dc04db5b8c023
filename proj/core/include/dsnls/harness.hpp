#pragma once

// Monte Carlo experiments over independent realizations.
//
// Realization r of a run with base seed s draws its increments from the
// counter stream (s, r); ergodic runs with several initial values use
// stream (s, i * M + r) for initial value i. Workers pull realization
// indices from a shared counter, write into a slot owned by that index, and
// the reduction walks the slots in index order, so statistics depend only on
// (config, seed) and not on the worker count.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

#include "dsnls/csv.hpp"
#include "dsnls/integrator.hpp"
#include "dsnls/model.hpp"

namespace dsnls {

enum class ExperimentKind { Simulate, Charge, Ergodic, Error, Order };

std::string to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(const std::string& text);

enum class Observable { ExpNegNormSquared, SinNormSquared };

std::string to_string(Observable obs);
Observable parse_observable(const std::string& text);
/// f(psi) with |psi| the Euclidean norm of the node vector.
double evaluate(Observable obs, std::span<const Complex> psi);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Simulate;
  ModelParams params;
  int nodes = 9;
  int modes = 100;
  SpectrumDescriptor spectrum = SpectrumDescriptor::power_law(6.0);
  std::uint64_t seed = 1;
  double tau = 0.015625;
  double horizon = 1.0;
  int realizations = 1;
  int workers = 0;  // 0: hardware concurrency
  std::vector<InitialProfile> initials{InitialProfile::sine()};
  std::vector<Observable> observables{Observable::ExpNegNormSquared, Observable::SinNormSquared};
  std::vector<double> ladder;     // coarse steps for error/order runs
  double reference_tau = 0.0;     // 0: use tau
  std::vector<double> horizons;   // error sampling times; empty: {horizon}
  std::size_t record_stride = 1;
  std::optional<double> truncation_radius;

  Grid grid() const { return Grid(nodes); }
  NoiseSpec noise() const;
  double effective_reference_tau() const { return reference_tau > 0.0 ? reference_tau : tau; }
  std::vector<double> effective_horizons() const;

  /// Throws std::invalid_argument naming the violated constraint.
  void validate() const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Number of whole steps of size `step` in `span`; throws when not integral.
std::size_t whole_steps(double span, double step, const char* what);

struct Statistic {
  double mean = 0.0;
  double std_error = 0.0;
};

/// Sample mean with its jackknife standard error.
Statistic jackknife_mean(std::span<const double> samples);
/// transform(sample mean) with the jackknife standard error of that estimator.
Statistic jackknife(std::span<const double> samples, const std::function<double(double)>& transform);

unsigned resolve_workers(int requested);

/// Runs fn(r) for r in [0, count) on `workers` threads and returns the
/// results ordered by r. The first failure (lowest index) is rethrown after
/// all workers stop; partial results are discarded.
template <class Fn>
auto run_ensemble(std::size_t count, unsigned workers, Fn&& fn) -> std::vector<std::invoke_result_t<Fn&, std::size_t>> {
  using Result = std::invoke_result_t<Fn&, std::size_t>;
  std::vector<std::optional<Result>> slots(count);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  std::exception_ptr error;
  std::size_t error_index = count;

  auto worker = [&] {
    while (!failed.load(std::memory_order_relaxed)) {
      const std::size_t r = next.fetch_add(1);
      if (r >= count) return;
      try {
        slots[r].emplace(fn(r));
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (r < error_index) {
          error_index = r;
          error = std::current_exception();
        }
        failed.store(true);
      }
    }
  };

  const unsigned n = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n);
    for (unsigned i = 0; i < n; ++i) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);

  std::vector<Result> out;
  out.reserve(count);
  for (auto& slot : slots) out.push_back(std::move(*slot));
  return out;
}

struct ChargeSeries {
  std::vector<std::size_t> steps;
  std::vector<double> times;
  std::vector<Statistic> charge;
  double initial_charge = 0.0;
  double plateau = 0.0;  // charge_limit_discrete
};

ChargeSeries run_charge(const ExperimentConfig& config);

struct ErgodicCurves {
  std::vector<std::size_t> steps;  // N: average over n = 0..N-1
  std::vector<double> times;       // N tau
  std::vector<std::string> initial_names;
  std::vector<Observable> observables;
  /// averages[i][o][t] for initial value i, observable o, record t.
  std::vector<std::vector<std::vector<Statistic>>> averages;

  /// max - min across initial values of the mean temporal average.
  double spread(std::size_t observable, std::size_t record) const;
};

ErgodicCurves run_ergodic(const ExperimentConfig& config);

struct ErrorEntry {
  double tau = 0.0;
  double horizon = 0.0;
  Statistic error;  // (h E|psi_ref(T) - psi_tau(T)|^2)^(1/2)
};

/// Coupled error table: the reference run at effective_reference_tau() and
/// one run per ladder step consume the same fine increments, coarse ones
/// being left-to-right block sums of the fine ones.
std::vector<ErrorEntry> run_ms_error(const ExperimentConfig& config);

struct OrderFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // RMS of log-log residuals
  std::size_t used = 0;
  std::vector<std::string> warnings;
};

/// Least squares of log(error) on log(tau). Non-positive errors are dropped
/// with a warning; throws std::invalid_argument with fewer than 3 usable points.
OrderFit order_fit(std::span<const std::pair<double, double>> tau_error);

struct SimulationResult {
  Trajectory trajectory;
  std::vector<double> charge;
};

SimulationResult run_simulation(const ExperimentConfig& config, std::size_t realization = 0);

struct RunRecord {
  ExperimentConfig config;
  std::string library_version;
  std::string rng_algorithm;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, CsvTable>> tables;  // file stem -> table
  double wall_seconds = 0.0;
};

RunRecord charge_experiment(const ExperimentConfig& config);
RunRecord ergodic_experiment(const ExperimentConfig& config);
RunRecord ms_error(const ExperimentConfig& config);
RunRecord order_experiment(const ExperimentConfig& config);
RunRecord simulate_experiment(const ExperimentConfig& config);
/// Dispatches on config.kind.
RunRecord run_experiment(const ExperimentConfig& config);

std::string library_version();

}  // namespace dsnls
