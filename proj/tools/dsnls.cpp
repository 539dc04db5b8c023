// dsnls: run the damped stochastic NLS experiments from the command line.
//
//   dsnls charge --preset fig1b --set epsilon=0 --out runs/fig1a
//   dsnls diagnose --out runs/diag
//   dsnls presets [--show NAME]
//
// Exit status: 0 ok, 2 bad config or arguments, 3 numerical blow-up,
// 4 identity check failed (diagnose), 5 I/O error.

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dsnls/config.hpp"
#include "dsnls/diagnostics.hpp"
#include "dsnls/errors.hpp"
#include "dsnls/harness.hpp"
#include "dsnls/noise.hpp"

namespace fs = std::filesystem;

namespace {

enum Exit : int { kOk = 0, kParse = 2, kBlowUp = 3, kCheckFailed = 4, kIo = 5 };

struct RunOptions {
  std::string config_path;
  std::string preset;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::string out = "dsnls-out";
  bool increments = false;
  std::uint64_t realization = 0;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw dsnls::ParseError(0, "", "cannot read config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string command_line(int argc, char** argv) {
  std::string out;
  for (int i = 0; i < argc; ++i) out += (i ? " " : "") + std::string(argv[i]);
  return out;
}

int run_experiment_command(const std::string& kind, const RunOptions& opt, const std::string& command) {
  dsnls::ManifestInfo info;
  info.command = command;
  dsnls::ExperimentConfig config;
  try {
    if (!opt.config_path.empty() && !opt.preset.empty()) {
      throw dsnls::ParseError(0, "", "--config and --preset are mutually exclusive");
    }
    std::string text;
    if (!opt.preset.empty()) {
      text = dsnls::preset_text(opt.preset);
    } else if (!opt.config_path.empty()) {
      text = read_file(opt.config_path);
    }
    for (const auto& s : opt.sets) info.overrides.push_back(dsnls::parse_override(s));
    if (opt.seed) info.overrides.emplace_back("noise.seed", std::to_string(*opt.seed));
    auto overrides = info.overrides;
    overrides.emplace_back("experiment.kind", kind);
    config = dsnls::parse_config(text, overrides);
  } catch (const dsnls::ParseError& e) {
    std::cerr << "dsnls: " << e.what() << '\n';
    return kParse;
  } catch (const std::invalid_argument& e) {
    std::cerr << "dsnls: " << e.what() << '\n';
    return kParse;
  }

  dsnls::RunRecord record;
  int status = kOk;
  try {
    record = dsnls::run_experiment(config);
  } catch (const dsnls::BlowUpError& e) {
    std::cerr << "dsnls: blow-up: " << e.what() << '\n';
    record.config = config;
    record.library_version = dsnls::library_version();
    record.rng_algorithm = std::string(dsnls::kRngAlgorithm);
    record.seed = config.seed;
    info.status = "blow-up at step " + std::to_string(e.step());
    status = kBlowUp;
  } catch (const std::invalid_argument& e) {
    std::cerr << "dsnls: " << e.what() << '\n';
    return kParse;
  }

  try {
    if (status == kOk && kind == "simulate" && opt.increments) {
      fs::create_directories(opt.out);
      const auto steps = dsnls::whole_steps(config.horizon, config.tau, "T / tau");
      const auto path = dsnls::generate_path(config.noise(), config.tau, steps, opt.realization);
      std::ofstream out(fs::path(opt.out) / "increments.csv");
      if (!out) throw std::runtime_error("cannot write increments.csv");
      dsnls::write_increments_csv(out, path);
      info.files.push_back("increments.csv");
    }
    dsnls::write_run(opt.out, record, info);
  } catch (const std::exception& e) {
    std::cerr << "dsnls: " << e.what() << '\n';
    return kIo;
  }
  if (status == kOk) {
    std::cout << "wrote " << record.tables.size() << " table(s) and manifest.txt to " << opt.out << " in "
              << dsnls::format_double(record.wall_seconds) << " s\n";
  }
  return status;
}

int run_diagnose(const std::string& out_dir, const dsnls::IdentitySuiteOptions& options, const std::string& command) {
  const auto start = std::chrono::steady_clock::now();
  std::vector<dsnls::DiagnosticRow> rows;
  try {
    rows = dsnls::run_identity_suite(options);
  } catch (const dsnls::NumericalFailure& e) {
    std::cerr << "dsnls: " << e.what() << '\n';
    return kCheckFailed;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  bool all_pass = true;
  for (const auto& r : rows) {
    all_pass = all_pass && r.pass;
    std::cout << (r.pass ? "PASS " : "FAIL ") << r.check << " residual=" << dsnls::format_double(r.residual)
              << " tolerance=" << dsnls::format_double(r.tolerance) << '\n';
  }
  try {
    fs::create_directories(out_dir);
    std::ofstream csv(fs::path(out_dir) / "diagnostics.csv");
    std::ofstream manifest(fs::path(out_dir) / "manifest.txt");
    if (!csv || !manifest) throw std::runtime_error("cannot write to '" + out_dir + "'");
    dsnls::write_diagnostics_csv(csv, rows);
    manifest << "# dsnls run manifest\n"
             << "command = " << command << '\n'
             << "status = " << (all_pass ? "ok" : "check failed") << '\n'
             << "library_version = " << dsnls::library_version() << '\n'
             << "rng_algorithm = " << dsnls::kRngAlgorithm << '\n'
             << "csv_schema_version = " << dsnls::kCsvSchemaVersion << '\n'
             << "seed = " << options.seed << '\n'
             << "random_steps = " << options.random_steps << '\n'
             << "two_form_samples = " << options.two_form_samples << '\n'
             << "max_nodes = " << options.max_nodes << '\n'
             << "wall_seconds = " << dsnls::format_double(wall) << '\n'
             << "file = diagnostics.csv\n";
    if (!csv || !manifest) throw std::runtime_error("failed writing to '" + out_dir + "'");
  } catch (const std::exception& e) {
    std::cerr << "dsnls: " << e.what() << '\n';
    return kIo;
  }
  return all_pass ? kOk : kCheckFailed;
}

void add_run_flags(CLI::App* sub, RunOptions& opt) {
  sub->add_option("--config", opt.config_path, "configuration file");
  sub->add_option("--preset", opt.preset, "built-in configuration (see `dsnls presets`)");
  sub->add_option("--set", opt.sets, "override, key=value or section.key=value")->take_all();
  sub->add_option("--seed", opt.seed, "base seed override");
  sub->add_option("--out", opt.out, "output directory")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Splitting-scheme experiments for the damped stochastic NLS equation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", dsnls::library_version());

  RunOptions opt;
  const std::vector<std::pair<std::string, std::string>> kinds = {
      {"simulate", "integrate single realizations and dump trajectories"},
      {"charge", "mean discrete charge over time"},
      {"ergodic", "temporal averages of bounded observables"},
      {"error", "coupled mean-square error at several horizons"},
      {"order", "coupled error over a step ladder with a slope fit"}};
  std::vector<CLI::App*> runs;
  for (const auto& [kind, help] : kinds) {
    auto* sub = app.add_subcommand(kind, help);
    add_run_flags(sub, opt);
    runs.push_back(sub);
  }
  runs[0]->add_flag("--increments", opt.increments, "also write the noise increments");
  runs[0]->add_option("--realization", opt.realization, "realization index")->capture_default_str();

  dsnls::IdentitySuiteOptions diag;
  std::string diag_out = "dsnls-out";
  auto* diagnose = app.add_subcommand("diagnose", "run the machine-precision identity checks");
  diagnose->add_option("--out", diag_out, "output directory")->capture_default_str();
  diagnose->add_option("--seed", diag.seed, "sampling seed")->capture_default_str();
  diagnose->add_option("--steps", diag.random_steps, "random steps for the energy identity")->capture_default_str();
  diagnose->add_option("--samples", diag.two_form_samples, "random two-form samples")->capture_default_str();

  std::string show;
  auto* presets = app.add_subcommand("presets", "list built-in configurations");
  presets->add_option("--show", show, "print the configuration text of one preset");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kParse;
  }

  const auto command = command_line(argc, argv);
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (runs[i]->parsed()) return run_experiment_command(kinds[i].first, opt, command);
  }
  if (diagnose->parsed()) return run_diagnose(diag_out, diag, command);

  if (!show.empty()) {
    try {
      std::cout << dsnls::preset_text(show);
    } catch (const std::invalid_argument& e) {
      std::cerr << "dsnls: " << e.what() << '\n';
      return kParse;
    }
    return kOk;
  }
  for (const auto& name : dsnls::preset_names()) std::cout << name << "  " << dsnls::preset_summary(name) << '\n';
  return kOk;
}
