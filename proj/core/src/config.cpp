#include "dsnls/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "dsnls/errors.hpp"
#include "dsnls/noise.hpp"

namespace dsnls {

namespace {

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

double real_value(const std::string& text) {
  double v = 0.0;
  if (!parse_real(text, v)) throw std::invalid_argument("expected a number, got '" + text + "'");
  return v;
}

long long int_value(const std::string& text) {
  long long v = 0;
  if (!parse_int(text, v)) throw std::invalid_argument("expected an integer, got '" + text + "'");
  return v;
}

int small_int(const std::string& text) {
  const long long v = int_value(text);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    throw std::invalid_argument("integer out of range: " + text);
  }
  return static_cast<int>(v);
}

std::vector<double> real_list(const std::string& text) {
  std::vector<double> out;
  if (trim(text).empty()) return out;
  for (const auto& item : split(text, ',')) out.push_back(real_value(std::string(trim(item))));
  return out;
}

std::vector<std::string> word_list(const std::string& text) {
  std::vector<std::string> out;
  if (trim(text).empty()) return out;
  for (const auto& item : split(text, ',')) out.emplace_back(trim(item));
  return out;
}

std::string join_reals(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += format_double(values[i]);
  }
  return out;
}

void set_initials(ExperimentConfig& c, const std::string& v) {
  std::vector<InitialProfile> named;
  for (const auto& w : word_list(v)) named.push_back(InitialProfile::parse(w));
  // Keep an explicit vector that was set by initial_values.
  for (const auto& p : c.initials) {
    if (p.kind == InitialProfile::Kind::Explicit) named.push_back(p);
  }
  c.initials = std::move(named);
}

void set_initial_values(ExperimentConfig& c, const std::string& v) {
  std::erase_if(c.initials, [](const InitialProfile& p) { return p.kind == InitialProfile::Kind::Explicit; });
  if (trim(v).empty()) return;
  std::vector<Complex> values;
  for (const auto& item : split(v, ',')) {
    const auto parts = split(trim(item), ':');
    if (parts.size() != 2) throw std::invalid_argument("initial_values entries are written re:im");
    values.emplace_back(real_value(std::string(trim(parts[0]))), real_value(std::string(trim(parts[1]))));
  }
  c.initials.push_back(InitialProfile::explicit_values(std::move(values)));
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"model.alpha", [](ExperimentConfig& c, const std::string& v) { c.params.alpha = real_value(v); }},
      {"model.lambda", [](ExperimentConfig& c, const std::string& v) { c.params.lambda = small_int(v); }},
      {"model.epsilon", [](ExperimentConfig& c, const std::string& v) { c.params.epsilon = real_value(v); }},
      {"grid.J", [](ExperimentConfig& c, const std::string& v) { c.nodes = small_int(v); }},
      {"noise.P", [](ExperimentConfig& c, const std::string& v) { c.modes = small_int(v); }},
      {"noise.spectrum", [](ExperimentConfig& c, const std::string& v) { c.spectrum = SpectrumDescriptor::parse(v); }},
      {"noise.seed",
       [](ExperimentConfig& c, const std::string& v) {
         const auto t = trim(v);
         std::uint64_t s = 0;
         const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), s);
         if (ec != std::errc{} || end != t.data() + t.size()) {
           throw std::invalid_argument("seed must be an unsigned 64-bit integer, got '" + v + "'");
         }
         c.seed = s;
       }},
      {"time.tau", [](ExperimentConfig& c, const std::string& v) { c.tau = real_value(v); }},
      {"time.T", [](ExperimentConfig& c, const std::string& v) { c.horizon = real_value(v); }},
      {"experiment.kind", [](ExperimentConfig& c, const std::string& v) { c.kind = parse_experiment_kind(v); }},
      {"experiment.realizations", [](ExperimentConfig& c, const std::string& v) { c.realizations = small_int(v); }},
      {"experiment.workers", [](ExperimentConfig& c, const std::string& v) { c.workers = small_int(v); }},
      {"experiment.initial", set_initials},
      {"experiment.initial_values", set_initial_values},
      {"experiment.observables",
       [](ExperimentConfig& c, const std::string& v) {
         c.observables.clear();
         for (const auto& w : word_list(v)) c.observables.push_back(parse_observable(w));
       }},
      {"experiment.ladder", [](ExperimentConfig& c, const std::string& v) { c.ladder = real_list(v); }},
      {"experiment.reference_tau", [](ExperimentConfig& c, const std::string& v) { c.reference_tau = real_value(v); }},
      {"experiment.horizons", [](ExperimentConfig& c, const std::string& v) { c.horizons = real_list(v); }},
      {"experiment.record_stride",
       [](ExperimentConfig& c, const std::string& v) {
         const long long s = int_value(v);
         if (s < 1) throw std::invalid_argument("record_stride must be at least 1");
         c.record_stride = static_cast<std::size_t>(s);
       }},
      {"experiment.truncation_radius",
       [](ExperimentConfig& c, const std::string& v) {
         if (trim(v).empty() || trim(v) == "none") {
           c.truncation_radius.reset();
         } else {
           c.truncation_radius = real_value(v);
         }
       }},
  };
  return table;
}

const std::vector<std::string> kRequired = {"model.alpha", "model.lambda", "model.epsilon", "grid.J",
                                            "time.tau",    "time.T",       "experiment.kind"};

std::string qualify(const std::string& key, int line) {
  if (key.find('.') != std::string::npos) {
    if (!setters().contains(key)) throw ParseError(line, key, "unknown key '" + key + "'");
    return key;
  }
  std::string found;
  for (const auto& [name, setter] : setters()) {
    if (name.substr(name.find('.') + 1) == key) found = name;
  }
  if (found.empty()) throw ParseError(line, key, "unknown key '" + key + "'");
  return found;
}

struct Entry {
  std::string value;
  int line = 0;
};

std::string where(int line) { return line > 0 ? "line " + std::to_string(line) : "override"; }

}  // namespace

Override parse_override(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) throw ParseError(0, text, "override '" + text + "' is not of the form key=value");
  return {std::string(trim(std::string_view(text).substr(0, eq))),
          std::string(trim(std::string_view(text).substr(eq + 1)))};
}

ExperimentConfig parse_config(const std::string& text, const std::vector<Override>& overrides) {
  std::map<std::string, Entry> entries;
  std::vector<std::string> order;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(line_no, std::string(line), "unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      static const std::vector<std::string> known = {"model", "grid", "noise", "time", "experiment"};
      if (std::find(known.begin(), known.end(), section) == known.end()) {
        throw ParseError(line_no, section, "unknown section [" + section + "] at line " + std::to_string(line_no));
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError(line_no, std::string(line), "line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key(trim(line.substr(0, eq)));
    if (section.empty()) {
      throw ParseError(line_no, key, "line " + std::to_string(line_no) + ": key '" + key + "' outside a section");
    }
    const std::string qualified = section + "." + key;
    if (!setters().contains(qualified)) {
      throw ParseError(line_no, key, "line " + std::to_string(line_no) + ": unknown key '" + key + "' in [" + section + "]");
    }
    if (entries.contains(qualified)) {
      throw ParseError(line_no, key, "line " + std::to_string(line_no) + ": duplicate key '" + qualified + "'");
    }
    entries[qualified] = Entry{std::string(trim(line.substr(eq + 1))), line_no};
    order.push_back(qualified);
  }

  for (const auto& [key, value] : overrides) {
    const auto qualified = qualify(key, 0);
    if (!entries.contains(qualified)) order.push_back(qualified);
    entries[qualified] = Entry{value, 0};
  }

  std::vector<std::string> missing;
  for (const auto& key : kRequired) {
    if (!entries.contains(key)) missing.push_back(key);
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& k : missing) list += (list.empty() ? "" : ", ") + k;
    throw ParseError(0, missing.front(), "missing required keys: " + list);
  }

  // initial_values must be applied after initial so both orders combine.
  std::stable_partition(order.begin(), order.end(), [](const std::string& k) { return k != "experiment.initial_values"; });

  ExperimentConfig config;
  for (const auto& key : order) {
    const auto& entry = entries.at(key);
    try {
      setters().at(key)(config, entry.value);
    } catch (const std::invalid_argument& e) {
      throw ParseError(entry.line, key, where(entry.line) + ": " + key + ": " + e.what());
    }
  }
  try {
    config.validate();
  } catch (const std::invalid_argument& e) {
    throw ParseError(0, "", std::string("invalid configuration: ") + e.what());
  }
  return config;
}

std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "[model]\n";
  out << "alpha = " << format_double(c.params.alpha) << '\n';
  out << "lambda = " << c.params.lambda << '\n';
  out << "epsilon = " << format_double(c.params.epsilon) << '\n';
  out << "\n[grid]\nJ = " << c.nodes << '\n';
  out << "\n[noise]\nP = " << c.modes << '\n';
  out << "spectrum = " << c.spectrum.to_string() << '\n';
  out << "seed = " << c.seed << '\n';
  out << "\n[time]\ntau = " << format_double(c.tau) << '\n';
  out << "T = " << format_double(c.horizon) << '\n';
  out << "\n[experiment]\nkind = " << to_string(c.kind) << '\n';
  out << "realizations = " << c.realizations << '\n';
  out << "workers = " << c.workers << '\n';
  std::string named;
  std::string explicit_values;
  for (const auto& p : c.initials) {
    if (p.kind == InitialProfile::Kind::Explicit) {
      for (const auto& z : p.values) {
        if (!explicit_values.empty()) explicit_values += ", ";
        explicit_values += format_double(z.real()) + ":" + format_double(z.imag());
      }
    } else {
      named += (named.empty() ? "" : ", ") + p.name();
    }
  }
  out << "initial = " << named << '\n';
  if (!explicit_values.empty()) out << "initial_values = " << explicit_values << '\n';
  std::string obs;
  for (auto o : c.observables) obs += (obs.empty() ? "" : ", ") + to_string(o);
  out << "observables = " << obs << '\n';
  out << "ladder = " << join_reals(c.ladder) << '\n';
  out << "reference_tau = " << format_double(c.reference_tau) << '\n';
  out << "horizons = " << join_reals(c.horizons) << '\n';
  out << "record_stride = " << c.record_stride << '\n';
  out << "truncation_radius = " << (c.truncation_radius ? format_double(*c.truncation_radius) : "none") << '\n';
  return out.str();
}

namespace {

struct Preset {
  const char* name;
  const char* summary;
  const char* text;
};

constexpr const char* kModelHeader =
    "[model]\nalpha = 0.5\nlambda = 1\n";

const std::vector<Preset>& presets() {
  static const std::vector<Preset> table = {
      {"fig1a", "charge decay without noise, h = 0.1, tau = 2^-6, T = 35",
       "epsilon = 0\n[grid]\nJ = 9\n[noise]\nP = 100\nspectrum = power 6\nseed = 1\n"
       "[time]\ntau = 2^-6\nT = 35\n"
       "[experiment]\nkind = charge\nrealizations = 1\ninitial = sine\nrecord_stride = 1\n"},
      {"fig1b", "stochastic charge plateau, h = 0.1, tau = 2^-6, T = 35, M = 500",
       "epsilon = 1\n[grid]\nJ = 9\n[noise]\nP = 100\nspectrum = power 6\nseed = 1\n"
       "[time]\ntau = 2^-6\nT = 35\n"
       "[experiment]\nkind = charge\nrealizations = 500\ninitial = sine\nrecord_stride = 16\n"},
      {"fig2", "temporal averages from five initial values, h = 0.1, T = 100, M = 100",
       "epsilon = 1\n[grid]\nJ = 9\n[noise]\nP = 100\nspectrum = power 6\nseed = 1\n"
       "[time]\ntau = 2^-6\nT = 100\n"
       "[experiment]\nkind = ergodic\nrealizations = 100\n"
       "initial = initial1, initial2, initial3, initial4, initial5\n"
       "observables = exp_neg_norm2, sin_norm2\nrecord_stride = 64\n"},
      {"fig3", "mean-square error against horizon, h = 0.25, tau = 2^-8, T up to 80",
       "epsilon = 1\n[grid]\nJ = 3\n[noise]\nP = 100\nspectrum = power 6\nseed = 1\n"
       "[time]\ntau = 2^-10\nT = 80\n"
       "[experiment]\nkind = error\nrealizations = 100\ninitial = sine\n"
       "ladder = 2^-8\nreference_tau = 2^-10\nhorizons = 10, 20, 40, 80\n"},
      {"fig4-det", "deterministic order fit, h = 0.1, T = 1, ladder 2^-10..2^-7",
       "epsilon = 0\n[grid]\nJ = 9\n[noise]\nP = 100\nspectrum = power 6\nseed = 1\n"
       "[time]\ntau = 2^-12\nT = 1\n"
       "[experiment]\nkind = order\nrealizations = 1\ninitial = sine\n"
       "ladder = 2^-10, 2^-9, 2^-8, 2^-7\nreference_tau = 2^-12\n"},
      {"fig4-stoch", "stochastic order fit, h = 0.1, T = 1, ladder 2^-10..2^-7, M = 100",
       "epsilon = 1\n[grid]\nJ = 9\n[noise]\nP = 100\nspectrum = power 6\nseed = 1\n"
       "[time]\ntau = 2^-12\nT = 1\n"
       "[experiment]\nkind = order\nrealizations = 100\ninitial = sine\n"
       "ladder = 2^-10, 2^-9, 2^-8, 2^-7\nreference_tau = 2^-12\n"},
  };
  return table;
}

const Preset& find_preset(const std::string& name) {
  for (const auto& p : presets()) {
    if (name == p.name) return p;
  }
  throw std::invalid_argument("unknown preset '" + name + "'");
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& p : presets()) out.emplace_back(p.name);
  return out;
}

std::string preset_summary(const std::string& name) { return find_preset(name).summary; }

std::string preset_text(const std::string& name) {
  const auto& p = find_preset(name);
  return "# preset " + std::string(p.name) + ": " + p.summary + "\n" + kModelHeader + p.text;
}

void write_manifest(std::ostream& out, const RunRecord& record, const ManifestInfo& info) {
  out << "# dsnls run manifest\n";
  out << "command = " << info.command << '\n';
  out << "status = " << info.status << '\n';
  out << "library_version = " << record.library_version << '\n';
  out << "rng_algorithm = " << record.rng_algorithm << '\n';
  out << "csv_schema_version = " << kCsvSchemaVersion << '\n';
  out << "seed = " << record.seed << '\n';
  out << "workers = " << resolve_workers(record.config.workers) << '\n';
  out << "wall_seconds = " << format_double(record.wall_seconds) << '\n';
  out << "h = " << format_double(record.config.grid().h()) << '\n';
  out << "eta_total = " << format_double(record.config.noise().total()) << '\n';
  for (const auto& [key, value] : info.overrides) out << "override = " << key << '=' << value << '\n';
  for (const auto& f : info.files) out << "file = " << f << '\n';
  out << "\n# configuration\n" << serialize_config(record.config);
}

void write_run(const std::filesystem::path& dir, const RunRecord& record, ManifestInfo info) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + dir.string() + "': " + ec.message());
  for (const auto& [stem, table] : record.tables) {
    const auto name = stem + ".csv";
    table.write(dir / name);
    info.files.push_back(name);
  }
  std::ofstream out(dir / "manifest.txt");
  if (!out) throw std::runtime_error("cannot write '" + (dir / "manifest.txt").string() + "'");
  write_manifest(out, record, info);
  if (!out) throw std::runtime_error("failed writing '" + (dir / "manifest.txt").string() + "'");
}

}  // namespace dsnls
