#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dsnls/config.hpp"
#include "dsnls/errors.hpp"

using namespace dsnls;

namespace fs = std::filesystem;

namespace {

std::string minimal(const std::string& extra = "") {
  return "[model]\nalpha = 0.5\nlambda = 1\nepsilon = 1\n[grid]\nJ = 9\n[time]\ntau = 2^-6\nT = 1\n"
         "[experiment]\nkind = charge\n" +
         extra;
}

template <class Fn>
ParseError parse_error(Fn&& fn) {
  try {
    fn();
  } catch (const ParseError& e) {
    return e;
  }
  FAIL("expected a parse error");
  return ParseError(0, "", "");
}

}  // namespace

TEST_CASE("fig1b preset") {
  const auto c = parse_config(preset_text("fig1b"));
  CHECK(c.kind == ExperimentKind::Charge);
  CHECK(c.params == ModelParams{0.5, 1, 1.0});
  CHECK(c.grid().h() == doctest::Approx(0.1));
  CHECK(c.tau == std::ldexp(1.0, -6));
  CHECK(c.horizon == 35.0);
  CHECK(c.modes == 100);
  CHECK(c.spectrum == SpectrumDescriptor::power_law(6.0));
  CHECK(c.realizations == 500);
}

TEST_CASE("epsilon override gives the deterministic variant") {
  const auto c = parse_config(preset_text("fig1b"), {{"epsilon", "0"}});
  CHECK(c.params.epsilon == 0.0);
  const auto q = parse_config(preset_text("fig1b"), {parse_override("model.epsilon=0")});
  CHECK(q == c);
  CHECK(c == parse_config(preset_text("fig1a"), {{"realizations", "500"}, {"record_stride", "16"}}));
}

TEST_CASE("empty document lists the required keys") {
  const auto e = parse_error([] { parse_config(""); });
  const std::string what = e.what();
  for (const char* key : {"model.alpha", "model.lambda", "model.epsilon", "grid.J", "time.tau", "time.T",
                          "experiment.kind"}) {
    CHECK(what.find(key) != std::string::npos);
  }
}

TEST_CASE("parse errors name line and key") {
  auto e = parse_error([] { parse_config(minimal("colour = red\n")); });
  CHECK(e.line() == 12);
  CHECK(e.key() == "colour");

  e = parse_error([] { parse_config(minimal("realizations = many\n")); });
  CHECK(e.line() == 12);
  CHECK(e.key() == "experiment.realizations");

  e = parse_error([] { parse_config("[model]\nalpha = 0.5\nalpha = 0.6\n"); });
  CHECK(e.line() == 3);

  e = parse_error([] { parse_config("alpha = 0.5\n"); });
  CHECK(e.line() == 1);

  e = parse_error([] { parse_config("[physics]\n"); });
  CHECK(e.line() == 1);

  e = parse_error([] { parse_config("[model]\nalpha 0.5\n"); });
  CHECK(e.line() == 2);

  e = parse_error([] { parse_config(minimal(), {{"nonsense", "1"}}); });
  CHECK(e.key() == "nonsense");
  CHECK(e.line() == 0);

  CHECK_THROWS_AS(parse_override("epsilon"), ParseError);
}

TEST_CASE("invariant violations are parse errors") {
  CHECK_THROWS_AS(parse_config(minimal(), {{"alpha", "0"}}), ParseError);
  CHECK_THROWS_AS(parse_config(minimal(), {{"lambda", "2"}}), ParseError);
  CHECK_THROWS_AS(parse_config(minimal(), {{"tau", "0.3"}}), ParseError);
  CHECK_THROWS_AS(parse_config(minimal(), {{"J", "0"}}), ParseError);
  CHECK_THROWS_AS(parse_config(minimal(), {{"kind", "order"}}), ParseError);
  CHECK_THROWS_AS(parse_config(minimal(), {{"spectrum", "list 1, 2"}}), ParseError);
  CHECK_THROWS_AS(parse_config(minimal(), {{"seed", "-4"}}), ParseError);
}

TEST_CASE("comments, blanks and powers") {
  const auto c = parse_config("# header\n\n" + minimal("ladder = 2^-4 , 2^-3   # trailing\n"));
  CHECK(c.ladder == std::vector<double>{0.0625, 0.125});
}

TEST_CASE("round trip of every preset") {
  for (const auto& name : preset_names()) {
    INFO(name);
    const auto c = parse_config(preset_text(name));
    CHECK(parse_config(serialize_config(c)) == c);
    CHECK_FALSE(preset_summary(name).empty());
  }
  CHECK(preset_names() == std::vector<std::string>{"fig1a", "fig1b", "fig2", "fig3", "fig4-det", "fig4-stoch"});
  CHECK_THROWS_AS(preset_text("fig5"), std::invalid_argument);
}

TEST_CASE("round trip with explicit start vector, truncation and odd values") {
  auto c = parse_config(minimal(), {{"initial", "initial2, sine"},
                                    {"initial_values", "0.1:0, 0:0.2, 1e-3:-4, 0:0, 0:0, 0:0, 0:0, 0:0, 0.3:0.3"},
                                    {"truncation_radius", "3.5"},
                                    {"alpha", "0.1"},
                                    {"tau", "0.001"},
                                    {"T", "0.1"},
                                    {"spectrum", "power 2.5"},
                                    {"seed", "18446744073709551615"}});
  REQUIRE(c.initials.size() == 3);
  CHECK(c.initials[2].kind == InitialProfile::Kind::Explicit);
  CHECK(c.truncation_radius == std::optional<double>{3.5});
  CHECK(parse_config(serialize_config(c)) == c);
}

TEST_CASE("run writer emits tables and one manifest") {
  const auto dir = fs::temp_directory_path() / "dsnls_config_test";
  fs::remove_all(dir);
  auto cfg = parse_config(preset_text("fig1a"), {{"T", "1"}});
  const auto record = charge_experiment(cfg);
  ManifestInfo info;
  info.command = "test";
  info.overrides = {{"T", "1"}};
  write_run(dir, record, info);
  CHECK(fs::exists(dir / "charge.csv"));
  std::ifstream in(dir / "manifest.txt");
  std::stringstream buf;
  buf << in.rdbuf();
  const auto text = buf.str();
  for (const char* needle : {"override = T=1", "rng_algorithm = splitmix64", "csv_schema_version = 1", "seed = 1",
                             "library_version = ", "wall_seconds = ", "file = charge.csv", "alpha = 0.5", "tau = ",
                             "P = 100", "spectrum = power 6", "record_stride = 1"}) {
    INFO(needle);
    CHECK(text.find(needle) != std::string::npos);
  }
  // the manifest's configuration block parses back to the same config
  const auto cfg_block = text.substr(text.find("[model]"));
  CHECK(parse_config(cfg_block) == cfg);
  fs::remove_all(dir);
}

TEST_CASE("run writer reports unwritable destinations") {
  const auto file = fs::temp_directory_path() / "dsnls_not_a_dir";
  std::ofstream(file) << "x";
  const auto record = charge_experiment(parse_config(preset_text("fig1a"), {{"T", "1"}}));
  CHECK_THROWS_AS(write_run(file / "sub", record, {}), std::runtime_error);
  fs::remove(file);
}
