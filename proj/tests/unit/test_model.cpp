#include <doctest.h>

#include <cmath>
#include <numbers>

#include "dsnls/model.hpp"

using namespace dsnls;

TEST_CASE("grid spacing follows (J+1) h = 1") {
  const Grid g(9);
  CHECK(g.size() == 9);
  CHECK(g.h() == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(g.node(0) == doctest::Approx(0.1));
  CHECK(g.node(8) == doctest::Approx(0.9));
  CHECK(Grid(3).h() == 0.25);
  CHECK(make_grid(1).h() == 0.5);
  CHECK_THROWS_AS(Grid(0), std::invalid_argument);
  CHECK_THROWS_AS(Grid(-3), std::invalid_argument);
}

TEST_CASE("eigenfunction matrix is orthonormal in the discrete inner product") {
  const Grid g(31);
  const auto s = eigenfunction_matrix(g, 31);
  for (std::size_t k = 0; k < 31; ++k) {
    for (std::size_t l = 0; l < 31; ++l) {
      double ip = 0.0;
      for (std::size_t j = 0; j < 31; ++j) ip += g.h() * s(j, k) * s(j, l);
      CHECK(ip == doctest::Approx(k == l ? 1.0 : 0.0).epsilon(1e-12).scale(1.0));
    }
  }
  CHECK(s(0, 0) == doctest::Approx(std::sqrt(2.0) * std::sin(std::numbers::pi / 32.0)));
}

TEST_CASE("h sum of e_1^2 on a fine grid") {
  // frozen: exactly 1 for any J (discrete orthonormality), checked at J = 4096
  const Grid g(4096);
  const auto s = eigenfunction_matrix(g, 1);
  double sum = 0.0;
  for (std::size_t j = 0; j < 4096; ++j) sum += s(j, 0) * s(j, 0);
  CHECK(g.h() * sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("power-law spectrum") {
  const auto eta = spectrum(SpectrumDescriptor::power_law(6.0), 100);
  REQUIRE(eta.size() == 100);
  CHECK(eta[0] == 1.0);
  CHECK(eta[1] == doctest::Approx(1.0 / 64.0));
  const NoiseSpec n(eta, 3);
  // sum_{k<=100} k^-6, 50-digit reference
  CHECK(n.total() == doctest::Approx(1.01734306196494414).epsilon(1e-15));
  CHECK(n.all_modes_positive());
}

TEST_CASE("explicit spectrum validation") {
  CHECK(spectrum(SpectrumDescriptor::explicit_list({1.0, 0.0, 2.0}), 3) == std::vector<double>{1.0, 0.0, 2.0});
  CHECK_THROWS_AS(spectrum(SpectrumDescriptor::explicit_list({1.0, 2.0}), 3), std::invalid_argument);
  CHECK_THROWS_AS(spectrum(SpectrumDescriptor::explicit_list({1.0, -1.0}), 2), std::invalid_argument);
  CHECK_THROWS_AS(spectrum(SpectrumDescriptor::power_law(2.0), 0), std::invalid_argument);
  const NoiseSpec n(std::vector<double>{1.0, 0.0}, 0);
  CHECK_FALSE(n.all_modes_positive());
}

TEST_CASE("spectrum descriptor text round trip") {
  for (const auto& d : {SpectrumDescriptor::power_law(6.0), SpectrumDescriptor::power_law(2.5),
                        SpectrumDescriptor::explicit_list({1.0, 0.1, 1e-3})}) {
    CHECK(SpectrumDescriptor::parse(d.to_string()) == d);
  }
  CHECK(SpectrumDescriptor::parse("power:4") == SpectrumDescriptor::power_law(4.0));
  CHECK_THROWS_AS(SpectrumDescriptor::parse("gauss 3"), std::invalid_argument);
  CHECK_THROWS_AS(SpectrumDescriptor::parse("power x"), std::invalid_argument);
}

TEST_CASE("model parameter validation") {
  CHECK_NOTHROW((ModelParams{0.5, 1, 1.0}.validate()));
  CHECK_NOTHROW((ModelParams{0.5, -1, 0.0}.validate()));
  CHECK_THROWS_AS((ModelParams{0.0, 1, 1.0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((ModelParams{-1.0, 1, 1.0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((ModelParams{0.5, 0, 1.0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((ModelParams{0.5, 1, -0.1}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((ModelParams{NAN, 1, 0.0}.validate()), std::invalid_argument);
}

TEST_CASE("sine profile at the nodes") {
  const Grid g(9);
  const auto psi = sample_initial(g, InitialProfile::sine());
  for (int j = 0; j < 9; ++j) {
    CHECK(std::abs(psi[static_cast<std::size_t>(j)] - std::sin(std::numbers::pi * g.node(j))) <= 1e-15);
  }
}

TEST_CASE("ergodicity presets on 100 nodes") {
  const Grid g(100);
  const auto e1 = sample_initial(g, InitialProfile::named(1));
  CHECK(e1[0] == Complex{1.0, 0.0});
  for (std::size_t j = 1; j < 100; ++j) CHECK(e1[j] == Complex{});
  const auto e2 = sample_initial(g, InitialProfile::named(2));
  CHECK(e2[0] == Complex{0.0, 3e-4});
  const auto e3 = sample_initial(g, InitialProfile::named(3));
  CHECK(e3[49].real() == doctest::Approx(std::sin(50.0 * std::numbers::pi / 101.0)));
  const auto e4 = sample_initial(g, InitialProfile::named(4));
  CHECK(e4[99].real() == doctest::Approx(10.0));
  CHECK(e4[99].imag() == doctest::Approx(5.0));
  const auto e5 = sample_initial(g, InitialProfile::named(5));
  CHECK(std::abs(e5[49]) == doctest::Approx(1.0));
  CHECK(std::arg(e5[0]) == doctest::Approx(-1.0 / 50.0));
}

TEST_CASE("initial profile errors and names") {
  const Grid g(4);
  CHECK_THROWS_AS(sample_initial(g, InitialProfile::explicit_values({1.0, 2.0})), std::invalid_argument);
  CHECK(sample_initial(g, InitialProfile::explicit_values({1.0, 2.0, 3.0, 4.0}))[3] == Complex{4.0, 0.0});
  CHECK_THROWS_AS(InitialProfile::named(6), std::invalid_argument);
  CHECK(InitialProfile::parse("initial3") == InitialProfile::named(3));
  CHECK(InitialProfile::parse(" sine ") == InitialProfile::sine());
  CHECK(InitialProfile::named(5).name() == "initial5");
  CHECK_THROWS_AS(InitialProfile::parse("initial0"), std::invalid_argument);
  CHECK_THROWS_AS(InitialProfile::parse("gauss"), std::invalid_argument);
}
