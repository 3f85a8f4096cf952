#include <doctest.h>

#include <stdexcept>

#include "savmhd/verification.hpp"

using namespace savmhd;

TEST_SUITE("verification") {

TEST_CASE("all suites pass on the clean build") {
  for (const auto& s : verify::run_selftest()) {
    INFO(s.name << " worst " << s.worst << " tol " << s.tolerance << " " << s.detail);
    CHECK(s.passed);
  }
}

TEST_CASE("flipped Lorentz sign is caught") {
  bool assembly = true, duality = true;
  for (const auto& s : verify::run_selftest(verify::Injection::FlipLorentzSign)) {
    if (s.name == "assembly") assembly = s.passed;
    if (s.name == "duality") duality = s.passed;
  }
  CHECK(!assembly);
  CHECK(!duality);
}

TEST_CASE("naive BDF2 coefficient is caught") {
  bool coupled = true;
  for (const auto& s : verify::run_selftest(verify::Injection::NaiveBdf2Coefficient))
    if (s.name == "coupled_residual") coupled = s.passed;
  CHECK(!coupled);
}

TEST_CASE("injection names round trip") {
  using verify::Injection;
  for (Injection i : {Injection::None, Injection::FlipLorentzSign, Injection::NaiveBdf2Coefficient})
    CHECK(verify::parse_injection(verify::to_string(i)) == i);
  CHECK_THROWS(verify::parse_injection("bogus"));
}

TEST_CASE("dense helpers") {
  verify::DenseMatrix a(2, 2);
  a(0, 0) = 2;
  a(1, 1) = -1;
  a(0, 1) = a(1, 0) = 0.5;
  CHECK(verify::min_eigenvalue_symmetric(a) < -1.0);
  CHECK(verify::numerical_rank(a) == 2);
  CHECK(verify::random_vector(5, 1) == verify::random_vector(5, 1));
  CHECK(verify::random_vector(5, 1) != verify::random_vector(5, 2));
}

}
