#include <cmath>
#include <initializer_list>
#include <stdexcept>
#include <utility>

#include <doctest.h>

#include "z2perc/ed.hpp"

using namespace z2perc;

TEST_CASE("decoupled point: ground energy is -(N_s + N_p) at mu = J = 1") {
  // all stars and plaquettes simultaneously +1, fields off
  EdParams p;
  p.L = 2;
  const auto r = ed_solve(p);
  CHECK(r.ground_energy == doctest::Approx(-8.0).epsilon(1e-12));

  EdParams p3;
  p3.L = 3;
  const auto r3 = ed_solve(p3);
  CHECK(r3.ground_energy == doctest::Approx(-18.0).epsilon(1e-9));
}

TEST_CASE("field-coupling self-duality: swapping h and lambda preserves the spectrum floor") {
  for (int L : {2, 3}) {
    for (auto [a, b] : {std::pair{0.15, 0.3}, std::pair{0.4, 0.1}, std::pair{0.25, 0.0}}) {
      EdParams pa, pb;
      pa.L = pb.L = L;
      pa.h = a;
      pa.lambda = b;
      pb.h = b;
      pb.lambda = a;
      const double tol = L == 2 ? 1e-10 : 1e-7;
      CHECK(ed_solve(pa).ground_energy ==
            doctest::Approx(ed_solve(pb).ground_energy).epsilon(tol));
    }
  }
}

TEST_CASE("second-order perturbation theory in weak fields") {
  // E0 ~ -2 N_s - N_l (h^2 + lambda^2) / 4 deep in the deconfined phase
  // (each tau^x / tau^z excitation costs 2x(star pair or plaquette pair) = 4)
  EdParams p;
  p.L = 3;
  p.h = 0.1;
  p.lambda = 0.1;
  const auto r = ed_solve(p);
  const double pt = -18.0 - 18.0 * (0.01 + 0.01) / 4.0;
  CHECK(r.ground_energy == doctest::Approx(pt).epsilon(1e-3));
  CHECK(r.ground_energy < -18.0);  // fields only lower the floor
}

TEST_CASE("thermal observables at L = 2") {
  SUBCASE("large beta converges to the ground sector") {
    EdParams p;
    p.L = 2;
    p.h = 0.3;
    p.lambda = 0.2;
    p.beta = 120.0;  // past the topological near-degeneracy splitting
    const auto r = ed_solve(p);
    REQUIRE(r.has_thermal);
    CHECK(r.energy == doctest::Approx(r.ground_energy).epsilon(1e-8));
  }

  SUBCASE("h = 0 kills the transverse magnetization by symmetry") {
    EdParams p;
    p.L = 2;
    p.h = 0.0;
    p.lambda = 0.35;
    p.beta = 2.0;
    const auto r = ed_solve(p);
    REQUIRE(r.has_thermal);
    CHECK(r.tau_x == doctest::Approx(0.0).epsilon(1e-10));
  }

  SUBCASE("infinite-temperature-ish limit pushes stars toward zero") {
    EdParams p;
    p.L = 2;
    p.h = 0.1;
    p.lambda = 0.1;
    p.beta = 0.01;
    const auto r = ed_solve(p);
    REQUIRE(r.has_thermal);
    CHECK(std::abs(r.star_avg) < 0.05);
    CHECK(std::abs(r.plaq_avg) < 0.05);
  }

  SUBCASE("beta <= 0 falls back to the ground-state protocol beta = L") {
    EdParams p;
    p.L = 2;
    p.h = 0.2;
    CHECK(p.effective_beta() == doctest::Approx(2.0));
    p.beta = 4.0;
    CHECK(p.effective_beta() == doctest::Approx(4.0));
  }
}

TEST_CASE("monotone response: stronger h lowers the ground energy") {
  double prev = 0.0;
  bool first = true;
  for (double h : {0.0, 0.1, 0.2, 0.4}) {
    EdParams p;
    p.L = 2;
    p.h = h;
    p.lambda = 0.15;
    const double e = ed_solve(p).ground_energy;
    if (!first) CHECK(e < prev + 1e-12);
    prev = e;
    first = false;
  }
}

TEST_CASE("unsupported sizes are rejected") {
  EdParams p;
  p.L = 4;
  CHECK_THROWS_AS(ed_solve(p), std::invalid_argument);
  p.L = 1;
  CHECK_THROWS_AS(ed_solve(p), std::invalid_argument);
}
