#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <map>
#include <random>

#include "twlab/baes.hpp"

using namespace twlab;

namespace {

ChainSpec fig2_open(int n) {
  const Cplx qbar{0.0, 0.8};
  return ChainSpec::open_chain(n, Cplx{0.0, -1.2}, qbar * std::sqrt(2.0),
                               Cplx{1.0, 0.0});
}

const GroundStateAnalysis& cached_periodic(int n) {
  static std::map<int, GroundStateAnalysis> cache;
  auto it = cache.find(n);
  if (it == cache.end())
    it = cache.emplace(n, analyze_ground_state(ChainSpec::periodic(n))).first;
  return it->second;
}

const GroundStateAnalysis& cached_open(int n) {
  static std::map<int, GroundStateAnalysis> cache;
  auto it = cache.find(n);
  if (it == cache.end())
    it = cache.emplace(n, analyze_ground_state(fig2_open(n))).first;
  return it->second;
}

}  // namespace

TEST_CASE("system shapes") {
  auto p = BaeSystem::for_spec(ChainSpec::periodic(8), Packing::ExactString);
  CHECK(p.unknown_count() == 8);
  CHECK(p.bae_count() == 8);
  auto pc =
      BaeSystem::for_spec(ChainSpec::periodic(8), Packing::ConjugatePairs);
  CHECK(pc.unknown_count() == 16);
  auto o = BaeSystem::for_spec(fig2_open(6), Packing::ExactString);
  CHECK(o.unknown_count() == 9);
  CHECK(o.bae_count() == 9);
  auto oc = BaeSystem::for_spec(fig2_open(6), Packing::ConjugatePairs);
  CHECK(oc.unknown_count() == 15);

  CHECK_THROWS_AS(BaeSystem::for_spec(ChainSpec::periodic(5),
                                      Packing::ExactString),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      BaeSystem::for_spec(ChainSpec::periodic(4, Cplx{0.0, 2.0}),
                          Packing::ExactString),
      std::invalid_argument);
}

TEST_CASE("residuals vanish on roots extracted from exact diagonalization") {
  for (int n : {2, 4}) {
    const auto& a = cached_periodic(n);
    auto sys =
        BaeSystem::for_spec(ChainSpec::periodic(n), Packing::ConjugatePairs);
    RVec x = pack_rootset(sys, a.roots);
    RVec r = residuals(sys, x);
    CHECK(r.cwiseAbs().maxCoeff() <= 1e-8);
  }

  const auto& o6 = cached_open(6);
  auto sys = BaeSystem::for_spec(fig2_open(6), Packing::ConjugatePairs);
  RVec x = pack_rootset(sys, o6.roots);
  CHECK(residuals(sys, x).cwiseAbs().maxCoeff() <= 1e-7);
}

TEST_CASE("residual norm grows monotonically under a center perturbation") {
  const auto& a = cached_periodic(4);
  auto sys =
      BaeSystem::for_spec(ChainSpec::periodic(4), Packing::ConjugatePairs);
  RVec x0 = pack_rootset(sys, a.roots);
  double last = residuals(sys, x0).norm();
  for (double delta : {0.0025, 0.005, 0.0075, 0.01}) {
    RVec x = x0;
    x(0) += delta;
    const double norm = residuals(sys, x).norm();
    CHECK(norm > last);
    last = norm;
  }
}

TEST_CASE("residual error handling") {
  auto sys =
      BaeSystem::for_spec(ChainSpec::periodic(4), Packing::ExactString);
  RVec wrong = RVec::Zero(3);
  CHECK_THROWS_AS(residuals(sys, wrong), std::invalid_argument);

  // colliding z and w strings put an evaluation point on a pole
  RVec collide(4);
  collide << 0.25, -0.25, 0.25, -0.25;
  collide(2) = collide(0);  // w center on top of z center
  CHECK_THROWS_AS(residuals(sys, collide), std::domain_error);
}

TEST_CASE("density-quantile seeds") {
  // single string: the median of the symmetric density sits at the origin
  auto two = ChainSpec::periodic(2);
  RVec s2 = seed_roots(two, SeedStrategy::density());
  CHECK(std::abs(s2(0)) <= 1e-14);
  CHECK(std::abs(s2(1)) <= 1e-14);

  // quantile 3/4 lands at asinh(1)/pi
  auto four = ChainSpec::periodic(4);
  RVec s4 = seed_roots(four, SeedStrategy::density());
  CHECK(s4(1) == doctest::Approx(0.2805549).epsilon(1e-5));
  CHECK(s4(0) == doctest::Approx(-0.2805549).epsilon(1e-5));

  CHECK_THROWS_AS(
      seed_roots(two, SeedStrategy{SeedStrategy::Kind::Continuation, nullptr}),
      std::invalid_argument);

  // continuation across boundary kinds is rejected
  auto open_rep = solve_ground_state(fig2_open(2));
  REQUIRE(open_rep.converged);
  CHECK_THROWS_AS(seed_roots(two, SeedStrategy::continuation(open_rep)),
                  std::invalid_argument);
}

TEST_CASE("seeds land near the converged centers at N=12") {
  auto spec = ChainSpec::periodic(12);
  RVec seed = seed_roots(spec, SeedStrategy::density());
  auto rep = solve_ground_state(spec);
  REQUIRE(rep.converged);
  for (int j = 0; j < 6; ++j) {
    CHECK(std::abs(seed(j) - rep.roots.z_centers[j]) <= 0.2);
    CHECK(std::abs(seed(6 + j) - rep.roots.w_centers[j]) <= 0.2);
  }
}

TEST_CASE("Newton recovers from a perturbed start at N=8") {
  const auto& a = cached_periodic(8);
  auto sys =
      BaeSystem::for_spec(ChainSpec::periodic(8), Packing::ConjugatePairs);
  RVec x = pack_rootset(sys, a.roots);
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> d(-0.01, 0.01);
  for (int i = 0; i < x.size(); ++i) x(i) += d(rng);
  auto rep = newton_solve(sys, x, 1e-12, 200);
  CHECK(rep.converged);
  CHECK(rep.iterations <= 25);
  CHECK(rep.final_residual <= 1e-12);
}

TEST_CASE("Newton started on the exact roots barely moves") {
  const auto& a = cached_periodic(6);
  auto sys =
      BaeSystem::for_spec(ChainSpec::periodic(6), Packing::ConjugatePairs);
  RVec x0 = pack_rootset(sys, a.roots);
  auto rep = newton_solve(sys, x0, 1e-12, 50);
  CHECK(rep.converged);
  RVec x1 = pack_rootset(sys, rep.roots);
  CHECK((x1 - x0).cwiseAbs().maxCoeff() <= 1e-7);
}

TEST_CASE("energy from classified roots matches exact diagonalization") {
  const auto& a2 = cached_periodic(2);
  CHECK(energy_from_roots(a2.roots, ChainSpec::periodic(2)) ==
        doctest::Approx(-6.0).epsilon(1e-9));

  const auto& a8 = cached_periodic(8);
  CHECK(energy_from_roots(a8.roots, ChainSpec::periodic(8)) ==
        doctest::Approx(a8.state.energy).epsilon(1e-10));

  const auto& o4 = cached_open(4);
  CHECK(energy_from_roots(o4.roots, fig2_open(4)) ==
        doctest::Approx(o4.state.energy).epsilon(1e-9));
}

TEST_CASE("full solve reproduces the N=12 ground energy") {
  auto spec = ChainSpec::periodic(12);
  auto rep = solve_ground_state(spec);
  REQUIRE(rep.converged);
  const auto& a12 = cached_periodic(12);
  CHECK(std::abs(rep.energy - a12.state.energy) <= 1e-8);
}

TEST_CASE("open solve via continuation matches the extracted roots") {
  auto spec = fig2_open(6);
  auto rep = solve_ground_state(spec);
  REQUIRE(rep.converged);

  const auto& o6 = cached_open(6);
  for (int j = 0; j < 3; ++j) {
    CHECK(std::abs(rep.roots.z_centers[j] - o6.roots.z_centers[j]) <= 1e-7);
    CHECK(std::abs(rep.roots.w_centers[j] - o6.roots.w_centers[j]) <= 1e-7);
  }
  CHECK(std::abs(rep.roots.boundary_z - o6.roots.boundary_z) <= 1e-7);
  CHECK(std::abs(rep.roots.boundary_w.first - o6.roots.boundary_w.first) <=
        1e-7);
  CHECK(std::abs(rep.energy - o6.state.energy) <= 1e-7);

  // continuation seeds carry the boundary unknowns over from the last rung
  auto rep4 = solve_ground_state(fig2_open(4));
  REQUIRE(rep4.converged);
  RVec seed = seed_roots(spec, SeedStrategy::continuation(rep4));
  CHECK(seed(6) == doctest::Approx(rep4.roots.boundary_z));
  CHECK(seed(7) == doctest::Approx(rep4.roots.boundary_w.first));
  CHECK(seed(8) == doctest::Approx(rep4.roots.boundary_w.second));
}

TEST_CASE("solver output is deterministic") {
  auto spec = ChainSpec::periodic(6);
  auto r1 = solve_ground_state(spec);
  auto r2 = solve_ground_state(spec);
  REQUIRE(r1.converged);
  REQUIRE(r2.converged);
  CHECK(r1.iterations == r2.iterations);
  CHECK(r1.energy == r2.energy);
  for (size_t j = 0; j < r1.roots.z_centers.size(); ++j) {
    CHECK(r1.roots.z_centers[j] == r2.roots.z_centers[j]);
    CHECK(r1.roots.w_centers[j] == r2.roots.w_centers[j]);
  }
}
