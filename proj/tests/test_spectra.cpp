#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <map>
#include <random>

#include "twlab/spectra.hpp"

using namespace twlab;

namespace {

const Cplx eta{0.0, 1.0};

ChainSpec fig2_open(int n) {
  const Cplx qbar{0.0, 0.8};
  return ChainSpec::open_chain(n, Cplx{0.0, -1.2}, qbar * std::sqrt(2.0),
                               Cplx{1.0, 0.0});
}

// Ground-state analyses are the expensive shared fixture of this suite.
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

Cplx random_u(std::mt19937& rng, double box = 1.0) {
  std::uniform_real_distribution<double> d(-box, box);
  return Cplx(d(rng), d(rng));
}

}  // namespace

TEST_CASE("ground state basics") {
  auto gs2 = ground_state(ChainSpec::periodic(2));
  CHECK(gs2.energy == doctest::Approx(-6.0).epsilon(1e-12));
  CHECK(std::abs(gs2.vector.norm() - 1.0) <= 1e-12);

  auto open2 = ground_state(fig2_open(2));
  auto full = ed_spectrum(fig2_open(2));
  CHECK(open2.energy == doctest::Approx(full(0)).epsilon(1e-12));

  ChainSpec bad = fig2_open(2);
  bad.open.p = Cplx{0.4, 0.0};
  CHECK_THROWS_AS(ground_state(bad), std::invalid_argument);
}

TEST_CASE("ground state energy density near the thermodynamic value") {
  const double e_inf = 1.0 - 4.0 * std::log(2.0);
  const auto& a12 = cached_periodic(12);
  CHECK(std::abs(a12.state.energy / 12.0 - e_inf) < 0.05);
}

TEST_CASE("eigenvalue samples at N=1 are the scalar transfer matrices") {
  ChainSpec one = ChainSpec::periodic(1);
  one.thetas = {Cplx{0.17, 0.0}};
  CVec state(2);
  state << 1.0, 0.0;
  std::vector<Cplx> pts = {{0.4, 0.1}, {-1.2, 0.3}, {2.0, -0.7}};
  auto lam = eigenvalue_samples(state, PolyKind::Lambda, one, pts);
  auto w = eigenvalue_samples(state, PolyKind::W, one, pts);
  for (size_t k = 0; k < pts.size(); ++k) {
    CHECK(std::abs(lam[k] - (2.0 * (pts[k] - one.theta(1)) + eta)) <= 1e-12);
    CHECK(std::abs(w[k] - 3.0 * (pts[k] - one.theta(1))) <= 1e-12);
  }
}

TEST_CASE("inhomogeneous-point product of eigenvalues") {
  auto spec = ChainSpec::periodic(2);
  auto gs = ground_state(spec);
  auto fns = scalar_fns(spec);
  std::vector<Cplx> pts = {Cplx{}, -eta};
  auto lam = eigenvalue_samples(gs.vector, PolyKind::Lambda, spec, pts);
  CHECK(std::abs(lam[0] * lam[1] - fns.a(Cplx{}) * fns.d(-eta)) <= 1e-10);
}

TEST_CASE("degenerate-level refinement") {
  // singlet level: refinement must return it unchanged
  auto spec = ChainSpec::periodic(2);
  auto sys = hermitian_eigs(hamiltonian(spec));
  std::vector<CVec> singlet = {sys.eigenvectors.col(0)};
  auto same = refine_in_degenerate_block(singlet, spec);
  CHECK((same[0] - singlet[0]).norm() == 0.0);

  // N=2 triplet: the transfer matrix is scalar there, every member already
  // samples consistently
  std::vector<CVec> triplet = {sys.eigenvectors.col(1),
                               sys.eigenvectors.col(2),
                               sys.eigenvectors.col(3)};
  auto refined = refine_in_degenerate_block(triplet, spec);
  std::vector<Cplx> pts = {{0.3, 0.0}, {-0.8, 0.4}};
  for (const CVec& v : refined)
    CHECK_NOTHROW(eigenvalue_samples(v, PolyKind::Lambda, spec, pts));

  // a level where the transfer matrix genuinely splits: N=4, E=0 carries a
  // simple transfer eigenvalue next to two triplets.  Two refinement points
  // must agree vector-by-vector where the key is simple and subspace-by-
  // subspace where it is not.
  auto spec4 = ChainSpec::periodic(4);
  auto sys4 = hermitian_eigs(hamiltonian(spec4));
  std::vector<CVec> block;
  for (int k = 0; k < 16; ++k)
    if (std::abs(sys4.eigenvalues(k)) < 1e-9)
      block.push_back(sys4.eigenvectors.col(k));
  REQUIRE(block.size() == 7);

  auto ra = refine_in_degenerate_block(block, spec4, Cplx{0.3142, 0.0});
  auto rb = refine_in_degenerate_block(block, spec4, Cplx{0.7, 0.0});
  const Cplx u_ref{0.3142, 0.0};
  auto key_of = [&](const CVec& v) {
    return v.dot(apply_operator(OperatorKind::TransferPeriodic, u_ref, spec4, v));
  };
  bool simple_seen = false;
  for (size_t i = 0; i < ra.size(); ++i) {
    const Cplx key = key_of(ra[i]);
    double cluster_mass = 0.0;
    int cluster_size = 0;
    for (size_t j = 0; j < rb.size(); ++j)
      if (std::abs(key_of(rb[j]) - key) <= 1e-6) {
        cluster_mass += std::norm(ra[i].dot(rb[j]));
        ++cluster_size;
      }
    CHECK(cluster_mass == doctest::Approx(1.0).epsilon(1e-8));
    if (cluster_size == 1) {
      simple_seen = true;
      // unique key: same vector up to a phase
      CHECK(std::abs(ra[i].dot(rb[i])) == doctest::Approx(1.0).epsilon(1e-8));
    }
  }
  CHECK(simple_seen);
}

TEST_CASE("polynomial fitting") {
  // generic quadratic (u-1)(u+2)
  std::vector<Cplx> pts = {{-3.0, 0.0}, {-1.0, 0.0}, {0.5, 0.0}, {2.0, 0.0}};
  std::vector<Cplx> vals;
  for (const Cplx& u : pts) vals.push_back((u - 1.0) * (u + 2.0));
  auto c = fit_monomial(pts, vals, 2);
  CHECK(std::abs(c[0] - Cplx{-2.0, 0.0}) <= 1e-12);
  CHECK(std::abs(c[1] - Cplx{1.0, 0.0}) <= 1e-12);
  CHECK(std::abs(c[2] - Cplx{1.0, 0.0}) <= 1e-12);

  // N=1 transfer eigenvalue: coefficients (eta - 2 theta_1, 2)
  ChainSpec one = ChainSpec::periodic(1);
  one.thetas = {Cplx{0.21, 0.0}};
  CVec state(2);
  state << 0.0, 1.0;
  auto points = sample_points_for(PolyKind::Lambda, one);
  auto values = eigenvalue_samples(state, PolyKind::Lambda, one, points);
  auto poly = fit_polynomial(points, values, PolyKind::Lambda, one);
  CHECK(std::abs(poly.coefficients[0] - (eta - 2.0 * one.theta(1))) <= 1e-10);
  CHECK(std::abs(poly.coefficients[1] - 2.0) <= 1e-10);

  // leading coefficient of the fused eigenvalue at N=4
  const auto& a4 = cached_periodic(4);
  CHECK(std::abs(a4.w.coefficients[4] - 3.0) <= 1e-6 * 3.0);
  CHECK(a4.w.degree == 4);

  CHECK_THROWS_AS(fit_monomial(pts, vals, 4), std::invalid_argument);
}

TEST_CASE("root finding") {
  // 3(u^2 + 1) has roots at +/- i and respects the fused-eigenvalue
  // conjugation closure
  ChainSpec two = ChainSpec::periodic(2);
  auto points = sample_points_for(PolyKind::W, two);
  std::vector<Cplx> values;
  for (const Cplx& u : points) values.push_back(3.0 * (u * u + 1.0));
  auto poly = fit_polynomial(points, values, PolyKind::W, two);
  find_roots(poly, two);
  REQUIRE(poly.roots.size() == 2);
  for (const Cplx& target : {eta, -eta}) {
    double best = 1e300;
    for (const Cplx& r : poly.roots) best = std::min(best, std::abs(r - target));
    CHECK(best <= 1e-10);
  }

  // N=2 ground state: Lambda roots close under z -> conj(z) - eta
  const auto& a2 = cached_periodic(2);
  CHECK(root_symmetry_defect(a2.lambda, ChainSpec::periodic(2)) <= 1e-9);

  // N=6 ground state reproduces the 2-string pattern
  const auto& a6 = cached_periodic(6);
  for (const Cplx& r : a6.lambda.roots) {
    const double im = r.imag();
    const double dist = std::min(std::abs(im - 0.5), std::abs(im + 1.5));
    CHECK(dist <= 0.15);
  }
}

TEST_CASE("string classification") {
  // synthetic near-string pair, quoted as z-roots
  ChainSpec two = ChainSpec::periodic(2);
  SpectralPolynomial poly;
  poly.kind = PolyKind::Lambda;
  poly.degree = 2;
  poly.roots = {Cplx{0.3, 0.999} - eta / 2.0, Cplx{0.3, -1.001} - eta / 2.0};
  auto rs = classify_strings(poly, two);
  REQUIRE(rs.z_centers.size() == 1);
  CHECK(rs.z_centers[0] == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(std::abs(rs.z_deviations[0]) <= 2e-3);

  // the two quoted roots sit 1e-3 away from the exact string positions
  for (const Cplx& r : poly.roots) {
    const Cplx z = r + eta / 2.0;
    CHECK(std::abs(std::abs(z.imag()) - 1.0) ==
          doctest::Approx(1e-3).epsilon(1e-9));
  }

  // open chain: boundary pairs on the imaginary axis
  const auto& o6 = cached_open(6);
  CHECK(std::isfinite(o6.roots.boundary_z));
  CHECK(std::isfinite(o6.roots.boundary_w.first));
  CHECK(std::isfinite(o6.roots.boundary_w.second));
  CHECK(o6.roots.z_centers.size() == 3);
  CHECK(o6.roots.w_centers.size() == 3);

  // periodic N=12: N/2 strings in each family
  const auto& a12 = cached_periodic(12);
  CHECK(a12.roots.z_centers.size() == 6);
  CHECK(a12.roots.w_centers.size() == 6);

  // reconstruction reproduces the polynomial roots
  auto zs = reconstruct_z_roots(a12.roots, ChainSpec::periodic(12));
  REQUIRE(zs.size() == a12.lambda.roots.size());
  for (const Cplx& z : zs) {
    double best = 1e300;
    for (const Cplx& r : a12.lambda.roots)
      best = std::min(best, std::abs(z - eta / 2.0 - r));
    CHECK(best <= 1e-8);
  }
}

TEST_CASE("scalar t-W relation for the extracted ground state") {
  auto spec = ChainSpec::periodic(4);
  auto gs = ground_state(spec);
  auto fns = scalar_fns(spec);
  std::mt19937 rng(7);
  std::vector<Cplx> pts;
  for (int k = 0; k < 20; ++k) pts.push_back(random_u(rng, 1.5));
  auto lam = eigenvalue_samples(gs.vector, PolyKind::Lambda, spec, pts);
  auto lam_shift = [&] {
    std::vector<Cplx> shifted;
    for (const Cplx& u : pts) shifted.push_back(u - eta);
    return eigenvalue_samples(gs.vector, PolyKind::Lambda, spec, shifted);
  }();
  auto w = eigenvalue_samples(gs.vector, PolyKind::W, spec, pts);
  for (size_t k = 0; k < pts.size(); ++k) {
    const Cplx u = pts[k];
    const Cplx lhs = lam[k] * lam_shift[k];
    const Cplx rhs = fns.a(u) * fns.d(u - eta) + fns.d(u) * w[k];
    CHECK(std::abs(lhs - rhs) <=
          1e-9 * std::max({std::abs(lhs), std::abs(rhs), 1.0}));
  }
}

TEST_CASE("open eigenvalue relation ties Lambda-bar and W-bar together") {
  auto spec = fig2_open(2);
  auto gs = ground_state(spec);
  auto fns = scalar_fns(spec);
  std::mt19937 rng(9);
  for (int k = 0; k < 8; ++k) {
    const Cplx u = random_u(rng, 1.2);
    std::vector<Cplx> pts = {u, u - eta};
    auto lam = eigenvalue_samples(gs.vector, PolyKind::LambdaOpen, spec, pts);
    auto wbar = eigenvalue_samples(gs.vector, PolyKind::WOpen, spec, {u});
    const Cplx lhs = fns.delta_hom(u) -
                     (u + eta / 2.0) * (u - eta / 2.0) * lam[0] * lam[1];
    const Cplx rhs = std::pow(u, 2 * spec.n_sites + 2) * wbar[0];
    CHECK(std::abs(lhs - rhs) <=
          1e-8 * std::max({std::abs(lhs), std::abs(rhs), 1.0}));
  }
}

TEST_CASE("open eigenvalue symmetries") {
  auto spec = fig2_open(2);
  auto gs = ground_state(spec);
  std::mt19937 rng(13);
  for (int k = 0; k < 4; ++k) {
    const Cplx u = random_u(rng, 1.5);
    auto lam =
        eigenvalue_samples(gs.vector, PolyKind::LambdaOpen, spec, {u, -u - eta});
    CHECK(std::abs(lam[0] - lam[1]) <= 1e-10 * std::max(1.0, std::abs(lam[0])));
    auto wbar = eigenvalue_samples(gs.vector, PolyKind::WOpen, spec, {u, -u});
    CHECK(std::abs(wbar[0] - wbar[1]) <=
          1e-10 * std::max(1.0, std::abs(wbar[0])));
  }
}

TEST_CASE("identity suite") {
  // N=1 homogeneous closed form: residuals at machine precision
  auto one = ChainSpec::periodic(1);
  auto rep1 = verify_identity_suite(one, {{0.4, 0.2}, {-0.9, -0.3}});
  for (const auto& check : rep1) {
    CHECK(check.pass);
    CHECK(check.residual <= 1e-13);
  }

  // N=4 with random inhomogeneities
  ChainSpec four = ChainSpec::periodic(4);
  {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> d(-0.3, 0.3);
    four.thetas.resize(4);
    for (auto& t : four.thetas) t = Cplx(d(rng), 0.0);
  }
  std::mt19937 rng(19);
  std::vector<Cplx> pts;
  for (int k = 0; k < 5; ++k) pts.push_back(random_u(rng));
  for (const auto& check : verify_identity_suite(four, pts)) {
    INFO(check.name);
    CHECK(check.pass);
  }

  // open N=2 with inhomogeneities: every named identity holds
  auto open2 = fig2_open(2);
  open2.thetas = {Cplx{0.11, 0.0}, Cplx{-0.23, 0.0}};
  for (const auto& check : verify_identity_suite(open2, pts)) {
    INFO(check.name);
    CHECK(check.pass);
  }

  CHECK_THROWS_AS(verify_identity_suite(ChainSpec::periodic(9), pts),
                  std::invalid_argument);
}
