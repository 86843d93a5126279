#pragma once

#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "twlab/chainops.hpp"

namespace twlab {

enum class PolyKind { Lambda, W, LambdaOpen, WOpen };

int poly_degree(PolyKind kind, const ChainSpec& spec);
OperatorKind operator_for(PolyKind kind);

/// Eigenvalue polynomial of one member of the commuting family, for one
/// eigenstate: samples, fitted monomial coefficients (ascending in u) and
/// the extracted zero roots.
struct SpectralPolynomial {
  PolyKind kind = PolyKind::Lambda;
  int degree = 0;
  std::vector<Cplx> sample_points;
  std::vector<Cplx> sample_values;
  std::vector<Cplx> coefficients;
  std::vector<Cplx> roots;
};

/// Classified zero roots of one state: conjugate 2-string centers with their
/// deviations from the exact string positions, plus the imaginary-axis
/// boundary pairs of the open chain.
struct RootSet {
  std::vector<double> z_centers;
  std::vector<double> z_deviations;
  double boundary_z = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> w_centers;
  std::vector<double> w_deviations;
  std::pair<double, double> boundary_w{
      std::numeric_limits<double>::quiet_NaN(),
      std::numeric_limits<double>::quiet_NaN()};
  double bae_residual = std::numeric_limits<double>::quiet_NaN();
};

struct DegeneracyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct RefinementError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct RootQualityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GroundState {
  double energy = 0.0;
  CVec vector;
};

/// Lowest eigenpair of the chain Hamiltonian; requires a Hermitian H.
GroundState ground_state(const ChainSpec& spec);

/// All energy levels, ascending.
RVec ed_spectrum(const ChainSpec& spec);

/// <state| O(u) |state> for the operator matching `kind`, with a per-point
/// check that the state is a genuine eigenvector of O(u).
std::vector<Cplx> eigenvalue_samples(const CVec& state, PolyKind kind,
                                     const ChainSpec& spec,
                                     const std::vector<Cplx>& points);

/// Rotates an orthonormal basis of a degenerate H-level into a common
/// eigenbasis of the transfer matrix evaluated at u0.
std::vector<CVec> refine_in_degenerate_block(
    const std::vector<CVec>& level_vectors, const ChainSpec& spec,
    Cplx u0 = Cplx{0.3142, 0.0});

/// Chebyshev fit nodes on [-4, 4] (degree + 1 of them) followed by 8
/// validation points.
std::vector<Cplx> sample_points_for(PolyKind kind, const ChainSpec& spec);
int fit_node_count(PolyKind kind, const ChainSpec& spec);

SpectralPolynomial fit_polynomial(const std::vector<Cplx>& points,
                                  const std::vector<Cplx>& values,
                                  PolyKind kind, const ChainSpec& spec);

/// Plain least-squares monomial fit of the given degree (no parity or shift
/// structure); ascending coefficients.
std::vector<Cplx> fit_monomial(const std::vector<Cplx>& points,
                               const std::vector<Cplx>& values, int degree);

/// Companion-matrix roots polished by Newton on the barycentric interpolant
/// of the fit nodes.  Fills poly.roots.
void find_roots(SpectralPolynomial& poly, const ChainSpec& spec);

/// Extra Newton pass on the matrix-free expectation <state|O(z)|state>,
/// which evaluates the exact eigenvalue polynomial and so places the roots
/// well below the interpolation noise floor.
void polish_roots_with_state(SpectralPolynomial& poly, const CVec& state,
                             const ChainSpec& spec);

Cplx eval_poly(const std::vector<Cplx>& coeffs, Cplx u);

/// Largest distance from any root's symmetry image to the root multiset.
double root_symmetry_defect(const SpectralPolynomial& poly,
                            const ChainSpec& spec);

RootSet classify_strings(const SpectralPolynomial& poly,
                         const ChainSpec& spec);
RootSet merge_rootsets(const RootSet& z_part, const RootSet& w_part);

/// Signed roots rebuilt from a classification (z-family entries carry the
/// +eta/2 shift already removed, i.e. these are the z_j themselves).
std::vector<Cplx> reconstruct_z_roots(const RootSet& rs, const ChainSpec& spec);
std::vector<Cplx> reconstruct_w_roots(const RootSet& rs, const ChainSpec& spec);

struct IdentityCheck {
  std::string name;
  double residual = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

/// Operator-level verification of the transfer-matrix identities at the
/// supplied spectral points.  Requires n_sites <= 8.
std::vector<IdentityCheck> verify_identity_suite(
    const ChainSpec& spec, const std::vector<Cplx>& trial_points);

struct GroundStateAnalysis {
  GroundState state;
  SpectralPolynomial lambda;
  SpectralPolynomial w;
  RootSet roots;
};

/// Ground state -> samples -> fits -> roots -> string classification.
GroundStateAnalysis analyze_ground_state(const ChainSpec& spec);

}  // namespace twlab
