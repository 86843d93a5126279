#pragma once

#include "twlab/spectra.hpp"

namespace twlab {

/// Unknown packings for the zero-root equations.  ExactString iterates the
/// real string centers only (plus the open boundary parameters); the
/// conjugate-pair packing additionally iterates the imaginary offsets, so a
/// converged solution solves the equations in the full complex root space
/// while keeping the conjugation closure exact by construction.
enum class Packing { ExactString, ConjugatePairs };

struct BaeSystem {
  BoundaryKind kind = BoundaryKind::Periodic;
  int n_sites = 0;
  Cplx eta{0.0, 1.0};
  OpenParams open{};
  Packing packing = Packing::ExactString;

  static BaeSystem for_spec(const ChainSpec& spec, Packing packing);
  int unknown_count() const;
  int bae_count() const;  // number of equations (2 residual components each)
};

struct SolveReport {
  bool converged = false;
  int iterations = 0;
  double final_residual = std::numeric_limits<double>::infinity();
  std::vector<int> damping_history;  // step halvings per iteration
  RootSet roots;
  double energy = std::numeric_limits<double>::quiet_NaN();
};

/// Log-magnitude and phase residual of every equation, interleaved
/// [mag_1, phase_1, mag_2, phase_2, ...]; zero iff the packed roots solve
/// the system.  z-equations first, then w-equations; within the open family
/// the boundary equation comes after the bulk ones.
RVec residuals(const BaeSystem& sys, const RVec& unknowns);

RVec pack_rootset(const BaeSystem& sys, const RootSet& rs);
RootSet unpack_rootset(const BaeSystem& sys, const RVec& unknowns);

struct SeedStrategy {
  enum class Kind { DensityQuantile, Continuation } kind =
      Kind::DensityQuantile;
  const SolveReport* from = nullptr;  // Continuation source

  static SeedStrategy density() { return {}; }
  static SeedStrategy continuation(const SolveReport& report) {
    return {Kind::Continuation, &report};
  }
};

/// Ground-state seeds in the ExactString packing: bulk centers at the
/// quantiles of the root density 1/(2 cosh(pi lambda)), boundary unknowns
/// from defaults (|p|, |p|+1/2, |qbar|+1/2) or the continuation source.
RVec seed_roots(const ChainSpec& spec, const SeedStrategy& strategy);

/// Damped Gauss-Newton with a finite-difference Jacobian.  Non-convergence
/// is reported, not thrown.
SolveReport newton_solve(const BaeSystem& sys, const RVec& seed,
                         double tol = 1e-12, int max_iter = 200);

/// Periodic: E = -2 eta sum_j 1/(z_j - eta/2) - N over all roots.
/// Open:     E = sum_j eta^2/(eta^2/4 - z_j^2) - N over the root
/// representatives.  The imaginary part must cancel to 1e-6.
double energy_from_roots(const RootSet& roots, const ChainSpec& spec);

/// Density-seeded exact-string stage followed by the conjugate-pair polish;
/// open chains fall back to a continuation ladder when the direct solve
/// stalls.
SolveReport solve_ground_state(const ChainSpec& spec);

}  // namespace twlab
