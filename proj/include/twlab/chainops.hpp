#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "twlab/densecore.hpp"

namespace twlab {

enum class BoundaryKind { Periodic, Open };

struct OpenParams {
  Cplx p{};
  Cplx q{};
  Cplx xi{};
};

/// Full problem definition: chain length, crossing parameter, optional
/// inhomogeneities and the boundary condition.
struct ChainSpec {
  int n_sites = 2;
  Cplx eta{0.0, 1.0};
  std::vector<Cplx> thetas;  // empty = homogeneous
  BoundaryKind boundary = BoundaryKind::Periodic;
  OpenParams open{};

  static ChainSpec periodic(int n, Cplx eta = Cplx{0.0, 1.0});
  static ChainSpec open_chain(int n, Cplx p, Cplx q, Cplx xi,
                              Cplx eta = Cplx{0.0, 1.0});

  Cplx theta(int j) const;  // 1-based; 0 when homogeneous
  bool homogeneous() const;
  Cplx qbar() const;  // q / sqrt(1 + xi^2)

  /// Boundary-field reality constraints for a Hermitian open Hamiltonian
  /// (p, q anti-real, xi real).  Periodic chains are always physical.
  bool physical() const;

  void validate() const;
};

/// Scalar weight functions of the chain.  Open-chain members are populated
/// only for open boundaries.
struct ScalarFns {
  std::function<Cplx(Cplx)> a;          // prod_j (u - theta_j + eta)
  std::function<Cplx(Cplx)> d;          // a(u - eta)
  std::function<Cplx(Cplx)> a_open;     // boundary-dressed weight
  std::function<Cplx(Cplx)> d_open;     // a_open(-u - eta)
  std::function<Cplx(Cplx)> delta_open; // open quantum determinant
  std::function<Cplx(Cplx)> delta_hom;  // its homogeneous closed form
  std::function<Cplx(Cplx)> phi;        // eta^2 - u^2
  std::function<Cplx(Cplx)> rho2;       // -u(u + 2 eta)
  Cplx qbar{};
};

/// 4x4 rational R-matrix, R(u) = u*Id + eta*P.
DenseOperator r_matrix(Cplx u, Cplx eta);

/// 6x6 R-matrix with a fused spin-1 auxiliary pair, in the symmetric basis
/// {|11>, (|12>+|21>)/sqrt(2), |22>}; index = 2*aux + site.
DenseOperator fused_r_matrix(Cplx u, Cplx eta);

/// Diagonal K^- and general K^+ reflection matrices.  (K^-, K^+).
std::pair<DenseOperator, DenseOperator> k_matrices(Cplx u,
                                                   const ChainSpec& spec);

/// Spin-1 reflection matrices obtained by fusing a K-pair; normalisation
/// removes the overall factor 2u (removable at u = 0).  (K^(1)-, K^(1)+).
std::pair<DenseOperator, DenseOperator> fused_k_matrices(Cplx u,
                                                         const ChainSpec& spec);

DenseOperator transfer_periodic(Cplx u, const ChainSpec& spec);
DenseOperator w_operator_periodic(Cplx u, const ChainSpec& spec);
DenseOperator transfer_open(Cplx u, const ChainSpec& spec);
DenseOperator w_operator_open(Cplx u, const ChainSpec& spec);

/// Spin-chain Hamiltonian assembled from the Pauli couplings.
DenseOperator hamiltonian(const ChainSpec& spec);

/// Transfer-matrix route to the same Hamiltonian: the logarithmic derivative
/// at u = 0 in the homogeneous limit, via a central finite difference of
/// t'(u) t(u)^{-1}.  Cross-check only; inhomogeneities are ignored.
DenseOperator hamiltonian_from_transfer(const ChainSpec& spec,
                                        double step = 1e-5);

ScalarFns scalar_fns(const ChainSpec& spec);

enum class OperatorKind { TransferPeriodic, WPeriodic, TransferOpen, WOpen };

/// Matrix-free application O(u) |psi> via auxiliary-block contraction.
CVec apply_operator(OperatorKind kind, Cplx u, const ChainSpec& spec,
                    const CVec& psi);

DenseOperator build_operator(OperatorKind kind, Cplx u, const ChainSpec& spec);

// Projectors on a pair of spin-1/2 spaces and the symmetric-subspace
// isometry (4x3, columns |11>, (|12>+|21>)/sqrt(2), |22>).
const CMat& sym_projector4();
const CMat& antisym_projector4();
const CMat& sym_isometry();

}  // namespace twlab
