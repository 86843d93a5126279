#pragma once

#include <string>
#include <vector>

#include "twlab/types.hpp"

namespace twlab {

/// Dense complex operator on a tensor-product space.  Row-major storage,
/// square by construction.
struct DenseOperator {
  CMat mat;
  std::string label;

  DenseOperator() = default;
  explicit DenseOperator(CMat m, std::string lab = {});

  int dim() const { return static_cast<int>(mat.rows()); }

  static DenseOperator identity(int dim, std::string label = {});
  static DenseOperator zero(int dim, std::string label = {});
};

/// Splitting of a tensor space into an auxiliary factor (leftmost tensor
/// slot) and the quantum space of the chain.
struct FactorSpace {
  int aux_dim;      // 1, 2 (spin-1/2 auxiliary) or 3 (fused spin-1 auxiliary)
  int quantum_dim;  // 2^N

  FactorSpace(int aux, int quantum);
};

/// Largest operator dimension the library will allocate.  Defaults to
/// 3 * 2^14; override with the TWLAB_MAX_DIM environment variable.
int max_operator_dim();

/// max_ij |A(i,j) - conj(A(j,i))| <= rel_tol * max|A|
bool is_hermitian(const CMat& m, double rel_tol = 1e-12);

DenseOperator kron(const DenseOperator& a, const DenseOperator& b);

/// Embeds a k-site operator (dim 2^k) into an n-site chain, acting on the
/// listed sites (1-based, ordered: sites[0] is the leftmost factor of op).
DenseOperator embed(const DenseOperator& op, const std::vector<int>& sites,
                    int n_sites);

/// Trace over the auxiliary factor: result(s,t) = sum_a op(a*qd+s, a*qd+t).
DenseOperator partial_trace_aux(const DenseOperator& op,
                                const FactorSpace& space);

struct EigenSystem {
  RVec eigenvalues;   // ascending
  CMat eigenvectors;  // orthonormal columns, eigenvectors.col(k) <-> eigenvalues(k)
};

/// Full eigendecomposition of a Hermitian operator.  Throws
/// std::invalid_argument when the hermiticity contract is violated.
EigenSystem hermitian_eigs(const DenseOperator& op);

/// Lowest `count` eigenpairs only; same contract as hermitian_eigs.
EigenSystem hermitian_lowest(const DenseOperator& op, int count);

CVec apply(const DenseOperator& op, const CVec& vec);

// Single-site building blocks.
const Mat2& pauli_x();
const Mat2& pauli_y();
const Mat2& pauli_z();
const CMat& permutation2();  // two-site swap, 4x4

}  // namespace twlab
