#include "twlab/densecore.hpp"

#include <lapacke.h>

#include <cstdlib>
#include <stdexcept>

namespace twlab {

DenseOperator::DenseOperator(CMat m, std::string lab)
    : mat(std::move(m)), label(std::move(lab)) {
  if (mat.rows() != mat.cols())
    throw std::invalid_argument("DenseOperator: matrix must be square");
}

DenseOperator DenseOperator::identity(int dim, std::string label) {
  return DenseOperator(CMat::Identity(dim, dim), std::move(label));
}

DenseOperator DenseOperator::zero(int dim, std::string label) {
  return DenseOperator(CMat::Zero(dim, dim), std::move(label));
}

FactorSpace::FactorSpace(int aux, int quantum)
    : aux_dim(aux), quantum_dim(quantum) {
  if (aux < 1 || aux > 3)
    throw std::invalid_argument("FactorSpace: aux_dim must be 1, 2 or 3");
  if (quantum < 1 || (quantum & (quantum - 1)) != 0)
    throw std::invalid_argument("FactorSpace: quantum_dim must be a power of two");
}

int max_operator_dim() {
  static const int cap = [] {
    if (const char* env = std::getenv("TWLAB_MAX_DIM")) {
      long v = std::strtol(env, nullptr, 10);
      if (v > 0) return static_cast<int>(v);
    }
    return 3 * (1 << 14);
  }();
  return cap;
}

bool is_hermitian(const CMat& m, double rel_tol) {
  const double scale = m.cwiseAbs().maxCoeff();
  if (scale == 0.0) return true;
  double defect = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j <= i; ++j)
      defect = std::max(defect, std::abs(m(i, j) - std::conj(m(j, i))));
  return defect <= rel_tol * scale;
}

DenseOperator kron(const DenseOperator& a, const DenseOperator& b) {
  const long target = static_cast<long>(a.dim()) * b.dim();
  if (target > max_operator_dim())
    throw std::length_error("kron: requested dimension " +
                            std::to_string(target) + " exceeds cap " +
                            std::to_string(max_operator_dim()));
  const int ad = a.dim(), bd = b.dim();
  CMat out(target, target);
  for (int i = 0; i < ad; ++i)
    for (int j = 0; j < ad; ++j)
      out.block(i * bd, j * bd, bd, bd) = a.mat(i, j) * b.mat;
  return DenseOperator(std::move(out));
}

DenseOperator embed(const DenseOperator& op, const std::vector<int>& sites,
                    int n_sites) {
  const int k = static_cast<int>(sites.size());
  if (op.dim() != (1 << k))
    throw std::invalid_argument("embed: operator dim does not match site count");
  std::vector<bool> seen(n_sites + 1, false);
  for (int s : sites) {
    if (s < 1 || s > n_sites)
      throw std::invalid_argument("embed: site index out of range");
    if (seen[s]) throw std::invalid_argument("embed: repeated site index");
    seen[s] = true;
  }
  const long full = 1L << n_sites;
  if (full > max_operator_dim())
    throw std::length_error("embed: chain dimension exceeds cap");

  // Site j occupies bit (n_sites - j); site 1 is the leftmost factor.
  std::vector<int> shift(k);
  for (int m = 0; m < k; ++m) shift[m] = n_sites - sites[m];

  CMat out = CMat::Zero(full, full);
  for (long row = 0; row < full; ++row) {
    int i_op = 0;
    long rest = row;
    for (int m = 0; m < k; ++m) {
      i_op = (i_op << 1) | ((row >> shift[m]) & 1);
      rest &= ~(1L << shift[m]);
    }
    for (int j_op = 0; j_op < op.dim(); ++j_op) {
      const Cplx v = op.mat(i_op, j_op);
      if (v == Cplx{}) continue;
      long col = rest;
      for (int m = 0; m < k; ++m)
        col |= static_cast<long>((j_op >> (k - 1 - m)) & 1) << shift[m];
      out(row, col) = v;
    }
  }
  return DenseOperator(std::move(out));
}

DenseOperator partial_trace_aux(const DenseOperator& op,
                                const FactorSpace& space) {
  if (op.dim() != space.aux_dim * space.quantum_dim)
    throw std::invalid_argument("partial_trace_aux: dimension mismatch");
  const int qd = space.quantum_dim;
  CMat out = CMat::Zero(qd, qd);
  for (int a = 0; a < space.aux_dim; ++a)
    out += op.mat.block(a * qd, a * qd, qd, qd);
  return DenseOperator(std::move(out));
}

namespace {

EigenSystem eigs_dispatch(const DenseOperator& op, int lowest_count) {
  if (!is_hermitian(op.mat))
    throw std::invalid_argument("hermitian_eigs: operator '" + op.label +
                                "' violates the hermiticity contract");
  const int n = op.dim();
  const bool full = lowest_count <= 0 || lowest_count >= n;
  const int want = full ? n : lowest_count;
  const double scale = op.mat.cwiseAbs().maxCoeff();
  const bool real_input =
      scale == 0.0 || op.mat.imag().cwiseAbs().maxCoeff() <= 1e-14 * scale;

  EigenSystem sys;
  sys.eigenvalues.resize(want);
  sys.eigenvectors.resize(n, want);
  int info = 0;

  // Column-major buffers throughout: the LAPACKE row-major wrappers add a
  // transposition layer that misbehaves for subset ranges.
  if (real_input) {
    // All model Hamiltonians are real symmetric in the product basis.
    Eigen::MatrixXd a = op.mat.real();
    if (full) {
      info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, a.data(), n,
                            sys.eigenvalues.data());
      if (info == 0) sys.eigenvectors = a.cast<Cplx>();
    } else {
      Eigen::MatrixXd z(n, want);
      std::vector<lapack_int> isuppz(2 * std::max(1, want));
      lapack_int found = 0;
      info = LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'I', 'L', n, a.data(), n,
                            0.0, 0.0, 1, want, 0.0, &found,
                            sys.eigenvalues.data(), z.data(), n,
                            isuppz.data());
      if (info == 0) sys.eigenvectors = z.cast<Cplx>();
    }
  } else {
    Eigen::MatrixXcd a = op.mat;
    if (full) {
      info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'L', n,
                            reinterpret_cast<lapack_complex_double*>(a.data()),
                            n, sys.eigenvalues.data());
      if (info == 0) sys.eigenvectors = a;
    } else {
      Eigen::MatrixXcd z(n, want);
      std::vector<lapack_int> isuppz(2 * std::max(1, want));
      lapack_int found = 0;
      info = LAPACKE_zheevr(LAPACK_COL_MAJOR, 'V', 'I', 'L', n,
                            reinterpret_cast<lapack_complex_double*>(a.data()),
                            n, 0.0, 0.0, 1, want, 0.0, &found,
                            sys.eigenvalues.data(),
                            reinterpret_cast<lapack_complex_double*>(z.data()),
                            n, isuppz.data());
      if (info == 0) sys.eigenvectors = z;
    }
  }
  if (info != 0)
    throw std::runtime_error("hermitian_eigs: LAPACK failed with info=" +
                             std::to_string(info));
  return sys;
}

}  // namespace

EigenSystem hermitian_eigs(const DenseOperator& op) {
  return eigs_dispatch(op, 0);
}

EigenSystem hermitian_lowest(const DenseOperator& op, int count) {
  if (count < 1) throw std::invalid_argument("hermitian_lowest: count < 1");
  return eigs_dispatch(op, count);
}

CVec apply(const DenseOperator& op, const CVec& vec) {
  if (vec.size() != op.dim())
    throw std::invalid_argument("apply: vector length does not match operator");
  return op.mat * vec;
}

const Mat2& pauli_x() {
  static const Mat2 m = (Mat2() << 0, 1, 1, 0).finished();
  return m;
}

const Mat2& pauli_y() {
  static const Mat2 m = (Mat2() << 0, Cplx(0, -1), Cplx(0, 1), 0).finished();
  return m;
}

const Mat2& pauli_z() {
  static const Mat2 m = (Mat2() << 1, 0, 0, -1).finished();
  return m;
}

const CMat& permutation2() {
  static const CMat m = [] {
    CMat p = CMat::Zero(4, 4);
    p(0, 0) = p(3, 3) = p(1, 2) = p(2, 1) = 1.0;
    return p;
  }();
  return m;
}

}  // namespace twlab
