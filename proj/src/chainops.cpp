#include "twlab/chainops.hpp"

#include <cmath>
#include <stdexcept>

namespace twlab {

namespace {

constexpr double kEpsFusedZero = 1e-6;

Cplx sqrt1p_xi2(Cplx xi) { return std::sqrt(Cplx(1.0, 0.0) + xi * xi); }

}  // namespace

ChainSpec ChainSpec::periodic(int n, Cplx eta) {
  ChainSpec s;
  s.n_sites = n;
  s.eta = eta;
  s.boundary = BoundaryKind::Periodic;
  s.validate();
  return s;
}

ChainSpec ChainSpec::open_chain(int n, Cplx p, Cplx q, Cplx xi, Cplx eta) {
  ChainSpec s;
  s.n_sites = n;
  s.eta = eta;
  s.boundary = BoundaryKind::Open;
  s.open = OpenParams{p, q, xi};
  s.validate();
  return s;
}

Cplx ChainSpec::theta(int j) const {
  if (thetas.empty()) return Cplx{};
  return thetas.at(static_cast<size_t>(j - 1));
}

bool ChainSpec::homogeneous() const {
  for (const Cplx& t : thetas)
    if (t != Cplx{}) return false;
  return true;
}

Cplx ChainSpec::qbar() const { return open.q / sqrt1p_xi2(open.xi); }

bool ChainSpec::physical() const {
  if (boundary == BoundaryKind::Periodic) return true;
  const double tol = 1e-12;
  auto anti_real = [tol](Cplx z) {
    return std::abs(std::conj(z) + z) <= tol * std::max(1.0, std::abs(z));
  };
  return anti_real(open.p) && anti_real(open.q) &&
         std::abs(std::imag(open.xi)) <= tol * std::max(1.0, std::abs(open.xi));
}

void ChainSpec::validate() const {
  if (n_sites < 1) throw std::invalid_argument("ChainSpec: n_sites < 1");
  if (eta == Cplx{}) throw std::invalid_argument("ChainSpec: eta must be nonzero");
  if (!thetas.empty() && static_cast<int>(thetas.size()) != n_sites)
    throw std::invalid_argument("ChainSpec: thetas length must equal n_sites");
  if ((1L << n_sites) > max_operator_dim())
    throw std::length_error("ChainSpec: quantum dimension exceeds cap");
}

DenseOperator r_matrix(Cplx u, Cplx eta) {
  CMat r = CMat::Zero(4, 4);
  r(0, 0) = r(3, 3) = u + eta;
  r(1, 1) = r(2, 2) = u;
  r(1, 2) = r(2, 1) = eta;
  return DenseOperator(std::move(r), "R");
}

DenseOperator fused_r_matrix(Cplx u, Cplx eta) {
  const Cplx s2eta = std::sqrt(2.0) * eta;
  CMat r = CMat::Zero(6, 6);
  r(0, 0) = u + eta;
  r(1, 1) = u - eta;
  r(1, 2) = r(2, 1) = s2eta;
  r(2, 2) = u;
  r(3, 3) = u;
  r(3, 4) = r(4, 3) = s2eta;
  r(4, 4) = u - eta;
  r(5, 5) = u + eta;
  return DenseOperator(std::move(r), "R(1,1/2)");
}

std::pair<DenseOperator, DenseOperator> k_matrices(Cplx u,
                                                   const ChainSpec& spec) {
  if (spec.boundary != BoundaryKind::Open)
    throw std::logic_error("k_matrices: chain has no boundary reflections");
  const Cplx p = spec.open.p, q = spec.open.q, xi = spec.open.xi,
             eta = spec.eta;
  CMat km = CMat::Zero(2, 2);
  km(0, 0) = p + u;
  km(1, 1) = p - u;
  CMat kp(2, 2);
  kp(0, 0) = q + u + eta;
  kp(0, 1) = kp(1, 0) = xi * (u + eta);
  kp(1, 1) = q - u - eta;
  return {DenseOperator(std::move(km), "K-"), DenseOperator(std::move(kp), "K+")};
}

const CMat& sym_isometry() {
  static const CMat s = [] {
    const double r = 1.0 / std::sqrt(2.0);
    CMat m = CMat::Zero(4, 3);
    m(0, 0) = 1.0;
    m(1, 1) = r;
    m(2, 1) = r;
    m(3, 2) = 1.0;
    return m;
  }();
  return s;
}

const CMat& sym_projector4() {
  static const CMat p = sym_isometry() * sym_isometry().adjoint();
  return p;
}

const CMat& antisym_projector4() {
  static const CMat p = CMat::Identity(4, 4) - sym_projector4();
  return p;
}

std::pair<DenseOperator, DenseOperator> fused_k_matrices(
    Cplx u, const ChainSpec& spec) {
  if (spec.boundary != BoundaryKind::Open)
    throw std::logic_error("fused_k_matrices: chain has no boundary reflections");
  if (u == Cplx{})
    throw std::domain_error("fused_k_matrices: normalisation vanishes at u=0");
  const Cplx eta = spec.eta;
  const CMat& s = sym_isometry();
  auto pair1 = [](const CMat& m) {
    CMat out = CMat::Zero(4, 4);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        out.block(2 * i, 2 * j, 2, 2) = m(i, j) * CMat::Identity(2, 2);
    return out;
  };
  auto pair2 = [](const CMat& m) {
    CMat out = CMat::Zero(4, 4);
    out.block(0, 0, 2, 2) = m;
    out.block(2, 2, 2, 2) = m;
    return out;
  };
  auto [km_l, kp_l] = k_matrices(u - eta, spec);
  auto [km_r, kp_r] = k_matrices(u, spec);

  CMat prod_p = pair1(kp_l.mat) * r_matrix(-2.0 * u - eta, eta).mat *
                pair2(kp_r.mat);
  CMat prod_m = pair2(km_r.mat) * r_matrix(2.0 * u - eta, eta).mat *
                pair1(km_l.mat);
  CMat kp_f = (s.adjoint() * prod_p * s) / (2.0 * u);
  CMat km_f = (s.adjoint() * prod_m * s) / (2.0 * u);
  return {DenseOperator(std::move(km_f), "K(1)-"),
          DenseOperator(std::move(kp_f), "K(1)+")};
}

// ---------------------------------------------------------------------------
// Auxiliary-block contraction.  A monodromy is kept as an aux x aux array of
// quantum-space blocks; site factors act as 2x2 matrices on one site index,
// mixing auxiliary blocks, so the full (aux * 2^N) operator is never formed.
// ---------------------------------------------------------------------------

namespace {

// 2x2 sub-blocks of an (aux*2)x(aux*2) site matrix, composite index a*2+s.
struct SiteBlocks {
  int aux;
  std::vector<Mat2> blk;  // blk[a * aux + b]
  explicit SiteBlocks(const CMat& m) {
    aux = static_cast<int>(m.rows()) / 2;
    blk.resize(static_cast<size_t>(aux) * aux);
    for (int a = 0; a < aux; ++a)
      for (int b = 0; b < aux; ++b)
        blk[static_cast<size_t>(a) * aux + b] = m.block(2 * a, 2 * b, 2, 2);
  }
  const Mat2& operator()(int a, int b) const {
    return blk[static_cast<size_t>(a) * aux + b];
  }
};

// y = (op at site j) x, both of length 2^n.
void apply_site_vec(const Mat2& op, int site, int n, const CVec& x, CVec& y) {
  const long stride = 1L << (n - site);
  const long dim = x.size();
  for (long base = 0; base < dim; ++base) {
    if (base & stride) continue;
    const long r0 = base, r1 = base | stride;
    const Cplx x0 = x(r0), x1 = x(r1);
    y(r0) += op(0, 0) * x0 + op(0, 1) * x1;
    y(r1) += op(1, 0) * x0 + op(1, 1) * x1;
  }
}

// Y += (op at site j) X for quantum-space matrices (left row mixing).
void apply_site_mat(const Mat2& op, int site, int n, const CMat& x, CMat& y) {
  const long stride = 1L << (n - site);
  const long dim = x.rows();
  for (long base = 0; base < dim; ++base) {
    if (base & stride) continue;
    const long r0 = base, r1 = base | stride;
    y.row(r0) += op(0, 0) * x.row(r0) + op(0, 1) * x.row(r1);
    y.row(r1) += op(1, 0) * x.row(r0) + op(1, 1) * x.row(r1);
  }
}

using VecFamily = std::vector<CVec>;  // [a * aux + b]
using MatFamily = std::vector<CMat>;

CVec zero_like(const CVec& v) { return CVec::Zero(v.size()); }
CMat zero_like(const CMat& m) { return CMat::Zero(m.rows(), m.cols()); }

void accumulate_site(const Mat2& op, int site, int n, const CVec& x, CVec& y) {
  apply_site_vec(op, site, n, x, y);
}
void accumulate_site(const Mat2& op, int site, int n, const CMat& x, CMat& y) {
  apply_site_mat(op, site, n, x, y);
}

VecFamily identity_vec_family(int aux, const CVec& psi) {
  VecFamily f(static_cast<size_t>(aux) * aux, CVec::Zero(psi.size()));
  for (int a = 0; a < aux; ++a) f[static_cast<size_t>(a) * aux + a] = psi;
  return f;
}

MatFamily identity_mat_family(int aux, long dim) {
  MatFamily f(static_cast<size_t>(aux) * aux, CMat::Zero(dim, dim));
  for (int a = 0; a < aux; ++a)
    f[static_cast<size_t>(a) * aux + a] = CMat::Identity(dim, dim);
  return f;
}

// F <- (site factor) . F
template <typename Elem>
void left_multiply_site(const SiteBlocks& r, int site, int n,
                        std::vector<Elem>& f) {
  const int aux = r.aux;
  std::vector<Elem> out(f.size(), zero_like(f[0]));
  for (int a = 0; a < aux; ++a)
    for (int b = 0; b < aux; ++b)
      for (int c = 0; c < aux; ++c)
        accumulate_site(r(a, c), site, n, f[static_cast<size_t>(c) * aux + b],
                        out[static_cast<size_t>(a) * aux + b]);
  f = std::move(out);
}

// K acts on the auxiliary index only: F <- K . F
template <typename Elem>
void left_multiply_aux(const CMat& k, std::vector<Elem>& f) {
  const int aux = static_cast<int>(k.rows());
  std::vector<Elem> out(f.size(), zero_like(f[0]));
  for (int a = 0; a < aux; ++a)
    for (int b = 0; b < aux; ++b)
      for (int c = 0; c < aux; ++c)
        out[static_cast<size_t>(a) * aux + b] +=
            k(a, c) * f[static_cast<size_t>(c) * aux + b];
  f = std::move(out);
}

enum class MonodromyKind { Forward, Reflecting };

// Forward:    R_N(u - th_N) ... R_1(u - th_1)
// Reflecting: R_1(u + th_1) ... R_N(u + th_N)
template <typename Family>
void multiply_monodromy(Family& f, MonodromyKind kind, bool fused, Cplx u,
                        const ChainSpec& spec) {
  const int n = spec.n_sites;
  for (int step = 0; step < n; ++step) {
    const int j = (kind == MonodromyKind::Forward) ? step + 1 : n - step;
    const Cplx arg = (kind == MonodromyKind::Forward) ? u - spec.theta(j)
                                                      : u + spec.theta(j);
    const CMat site = fused ? fused_r_matrix(arg, spec.eta).mat
                            : r_matrix(arg, spec.eta).mat;
    left_multiply_site(SiteBlocks(site), j, n, f);
  }
}

template <typename Elem>
Elem trace_aux(const std::vector<Elem>& f, int aux) {
  Elem out = zero_like(f[0]);
  for (int a = 0; a < aux; ++a) out += f[static_cast<size_t>(a) * aux + a];
  return out;
}

template <typename Elem>
Elem trace_aux_weighted(const CMat& k, const std::vector<Elem>& f) {
  const int aux = static_cast<int>(k.rows());
  Elem out = zero_like(f[0]);
  for (int a = 0; a < aux; ++a)
    for (int b = 0; b < aux; ++b)
      out += k(a, b) * f[static_cast<size_t>(b) * aux + a];
  return out;
}

// Generic evaluation core shared by the full-matrix and matrix-free paths.
template <typename Elem>
Elem evaluate_operator(OperatorKind kind, Cplx u, const ChainSpec& spec,
                       const std::vector<Elem>& f0) {
  std::vector<Elem> f = f0;
  switch (kind) {
    case OperatorKind::TransferPeriodic:
    case OperatorKind::WPeriodic: {
      const bool fused = kind == OperatorKind::WPeriodic;
      multiply_monodromy(f, MonodromyKind::Forward, fused, u, spec);
      return trace_aux(f, fused ? 3 : 2);
    }
    case OperatorKind::TransferOpen: {
      auto [km, kp] = k_matrices(u, spec);
      multiply_monodromy(f, MonodromyKind::Reflecting, false, u, spec);
      left_multiply_aux(km.mat, f);
      multiply_monodromy(f, MonodromyKind::Forward, false, u, spec);
      return trace_aux_weighted(kp.mat, f);
    }
    case OperatorKind::WOpen: {
      if (spec.boundary != BoundaryKind::Open)
        throw std::logic_error("w_operator_open: spec is periodic");
      // The 2u-normalised fused reflection matrices have a removable
      // singularity at u = 0; average the two-sided limit there.
      if (std::abs(u) < 1e-9) {
        Elem plus =
            evaluate_operator(kind, Cplx{kEpsFusedZero, 0.0}, spec, f0);
        Elem minus =
            evaluate_operator(kind, Cplx{-kEpsFusedZero, 0.0}, spec, f0);
        Elem avg = 0.5 * (plus + minus);
        return avg;
      }
      auto [km, kp] = fused_k_matrices(u, spec);
      multiply_monodromy(f, MonodromyKind::Reflecting, true, u, spec);
      left_multiply_aux(km.mat, f);
      multiply_monodromy(f, MonodromyKind::Forward, true, u, spec);
      return trace_aux_weighted(kp.mat, f);
    }
  }
  throw std::logic_error("evaluate_operator: unknown kind");
}

int aux_dim_of(OperatorKind kind) {
  return (kind == OperatorKind::WPeriodic || kind == OperatorKind::WOpen) ? 3
                                                                          : 2;
}

}  // namespace

CVec apply_operator(OperatorKind kind, Cplx u, const ChainSpec& spec,
                    const CVec& psi) {
  if (psi.size() != (1L << spec.n_sites))
    throw std::invalid_argument("apply_operator: vector length mismatch");
  return evaluate_operator(kind, u, spec,
                           identity_vec_family(aux_dim_of(kind), psi));
}

DenseOperator build_operator(OperatorKind kind, Cplx u, const ChainSpec& spec) {
  const long dim = 1L << spec.n_sites;
  CMat m = evaluate_operator(kind, u, spec,
                             identity_mat_family(aux_dim_of(kind), dim));
  return DenseOperator(std::move(m));
}

DenseOperator transfer_periodic(Cplx u, const ChainSpec& spec) {
  if (spec.boundary != BoundaryKind::Periodic)
    throw std::logic_error("transfer_periodic: spec is open");
  auto op = build_operator(OperatorKind::TransferPeriodic, u, spec);
  op.label = "t(u)";
  return op;
}

DenseOperator w_operator_periodic(Cplx u, const ChainSpec& spec) {
  if (spec.boundary != BoundaryKind::Periodic)
    throw std::logic_error("w_operator_periodic: spec is open");
  auto op = build_operator(OperatorKind::WPeriodic, u, spec);
  op.label = "W(u)";
  return op;
}

DenseOperator transfer_open(Cplx u, const ChainSpec& spec) {
  auto op = build_operator(OperatorKind::TransferOpen, u, spec);
  op.label = "t^o(u)";
  return op;
}

DenseOperator w_operator_open(Cplx u, const ChainSpec& spec) {
  auto op = build_operator(OperatorKind::WOpen, u, spec);
  op.label = "W^o(u)";
  return op;
}

DenseOperator hamiltonian(const ChainSpec& spec) {
  spec.validate();
  const int n = spec.n_sites;
  const long dim = 1L << n;
  CMat h = CMat::Zero(dim, dim);

  auto add_bond = [&](int i, int j) {
    if (i == j) {  // sigma.sigma on one site degenerates to 3*Id
      h.diagonal().array() += 3.0;
      return;
    }
    const long mi = 1L << (n - i), mj = 1L << (n - j);
    for (long col = 0; col < dim; ++col) {
      const bool bi = col & mi, bj = col & mj;
      h(col, col) += (bi == bj) ? 1.0 : -1.0;   // zz
      if (bi != bj) h(col ^ mi ^ mj, col) += 2.0;  // xx + yy
    }
  };

  if (spec.boundary == BoundaryKind::Periodic) {
    for (int m = 1; m <= n; ++m) add_bond(m, m % n + 1);
  } else {
    for (int m = 1; m + 1 <= n; ++m) add_bond(m, m + 1);
    const Cplx c1 = spec.eta / spec.open.p;
    const Cplx cn = spec.eta / spec.open.q;
    const long m1 = 1L << (n - 1), mn = 1L;
    for (long col = 0; col < dim; ++col) {
      h(col, col) += c1 * ((col & m1) ? -1.0 : 1.0);
      h(col, col) += cn * ((col & mn) ? -1.0 : 1.0);
      h(col ^ mn, col) += cn * spec.open.xi;
    }
  }
  return DenseOperator(std::move(h),
                       spec.boundary == BoundaryKind::Periodic ? "H^p" : "H^o");
}

DenseOperator hamiltonian_from_transfer(const ChainSpec& spec, double step) {
  ChainSpec hom = spec;
  hom.thetas.clear();
  const bool periodic = spec.boundary == BoundaryKind::Periodic;
  const auto kind =
      periodic ? OperatorKind::TransferPeriodic : OperatorKind::TransferOpen;
  CMat tp = build_operator(kind, Cplx{step, 0.0}, hom).mat;
  CMat tm = build_operator(kind, Cplx{-step, 0.0}, hom).mat;
  CMat t0 = build_operator(kind, Cplx{}, hom).mat;
  CMat deriv = (tp - tm) / (2.0 * step);
  Eigen::PartialPivLU<CMat> lu(t0);
  if (std::abs(lu.determinant()) == 0.0)
    throw std::runtime_error("hamiltonian_from_transfer: t(0) is singular");
  CMat m = deriv * lu.inverse();
  const Cplx factor = (periodic ? 2.0 : 1.0) * spec.eta;
  CMat h = factor * m -
           Cplx(static_cast<double>(spec.n_sites)) *
               CMat::Identity(t0.rows(), t0.cols());
  return DenseOperator(std::move(h), "H(log-derivative)");
}

ScalarFns scalar_fns(const ChainSpec& spec) {
  ScalarFns f;
  const Cplx eta = spec.eta;
  const int n = spec.n_sites;
  std::vector<Cplx> thetas(n);
  for (int j = 1; j <= n; ++j) thetas[j - 1] = spec.theta(j);

  f.a = [thetas, eta](Cplx u) {
    Cplx prod{1.0, 0.0};
    for (Cplx th : thetas) prod *= u - th + eta;
    return prod;
  };
  f.d = [a = f.a, eta](Cplx u) { return a(u - eta); };
  f.phi = [eta](Cplx u) { return eta * eta - u * u; };
  f.rho2 = [eta](Cplx u) { return -u * (u + 2.0 * eta); };

  if (spec.boundary == BoundaryKind::Open) {
    const Cplx p = spec.open.p, q = spec.open.q;
    const Cplx root = sqrt1p_xi2(spec.open.xi);
    f.qbar = q / root;
    f.a_open = [thetas, eta, p, q, root](Cplx u) {
      Cplx prod = (u + eta) / (u + eta / 2.0) * (u + p) * (root * u + q);
      for (Cplx th : thetas) prod *= (u - th + eta) * (u + th + eta);
      return prod;
    };
    f.d_open = [ao = f.a_open, eta](Cplx u) { return ao(-u - eta); };
    f.delta_open = [ao = f.a_open, d_o = f.d_open, eta](Cplx u) {
      return ao(u) * d_o(u - eta) * (u + eta / 2.0) * (u - eta / 2.0);
    };
    f.delta_hom = [n, eta, p, q, root](Cplx u) {
      Cplx v = (u - eta) * (u + eta) * (u - p) * (u + p) * (root * u + q) *
               (root * u - q);
      return v * std::pow((u + eta) * (u - eta), 2 * n);
    };
  }
  return f;
}

}  // namespace twlab
