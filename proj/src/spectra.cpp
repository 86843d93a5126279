#include "twlab/spectra.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace twlab {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kFitHalfWidth = 4.0;  // sample window [-4, 4]
constexpr double kAxisTol = 1e-6;      // pure-imaginary / center matching
constexpr double kStringWindow = 0.25; // admissible string deviation

double max_abs(const CMat& m) { return m.cwiseAbs().maxCoeff(); }

double rel_residual(const CMat& lhs, const CMat& rhs) {
  const double scale = std::max(max_abs(lhs), max_abs(rhs));
  if (scale == 0.0) return 0.0;
  return max_abs(lhs - rhs) / scale;
}

double imag_eta(const ChainSpec& spec) {
  if (std::abs(spec.eta.real()) > 1e-12 * std::abs(spec.eta))
    throw std::invalid_argument(
        "string classification expects a purely imaginary crossing parameter");
  return spec.eta.imag();
}

}  // namespace

int poly_degree(PolyKind kind, const ChainSpec& spec) {
  switch (kind) {
    case PolyKind::Lambda:
    case PolyKind::W:
      return spec.n_sites;
    case PolyKind::LambdaOpen:
      return 2 * spec.n_sites + 2;
    case PolyKind::WOpen:
      return 2 * spec.n_sites + 4;
  }
  throw std::logic_error("poly_degree: unknown kind");
}

OperatorKind operator_for(PolyKind kind) {
  switch (kind) {
    case PolyKind::Lambda:
      return OperatorKind::TransferPeriodic;
    case PolyKind::W:
      return OperatorKind::WPeriodic;
    case PolyKind::LambdaOpen:
      return OperatorKind::TransferOpen;
    case PolyKind::WOpen:
      return OperatorKind::WOpen;
  }
  throw std::logic_error("operator_for: unknown kind");
}

GroundState ground_state(const ChainSpec& spec) {
  if (!spec.physical())
    throw std::invalid_argument(
        "ground_state: boundary parameters give a non-Hermitian Hamiltonian");
  auto h = hamiltonian(spec);
  auto sys = hermitian_lowest(h, 1);
  GroundState gs;
  gs.energy = sys.eigenvalues(0);
  gs.vector = sys.eigenvectors.col(0);
  gs.vector.normalize();
  // fix the overall phase: largest component real positive
  int imax = 0;
  double best = -1.0;
  for (int i = 0; i < gs.vector.size(); ++i) {
    const double a = std::abs(gs.vector(i));
    if (a > best + 1e-14) {
      best = a;
      imax = i;
    }
  }
  const Cplx piv = gs.vector(imax);
  if (std::abs(piv) > 0) gs.vector *= std::conj(piv) / std::abs(piv);
  return gs;
}

RVec ed_spectrum(const ChainSpec& spec) {
  return hermitian_eigs(hamiltonian(spec)).eigenvalues;
}

std::vector<Cplx> eigenvalue_samples(const CVec& state, PolyKind kind,
                                     const ChainSpec& spec,
                                     const std::vector<Cplx>& points) {
  const OperatorKind op = operator_for(kind);
  std::vector<Cplx> values(points.size());
  for (size_t k = 0; k < points.size(); ++k) {
    const CVec y = apply_operator(op, points[k], spec, state);
    const Cplx val = state.dot(y);
    const double resid = (y - val * state).norm() / std::max(y.norm(), 1e-300);
    if (resid > 1e-8)
      throw DegeneracyError(
          "eigenvalue_samples: state is not a common eigenvector at this "
          "point (variance " +
          std::to_string(resid) +
          "); refine the degenerate level first");
    values[k] = val;
  }
  return values;
}

std::vector<CVec> refine_in_degenerate_block(
    const std::vector<CVec>& level_vectors, const ChainSpec& spec, Cplx u0) {
  if (level_vectors.empty())
    throw std::invalid_argument("refine_in_degenerate_block: empty block");
  if (level_vectors.size() == 1) return level_vectors;

  const auto op = spec.boundary == BoundaryKind::Periodic
                      ? OperatorKind::TransferPeriodic
                      : OperatorKind::TransferOpen;
  const int m = static_cast<int>(level_vectors.size());
  Eigen::MatrixXcd block(m, m);
  std::vector<CVec> images(level_vectors.size());
  for (int l = 0; l < m; ++l)
    images[l] = apply_operator(op, u0, spec, level_vectors[l]);
  for (int k = 0; k < m; ++k)
    for (int l = 0; l < m; ++l) block(k, l) = level_vectors[k].dot(images[l]);

  // multiplet levels see a scalar block; nothing to refine
  const Cplx mean = block.trace() / static_cast<double>(m);
  if ((block - mean * Eigen::MatrixXcd::Identity(m, m)).cwiseAbs().maxCoeff() <=
      1e-11 * std::max(1.0, std::abs(mean)))
    return level_vectors;

  // t(u0) restricted to an H-level is normal, so its Schur form is diagonal
  // and the Schur basis is the orthonormal refinement we want.
  Eigen::ComplexSchur<Eigen::MatrixXcd> schur(block, true);
  const Eigen::MatrixXcd& t = schur.matrixT();
  double off = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) off = std::max(off, std::abs(t(i, j)));
  const double scale = t.cwiseAbs().maxCoeff();
  if (off > 1e-9 * std::max(scale, 1.0))
    throw RefinementError(
        "refine_in_degenerate_block: block is defective beyond tolerance");

  std::vector<CVec> refined(m);
  for (int c = 0; c < m; ++c) {
    CVec v = CVec::Zero(level_vectors[0].size());
    for (int k = 0; k < m; ++k) v += schur.matrixU()(k, c) * level_vectors[k];
    v.normalize();
    refined[c] = std::move(v);
  }

  // order by the transfer eigenvalue at a fixed reference point, so two
  // refinements with different u0 return the same basis in the same order
  const Cplx u_ref{0.3142, 0.0};
  std::vector<Cplx> keys(m);
  double key_scale = 1.0;
  for (int c = 0; c < m; ++c) {
    keys[c] = refined[c].dot(apply_operator(op, u_ref, spec, refined[c]));
    key_scale = std::max(key_scale, std::abs(keys[c]));
  }
  const double key_tol = 1e-9 * key_scale;
  std::vector<int> order(m);
  for (int i = 0; i < m; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (std::abs(keys[a].real() - keys[b].real()) > key_tol)
      return keys[a].real() < keys[b].real();
    if (std::abs(keys[a].imag() - keys[b].imag()) > key_tol)
      return keys[a].imag() < keys[b].imag();
    return a < b;
  });
  std::vector<CVec> out(m);
  for (int c = 0; c < m; ++c) out[c] = std::move(refined[order[c]]);
  return out;
}

int fit_node_count(PolyKind kind, const ChainSpec& spec) {
  return poly_degree(kind, spec) + 1;
}

std::vector<Cplx> sample_points_for(PolyKind kind, const ChainSpec& spec) {
  const int m = fit_node_count(kind, spec);
  std::vector<Cplx> pts;
  pts.reserve(m + 8);
  for (int k = 1; k <= m; ++k)
    pts.emplace_back(kFitHalfWidth * std::cos(kPi * (2 * k - 1) / (2.0 * m)),
                     0.0);
  for (int i = 0; i < 8; ++i)
    pts.emplace_back(-3.83 + 7.66 * i / 7.0, 0.0);
  return pts;
}

namespace {

struct FitBasis {
  Cplx shift;   // fit variable v = u + shift
  bool even;    // only even powers of v
  int half;     // number of basis functions - 1
};

FitBasis fit_basis(PolyKind kind, const ChainSpec& spec) {
  const int deg = poly_degree(kind, spec);
  switch (kind) {
    case PolyKind::Lambda:
    case PolyKind::W:
      return {Cplx{}, false, deg};
    case PolyKind::LambdaOpen:
      return {spec.eta / 2.0, true, deg / 2};
    case PolyKind::WOpen:
      return {Cplx{}, true, deg / 2};
  }
  throw std::logic_error("fit_basis: unknown kind");
}

Cplx leading_coefficient_target(PolyKind kind, const ChainSpec& spec) {
  switch (kind) {
    case PolyKind::Lambda:
    case PolyKind::LambdaOpen:
      return Cplx{2.0, 0.0};
    case PolyKind::W:
      return Cplx{3.0, 0.0};
    case PolyKind::WOpen:
      return spec.open.xi * spec.open.xi - 3.0;
  }
  throw std::logic_error("leading_coefficient_target: unknown kind");
}

// coefficients of p(v - shift) from those of p(u), both ascending
std::vector<Cplx> taylor_shift(const std::vector<Cplx>& c, Cplx shift) {
  const int n = static_cast<int>(c.size());
  std::vector<Cplx> out(n, Cplx{});
  std::vector<double> binom(n, 0.0);
  for (int j = 0; j < n; ++j) {
    // binomials C(j, k) built row by row
    binom[j] = 1.0;
    for (int k = j - 1; k > 0; --k) binom[k] += binom[k - 1];
    Cplx pw{1.0, 0.0};
    for (int k = j; k >= 0; --k) {
      out[k] += c[j] * binom[k] * pw;
      pw *= -shift;
    }
  }
  return out;
}

}  // namespace

Cplx eval_poly(const std::vector<Cplx>& coeffs, Cplx u) {
  Cplx acc{};
  for (size_t k = coeffs.size(); k-- > 0;) acc = acc * u + coeffs[k];
  return acc;
}

std::vector<Cplx> fit_monomial(const std::vector<Cplx>& points,
                               const std::vector<Cplx>& values, int degree) {
  if (points.size() != values.size() ||
      static_cast<int>(points.size()) < degree + 1)
    throw std::invalid_argument("fit_monomial: need at least degree+1 samples");
  const int rows = static_cast<int>(points.size());
  Eigen::MatrixXcd vand(rows, degree + 1);
  Eigen::VectorXcd rhs(rows);
  for (int r = 0; r < rows; ++r) {
    const Cplx s = points[r] / kFitHalfWidth;
    Cplx pw{1.0, 0.0};
    for (int c = 0; c <= degree; ++c) {
      vand(r, c) = pw;
      pw *= s;
    }
    rhs(r) = values[r];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(vand);
  if (qr.rank() < degree + 1)
    throw std::runtime_error("fit_monomial: rank-deficient sample set");
  Eigen::VectorXcd b = qr.solve(rhs);
  std::vector<Cplx> coeffs(degree + 1);
  for (int c = 0; c <= degree; ++c)
    coeffs[c] = b(c) / std::pow(kFitHalfWidth, c);
  return coeffs;
}

SpectralPolynomial fit_polynomial(const std::vector<Cplx>& points,
                                  const std::vector<Cplx>& values,
                                  PolyKind kind, const ChainSpec& spec) {
  const int deg = poly_degree(kind, spec);
  const int m = deg + 1;
  if (points.size() != values.size())
    throw std::invalid_argument("fit_polynomial: points/values mismatch");
  if (static_cast<int>(points.size()) < m)
    throw std::invalid_argument("fit_polynomial: need at least degree+1 points");
  for (size_t i = 0; i < points.size(); ++i)
    for (size_t j = i + 1; j < points.size(); ++j)
      if (std::abs(points[i] - points[j]) < 1e-12)
        throw std::invalid_argument("fit_polynomial: sample points collide");

  const FitBasis basis = fit_basis(kind, spec);
  const int cols = basis.half + 1;

  Eigen::MatrixXcd vand(m, cols);
  Eigen::VectorXcd rhs(m);
  for (int r = 0; r < m; ++r) {
    const Cplx s = (points[r] + basis.shift) / kFitHalfWidth;
    const Cplx base = basis.even ? s * s : s;
    Cplx pw{1.0, 0.0};
    for (int c = 0; c < cols; ++c) {
      vand(r, c) = pw;
      pw *= base;
    }
    rhs(r) = values[r];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(vand);
  if (qr.rank() < cols)
    throw std::runtime_error("fit_polynomial: rank-deficient sample set");
  Eigen::VectorXcd b = qr.solve(rhs);

  // undo the conditioning scale, then expand the shifted variable
  std::vector<Cplx> in_v(deg + 1, Cplx{});
  for (int c = 0; c < cols; ++c) {
    const int power = basis.even ? 2 * c : c;
    in_v[power] = b(c) / std::pow(kFitHalfWidth, power);
  }
  std::vector<Cplx> coeffs =
      basis.shift == Cplx{} ? in_v : taylor_shift(in_v, -basis.shift);

  SpectralPolynomial poly;
  poly.kind = kind;
  poly.degree = deg;
  poly.sample_points = points;
  poly.sample_values = values;
  poly.coefficients = std::move(coeffs);

  double vmax = 0.0;
  for (const Cplx& v : values) vmax = std::max(vmax, std::abs(v));
  for (size_t r = 0; r < points.size(); ++r) {
    const Cplx p = eval_poly(poly.coefficients, points[r]);
    if (std::abs(p - values[r]) > 1e-9 * std::max(vmax, 1.0))
      throw std::runtime_error(
          "fit_polynomial: fitted coefficients fail to reproduce sample " +
          std::to_string(r));
  }

  const Cplx target = leading_coefficient_target(kind, spec);
  if (std::abs(poly.coefficients[deg] - target) > 1e-6 * std::abs(target))
    throw std::runtime_error(
        "fit_polynomial: leading coefficient deviates from the asymptotic "
        "value");
  return poly;
}

namespace {

// Second-form barycentric interpolant through the fit nodes; exact
// representation of the sampled polynomial, used for root polishing.
struct Barycentric {
  std::vector<Cplx> x, f, w;

  Barycentric(const std::vector<Cplx>& pts, const std::vector<Cplx>& vals,
              int count) {
    x.assign(pts.begin(), pts.begin() + count);
    f.assign(vals.begin(), vals.begin() + count);
    w.resize(count);
    for (int j = 0; j < count; ++j) {
      Cplx prod{1.0, 0.0};
      for (int k = 0; k < count; ++k)
        if (k != j) prod *= x[j] - x[k];
      w[j] = 1.0 / prod;
    }
  }

  std::pair<Cplx, Cplx> value_and_derivative(Cplx z) const {
    Cplx a{}, b{}, ap{}, bp{};
    for (size_t j = 0; j < x.size(); ++j) {
      Cplx dzj = z - x[j];
      if (std::abs(dzj) < 1e-13) dzj = Cplx{1e-13, 1e-13};
      const Cplx inv = 1.0 / dzj;
      const Cplx t = w[j] * inv;
      a += t * f[j];
      b += t;
      ap -= t * inv * f[j];
      bp -= t * inv;
    }
    const Cplx p = a / b;
    return {p, (ap * b - a * bp) / (b * b)};
  }
};

std::vector<Cplx> companion_roots(const std::vector<Cplx>& coeffs) {
  int deg = static_cast<int>(coeffs.size()) - 1;
  while (deg > 0 && std::abs(coeffs[deg]) == 0.0) --deg;
  if (deg < 1) return {};
  Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(deg, deg);
  for (int i = 1; i < deg; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < deg; ++i) comp(i, deg - 1) = -coeffs[i] / coeffs[deg];
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(comp, false);
  std::vector<Cplx> roots(deg);
  for (int i = 0; i < deg; ++i) roots[i] = es.eigenvalues()(i);
  return roots;
}

}  // namespace

void find_roots(SpectralPolynomial& poly, const ChainSpec& spec) {
  if (poly.coefficients.empty())
    throw std::invalid_argument("find_roots: fit the polynomial first");
  const FitBasis basis = fit_basis(poly.kind, spec);

  std::vector<Cplx> raw;
  if (!basis.even) {
    raw = companion_roots(poly.coefficients);
  } else {
    // even in v = u + shift: root the polynomial in v^2, then take both
    // square-root branches
    std::vector<Cplx> in_v = basis.shift == Cplx{}
                                 ? poly.coefficients
                                 : taylor_shift(poly.coefficients, basis.shift);
    std::vector<Cplx> in_v2(basis.half + 1);
    for (int k = 0; k <= basis.half; ++k) in_v2[k] = in_v[2 * k];
    for (const Cplx& sq : companion_roots(in_v2)) {
      const Cplx v = std::sqrt(sq);
      raw.push_back(v - basis.shift);
      raw.push_back(-v - basis.shift);
    }
  }

  // polish on the barycentric interpolant of the fit nodes
  const int m = static_cast<int>(poly.degree) + 1;
  Barycentric bary(poly.sample_points, poly.sample_values, m);
  double vmax = 0.0;
  for (const Cplx& v : poly.sample_values) vmax = std::max(vmax, std::abs(v));

  for (Cplx& z : raw) {
    Cplx best = z;
    double best_abs = std::abs(bary.value_and_derivative(z).first);
    for (int it = 0; it < 60; ++it) {
      auto [p, dp] = bary.value_and_derivative(z);
      if (std::abs(p) < best_abs) {
        best_abs = std::abs(p);
        best = z;
      }
      if (std::abs(dp) == 0.0) break;
      const Cplx step = p / dp;
      z -= step;
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag()) ||
          std::abs(z) > 1e3)
        throw RootQualityError("find_roots: Newton diverged at root near (" +
                               std::to_string(z.real()) + ", " +
                               std::to_string(z.imag()) + ")");
      if (std::abs(step) <= 1e-13 * (1.0 + std::abs(z))) break;
    }
    if (std::abs(bary.value_and_derivative(z).first) > best_abs) z = best;
    if (std::abs(eval_poly(poly.coefficients, z)) > 1e-8 * vmax)
      throw RootQualityError("find_roots: residual too large at root (" +
                             std::to_string(z.real()) + ", " +
                             std::to_string(z.imag()) + ")");
  }

  std::sort(raw.begin(), raw.end(), [](const Cplx& a, const Cplx& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  poly.roots = std::move(raw);
}

void polish_roots_with_state(SpectralPolynomial& poly, const CVec& state,
                             const ChainSpec& spec) {
  const OperatorKind op = operator_for(poly.kind);
  auto value_at = [&](Cplx z) {
    return state.dot(apply_operator(op, z, spec, state));
  };
  const double h = 1e-6;
  for (Cplx& z : poly.roots) {
    for (int it = 0; it < 8; ++it) {
      const Cplx p = value_at(z);
      const Cplx dp = (value_at(z + h) - value_at(z - h)) / (2.0 * h);
      if (std::abs(dp) == 0.0) break;
      const Cplx step = p / dp;
      z -= step;
      if (std::abs(step) <= 1e-14 * (1.0 + std::abs(z))) break;
    }
  }
  std::sort(poly.roots.begin(), poly.roots.end(),
            [](const Cplx& a, const Cplx& b) {
              if (a.real() != b.real()) return a.real() < b.real();
              return a.imag() < b.imag();
            });
}

double root_symmetry_defect(const SpectralPolynomial& poly,
                            const ChainSpec& spec) {
  std::vector<std::function<Cplx(Cplx)>> maps;
  const Cplx eta = spec.eta;
  switch (poly.kind) {
    case PolyKind::Lambda:
      maps.push_back([eta](Cplx z) { return std::conj(z) - eta; });
      break;
    case PolyKind::W:
      maps.push_back([](Cplx z) { return std::conj(z); });
      break;
    case PolyKind::LambdaOpen:
      maps.push_back([eta](Cplx z) { return -z - eta; });
      break;
    case PolyKind::WOpen:
      maps.push_back([](Cplx z) { return -z; });
      maps.push_back([](Cplx z) { return std::conj(z); });
      break;
  }
  double defect = 0.0;
  for (const auto& map : maps)
    for (const Cplx& z : poly.roots) {
      const Cplx target = map(z);
      double best = std::numeric_limits<double>::infinity();
      for (const Cplx& r : poly.roots) best = std::min(best, std::abs(r - target));
      defect = std::max(defect, best);
    }
  return defect;
}

namespace {

struct PairingResult {
  std::vector<double> centers, deviations;
  std::vector<double> axis_values;  // |Im| of pure-imaginary roots
};

// Groups a root multiset into conjugate pairs (periodic) or +/- conjugate
// quadruples plus imaginary-axis pairs (open).
PairingResult classify_family(std::vector<Cplx> roots, double tmpl, bool open,
                              const char* family) {
  PairingResult res;
  auto err = [family](const std::string& msg) {
    return std::runtime_error(std::string("classify_strings(") + family +
                              "): " + msg);
  };

  if (open) {
    std::vector<Cplx> axis;
    std::vector<Cplx> bulk;
    for (const Cplx& z : roots)
      (std::abs(z.real()) <= kAxisTol ? axis : bulk).push_back(z);
    if (axis.size() % 2 != 0) throw err("odd number of imaginary-axis roots");
    std::sort(axis.begin(), axis.end(),
              [](const Cplx& a, const Cplx& b) { return a.imag() < b.imag(); });
    // +/- pairs: match the most negative against the most positive
    for (size_t i = 0; i < axis.size() / 2; ++i) {
      const Cplx neg = axis[i], pos = axis[axis.size() - 1 - i];
      if (std::abs(pos + neg) > 10 * kAxisTol)
        throw err("imaginary-axis roots do not form +/- pairs");
      res.axis_values.push_back(0.5 * (pos.imag() - neg.imag()));
    }
    std::sort(res.axis_values.begin(), res.axis_values.end(),
              std::greater<double>());
    roots = std::move(bulk);

    // quadruples {x+iy, x-iy, -x+iy, -x-iy}: partners matched on center
    // (1e-6) with imaginary parts inside the string window
    while (!roots.empty()) {
      auto lead = std::max_element(
          roots.begin(), roots.end(), [](const Cplx& a, const Cplx& b) {
            if (a.real() != b.real()) return a.real() < b.real();
            return a.imag() < b.imag();
          });
      const Cplx z = *lead;
      roots.erase(lead);
      if (std::abs(std::abs(z.imag()) - tmpl) > kStringWindow)
        throw err("string offset outside the admissible window");
      const Cplx partners[3] = {std::conj(z), -z, -std::conj(z)};
      double x_acc = std::abs(z.real()), y_acc = std::abs(z.imag());
      for (const Cplx& want : partners) {
        auto best = roots.end();
        double dist = std::numeric_limits<double>::infinity();
        for (auto it = roots.begin(); it != roots.end(); ++it) {
          if (std::abs(it->real() - want.real()) > kAxisTol) continue;
          if (std::abs(it->imag() - want.imag()) > kStringWindow) continue;
          if (std::abs(*it - want) < dist) {
            dist = std::abs(*it - want);
            best = it;
          }
        }
        if (best == roots.end())
          throw err("unpaired root off the imaginary axis");
        x_acc += std::abs(best->real());
        y_acc += std::abs(best->imag());
        roots.erase(best);
      }
      res.centers.push_back(x_acc / 4.0);
      res.deviations.push_back(y_acc / 4.0 - tmpl);
    }
  } else {
    // conjugate pairs: common center to 1e-6, both offsets in the window
    while (!roots.empty()) {
      auto lead = std::max_element(
          roots.begin(), roots.end(), [](const Cplx& a, const Cplx& b) {
            return a.imag() < b.imag();
          });
      const Cplx z = *lead;
      roots.erase(lead);
      if (std::abs(std::abs(z.imag()) - tmpl) > kStringWindow)
        throw err("string offset outside the admissible window");
      auto best = roots.end();
      double dist = std::numeric_limits<double>::infinity();
      for (auto it = roots.begin(); it != roots.end(); ++it) {
        if (std::abs(it->real() - z.real()) > kAxisTol) continue;
        if (it->imag() >= 0.0 ||
            std::abs(std::abs(it->imag()) - tmpl) > kStringWindow)
          continue;
        if (std::abs(*it - std::conj(z)) < dist) {
          dist = std::abs(*it - std::conj(z));
          best = it;
        }
      }
      if (best == roots.end())
        throw err("roots do not close under conjugation");
      const double y = 0.5 * (std::abs(z.imag()) + std::abs(best->imag()));
      res.centers.push_back(0.5 * (z.real() + best->real()));
      res.deviations.push_back(y - tmpl);
      roots.erase(best);
    }
  }

  // deterministic ordering by center
  std::vector<size_t> order(res.centers.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return res.centers[a] < res.centers[b];
  });
  PairingResult sorted;
  sorted.axis_values = res.axis_values;
  for (size_t i : order) {
    sorted.centers.push_back(res.centers[i]);
    sorted.deviations.push_back(res.deviations[i]);
  }
  return sorted;
}

}  // namespace

RootSet classify_strings(const SpectralPolynomial& poly,
                         const ChainSpec& spec) {
  const double eta_im = imag_eta(spec);
  const bool open = spec.boundary == BoundaryKind::Open;
  RootSet rs;

  if (poly.kind == PolyKind::Lambda || poly.kind == PolyKind::LambdaOpen) {
    std::vector<Cplx> zs;
    for (const Cplx& r : poly.roots) zs.push_back(r + spec.eta / 2.0);
    auto pr = classify_family(std::move(zs), eta_im, open, "z");
    rs.z_centers = std::move(pr.centers);
    rs.z_deviations = std::move(pr.deviations);
    if (open) {
      if (pr.axis_values.size() != 1)
        throw std::runtime_error(
            "classify_strings(z): expected exactly one boundary pair");
      rs.boundary_z = pr.axis_values[0];
    }
  } else {
    auto pr = classify_family(poly.roots, 1.5 * eta_im, open, "w");
    rs.w_centers = std::move(pr.centers);
    rs.w_deviations = std::move(pr.deviations);
    if (open) {
      if (pr.axis_values.size() != 2)
        throw std::runtime_error(
            "classify_strings(w): expected exactly two boundary pairs");
      rs.boundary_w = {pr.axis_values[0], pr.axis_values[1]};
    }
  }
  return rs;
}

RootSet merge_rootsets(const RootSet& z_part, const RootSet& w_part) {
  RootSet rs = z_part;
  rs.w_centers = w_part.w_centers;
  rs.w_deviations = w_part.w_deviations;
  rs.boundary_w = w_part.boundary_w;
  return rs;
}

std::vector<Cplx> reconstruct_z_roots(const RootSet& rs,
                                      const ChainSpec& spec) {
  const double eta_im = imag_eta(spec);
  std::vector<Cplx> out;
  const bool open = spec.boundary == BoundaryKind::Open;
  for (size_t j = 0; j < rs.z_centers.size(); ++j) {
    const double y = eta_im + rs.z_deviations[j];
    out.emplace_back(rs.z_centers[j], y);
    out.emplace_back(rs.z_centers[j], -y);
    if (open) {
      out.emplace_back(-rs.z_centers[j], y);
      out.emplace_back(-rs.z_centers[j], -y);
    }
  }
  if (open && std::isfinite(rs.boundary_z)) {
    out.emplace_back(0.0, rs.boundary_z);
    out.emplace_back(0.0, -rs.boundary_z);
  }
  return out;
}

std::vector<Cplx> reconstruct_w_roots(const RootSet& rs,
                                      const ChainSpec& spec) {
  const double eta_im = imag_eta(spec);
  std::vector<Cplx> out;
  const bool open = spec.boundary == BoundaryKind::Open;
  for (size_t j = 0; j < rs.w_centers.size(); ++j) {
    const double y = 1.5 * eta_im + rs.w_deviations[j];
    out.emplace_back(rs.w_centers[j], y);
    out.emplace_back(rs.w_centers[j], -y);
    if (open) {
      out.emplace_back(-rs.w_centers[j], y);
      out.emplace_back(-rs.w_centers[j], -y);
    }
  }
  if (open) {
    for (double chi : {rs.boundary_w.first, rs.boundary_w.second})
      if (std::isfinite(chi)) {
        out.emplace_back(0.0, chi);
        out.emplace_back(0.0, -chi);
      }
  }
  return out;
}

std::vector<IdentityCheck> verify_identity_suite(
    const ChainSpec& spec, const std::vector<Cplx>& trial_points) {
  if (spec.n_sites > 8)
    throw std::invalid_argument(
        "verify_identity_suite: operator products limited to n_sites <= 8");
  const Cplx eta = spec.eta;
  const long dim = 1L << spec.n_sites;
  const CMat id = CMat::Identity(dim, dim);
  auto fns = scalar_fns(spec);
  std::vector<IdentityCheck> report;

  bool real_thetas = true;
  for (int j = 1; j <= spec.n_sites; ++j)
    if (std::abs(spec.theta(j).imag()) > 1e-14) real_thetas = false;

  auto add = [&report](std::string name, double resid, double thresh) {
    report.push_back({std::move(name), resid, thresh, resid <= thresh});
  };

  if (spec.boundary == BoundaryKind::Periodic) {
    double r_tw = 0.0, r_herm_t = 0.0, r_herm_w = 0.0;
    for (const Cplx& u : trial_points) {
      CMat t_u = transfer_periodic(u, spec).mat;
      CMat lhs = t_u * transfer_periodic(u - eta, spec).mat;
      CMat rhs = fns.a(u) * fns.d(u - eta) * id +
                 fns.d(u) * w_operator_periodic(u, spec).mat;
      r_tw = std::max(r_tw, rel_residual(lhs, rhs));
      if (real_thetas) {
        CMat w_u = w_operator_periodic(u, spec).mat;
        r_herm_t = std::max(
            r_herm_t, rel_residual(CMat(t_u.adjoint()),
                                   transfer_periodic(std::conj(u) - eta, spec).mat));
        r_herm_w = std::max(
            r_herm_w, rel_residual(CMat(w_u.adjoint()),
                                   w_operator_periodic(std::conj(u), spec).mat));
      }
    }
    add("t-W operator identity", r_tw, 1e-10);

    double r_inhom = 0.0;
    for (int j = 1; j <= spec.n_sites; ++j) {
      const Cplx th = spec.theta(j);
      CMat lhs =
          transfer_periodic(th, spec).mat * transfer_periodic(th - eta, spec).mat;
      CMat rhs = fns.a(th) * fns.d(th - eta) * id;
      r_inhom = std::max(r_inhom, rel_residual(lhs, rhs));
    }
    add("inhomogeneous-point identity", r_inhom, 1e-10);
    if (real_thetas) {
      add("transfer hermiticity", r_herm_t, 1e-10);
      add("fused-transfer hermiticity", r_herm_w, 1e-10);
    }
  } else {
    double r_tw = 0.0, r_cross = 0.0, r_herm = 0.0;
    for (const Cplx& u : trial_points) {
      CMat t_u = transfer_open(u, spec).mat;
      CMat lhs = t_u * transfer_open(u - eta, spec).mat;
      Cplx bulk{1.0, 0.0};
      for (int j = 1; j <= spec.n_sites; ++j)
        bulk *= (u - spec.theta(j)) * (u + spec.theta(j));
      const Cplx det_term =
          fns.delta_open(u) / ((u + eta / 2.0) * (u - eta / 2.0));
      const Cplx w_scalar = 4.0 * u * u * bulk / fns.rho2(2.0 * u - eta);
      CMat rhs = det_term * id + w_scalar * w_operator_open(u, spec).mat;
      r_tw = std::max(r_tw, rel_residual(lhs, rhs));
      r_cross = std::max(r_cross,
                         rel_residual(t_u, transfer_open(-u - eta, spec).mat));
      if (real_thetas && spec.physical())
        r_herm = std::max(
            r_herm, rel_residual(CMat(t_u.adjoint()),
                                 transfer_open(-std::conj(u), spec).mat));
    }
    add("open t-W operator identity", r_tw, 1e-9);
    add("crossing symmetry", r_cross, 1e-10);

    double r_inhom = 0.0;
    for (int j = 1; j <= spec.n_sites; ++j) {
      const Cplx th = spec.theta(j);
      CMat lhs = (th + eta / 2.0) * (th - eta / 2.0) *
                 transfer_open(th, spec).mat * transfer_open(th - eta, spec).mat;
      CMat rhs = fns.delta_open(th) * id;
      r_inhom = std::max(r_inhom, rel_residual(lhs, rhs));
    }
    add("open inhomogeneous-point identity", r_inhom, 1e-10);
    if (real_thetas && spec.physical())
      add("open transfer hermiticity", r_herm, 1e-10);
  }
  return report;
}

GroundStateAnalysis analyze_ground_state(const ChainSpec& spec) {
  GroundStateAnalysis out;
  out.state = ground_state(spec);
  const bool open = spec.boundary == BoundaryKind::Open;
  const PolyKind lk = open ? PolyKind::LambdaOpen : PolyKind::Lambda;
  const PolyKind wk = open ? PolyKind::WOpen : PolyKind::W;

  for (PolyKind kind : {lk, wk}) {
    auto pts = sample_points_for(kind, spec);
    auto vals = eigenvalue_samples(out.state.vector, kind, spec, pts);
    auto poly = fit_polynomial(pts, vals, kind, spec);
    find_roots(poly, spec);
    polish_roots_with_state(poly, out.state.vector, spec);
    if (kind == lk)
      out.lambda = std::move(poly);
    else
      out.w = std::move(poly);
  }
  out.roots = merge_rootsets(classify_strings(out.lambda, spec),
                             classify_strings(out.w, spec));
  return out;
}

}  // namespace twlab
