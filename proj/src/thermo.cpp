#include "twlab/thermo.hpp"

#include <cmath>
#include <stdexcept>

namespace twlab {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

double kernel_a(double n, double w) { return std::exp(-n * std::abs(w) / 2.0); }

Cplx real_multiple_of_eta(Cplx value, const ChainSpec& spec) {
  return value / spec.eta;
}

double simpson(double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive(const std::function<double(double)>& f, double a, double m,
                double b, double fa, double fm, double fb, double whole,
                double tol, int depth) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = simpson(a, m, fa, flm, fm);
  const double right = simpson(m, b, fm, frm, fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive(f, a, lm, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
         adaptive(f, m, rm, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol) {
  if (!(b > a)) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  return adaptive(f, a, m, b, fa, fm, fb, simpson(a, b, fa, fm, fb), abs_tol,
                  48);
}

double rho_ground(DensityKind kind, double lambda) {
  if (kind == DensityKind::OpenCorrection)
    throw std::invalid_argument(
        "rho_ground: the open correction has no closed rapidity form here");
  return 1.0 / (2.0 * std::cosh(kPi * lambda));
}

double rho_ground_fourier(double w) {
  return 1.0 / (4.0 * kPi * std::cosh(w / 2.0));
}

DensityProfile ground_density_profile(DensityKind kind) {
  DensityProfile p;
  p.kind = kind;
  p.closed_form = [kind](double l) { return rho_ground(kind, l); };
  p.fourier_form = rho_ground_fourier;
  p.kernel_terms = {{1.0, 2.0}, {1.0, 1.0}, {1.0, 3.0}};  // a2 / (a1 + a3)
  return p;
}

double open_density_fourier(OpenDensityKind kind, double w,
                            const OpenBoundaryReal& bp) {
  const double denom = 2.0 * kPi * (kernel_a(1, w) + kernel_a(3, w));
  switch (kind) {
    case OpenDensityKind::ZLeading:
      return kernel_a(2, w) / denom;
    case OpenDensityKind::ZCorrection:
      return (kernel_a(2, w) + kernel_a(2.0 * bp.p, w) +
              kernel_a(2.0 * bp.qbar, w) - kernel_a(1, w) -
              kernel_a(2.0 * bp.z1 - 1.0, w) - kernel_a(2.0 * bp.z1 + 1.0, w)) /
             denom;
    case OpenDensityKind::WCorrection:
      return (kernel_a(3, w) + kernel_a(2.0 * bp.p + 1.0, w) +
              kernel_a(2.0 * bp.p - 1.0, w) + kernel_a(2.0 * bp.qbar + 1.0, w) +
              kernel_a(2.0 * bp.qbar - 1.0, w) - kernel_a(1, w) -
              kernel_a(2.0 * bp.chi1 - 1.0, w) -
              kernel_a(2.0 * bp.chi1 + 1.0, w) -
              kernel_a(2.0 * bp.chi2 - 1.0, w) -
              kernel_a(2.0 * bp.chi2 + 1.0, w)) /
             denom;
  }
  throw std::logic_error("open_density_fourier: unknown kind");
}

Cplx log_gamma(Cplx z) {
  static const double coeff[9] = {
      0.99999999999980993,  676.5203681218851,   -1259.1392167224028,
      771.32342877765313,   -176.61502916214059, 12.507343278686905,
      -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};

  if (std::abs(z.imag()) < 1e-14) {
    const double re = z.real();
    if (re <= 0.0 && std::abs(re - std::round(re)) < 1e-14)
      throw std::domain_error("log_gamma: pole at a nonpositive integer");
  }
  if (z.real() < 0.5) {
    // reflection
    return std::log(Cplx{kPi, 0.0}) - std::log(std::sin(kPi * z)) -
           log_gamma(1.0 - z);
  }
  const Cplx zm = z - 1.0;
  Cplx x = coeff[0];
  for (int i = 1; i < 9; ++i) x += coeff[i] / (zm + static_cast<double>(i));
  const Cplx t = zm + 7.5;
  return 0.5 * std::log(2.0 * kPi) + (zm + 0.5) * std::log(t) - t +
         std::log(x);
}

namespace {

// ln of 2 Gamma(1 + iu/2) Gamma(3/2 - iu/2) / (Gamma(1/2 + iu/2) Gamma(1 - iu/2))
Cplx log_per_site_lambda(Cplx u) {
  const Cplx iu2 = Cplx{0.0, 0.5} * u;
  return std::log(Cplx{2.0, 0.0}) + log_gamma(1.0 + iu2) +
         log_gamma(1.5 - iu2) - log_gamma(0.5 + iu2) - log_gamma(1.0 - iu2);
}

// boundary-field gamma ratio: ln Gamma((a+1)/2 + iu/2) Gamma((a+2)/2 - iu/2)
//                              / (Gamma(a/2 + iu/2) Gamma((a+1)/2 - iu/2))
Cplx log_boundary_gamma_ratio(Cplx a, Cplx u) {
  const Cplx iu2 = Cplx{0.0, 0.5} * u;
  return log_gamma((a + 1.0) / 2.0 + iu2) + log_gamma((a + 2.0) / 2.0 - iu2) -
         log_gamma(a / 2.0 + iu2) - log_gamma((a + 1.0) / 2.0 - iu2);
}

}  // namespace

LambdaClosed lambda_g_closed(Cplx u, const ChainSpec& spec) {
  if (std::abs(u.imag()) >= 1.0)
    throw std::domain_error(
        "lambda_g_closed: outside the analyticity strip |Im u| < 1");
  LambdaClosed out;
  const Cplx logf = log_per_site_lambda(u);
  out.per_site = std::exp(logf);
  if (spec.boundary == BoundaryKind::Periodic) {
    out.full_logscale = static_cast<double>(spec.n_sites) * logf;
    return out;
  }
  const Cplx p = real_multiple_of_eta(spec.open.p, spec);
  const Cplx qb = real_multiple_of_eta(spec.qbar(), spec);
  const Cplx xi = spec.open.xi;
  const Cplx arg = kPi * u / 2.0 - Cplx{0.0, kPi / 4.0};
  out.full_logscale = std::log(8.0 * std::sqrt(1.0 + xi * xi)) -
                      std::log(u + spec.eta / 2.0) +
                      std::log(std::cosh(arg) / std::sinh(arg)) +
                      (logf - std::log(Cplx{2.0, 0.0})) +
                      log_boundary_gamma_ratio(p, u) +
                      log_boundary_gamma_ratio(qb, u) +
                      2.0 * static_cast<double>(spec.n_sites) * logf;
  return out;
}

Cplx w_g_closed(Cplx u, int n_sites, const ChainSpec& spec) {
  if (std::abs(u) < 1e-12)
    throw std::domain_error("w_g_closed: pole of the per-site factor at u=0");
  const Cplx eta = spec.eta;
  const Cplx th = std::tanh(kPi * u / 2.0);
  if (spec.boundary == BoundaryKind::Periodic) {
    const Cplx site = (u + eta) * (u - eta) / u * th;
    return 3.0 * std::pow(site, n_sites);
  }
  const Cplx p = real_multiple_of_eta(spec.open.p, spec);
  const Cplx qb = real_multiple_of_eta(spec.qbar(), spec);
  const Cplx xi = spec.open.xi;
  // 4 C_w1 = 1 and C_w0 / 2 = 1 are already folded in
  return (xi * xi - 3.0) * (u - p * eta) * (u + p * eta) * (u - qb * eta) *
         (u + qb * eta) * th * th *
         std::pow((u + eta) * (u - eta), 2 * n_sites + 1) /
         std::pow(u, 2 * n_sites + 2) * std::pow(th, 2 * n_sites);
}

ThermoResult gs_energy_closed(const ChainSpec& spec) {
  ThermoResult res;
  res.per_site_energy = 1.0 - 4.0 * std::log(2.0);
  if (spec.boundary == BoundaryKind::Periodic) return res;

  const double pa = std::abs(spec.open.p);
  const double qa = std::abs(spec.open.q);
  if (pa <= 0.0 || qa <= 0.0)
    throw std::domain_error("gs_energy_closed: boundary fields must be nonzero");
  const double root = std::abs(std::sqrt(1.0 + spec.open.xi * spec.open.xi));
  const double qrate = qa / root;  // = |qbar|

  const double cutoff = std::max(50.0, 40.0 / std::min(pa, qrate));
  const double boundary_integral = integrate(
      [pa, qrate](double w) {
        return (std::exp(-pa * w) + std::exp(-qrate * w)) /
               (1.0 + std::exp(-w));
      },
      0.0, cutoff, 1e-10);

  res.surface_energy = -1.0 + kPi - 2.0 * std::log(2.0) + 1.0 / pa +
                       root / qa - 2.0 * boundary_integral;
  return res;
}

DecayPoint decay_ratio(const ChainSpec& spec, Cplx w_eigenvalue, Cplx u) {
  DecayPoint pt;
  pt.n_sites = spec.n_sites;
  pt.u = u;
  const Cplx eta = spec.eta;
  const int n = spec.n_sites;
  const Cplx th = std::tanh(kPi * u / 2.0);

  if (spec.boundary == BoundaryKind::Periodic) {
    const Cplx det = std::pow((u + eta) * (u - eta), n);  // a(u) d(u - eta)
    if (std::abs(det) < 1e-12)
      throw std::domain_error("decay_ratio: u is a zero of the quantum determinant");
    pt.measured = std::abs(std::pow(u, n) * w_eigenvalue / det);
    pt.predicted = std::abs(3.0 * std::pow(th, n));
  } else {
    auto fns = scalar_fns(spec);
    const Cplx det = fns.delta_hom(u);
    if (std::abs(det) < 1e-12)
      throw std::domain_error("decay_ratio: u is a zero of the quantum determinant");
    pt.measured = std::abs(std::pow(u, 2 * n + 2) * w_eigenvalue / det);
    const Cplx xi = spec.open.xi;
    pt.predicted = std::abs(4.0 * (xi * xi - 3.0) / (1.0 + xi * xi) * 0.25 *
                            std::pow(th, 2 * n + 2));
  }
  return pt;
}

}  // namespace twlab
