#pragma once

#include <functional>
#include <vector>

#include "twlab/chainops.hpp"

namespace twlab {

enum class DensityKind { ZRoots, WRoots, OpenCorrection };

/// Root density of one string family in rapidity and Fourier space.
struct DensityProfile {
  DensityKind kind = DensityKind::ZRoots;
  std::function<double(double)> closed_form;   // rho(lambda)
  std::function<double(double)> fourier_form;  // rho~(w)
  std::vector<std::pair<double, double>> kernel_terms;  // (coefficient, n)
};

/// Thermodynamic-limit summary; the C constants are the fixed integration
/// constants of the closed forms.
struct ThermoResult {
  double per_site_energy = 0.0;
  double surface_energy = std::numeric_limits<double>::quiet_NaN();
  double c_w0 = 2.0;        // periodic
  double c_w1 = 3.0;
  double c_w0_open = 2.0;   // open
  double c_w1_open = 0.25;
};

struct DecayPoint {
  int n_sites = 0;
  Cplx u{};
  double measured = 0.0;
  double predicted = 0.0;
};

/// Leading ground-state density, common to both root families.
double rho_ground(DensityKind kind, double lambda);
double rho_ground_fourier(double w);
DensityProfile ground_density_profile(DensityKind kind = DensityKind::ZRoots);

/// Boundary parameters in the rescaled convention: real multiples of eta
/// (p = -1.2i with eta = i enters as -1.2), plus the boundary-root values.
struct OpenBoundaryReal {
  double p = 0.0;
  double qbar = 0.0;
  double z1 = 0.0;
  double chi1 = 0.0;
  double chi2 = 0.0;
};

enum class OpenDensityKind { ZLeading, ZCorrection, WCorrection };

/// Fourier-space open-chain densities as ratios of the exponential kernels
/// a_n(w) = exp(-n |w| / 2).
double open_density_fourier(OpenDensityKind kind, double w,
                            const OpenBoundaryReal& params);

/// Principal-branch log-gamma (Lanczos with reflection).
Cplx log_gamma(Cplx z);

struct LambdaClosed {
  Cplx per_site;       // gamma-ratio value, the N-th root scale of Lambda_g
  Cplx full_logscale;  // log of the full closed form at this chain size
};

/// Thermodynamic-limit transfer eigenvalue at the ground state.  The open
/// variant multiplies in the boundary correction factor.
LambdaClosed lambda_g_closed(Cplx u, const ChainSpec& spec);

/// Thermodynamic-limit fused eigenvalue at the ground state, constants
/// pinned to C_w = (2, 3) and open (2, 1/4).
Cplx w_g_closed(Cplx u, int n_sites, const ChainSpec& spec);

/// Ground-state energy constants: per-site 1 - 4 ln 2, and for open chains
/// the boundary (surface) correction evaluated by quadrature.
ThermoResult gs_energy_closed(const ChainSpec& spec);

/// Measured weight of the fused term against the quantum determinant in the
/// eigenvalue relation, with the closed-form prediction alongside.
/// `w_eigenvalue` is the sampled fused eigenvalue at u for this chain size.
DecayPoint decay_ratio(const ChainSpec& spec, Cplx w_eigenvalue, Cplx u);

/// Adaptive Simpson quadrature with absolute tolerance.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol = 1e-10);

}  // namespace twlab
