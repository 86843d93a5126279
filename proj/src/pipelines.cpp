#include "twlab/pipelines.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "twlab/format.hpp"

namespace twlab {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr const char* kVersion = "1.0.0";

using nlohmann::json;

json to_json(Cplx z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

json to_json(const std::vector<Cplx>& v) {
  json out = json::array();
  for (const Cplx& z : v) out.push_back(to_json(z));
  return out;
}

const char* kind_name(PolyKind kind) {
  switch (kind) {
    case PolyKind::Lambda: return "Lambda";
    case PolyKind::W: return "W";
    case PolyKind::LambdaOpen: return "LambdaOpen";
    case PolyKind::WOpen: return "WOpen";
  }
  return "?";
}

json to_json(const SpectralPolynomial& poly) {
  return json{{"kind", kind_name(poly.kind)},
              {"degree", poly.degree},
              {"sample_points", to_json(poly.sample_points)},
              {"sample_values", to_json(poly.sample_values)},
              {"coefficients", to_json(poly.coefficients)},
              {"roots", to_json(poly.roots)}};
}

json to_json(const RootSet& rs, bool open) {
  json out{{"z_centers", rs.z_centers},
           {"z_deviations", rs.z_deviations},
           {"w_centers", rs.w_centers},
           {"w_deviations", rs.w_deviations},
           {"bae_residual", rs.bae_residual}};
  if (open) {
    out["boundary_z"] = rs.boundary_z;
    out["boundary_w"] = {rs.boundary_w.first, rs.boundary_w.second};
  }
  return out;
}

json to_json(const SolveReport& rep, bool open, double tol) {
  return json{{"converged", rep.converged},
              {"iterations", rep.iterations},
              {"final_residual", rep.final_residual},
              {"damping_history", rep.damping_history},
              {"roots", to_json(rep.roots, open)},
              {"energy", rep.energy},
              {"tolerances", {{"bae_tol", tol}}}};
}

json chain_json(const ChainSpec& chain) {
  json out{{"n", chain.n_sites},
           {"eta", to_json(chain.eta)},
           {"boundary",
            chain.boundary == BoundaryKind::Periodic ? "periodic" : "open"}};
  json thetas = json::array();
  for (int j = 1; j <= chain.n_sites; ++j) thetas.push_back(to_json(chain.theta(j)));
  out["theta"] = thetas;
  if (chain.boundary == BoundaryKind::Open) {
    out["p"] = to_json(chain.open.p);
    out["q"] = to_json(chain.open.q);
    out["qbar"] = to_json(chain.qbar());
    out["xi"] = to_json(chain.open.xi);
  }
  return out;
}

json manifest_for(const RunConfig& cfg) {
  json sweep = json::array();
  for (int n : cfg.sweep) sweep.push_back(n);
  json us = json::array();
  for (const Cplx& u : cfg.u_points) us.push_back(to_json(u));
  return json{{"version", kVersion},
              {"command", command_name(cfg.command)},
              {"chain", chain_json(cfg.chain)},
              {"sweep", sweep},
              {"u_points", us},
              {"output_dir", cfg.output_dir},
              {"seed_strategy", cfg.seed_strategy},
              {"tolerances", cfg.tolerances},
              {"physical", cfg.physical},
              {"warnings", cfg.warnings}};
}

double tol(const RunConfig& cfg, const std::string& name) {
  auto it = cfg.tolerances.find(name);
  if (it == cfg.tolerances.end()) return default_tolerances().at(name);
  return it->second;
}

void add_check(ResultBundle& bundle, std::string name, double residual,
               double threshold) {
  bundle.checks.push_back(
      {std::move(name), residual, threshold, residual <= threshold});
}

std::vector<Cplx> trial_points() {
  return {Cplx{0.41, 0.23}, Cplx{-0.77, 0.39}, Cplx{0.18, -0.64},
          Cplx{-0.52, -0.31}, Cplx{0.93, 0.11}};
}

std::vector<int> sweep_or(const RunConfig& cfg, std::vector<int> fallback) {
  return cfg.sweep.empty() ? std::move(fallback) : cfg.sweep;
}

std::vector<Cplx> u_or(const RunConfig& cfg, std::vector<Cplx> fallback) {
  return cfg.u_points.empty() ? std::move(fallback) : cfg.u_points;
}

ChainSpec resize(const ChainSpec& chain, int n) {
  ChainSpec out = chain;
  out.n_sites = n;
  out.thetas.clear();
  return out;
}

std::string root_pattern_csv(const GroundStateAnalysis& a,
                             const ChainSpec& spec) {
  std::string csv = csv_row({"re", "im", "family"});
  auto emit = [&](const std::vector<Cplx>& roots, Cplx shift,
                  const std::string& family) {
    for (const Cplx& r : roots)
      csv += csv_row({format_double((r + shift).real()),
                      format_double((r + shift).imag()), family});
  };
  // z_root carries the +eta/2 shift of the transfer-eigenvalue zeros;
  // lambda_zero is the unshifted convention
  emit(a.lambda.roots, spec.eta / 2.0, "z_root");
  emit(a.lambda.roots, Cplx{}, "lambda_zero");
  emit(a.w.roots, Cplx{}, "w_root");
  return csv;
}

double fill_bae_residual(RootSet& roots, const ChainSpec& spec) {
  BaeSystem sys = BaeSystem::for_spec(spec, Packing::ConjugatePairs);
  roots.bae_residual =
      residuals(sys, pack_rootset(sys, roots)).cwiseAbs().maxCoeff();
  return roots.bae_residual;
}

GroundStateAnalysis analyze_with_residual(const ChainSpec& spec) {
  GroundStateAnalysis a = analyze_ground_state(spec);
  fill_bae_residual(a.roots, spec);
  return a;
}

// ---------------------------------------------------------------------------

void run_verify(const RunConfig& cfg, ResultBundle& bundle) {
  auto report = verify_identity_suite(cfg.chain, trial_points());
  const double scale = tol(cfg, "identity_scale");
  std::string csv = csv_row({"identity", "residual", "threshold", "pass"});
  for (const auto& check : report) {
    const double threshold = check.threshold * scale;
    add_check(bundle, check.name, check.residual, threshold);
    csv += csv_row({check.name, format_double(check.residual),
                    format_double(threshold),
                    check.residual <= threshold ? "1" : "0"});
  }
  bundle.tables["identities"] = std::move(csv);
}

void run_spectrum(const RunConfig& cfg, ResultBundle& bundle) {
  RVec levels = ed_spectrum(cfg.chain);
  std::string csv = csv_row({"index", "energy"});
  for (int k = 0; k < levels.size(); ++k)
    csv += csv_row({std::to_string(k), format_double(levels(k))});
  bundle.tables["levels"] = std::move(csv);
  bundle.records["spectrum"] =
      json{{"n", cfg.chain.n_sites}, {"ground_energy", levels(0)}};
}

void run_roots(const RunConfig& cfg, ResultBundle& bundle) {
  const bool open = cfg.chain.boundary == BoundaryKind::Open;
  auto a = analyze_with_residual(cfg.chain);
  bundle.tables["root_pattern"] = root_pattern_csv(a, cfg.chain);
  bundle.records["lambda_polynomial"] = to_json(a.lambda);
  bundle.records["w_polynomial"] = to_json(a.w);
  json rs = to_json(a.roots, open);
  rs["tolerances"] = {{"root_symmetry", tol(cfg, "root_symmetry")},
                      {"ed_bae_residual", tol(cfg, "ed_bae_residual")}};
  bundle.records["root_set"] = std::move(rs);

  const double defect = std::max(root_symmetry_defect(a.lambda, cfg.chain),
                                 root_symmetry_defect(a.w, cfg.chain));
  add_check(bundle, "root_symmetry", defect, tol(cfg, "root_symmetry"));
  add_check(bundle, "bae_residual_at_roots", a.roots.bae_residual,
            tol(cfg, "ed_bae_residual"));
  const int half = cfg.chain.n_sites / 2;
  add_check(bundle, "string_count",
            std::abs(static_cast<double>(a.roots.z_centers.size()) - half) +
                std::abs(static_cast<double>(a.roots.w_centers.size()) - half),
            0.0);
}

void run_bae(const RunConfig& cfg, ResultBundle& bundle) {
  const bool open = cfg.chain.boundary == BoundaryKind::Open;
  const double bae_tol = tol(cfg, "bae_tol");
  SolveReport rep = solve_ground_state(cfg.chain);
  bundle.records["solve_report"] = to_json(rep, open, bae_tol);

  std::string csv = csv_row({"family", "center", "deviation"});
  for (size_t j = 0; j < rep.roots.z_centers.size(); ++j)
    csv += csv_row({"z", format_double(rep.roots.z_centers[j]),
                    format_double(rep.roots.z_deviations[j])});
  for (size_t j = 0; j < rep.roots.w_centers.size(); ++j)
    csv += csv_row({"w", format_double(rep.roots.w_centers[j]),
                    format_double(rep.roots.w_deviations[j])});
  if (open) {
    csv += csv_row({"z_boundary", format_double(rep.roots.boundary_z), "0"});
    csv += csv_row(
        {"w_boundary", format_double(rep.roots.boundary_w.first), "0"});
    csv += csv_row(
        {"w_boundary", format_double(rep.roots.boundary_w.second), "0"});
  }
  bundle.tables["bae_roots"] = std::move(csv);

  add_check(bundle, "bae_converged", rep.final_residual,
            rep.converged ? std::max(bae_tol, rep.final_residual) : bae_tol);
  if (!rep.converged) bundle.converged = false;
}

void run_thermo(const RunConfig& cfg, ResultBundle& bundle) {
  const bool open = cfg.chain.boundary == BoundaryKind::Open;
  // the open sweep reaches N=10 so the surface-term tail extrapolation has
  // shed most of its curvature
  const auto sweep =
      sweep_or(cfg, open ? std::vector<int>{4, 6, 8, 10}
                         : std::vector<int>{6, 8, 10, 12});
  const auto us = u_or(cfg, {Cplx{0.5, 0.0}, Cplx{1.0, 0.0}});
  const double e_inf = 1.0 - 4.0 * std::log(2.0);
  auto closed = gs_energy_closed(cfg.chain);

  std::string csv = csv_row({"n", "u_re", "u_im", "lambda_per_site",
                             "lambda_closed", "lambda_gap", "w_per_site",
                             "w_closed", "w_gap"});
  std::string ecsv = csv_row({"n", "energy", "energy_per_site", "per_site_gap",
                              "surface_measured"});

  std::map<std::pair<double, double>, std::vector<double>> lambda_gaps, w_gaps;
  std::vector<double> e_gaps;
  std::vector<std::pair<int, double>> surface;

  for (int n : sweep) {
    ChainSpec spec = resize(cfg.chain, n);
    auto gs = ground_state(spec);
    const PolyKind lk = open ? PolyKind::LambdaOpen : PolyKind::Lambda;
    const PolyKind wk = open ? PolyKind::WOpen : PolyKind::W;
    const double scale = open ? 2.0 * n : n;

    for (const Cplx& u : us) {
      const Cplx lam = eigenvalue_samples(gs.vector, lk, spec, {u})[0];
      const Cplx wv = eigenvalue_samples(gs.vector, wk, spec, {u})[0];
      double lam_site = std::pow(std::abs(lam), 1.0 / scale);
      double lam_closed, w_site, w_closed;
      if (open) {
        lam_closed = std::pow(
            std::abs(std::exp(lambda_g_closed(u, spec).full_logscale)),
            1.0 / scale);
        w_site = std::pow(std::abs(wv), 1.0 / scale);
        w_closed =
            std::pow(std::abs(w_g_closed(u, n, spec)), 1.0 / scale);
      } else {
        lam_closed = std::abs(lambda_g_closed(u, spec).per_site);
        w_site = std::pow(std::abs(wv), 1.0 / scale);
        w_closed = std::pow(std::abs(w_g_closed(u, n, spec)), 1.0 / scale);
      }
      const double lgap = std::abs(lam_site - lam_closed) / lam_closed;
      const double wgap = std::abs(w_site - w_closed) / w_closed;
      lambda_gaps[{u.real(), u.imag()}].push_back(lgap);
      w_gaps[{u.real(), u.imag()}].push_back(wgap);
      csv += csv_row({std::to_string(n), format_double(u.real()),
                      format_double(u.imag()), format_double(lam_site),
                      format_double(lam_closed), format_double(lgap),
                      format_double(w_site), format_double(w_closed),
                      format_double(wgap)});
    }

    const double e_site = gs.energy / n;
    e_gaps.push_back(std::abs(e_site - e_inf));
    const double surf = gs.energy - n * e_inf;
    if (open) surface.emplace_back(n, surf);
    ecsv += csv_row({std::to_string(n), format_double(gs.energy),
                     format_double(e_site), format_double(std::abs(e_site - e_inf)),
                     open ? format_double(surf) : "0"});
  }
  bundle.tables["thermo_compare"] = std::move(csv);
  bundle.tables["energy"] = std::move(ecsv);

  auto monotone_violation = [](const std::vector<double>& v) {
    double worst = 0.0;
    for (size_t i = 1; i < v.size(); ++i)
      worst = std::max(worst, v[i] - v[i - 1]);
    return worst;
  };

  const double gap_tol = tol(cfg, "closed_form_gap");
  for (const auto& [u, gaps] : lambda_gaps) {
    const std::string suffix = "_u" + format_double(u.first);
    add_check(bundle, "lambda_gap_monotone" + suffix, monotone_violation(gaps),
              1e-15);
    add_check(bundle, "lambda_final_gap" + suffix, gaps.back(), gap_tol);
  }
  for (const auto& [u, gaps] : w_gaps) {
    const std::string suffix = "_u" + format_double(u.first);
    add_check(bundle, "w_gap_monotone" + suffix, monotone_violation(gaps),
              1e-15);
    add_check(bundle, "w_final_gap" + suffix, gaps.back(), gap_tol);
  }
  if (!open) {
    add_check(bundle, "energy_density_monotone", monotone_violation(e_gaps),
              1e-15);
    add_check(bundle, "energy_density_window", e_gaps.back(), 0.05);
  }

  json record{{"per_site_energy", closed.per_site_energy},
              {"constants",
               {{"c_w0", closed.c_w0},
                {"c_w1", closed.c_w1},
                {"c_w0_open", closed.c_w0_open},
                {"c_w1_open", closed.c_w1_open}}},
              {"tolerances", {{"closed_form_gap", gap_tol}}}};
  if (open && surface.size() >= 2) {
    // linear tail extrapolation of the surface term in 1/N
    const auto [n1, s1] = surface[surface.size() - 2];
    const auto [n2, s2] = surface.back();
    const double x1 = 1.0 / n1, x2 = 1.0 / n2;
    const double extrap = s2 + (s1 - s2) / (x1 - x2) * (0.0 - x2);
    record["surface_energy_closed"] = closed.surface_energy;
    record["surface_energy_extrapolated"] = extrap;
    const double rel =
        std::abs(extrap - closed.surface_energy) /
        std::abs(closed.surface_energy);
    add_check(bundle, "surface_extrapolation", rel,
              tol(cfg, "surface_window"));
  }
  bundle.records["thermo_result"] = std::move(record);
}

void run_decay(const RunConfig& cfg, ResultBundle& bundle) {
  const bool open = cfg.chain.boundary == BoundaryKind::Open;
  const auto sweep =
      sweep_or(cfg, open ? std::vector<int>{4, 6, 8} : std::vector<int>{6, 8, 10, 12});
  const auto us = u_or(cfg, {Cplx{1.0, 0.0}});

  std::string csv = csv_row({"n", "u_re", "u_im", "measured", "predicted"});
  json table = json::array();
  for (const Cplx& u : us) {
    std::vector<DecayPoint> points;
    for (int n : sweep) {
      ChainSpec spec = resize(cfg.chain, n);
      auto gs = ground_state(spec);
      const Cplx wv = eigenvalue_samples(
          gs.vector, open ? PolyKind::WOpen : PolyKind::W, spec, {u})[0];
      points.push_back(decay_ratio(spec, wv, u));
      const auto& pt = points.back();
      csv += csv_row({std::to_string(n), format_double(u.real()),
                      format_double(u.imag()), format_double(pt.measured),
                      format_double(pt.predicted)});
      table.push_back(json{{"n", n},
                           {"u", to_json(u)},
                           {"measured", pt.measured},
                           {"predicted", pt.predicted}});
    }

    double worst_increase = 0.0;
    for (size_t i = 1; i < points.size(); ++i)
      worst_increase = std::max(
          worst_increase, points[i].measured - points[i - 1].measured);
    const std::string suffix = "_u" + format_double(u.real());
    add_check(bundle, "decay_monotone" + suffix, worst_increase, 1e-15);

    // per-site slope of ln(measured) against N
    double sn = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& pt : points) {
      const double x = pt.n_sites, y = std::log(pt.measured);
      sn += 1; sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    const double slope = (sn * sxy - sx * sy) / (sn * sxx - sx * sx);
    const double target = (open ? 2.0 : 1.0) *
                          std::log(std::abs(std::tanh(kPi * u.real() / 2.0)));
    add_check(bundle, "decay_slope" + suffix,
              std::abs(slope - target) / std::abs(target),
              tol(cfg, "decay_slope_window"));
  }
  bundle.tables["decay"] = std::move(csv);
  bundle.records["decay"] = json{
      {"table", std::move(table)},
      {"constants",
       {{"c_w0", 2.0}, {"c_w1", 3.0}, {"c_w0_open", 2.0}, {"c_w1_open", 0.25}}},
      {"tolerances",
       {{"decay_slope_window", tol(cfg, "decay_slope_window")}}}};
}

void run_figures(const RunConfig& cfg, ResultBundle& bundle) {
  const auto sweep = sweep_or(cfg, {6, 8, 10, 12});
  for (int n : sweep) {
    ChainSpec spec = cfg.chain.boundary == BoundaryKind::Periodic
                         ? resize(cfg.chain, n)
                         : ChainSpec::periodic(n, cfg.chain.eta);
    auto a = analyze_with_residual(spec);
    bundle.tables["root_pattern_N" + std::to_string(n)] =
        root_pattern_csv(a, spec);
    add_check(bundle, "string_count_N" + std::to_string(n),
              std::abs(static_cast<double>(a.roots.z_centers.size()) - n / 2) +
                  std::abs(static_cast<double>(a.roots.w_centers.size()) -
                           n / 2),
              0.0);
  }
  // boundary-field companion pattern
  ChainSpec open_spec =
      cfg.chain.boundary == BoundaryKind::Open
          ? resize(cfg.chain, 6)
          : ChainSpec::open_chain(6, Cplx{0.0, -1.2},
                                  Cplx{0.0, 0.8} * std::sqrt(2.0),
                                  Cplx{1.0, 0.0}, cfg.chain.eta);
  auto a = analyze_with_residual(open_spec);
  bundle.tables["root_pattern_open_N6"] = root_pattern_csv(a, open_spec);
  add_check(bundle, "open_boundary_pairs",
            (std::isfinite(a.roots.boundary_z) &&
             std::isfinite(a.roots.boundary_w.first) &&
             std::isfinite(a.roots.boundary_w.second))
                ? 0.0
                : 1.0,
            0.0);
}

}  // namespace

bool ResultBundle::all_checks_pass() const {
  for (const auto& check : checks)
    if (!check.pass) return false;
  return true;
}

ResultBundle run(const RunConfig& cfg) {
  ResultBundle bundle;
  bundle.manifest = manifest_for(cfg);
  try {
    switch (cfg.command) {
      case Command::Verify: run_verify(cfg, bundle); break;
      case Command::Spectrum: run_spectrum(cfg, bundle); break;
      case Command::Roots: run_roots(cfg, bundle); break;
      case Command::Bae: run_bae(cfg, bundle); break;
      case Command::Thermo: run_thermo(cfg, bundle); break;
      case Command::Decay: run_decay(cfg, bundle); break;
      case Command::Figures: run_figures(cfg, bundle); break;
    }
  } catch (const std::exception& e) {
    throw std::runtime_error("stage '" + command_name(cfg.command) +
                             "': " + e.what());
  }

  std::string csv = csv_row({"check", "residual", "threshold", "pass"});
  for (const auto& check : bundle.checks)
    csv += csv_row({check.name, format_double(check.residual),
                    format_double(check.threshold), check.pass ? "1" : "0"});
  bundle.tables["checks"] = std::move(csv);
  return bundle;
}

void write_bundle(const ResultBundle& bundle, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  {
    std::ofstream out(fs::path(dir) / "manifest.json");
    out << bundle.manifest.dump(2) << "\n";
  }
  for (const auto& [name, body] : bundle.tables) {
    std::ofstream out(fs::path(dir) / (name + ".csv"));
    out << body;
  }
  for (const auto& [name, record] : bundle.records) {
    std::ofstream out(fs::path(dir) / (name + ".json"));
    out << record.dump(2) << "\n";
  }
}

int exit_code_for(const ResultBundle& bundle) {
  if (!bundle.converged) return 3;
  if (!bundle.all_checks_pass()) return 2;
  return 0;
}

}  // namespace twlab
