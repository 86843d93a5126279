#include "twlab/config.hpp"

#include <algorithm>
#include <sstream>

#include "twlab/format.hpp"

namespace twlab {

std::string command_name(Command c) {
  switch (c) {
    case Command::Verify: return "verify";
    case Command::Spectrum: return "spectrum";
    case Command::Roots: return "roots";
    case Command::Bae: return "bae";
    case Command::Thermo: return "thermo";
    case Command::Decay: return "decay";
    case Command::Figures: return "figures";
  }
  throw std::logic_error("command_name: unknown command");
}

Command command_from_name(const std::string& name) {
  for (Command c : {Command::Verify, Command::Spectrum, Command::Roots,
                    Command::Bae, Command::Thermo, Command::Decay,
                    Command::Figures})
    if (command_name(c) == name) return c;
  throw ConfigError("unknown command '" + name + "'");
}

const std::map<std::string, double>& default_tolerances() {
  static const std::map<std::string, double> table = {
      {"identity_scale", 1.0},      {"bae_tol", 1e-12},
      {"ed_bae_residual", 1e-7},    {"energy_match", 1e-8},
      {"root_symmetry", 1e-9},      {"closed_form_gap", 0.05},
      {"surface_window", 0.10},     {"decay_slope_window", 0.30},
  };
  return table;
}

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  size_t e = s.find_last_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int parse_int(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const int n = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return n;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected an integer, got '" + v + "'");
  }
}

double parse_number(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected a number, got '" + v + "'");
  }
}

Cplx parse_cplx(const std::string& key, const std::string& v) {
  try {
    return parse_complex(v);
  } catch (const std::exception& e) {
    throw ConfigError("key '" + key + "': " + e.what());
  }
}

bool parse_flag(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("key '" + key + "': expected a boolean, got '" + v + "'");
}

bool needs_even_n(Command c) {
  switch (c) {
    case Command::Roots:
    case Command::Bae:
    case Command::Thermo:
    case Command::Decay:
    case Command::Figures:
      return true;
    default:
      return false;
  }
}

}  // namespace

RunConfig parse_config(const std::string& source) {
  RunConfig cfg;
  cfg.tolerances = default_tolerances();

  bool has_q = false, has_qbar = false, boundary_open = false;
  Cplx p{}, q{}, qbar{}, xi{};
  std::vector<Cplx> thetas;
  int n = 4;
  Cplx eta{0.0, 1.0};

  std::istringstream in(source);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) +
                        ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (value.empty())
      throw ConfigError("key '" + key + "': empty value");

    if (key == "command") {
      cfg.command = command_from_name(value);
    } else if (key == "n") {
      n = parse_int(key, value);
    } else if (key == "sweep") {
      cfg.sweep.clear();
      for (const std::string& item : split_list(value))
        cfg.sweep.push_back(parse_int(key, item));
    } else if (key == "eta") {
      eta = parse_cplx(key, value);
    } else if (key == "boundary") {
      if (value == "periodic")
        boundary_open = false;
      else if (value == "open")
        boundary_open = true;
      else
        throw ConfigError("key 'boundary': expected periodic|open, got '" +
                          value + "'");
    } else if (key == "p") {
      p = parse_cplx(key, value);
    } else if (key == "q") {
      q = parse_cplx(key, value);
      has_q = true;
    } else if (key == "qbar") {
      qbar = parse_cplx(key, value);
      has_qbar = true;
    } else if (key == "xi") {
      xi = parse_cplx(key, value);
    } else if (key == "theta") {
      thetas.clear();
      for (const std::string& item : split_list(value))
        thetas.push_back(parse_cplx(key, item));
    } else if (key == "u") {
      cfg.u_points.clear();
      for (const std::string& item : split_list(value))
        cfg.u_points.push_back(parse_cplx(key, item));
    } else if (key == "out") {
      cfg.output_dir = value;
    } else if (key == "seed_strategy") {
      if (value != "density" && value != "continuation")
        throw ConfigError(
            "key 'seed_strategy': expected density|continuation, got '" +
            value + "'");
      cfg.seed_strategy = value;
    } else if (key == "quiet") {
      cfg.quiet = parse_flag(key, value);
    } else if (key.rfind("tol.", 0) == 0) {
      const std::string name = key.substr(4);
      if (cfg.tolerances.find(name) == cfg.tolerances.end())
        throw ConfigError("unknown tolerance key '" + key + "'");
      cfg.tolerances[name] = parse_number(key, value);
    } else {
      throw ConfigError("unknown key '" + key + "'");
    }
  }

  if (has_q && has_qbar)
    throw ConfigError("keys 'q' and 'qbar' are mutually exclusive");

  if (boundary_open) {
    const Cplx q_resolved =
        has_qbar ? qbar * std::sqrt(Cplx{1.0, 0.0} + xi * xi) : q;
    cfg.chain = ChainSpec::open_chain(n, p, q_resolved, xi, eta);
  } else {
    cfg.chain = ChainSpec::periodic(n, eta);
  }
  if (!thetas.empty()) {
    if (static_cast<int>(thetas.size()) != n)
      throw ConfigError("key 'theta': expected " + std::to_string(n) +
                        " entries, got " + std::to_string(thetas.size()));
    cfg.chain.thetas = thetas;
  }
  cfg.chain.validate();

  if (needs_even_n(cfg.command)) {
    if (n % 2 != 0)
      throw ConfigError("key 'n': the " + command_name(cfg.command) +
                        " pipeline needs an even chain length");
    for (int m : cfg.sweep)
      if (m % 2 != 0)
        throw ConfigError("key 'sweep': the " + command_name(cfg.command) +
                          " pipeline needs even chain lengths");
  }

  cfg.physical = cfg.chain.physical();
  if (!cfg.physical)
    cfg.warnings.push_back(
        "boundary parameters violate the hermiticity constraints "
        "(p* = -p, q* = -q, xi real); spectral pipelines will refuse to run");
  return cfg;
}

}  // namespace twlab
