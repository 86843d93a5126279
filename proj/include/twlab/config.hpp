#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "twlab/chainops.hpp"

namespace twlab {

enum class Command { Verify, Spectrum, Roots, Bae, Thermo, Decay, Figures };

std::string command_name(Command c);
Command command_from_name(const std::string& name);

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Fully resolved run configuration: defaults applied, tolerances merged,
/// physicality evaluated.
struct RunConfig {
  Command command = Command::Verify;
  ChainSpec chain = ChainSpec::periodic(4);
  std::vector<int> sweep;    // empty = command default
  std::vector<Cplx> u_points;  // empty = command default
  std::string output_dir = "out";
  std::string seed_strategy = "density";
  std::map<std::string, double> tolerances;  // resolved table
  bool physical = true;
  bool quiet = false;
  std::vector<std::string> warnings;
};

/// Default tolerance table (override via "tol.<name>" config keys).
const std::map<std::string, double>& default_tolerances();

/// Parses "key = value" lines ('#' comments).  Unknown keys, malformed
/// values and odd chain lengths for the ground-state pipelines are
/// ConfigErrors carrying the offending key.
RunConfig parse_config(const std::string& source);

}  // namespace twlab
