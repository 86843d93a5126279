#pragma once

#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "twlab/baes.hpp"
#include "twlab/config.hpp"
#include "twlab/thermo.hpp"

namespace twlab {

struct CheckOutcome {
  std::string name;
  double residual = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

/// Everything a run produces: a manifest echoing the resolved config, named
/// CSV payloads, named JSON records and the pass/fail checks.  Re-running
/// the same config reproduces the CSV bodies byte for byte.
struct ResultBundle {
  nlohmann::json manifest;
  std::map<std::string, std::string> tables;
  std::map<std::string, nlohmann::json> records;
  std::vector<CheckOutcome> checks;
  bool converged = true;

  bool all_checks_pass() const;
};

ResultBundle run(const RunConfig& config);

void write_bundle(const ResultBundle& bundle, const std::string& dir);

/// 0 success, 2 check failure, 3 non-convergence.
int exit_code_for(const ResultBundle& bundle);

}  // namespace twlab
