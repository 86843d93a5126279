#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "twlab/format.hpp"
#include "twlab/pipelines.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw twlab::ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"t-W laboratory for the XXX spin chain"};
  app.name("twlab");

  std::string command;
  std::string config_path;
  std::string out_dir;
  std::string n_list;
  bool quiet = false;

  app.add_option("command", command,
                 "verify|spectrum|roots|bae|thermo|decay|figures")
      ->required();
  app.add_option("--config", config_path, "run configuration file")
      ->required();
  app.add_option("--out", out_dir, "output directory (overrides config)");
  app.add_option("--n", n_list,
                 "comma-separated chain lengths (overrides n and sweep)");
  app.add_flag("--quiet", quiet, "suppress progress output");

  CLI11_PARSE(app, argc, argv);

  try {
    twlab::RunConfig cfg = twlab::parse_config(read_file(config_path));
    cfg.command = twlab::command_from_name(command);
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (quiet) cfg.quiet = true;
    if (!n_list.empty()) {
      std::vector<int> ns;
      std::stringstream ss(n_list);
      std::string item;
      while (std::getline(ss, item, ','))
        if (!item.empty()) ns.push_back(std::stoi(item));
      if (ns.empty()) throw twlab::ConfigError("--n: empty list");
      cfg.sweep = ns;
      if (ns.size() == 1) cfg.chain.n_sites = ns[0];
      cfg.chain.validate();
    }

    if (!cfg.quiet)
      for (const std::string& w : cfg.warnings)
        std::cerr << "warning: " << w << "\n";

    twlab::ResultBundle bundle = twlab::run(cfg);
    twlab::write_bundle(bundle, cfg.output_dir);

    if (!cfg.quiet) {
      for (const auto& check : bundle.checks)
        std::cout << (check.pass ? "[PASS] " : "[FAIL] ") << check.name
                  << "  residual=" << twlab::format_double(check.residual)
                  << "  threshold=" << twlab::format_double(check.threshold)
                  << "\n";
      std::cout << "wrote " << cfg.output_dir << "\n";
    }
    return twlab::exit_code_for(bundle);
  } catch (const twlab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
