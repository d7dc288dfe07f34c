#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "quadamp/runner.hpp"
#include "quadamp/version.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Three-mode phase-sensitive amplifier simulator"};
  app.set_version_flag("--version", quadamp::kVersion);
  app.require_subcommand(1);

  std::string config, out, format = "csv";
  std::vector<std::string> overrides;

  for (const char* name : {"sweep", "quadrature", "noise", "stability", "tune", "bounds"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config, "device config (JSON)")->required();
    sub->add_option("--out", out, "output data file")->required();
    sub->add_option("--override", overrides, "dotted.key=value, applied before validation")
        ->take_all();
    sub->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  quadamp::RunRequest req;
  req.command = *quadamp::parse_command(app.get_subcommands().front()->get_name());
  req.config_path = config;
  req.out = out;
  req.format = format == "json" ? quadamp::OutputFormat::json : quadamp::OutputFormat::csv;
  req.overrides = overrides;

  const quadamp::RunOutcome oc = quadamp::run_command(req);
  if (oc.exit_code != 0) {
    std::cerr << "error[" << (oc.error ? quadamp::to_string(*oc.error) : "Internal") << "]: "
              << oc.message << '\n';
  }
  return oc.exit_code;
}
