#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "socsim/conformance.hpp"
#include "socsim/harness.hpp"

using namespace socsim;

int main(int argc, char** argv) {
  CLI::App app{"Headless load and conformance harness", "socsim-harness"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "drive a scenario against a running server");
  std::string script_path, server = "127.0.0.1:8080", out_dir = "harness-out";
  run_cmd->add_option("--script", script_path, "scenario JSON")->required();
  run_cmd->add_option("--server", server, "host:port of the exercise server");
  run_cmd->add_option("--out", out_dir, "directory for transcripts and report.json");

  CLI11_PARSE(app, argc, argv);

  try {
    const auto script = harness::load_scenario(script_path);
    if (auto issues = harness::validate_scenario(script); !issues.empty()) {
      for (const auto& i : issues) std::cerr << "scenario: " << i << '\n';
      return 2;
    }
    const auto run = harness::run_scenario(script, harness::parse_endpoint(server));
    harness::write_transcripts(run, out_dir);

    const auto conformance = harness::verify_transcripts(run.clients, run.serverExport);
    const auto latency = harness::measure_latency(run.clients);
    Json faults = run.faults;
    for (const auto& c : run.clients) {
      for (const auto& f : c.faults) faults.push_back(c.ref + ": " + f);
    }
    Json report{{"conformance", conformance}, {"latency", latency}, {"faults", faults}};
    std::ofstream(std::filesystem::path(out_dir) / "report.json") << report.dump(2) << '\n';

    std::cout << "clients " << conformance.clientsChecked << ", frames " << conformance.framesChecked
              << ", violations " << conformance.violations.size() << ", faults " << faults.size() << '\n';
    if (latency.overall) {
      std::cout << "latency median " << latency.overall->medianMs << " ms, p95 " << latency.overall->p95Ms
                << " ms, max " << latency.overall->maxMs << " ms\n";
    }
    for (const auto& v : conformance.violations) {
      std::cout << "  [" << v.check << "] " << v.client << ": " << v.message << '\n';
    }
    return conformance.clean() ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "harness: " << e.what() << '\n';
    return 2;
  }
}
