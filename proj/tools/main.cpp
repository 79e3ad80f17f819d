#include <chrono>
#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

using namespace oneperc;
using namespace oneperc::cli;

int main(int argc, char** argv) {
  CLI::App app{"Certified bounds and simulations for 1-independent percolation"};
  app.set_version_flag("--version", tool_version());
  app.require_subcommand(1);
  app.fallthrough();

  std::string out_dir;
  std::string format = "text";
  bool quiet = false;
  app.add_option("--out", out_dir, "Directory for result files and the run manifest");
  app.add_option("--format", format, "Output format")->check(CLI::IsMember({"text", "csv", "json"}));
  app.add_flag("-q,--quiet", quiet, "No progress lines on stderr");

  Table1Options t1;
  auto* table1 = app.add_subcommand("table1", "Iterate the two-probability renormalisation up to the target");
  table1->add_option("--theta", t1.theta, "Mixture weight");
  table1->add_option("--start", t1.start, "Starting edge probability");
  table1->add_option("--target", t1.target, "Target for min(p, p')");
  table1->add_option("--handoff", t1.handoff, "Keep iterating until min(p, p') exceeds this");
  table1->add_option("--max-depth", t1.max_depth, "Iteration cap")->check(CLI::NonNegativeNumber);

  Table2Options t2;
  auto* table2 = app.add_subcommand("table2", "Bound the probability that the origin percolates");
  table2->add_option("--theta", t2.theta, "Mixture weight");
  table2->add_option("--start", t2.start, "Starting edge probability");
  table2->add_option("--last-row", t2.last_row, "Last explicit row")->check(CLI::NonNegativeNumber);

  Q6Options q6;
  auto* q6cmd = app.add_subcommand("q6", "Connection probability chain for Q6 built from Q3 blocks");
  q6cmd->add_option("--p", q6.p, "Edge probability");
  q6cmd->add_option("--p-second-decimals", q6.p_second_decimals, "Truncation of the second-level probability");

  LowerBoundOptions lb;
  auto* lower = app.add_subcommand("lower-bounds", "Closed-form lower bounds from the explicit constructions");
  lower->add_option("--udlra-site", lb.udlra_site, "Site parameter for the udlra bound 1 - 3x/4");
  lower->add_option("--dfh-site", lb.dfh_site, "Site parameter for x^2 + (1 - x)/2");

  VerifyModelsOptions vm;
  std::vector<std::string> model_names;
  bool with_fixture = false;
  auto* verify = app.add_subcommand("verify-models", "Exact 1-independence check on small windows");
  verify->add_option("--width", vm.width, "Window width (every smaller window is checked too)");
  verify->add_option("--height", vm.height, "Window height");
  verify->add_option("--tol", vm.tol, "Absolute tolerance");
  verify->add_option("--model", model_names, "kind:parameter, repeatable (default: the three constructions)");
  verify->add_flag("--with-fixture", with_fixture, "Also check the planted 2-dependent fixture (expected to fail)");

  ExperimentConfig sim;
  std::string experiment = "crossing";
  std::string sim_model = sim.model.name();
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo test of a blocking event against a success threshold");
  simulate->add_option("--experiment", experiment, "dual or crossing")->check(CLI::IsMember({"dual", "crossing"}));
  simulate->add_option("--N", sim.N, "Block side");
  simulate->add_option("--T", sim.T, "Number of trials");
  simulate->add_option("--model", sim_model, "kind:parameter");
  simulate->add_option("--threshold", sim.threshold, "Null success probability");
  simulate->add_option("--seed", sim.seed, "Run seed");
  simulate->add_option("--significance", sim.significance, "p-value needed to pass");
  simulate->add_option("--threads", sim.threads, "Worker threads (0: ONEPERC_THREADS or all cores)")
      ->check(CLI::NonNegativeNumber);

  app.add_subcommand("fixtures", "Subset counts per event class and the ten-pattern cover check");

  CertificateOptions co;
  auto* cert = app.add_subcommand("certificate", "Export a dual certificate for a connectivity program");
  cert->add_option("--graph", co.graph, "q2, q3 or rect")->check(CLI::IsMember({"q2", "q3", "rect"}));
  cert->add_option("--p", co.p, "Edge probability");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kOperationalFailure;
  }

  const Progress progress = [&](const std::string& line) {
    if (!quiet) std::cerr << line << std::endl;
  };

  try {
    const Format f = parse_format(format);
    const auto t0 = std::chrono::steady_clock::now();
    CommandResult r;
    CLI::App* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    if (name == "table1") {
      r = cmd_table1(t1, progress);
    } else if (name == "table2") {
      r = cmd_table2(t2, progress);
    } else if (name == "q6") {
      r = cmd_q6(q6, progress);
    } else if (name == "lower-bounds") {
      r = cmd_lower_bounds(lb);
    } else if (name == "verify-models") {
      if (!model_names.empty()) {
        vm.models.clear();
        for (const auto& m : model_names) vm.models.push_back(ModelSpec::parse(m));
      }
      if (with_fixture) vm.models.push_back({ModelKind::planted, 0.5});
      r = cmd_verify_models(vm);
    } else if (name == "simulate") {
      sim.experiment = parse_experiment(experiment);
      sim.model = ModelSpec::parse(sim_model);
      r = cmd_simulate(sim, progress);
    } else if (name == "fixtures") {
      r = cmd_fixtures();
    } else if (name == "certificate") {
      r = cmd_certificate(co);
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::cout << r.render(f);
    if (!out_dir.empty()) {
      const WrittenFiles w = write_outputs(r, f, out_dir, wall);
      if (!quiet) std::cerr << "manifest: " << w.manifest.string() << std::endl;
    }
    return r.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kOperationalFailure;
  }
}
