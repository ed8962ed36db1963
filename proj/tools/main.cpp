#include <cstdint>
#include <exception>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "cavtool/errors.hpp"
#include "commands.hpp"

namespace {

int dispatch(const std::string& name,
             const cavtool::cli::CommandContext& context) {
  if (name == "stack") {
    return cavtool::cli::run_stack(context);
  }
  if (name == "dispersion") {
    return cavtool::cli::run_dispersion(context);
  }
  if (name == "fit") {
    return cavtool::cli::run_fit(context);
  }
  if (name == "report") {
    return cavtool::cli::run_report(context);
  }
  if (name == "beta-scan") {
    return cavtool::cli::run_beta_scan(context);
  }
  if (name == "synth") {
    return cavtool::cli::run_synth(context);
  }
  throw std::runtime_error("unknown command: " + name);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Membrane microcavity design and single-emitter coupling analysis"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 1;

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"stack", "Evaluate or design a dielectric mirror stack"},
      {"dispersion", "Resonance map over air gap and wavelength"},
      {"fit", "Least-squares fit of g2, saturation or peak data"},
      {"report", "Derived coupling quantities with uncertainties"},
      {"beta-scan", "Funneling efficiency over membrane thickness and depth"},
      {"synth", "Seeded synthetic datasets for fit validation"},
  };
  for (const auto& [name, description] : commands) {
    auto* sub = app.add_subcommand(name, description);
    sub->add_option("--config", config_path, "JSON config file")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "Output directory")->required();
    sub->add_option("--seed", seed, "Seed for randomized commands");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& success) {
    return app.exit(success);
  } catch (const CLI::ParseError& error) {
    app.exit(error);
    return 2;
  }

  cavtool::cli::CommandContext context;
  context.config_path = config_path;
  context.out_dir = out_dir;
  context.seed = seed;

  // Exit codes are a CI contract: 0 success, 2 config or parse problem,
  // 3 a fit did not converge, 4 infeasible physics.
  try {
    return dispatch(app.get_subcommands().front()->get_name(), context);
  } catch (const cavtool::StabilityError& error) {
    std::cerr << "infeasible: " << error.what() << '\n';
    return 4;
  } catch (const cavtool::DesignInfeasibleError& error) {
    std::cerr << "infeasible: " << error.what() << '\n';
    return 4;
  } catch (const cavtool::RootNotFoundError& error) {
    std::cerr << "infeasible: " << error.what() << '\n';
    return 4;
  } catch (const cavtool::DegenerateRatesError& error) {
    std::cerr << "infeasible: " << error.what() << '\n';
    return 4;
  } catch (const std::exception& error) {
    std::cerr << "error: " << error.what() << '\n';
    return 2;
  }
}
