#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "structrl/bench.hpp"

namespace {

using Command = structrl::CommandResult (*)(const structrl::ExperimentConfig&, const std::filesystem::path&);

int run(Command command, const std::string& config_path, const std::string& out) {
  try {
    const auto config = structrl::load_config(config_path);
    const auto result = command(config, out);
    std::cout << result.report;
    return result.exit_code;
  } catch (const structrl::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return structrl::kExitConfig;
  } catch (const structrl::SolverError& e) {
    std::cerr << "solver failure: " << e.what() << " (residual " << e.residual() << ")\n";
    return structrl::kExitSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return structrl::kExitInternal;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Average-reward MDP toolkit: exact solvers, threshold sweeps, learner benchmarks and structural checks"};
  app.require_subcommand(1);

  struct Sub {
    const char* name;
    const char* help;
    Command command;
  };
  const Sub subs[] = {
      {"solve", "Solve the model exactly (RVIA, value iteration, brute-force threshold)", structrl::cmd_solve},
      {"sweep", "Exact sigma(T) and its gradient over integer and real thresholds", structrl::cmd_sweep},
      {"bench", "Run the selected learners over the seeds and compare stopping times", structrl::cmd_bench},
      {"check", "Run the structural property suite", structrl::cmd_check},
  };

  std::string config_path;
  std::string out_dir;
  Command chosen = nullptr;
  for (const auto& s : subs) {
    auto* sub = app.add_subcommand(s.name, s.help);
    sub->add_option("--config", config_path, "INI experiment file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "Output directory")->required();
    sub->callback([&chosen, &s] { chosen = s.command; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return structrl::kExitConfig;
  }
  return run(chosen, config_path, out_dir);
}
