// lyap_cli: spectrum / oracle / ulam / convergence runs from a JSON config.
//
// Exit codes: 0 ok, 1 other failure, 2 config, 3 ambiguity, 4 budget,
// 5 unsupported dimension.

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "lyap/commands.hpp"
#include "lyap/config.hpp"
#include "lyap/errors.hpp"

namespace {

struct Flags {
  std::string config;
  lyap::Overrides overrides;
};

void add_flags(CLI::App* sub, Flags& flags) {
  sub->add_option("--config", flags.config, "configuration JSON")->required();
  sub->add_option("--seed", flags.overrides.seed, "master seed (overrides task.seed)");
  sub->add_option("--out", flags.overrides.out, "output path (default: stdout)");
  sub->add_option("--format", flags.overrides.format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}));
  sub->add_option("--workers", flags.overrides.workers, "worker threads");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lyapunov spectra of random linear cocycles"};
  app.require_subcommand(1);
  Flags flags;
  for (const char* name : {"spectrum", "oracle", "ulam", "convergence"}) {
    add_flags(app.add_subcommand(name, std::string("run the ") + name + " command"), flags);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    const lyap::RunConfig config =
        lyap::apply_overrides(lyap::load_config(flags.config), flags.overrides);
    const auto doc = lyap::run_command(command, config);
    lyap::write_result(doc, config);
    return 0;
  } catch (const lyap::ConfigError& e) {
    std::cerr << "config error at " << e.what() << "\n";
    return 2;
  } catch (const lyap::AmbiguityError& e) {
    std::cerr << "ambiguity: " << e.what() << "\n";
    return 3;
  } catch (const lyap::BudgetError& e) {
    std::cerr << "budget exceeded: " << e.what() << " (required " << e.required() << ")\n";
    return 4;
  } catch (const lyap::UnsupportedDimensionError& e) {
    std::cerr << "unsupported dimension: " << e.what() << "\n";
    return 5;
  } catch (const lyap::ParameterError& e) {
    std::cerr << "invalid parameter: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
