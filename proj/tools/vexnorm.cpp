// vexnorm: config-driven experiment runner.
//
//   vexnorm run <config> [--out DIR]
//   vexnorm sweep <config> --param alpha --values a,b,c [--out DIR]
//   vexnorm selftest
//
// Worker threads: VEXNORM_THREADS (default: hardware concurrency).

#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vexnorm/acceptance.hpp"
#include "vexnorm/app/runner.hpp"

namespace {

// Exit codes: 0 all checks pass, 1 some check failed, 2 bad input, 3 resources.
int guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const vexnorm::ResourceError& e) {
    std::cerr << "vexnorm: resource error: " << e.what() << '\n';
    return 3;
  } catch (const vexnorm::ConfigError& e) {
    std::cerr << "vexnorm: config error: " << e.what() << '\n';
    return 2;
  } catch (const vexnorm::ArgumentError& e) {
    std::cerr << "vexnorm: argument error: " << e.what() << '\n';
    return 2;
  } catch (const vexnorm::DataError& e) {
    std::cerr << "vexnorm: data error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "vexnorm: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variable-exponent norms, fractional integrals and commutator checks"};
  app.require_subcommand(1);

  std::string config_path, out_dir, param;
  std::vector<std::string> raw_values;

  auto* run = app.add_subcommand("run", "Run the checks listed in a config");
  run->add_option("config", config_path, "TOML experiment config")->required();
  run->add_option("--out", out_dir, "Output directory (default: output.dir from the config)");

  auto* sweep = app.add_subcommand("sweep", "Theorem harness over a list of parameter values");
  sweep->add_option("config", config_path, "TOML experiment config")->required();
  sweep->add_option("--param", param, "alpha, lambda, beta, m, L or k_max")->required();
  sweep->add_option("--values", raw_values, "Comma-separated values")->delimiter(',')->required();
  sweep->add_option("--out", out_dir, "Output directory (default: output.dir from the config)");

  auto* selftest = app.add_subcommand("selftest", "Run the acceptance suite");

  CLI11_PARSE(app, argc, argv);

  if (*run) {
    return guarded([&] {
      const auto cfg = vexnorm::app::load_config(config_path);
      const auto dir = out_dir.empty() ? cfg.output_dir : out_dir;
      const auto outcome = vexnorm::app::run_experiment(cfg, dir);
      std::cout << outcome.summary.dump(2) << '\n';
      for (const auto& f : outcome.failures) std::cerr << "FAIL " << f << '\n';
      return outcome.passed ? 0 : 1;
    });
  }
  if (*sweep) {
    return guarded([&] {
      const auto cfg = vexnorm::app::load_config(config_path);
      const auto dir = out_dir.empty() ? cfg.output_dir : out_dir;
      std::cout << vexnorm::app::run_sweep(cfg, param, vexnorm::app::parse_values(raw_values), dir).str();
      return 0;
    });
  }
  if (*selftest) return guarded([] { return vexnorm::acceptance::run_all(std::cout) ? 0 : 1; });
  return 0;
}
