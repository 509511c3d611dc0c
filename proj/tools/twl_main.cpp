#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "twl/cli.hpp"
#include "twl/error.hpp"

int main(int argc, char** argv) {
  using twl::cli::ExperimentSpec;
  CLI::App app{"Tilted walks, random environments and their diffusion limits"};
  app.require_subcommand(1);

  ExperimentSpec spec;
  std::string m_text;
  std::uint64_t seed = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--T", spec.horizon_T, "time horizon")->capture_default_str();
    sub->add_option("--paths", spec.num_paths, "number of paths")->capture_default_str();
    sub->add_option("--seed", seed, "master seed (falls back to TWL_SEED)");
    sub->add_option("--out", spec.out_dir, "output directory")->required();
    sub->add_option("--store-paths", spec.store_paths, "full paths written to paths/")
        ->capture_default_str();
    sub->add_option("--workers", spec.workers, "worker threads (0 = all cores)");
  };

  auto* tilt = app.add_subcommand("tilt-inspect", "tilted law parameters for each m");
  tilt->add_option("--law", spec.law_path, "finite law file")->required();
  tilt->add_option("--m", m_text, "comma-separated scales")->required();
  tilt->add_option("--out", spec.out_dir, "optional output directory");

  auto* walk = app.add_subcommand("walk-sim", "scaled tilted random walk ensemble");
  walk->add_option("--law", spec.law_path, "finite law file")->required();
  walk->add_option("--m", m_text, "scale")->required();
  add_common(walk);

  auto* rwre = app.add_subcommand("rwre-sim", "scaled walk in a tilted random environment");
  rwre->add_option("--env", spec.env_path, "site law file (omega, prob)")->required();
  rwre->add_option("--m", m_text, "scale")->required();
  rwre->add_option("--mode", spec.mode, "annealed or quenched")
      ->check(CLI::IsMember({"annealed", "quenched"}))
      ->capture_default_str();
  add_common(rwre);

  auto* diff = app.add_subcommand("diffusion-sim", "grid chain in a Brownian potential");
  diff->set_help_flag("--help", "Print this help message and exit");  // frees --h
  diff->add_option("--sigma", spec.sigma, "potential volatility")->required();
  diff->add_option("--kappa", spec.kappa, "potential drift -kappa/2")->required();
  diff->add_option("--h", spec.mesh_h, "mesh")->capture_default_str();
  add_common(diff);

  auto* report = app.add_subcommand("convergence-report", "run the acceptance suite");
  report->add_option("--config", spec.config_path, "JSON config")->required();
  report->add_option("--out", spec.out_dir, "output directory (overrides config)");
  report->add_option("--workers", spec.workers, "worker threads (0 = all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    const twl::InvalidArgument err(e.what());
    std::cerr << twl::cli::error_record("usage", err).dump() << "\n";
    return 2;
  }

  CLI::App* chosen = app.get_subcommands().front();
  spec.kind = chosen->get_name();
  if (const auto* opt = chosen->get_option_no_throw("--seed"); opt && opt->count())
    spec.seed = seed;
  try {
    if (!m_text.empty()) spec.m_list = twl::cli::parse_m_list(m_text);
  } catch (const std::exception& e) {
    std::cerr << twl::cli::error_record(spec.kind, e).dump() << "\n";
    return 2;
  }
  return twl::cli::run(spec, std::cout, std::cerr);
}
