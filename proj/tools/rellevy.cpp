// rellevy <experiment> [flags]
#include <cstdio>
#include <iostream>
#include <memory>
#include <string>

#include "CLI11.hpp"
#include "rellevy/experiments.hpp"

namespace {

// Sections only group keys; [model] dim = 3 and dim = 3 mean the same thing.
class SectionedIni : public CLI::ConfigINI {
 public:
  std::vector<CLI::ConfigItem> from_config(std::istream& is) const override {
    std::vector<CLI::ConfigItem> flat;
    for (auto& item : CLI::ConfigINI::from_config(is)) {
      if (item.name == "++" || item.name == "--") continue;
      item.parents.clear();
      flat.push_back(std::move(item));
    }
    return flat;
  }
};

int exit_code(rellevy::RunStatus s) {
  switch (s) {
    case rellevy::RunStatus::ok: return 0;
    case rellevy::RunStatus::invariant_violation: return 1;
    case rellevy::RunStatus::numerical_failure: return 3;
  }
  return 3;
}

}  // namespace

int main(int argc, char** argv) {
  using rellevy::RunConfig;
  RunConfig cfg;
  std::string g_kind = cfg.g_kind;
  bool no_correction = false;

  CLI::App app{"Relativistic Levy process experiments"};
  app.config_formatter(std::make_shared<SectionedIni>());
  app.set_config("--config", "", "key = value file; command line flags win")->check(CLI::ExistingFile);
  app.require_subcommand(1);
  app.fallthrough();

  app.add_option("--out", cfg.out_dir, "output directory")->capture_default_str();
  app.add_option("--seed", cfg.seed, "master seed")->capture_default_str();
  app.add_option("--threads", cfg.threads, "worker threads (output does not depend on it)")->capture_default_str();
  app.add_option("--mass-ladder", cfg.masses, "strictly decreasing masses, comma separated")->delimiter(',');
  app.add_option("--eps", cfg.eps, "small-jump cutoff")->capture_default_str();
  app.add_option("--paths", cfg.paths, "Monte Carlo paths")->capture_default_str();
  app.add_option("--grid-n", cfg.grid_n, "reference grid points per axis")->capture_default_str();
  app.add_option("--box-l", cfg.box_l, "reference box half width, 0 = automatic")->capture_default_str();
  app.add_option("--dim", cfg.d, "spatial dimension")->capture_default_str();
  app.add_option("--horizon", cfg.horizon, "time horizon t")->capture_default_str();
  app.add_option("--x-points", cfg.x_points, "evaluation points on [-x-max, x-max]")->capture_default_str();
  app.add_option("--x-max", cfg.x_max)->capture_default_str();
  app.add_option("--a-amp", cfg.a_amp, "vector potential bump amplitude")->capture_default_str();
  app.add_option("--a-radius", cfg.a_radius)->capture_default_str();
  app.add_option("--v-amp", cfg.v_amp, "scalar potential bump amplitude")->capture_default_str();
  app.add_option("--v-radius", cfg.v_radius)->capture_default_str();
  app.add_option("--g-kind", g_kind, "initial datum: bump or box")->capture_default_str();
  app.add_option("--g-amp", cfg.g_amp)->capture_default_str();
  app.add_option("--g-radius", cfg.g_radius)->capture_default_str();
  app.add_flag("--no-correction", no_correction, "drop the small-jump divergence correction");
  app.add_option("--target", cfg.target, "truncation budget to certify, 0 uses --eps")->capture_default_str();
  app.add_option("--split-steps", cfg.split_steps)->capture_default_str();
  app.add_option("--beta", cfg.beta, "moment exponent")->capture_default_str();

  for (const auto& name : rellevy::experiment_names()) app.add_subcommand(name);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    cfg.kind = rellevy::parse_kind(app.get_subcommands().front()->get_name());
    cfg.g_kind = g_kind;
    cfg.correction = !no_correction;
    const auto man = rellevy::run(cfg);
    std::printf("%s  hash=%016llx  status=%d  %.2fs  %s\n", rellevy::to_string(cfg.kind).c_str(),
                static_cast<unsigned long long>(man.config_hash), static_cast<int>(man.status), man.wall_seconds,
                man.message.c_str());
    return exit_code(man.status);
  } catch (const rellevy::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
