#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"
#include "spdelab/config.hpp"
#include "spdelab/experiments.hpp"
#include "spdelab/run_record.hpp"

int main(int argc, char** argv) {
  CLI::App app{"spdelab: pathwise stochastic conservation-law laboratory"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::string seed_str;
  int workers = -1;

  const std::vector<std::string> experiments = {"simulate",  "theta",      "lemmas",
                                                "stability", "wongzakai",  "decay",
                                                "regularity", "splitup"};
  for (const auto& name : experiments) {
    CLI::App* sub = app.add_subcommand(name, "run the " + name + " experiment");
    sub->add_option("--config", config_path, "flat key=value config file")->required();
    sub->add_option("--seed", seed_str, "override master_seed");
    sub->add_option("--workers", workers, "worker pool size (default: logical cores)");
    sub->add_option("--out", out_dir, "output directory (SPDELAB_OUT overrides)");
  }

  CLI11_PARSE(app, argc, argv);
  const std::string experiment = app.get_subcommands().front()->get_name();

  try {
    spdelab::Config cfg = spdelab::Config::parse_file(config_path);
    if (cfg.has("experiment") && cfg.require_string("experiment") != experiment) {
      std::fprintf(stderr, "config experiment '%s' does not match subcommand '%s'\n",
                   cfg.require_string("experiment").c_str(), experiment.c_str());
      return 2;
    }
    cfg.set("experiment", experiment);
    if (!seed_str.empty()) cfg.set("master_seed", seed_str);
    if (workers >= 0) cfg.set("workers", std::to_string(workers));
    if (!out_dir.empty()) cfg.set("output_dir", out_dir);

    const spdelab::RunRecord rec = spdelab::run_experiment(cfg);
    std::printf("%s: %s (config %s, seed %llu, %.2fs)\n", rec.experiment.c_str(),
                rec.status.c_str(), rec.config_hash.c_str(),
                static_cast<unsigned long long>(rec.seed), rec.wall_time_sec);
    if (rec.payload.contains("error"))
      std::printf("  error: %s\n", rec.payload["error"].get<std::string>().c_str());
    return spdelab::exit_code_for(rec);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
