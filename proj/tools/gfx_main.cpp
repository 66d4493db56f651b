#include <CLI11.hpp>

#include "gfx/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"gfx: growth-fragmentation simulation experiments"};
  app.require_subcommand(1);

  gfx::runner::Invocation inv;
  std::uint64_t seed = 0, replicas = 0;
  unsigned threads = 0;
  std::string out;
  for (const auto& name : gfx::runner::experiments()) {
    auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
    sub->add_option("--config", inv.config_path, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "master seed (default: config, then GFX_SEED)");
    sub->add_option("--replicas", replicas, "number of replicas");
    sub->add_option("--threads", threads, "worker threads; does not change any result");
    sub->add_option("--out", out, "output directory");
    sub->add_option("--q", inv.q, "override statistics.q");
    sub->add_option("--t", inv.t, "override statistics.t");
    sub->add_option("--set", inv.overrides, "dotted override, e.g. simulation.step=1e-4");
    sub->add_flag("--assert", inv.assert_mode, "exit 1 when a statistical check fails");
    sub->callback([&inv, sub, name] {
      inv.experiment = name;
      (void)sub;
    });
  }
  CLI11_PARSE(app, argc, argv);

  auto* sub = app.get_subcommands().front();
  if (sub->count("--seed")) inv.seed = seed;
  if (sub->count("--replicas")) inv.replicas = replicas;
  if (sub->count("--threads")) inv.threads = threads;
  if (sub->count("--out")) inv.out_dir = out;
  return gfx::runner::execute(inv);
}
