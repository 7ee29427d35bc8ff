// rglue: synthesize phantoms, estimate displacement/strain, evaluate, compare.

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "rglue/io.hpp"
#include "rglue/pipeline.hpp"

namespace pl = rglue::pipeline;

namespace {

struct Options {
  std::string config;
  std::optional<std::string> method;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> output;
};

void add_common(CLI::App* sub, Options& o, bool with_method) {
  sub->add_option("-c,--config", o.config, "run configuration file")->required();
  if (with_method) {
    sub->add_option("--method", o.method, "estimator")
        ->check(CLI::IsMember({"glue", "rglue", "dp"}));
  }
  sub->add_option("--seed", o.seed, "phantom and noise seed");
  sub->add_option("--threads", o.threads, "worker threads for warping and CG")
      ->check(CLI::PositiveNumber);
  sub->add_option("-o,--output", o.output, "output directory (overrides [output] dir)");
}

int run(int (*fn)(const pl::RunConfig&), const std::string& what, const Options& o) {
  pl::RunConfig config;
  try {
    config = pl::RunConfig::load(o.config);
    if (o.seed) config.set_seed(*o.seed);
    if (o.method) config.set_method(*o.method);
    if (o.threads) config.solver.threads = *o.threads;
    if (o.output) config.output_dir = *o.output;
  } catch (const pl::ConfigError& e) {
    std::cerr << "rglue " << what << ": " << e.what() << '\n';
    return pl::kConfigError;
  } catch (const rglue::io::IoError& e) {
    std::cerr << "rglue " << what << ": " << e.what() << '\n';
    return pl::kIoError;
  } catch (const std::exception& e) {
    std::cerr << "rglue " << what << ": " << e.what() << '\n';
    return pl::kHardFailure;
  }
  return pl::guarded(what, fn, config);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust global ultrasound elastography"};
  app.require_subcommand(1);

  Options synth_opts;
  Options estimate_opts;
  Options eval_opts;
  Options compare_opts;
  auto* synth = app.add_subcommand("synth", "write a phantom frame pair and its ground truth");
  auto* estimate = app.add_subcommand("estimate", "DP initialization, refinement and strain");
  auto* eval = app.add_subcommand("eval", "RMSE, SNR, CNR and CNR histogram of a strain image");
  auto* compare = app.add_subcommand("compare", "estimate and evaluate with GLUE and rGLUE");
  add_common(synth, synth_opts, false);
  add_common(estimate, estimate_opts, true);
  add_common(eval, eval_opts, false);
  add_common(compare, compare_opts, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : pl::kConfigError;
  }

  if (*synth) return run(pl::cmd_synth, "synth", synth_opts);
  if (*estimate) return run(pl::cmd_estimate, "estimate", estimate_opts);
  if (*eval) return run(pl::cmd_eval, "eval", eval_opts);
  return run(pl::cmd_compare, "compare", compare_opts);
}
