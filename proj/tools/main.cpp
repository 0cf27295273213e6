#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "fregmice/cli.hpp"

namespace {

using fregmice::CommandConfig;

void add_common(CLI::App* cmd, CommandConfig& cfg) {
  cmd->add_option("-o,--out", cfg.out, "Output directory (created if missing)")->capture_default_str();
  cmd->add_option("--threads", cfg.threads,
                  "Worker thread cap; 0 uses FREGMICE_THREADS or the OpenMP default");
  cmd->add_flag("-v,--verbose", cfg.verbosity, "Increase verbosity");
}

}  // namespace

int main(int argc, char** argv) {
  CommandConfig cfg;
  CLI::App app{"fregmice: multiple imputation by chained equations for scalar and functional data"};
  app.require_subcommand(1);
  app.footer("Environment:\n  FREGMICE_THREADS  default worker thread count when --threads is not given");

  auto* impute = app.add_subcommand("impute", "Impute missing scalar and functional cells into M datasets");
  impute->add_option("--data", cfg.data, "Input CSV (functional columns named <var>__t<g>)")->required();
  impute->add_option("--grids", cfg.grids, "Grid sidecar JSON")->required();
  impute->add_option("--spec", cfg.spec, "ImputationSpec JSON (defaults apply when omitted)");
  impute->add_option("--seed", cfg.seed, "Override the spec seed");
  impute->add_option("-M,--imputations", cfg.M, "Override the number of imputed datasets");
  impute->add_option("-V,--iterations", cfg.V, "Override the number of chained-equation iterations");
  impute->add_option("--group-by", cfg.group_by, "Impute separately within each level of this scalar column");
  add_common(impute, cfg);

  auto* fit = app.add_subcommand("fit", "Fit an FRM or SRM to each input dataset");
  fit->add_option("inputs", cfg.inputs, "Data CSV files (e.g. imp_1.csv imp_2.csv ...)")->required();
  fit->add_option("--grids", cfg.grids, "Grid sidecar JSON")->required();
  fit->add_option("--model", cfg.spec, "Model spec JSON (FrmSpec or SrmSpec)")->required();
  fit->add_flag("--complete-cases", cfg.complete_cases, "Drop rows with a missing model variable before fitting");
  add_common(fit, cfg);

  auto* pool = app.add_subcommand("pool", "Pool M fits with Rubin's rules and emit pointwise bands");
  pool->add_option("inputs", cfg.inputs, "Fit JSON files produced by 'fit'")->required();
  pool->add_option("--level", cfg.level, "Band confidence level")->capture_default_str();
  pool->add_flag("--student-t", cfg.student_t, "Use Rubin degrees of freedom instead of the normal quantile");
  add_common(pool, cfg);

  auto* report = app.add_subcommand("report", "Summarize pooled.json as text");
  report->add_option("pooled", cfg.spec, "pooled.json produced by 'pool'")->required();
  report->add_option("-o,--out", cfg.out, "Also write report.txt into this directory");
  report->add_flag("-v,--verbose", cfg.verbosity, "Increase verbosity");

  auto* simulate = app.add_subcommand("simulate", "Run a Monte Carlo missing-data experiment");
  simulate->add_option("--spec", cfg.spec, "ScenarioConfig JSON (defaults apply when omitted)");
  simulate->add_option("--seed", cfg.seed, "Override the scenario seed");
  simulate->add_option("--replications", cfg.replications, "Override the replication count");
  simulate->add_option("-n,--n", cfg.n, "Override the sample size");
  simulate->add_option("-M,--imputations", cfg.M, "Override fregMICE M");
  simulate->add_option("-V,--iterations", cfg.V, "Override fregMICE V");
  simulate->add_option("--methods", cfg.methods, "Methods to compare: ANM CCA Mean fregMICE");
  add_common(simulate, cfg);

  auto* diagnose = app.add_subcommand("diagnose", "Convergence traces and strip plots for an imputation run");
  diagnose->add_option("--data", cfg.data, "Original CSV with missing cells")->required();
  diagnose->add_option("--grids", cfg.grids, "Grid sidecar JSON")->required();
  diagnose->add_option("--run", cfg.run, "Output directory of 'impute'")->required();
  add_common(diagnose, cfg);

  auto* generate = app.add_subcommand("generate", "Write a simulated toy dataset with missing cells");
  generate->add_option("--spec", cfg.spec, "ScenarioConfig JSON (default: FRM study, scenario b, n = 60)");
  generate->add_option("--seed", cfg.seed, "Override the scenario seed");
  generate->add_option("-n,--n", cfg.n, "Override the sample size");
  add_common(generate, cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error:config:" << e.what() << "\n";
    return 1;
  }

  for (auto* sub : app.get_subcommands()) cfg.command = sub->get_name();
  if (cfg.threads == 0)
    if (const char* env = std::getenv("FREGMICE_THREADS")) cfg.threads = std::atoi(env);
  return fregmice::run_command(cfg, std::cout, std::cerr);
}
