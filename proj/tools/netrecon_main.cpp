#include <CLI11.hpp>
#include <iostream>
#include <map>
#include <string>

#include "netrecon/io.hpp"

namespace {

using namespace netrecon;

const std::map<std::string, MaskRule> kMaskRules{
    {"self", MaskRule::SelfDyads},
    {"roster", MaskRule::FullRoster},
    {"custom", MaskRule::Custom}};
const std::map<std::string, Scenario> kScenarios{
    {"over", Scenario::OverReporters},
    {"under", Scenario::UnderReporters},
    {"gamma", Scenario::GammaTheta}};
const std::map<std::string, DegreeCorrection> kDegreeCorrection{
    {"off", DegreeCorrection::Off}, {"power_law", DegreeCorrection::PowerLaw}};

void add_fit_options(CLI::App* cmd, RunConfig& rc, std::string& roster,
                     std::string& custom_mask, double& threshold) {
  cmd->set_config("--config");
  cmd->add_option("--roster", roster, "Roster CSV fixing the label space");
  cmd->add_option("-o,--output", rc.output_dir, "Output directory")->required();
  cmd->add_option("--mask", rc.mask_rule, "Reporter eligibility rule")
      ->transform(CLI::CheckedTransformer(kMaskRules, CLI::ignore_case))
      ->default_str("self");
  cmd->add_option("--custom-mask", custom_mask,
                  "ego,alter,reporter CSV for --mask custom");
  cmd->add_option("-K,--levels", rc.fit.n_levels, "Number of tie levels")
      ->default_val(2);
  cmd->add_option("--seed", rc.fit.seed)->default_val(0);
  cmd->add_option("--max-iterations", rc.fit.max_iterations)->default_val(500);
  cmd->add_option("--elbo-rel-tol", rc.fit.elbo_rel_tol)->default_val(1e-5);
  cmd->add_option("--elbo-check-every", rc.fit.elbo_check_every)->default_val(1);
  cmd->add_option("--init-offset-scale", rc.fit.init_offset_scale)
      ->default_val(0.1);
  cmd->add_option("--monotonicity-tol", rc.fit.monotonicity_tol)
      ->default_val(1e-3);
  cmd->add_flag("--two-step", rc.two_step,
                "Refine per-reporter priors from a first pass");
  cmd->add_option("--two-step-scale", rc.fit.two_step_scale)->default_val(1.0);
  cmd->add_option("--threshold", threshold,
                  "Point-estimate threshold override (default: mutuality heuristic)");
  cmd->add_option("--alpha", rc.hyper.alpha, "Reliability prior shape(s)");
  cmd->add_option("--beta", rc.hyper.beta, "Reliability prior rate(s)");
  cmd->add_option("--prior-a", rc.hyper.a, "Level rate prior shape(s)");
  cmd->add_option("--prior-b", rc.hyper.b, "Level rate prior rate(s)");
  cmd->add_option("--prior-c", rc.hyper.c, "Mutuality prior shape");
  cmd->add_option("--prior-d", rc.hyper.d, "Mutuality prior rate");
  cmd->add_option("--prior-p", rc.hyper.p, "Shared dyad prior over levels");
  cmd->add_flag("!--no-rho", rc.emit_rho, "Skip rho.csv");
  cmd->add_flag("!--no-theta", rc.emit_theta, "Skip theta.csv");
  cmd->add_flag("!--no-elbo", rc.emit_elbo, "Skip elbo.csv");
  cmd->add_flag("!--no-summary", rc.emit_summary, "Skip summary.csv");
  cmd->add_flag("!--no-baselines", rc.emit_baselines,
                "Skip union/intersection summary rows");
}

void finalize_fit_options(RunConfig& rc, const std::string& roster,
                          const std::string& custom_mask, double threshold) {
  if (!roster.empty()) rc.roster = roster;
  if (!custom_mask.empty()) rc.custom_mask = custom_mask;
  if (threshold >= 0.0) rc.threshold_override = threshold;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Latent social network reconstruction from multiply-reported survey ties"};
  app.require_subcommand(1);

  RunConfig rc;
  std::string fit_roster, fit_custom_mask;
  double fit_threshold = -1.0;
  auto* fit_cmd = app.add_subcommand("fit", "Fit one report CSV");
  fit_cmd->add_option("-i,--input", rc.input, "Report CSV")->required();
  add_fit_options(fit_cmd, rc, fit_roster, fit_custom_mask, fit_threshold);

  SynthConfig sc;
  std::string synth_out;
  auto* synth_cmd_ = app.add_subcommand("synth", "Generate a benchmark instance");
  synth_cmd_->set_config("--config");
  synth_cmd_->add_option("-o,--output", synth_out, "Output directory")->required();
  synth_cmd_->add_option("-N,--n-nodes", sc.n_nodes)->default_val(100);
  synth_cmd_->add_option("-M,--n-reporters", sc.n_reporters)->default_val(100);
  synth_cmd_->add_option("--communities", sc.n_communities)->default_val(2);
  synth_cmd_->add_option("--avg-degree", sc.avg_degree)->default_val(10.0);
  synth_cmd_->add_option("--p-out-ratio", sc.p_out_ratio)->default_val(0.1);
  synth_cmd_->add_option("--degree-correction", sc.degree_correction)
      ->transform(CLI::CheckedTransformer(kDegreeCorrection, CLI::ignore_case))
      ->default_str("off");
  synth_cmd_->add_option("--scenario", sc.scenario)
      ->transform(CLI::CheckedTransformer(kScenarios, CLI::ignore_case))
      ->default_str("gamma");
  synth_cmd_->add_option("--theta-ratio", sc.theta_ratio)->default_val(0.0);
  synth_cmd_->add_option("--theta-over", sc.theta_over)->default_val(50.0);
  synth_cmd_->add_option("--theta-under", sc.theta_under)->default_val(0.5);
  synth_cmd_->add_option("--theta-gamma-shape", sc.theta_gamma_shape)
      ->default_val(2.0);
  synth_cmd_->add_option("--theta-gamma-rate", sc.theta_gamma_rate)
      ->default_val(2.0);
  synth_cmd_->add_option("--lambda0", sc.lambda0)->default_val(0.01);
  synth_cmd_->add_option("--lambda-diff", sc.lambda_diff)->default_val(0.99);
  synth_cmd_->add_option("--eta", sc.eta_planted)->default_val(0.0);
  synth_cmd_->add_option("--seed", sc.seed)->default_val(0);

  EvalConfig ec;
  auto* eval_cmd_ = app.add_subcommand("eval", "Score an estimate against a truth");
  eval_cmd_->set_config("--config");
  eval_cmd_->add_option("--network", ec.network, "Estimated edge list")->required();
  eval_cmd_->add_option("--truth", ec.truth, "Ground-truth edge list")->required();
  eval_cmd_->add_option("--roster", ec.roster, "Roster CSV")->required();
  std::string theta_est, theta_true;
  eval_cmd_->add_option("--theta-est", theta_est);
  eval_cmd_->add_option("--theta-true", theta_true);
  eval_cmd_->add_option("-o,--output", ec.output_dir, "Output directory")
      ->required();

  RunConfig bc;
  std::string batch_input_dir, batch_roster, batch_custom_mask;
  double batch_threshold = -1.0;
  std::size_t jobs = 1;
  auto* batch_cmd_ =
      app.add_subcommand("batch", "Independent fits over a directory of CSVs");
  batch_cmd_->add_option("-i,--input-dir", batch_input_dir, "Directory of report CSVs")
      ->required();
  batch_cmd_->add_option("-j,--jobs", jobs, "Worker threads")->default_val(1);
  add_fit_options(batch_cmd_, bc, batch_roster, batch_custom_mask, batch_threshold);

  CLI11_PARSE(app, argc, argv);

  try {
    if (fit_cmd->parsed()) {
      finalize_fit_options(rc, fit_roster, fit_custom_mask, fit_threshold);
      return netrecon::run(rc);
    }
    if (synth_cmd_->parsed()) return netrecon::synth_cmd(sc, synth_out);
    if (eval_cmd_->parsed()) {
      if (!theta_est.empty()) ec.theta_est = theta_est;
      if (!theta_true.empty()) ec.theta_true = theta_true;
      return netrecon::eval_cmd(ec);
    }
    if (batch_cmd_->parsed()) {
      finalize_fit_options(bc, batch_roster, batch_custom_mask, batch_threshold);
      return netrecon::batch_cmd(bc, batch_input_dir, jobs);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
