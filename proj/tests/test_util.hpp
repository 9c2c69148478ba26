#ifndef NETRECON_TESTS_UTIL_HPP
#define NETRECON_TESTS_UTIL_HPP

#include "netrecon/synth.hpp"
#include "netrecon/types.hpp"

namespace testutil {

using namespace netrecon;

// scenario (c): gamma-distributed reliabilities on a degree-corrected block
// model
inline SynthConfig scenario_c(std::uint64_t seed, double eta,
                              double lambda_diff = 1.0, NodeId n = 100) {
  SynthConfig cfg;
  cfg.n_nodes = n;
  cfg.n_reporters = n;
  cfg.scenario = Scenario::GammaTheta;
  cfg.degree_correction = DegreeCorrection::PowerLaw;
  cfg.lambda_diff = lambda_diff;
  cfg.eta_planted = eta;
  cfg.seed = seed;
  return cfg;
}

inline SynthConfig scenario_tagged(Scenario which, std::uint64_t seed, double eta,
                                   double theta_ratio, NodeId n = 100) {
  SynthConfig cfg;
  cfg.n_nodes = n;
  cfg.n_reporters = n;
  cfg.scenario = which;
  cfg.theta_ratio = theta_ratio;
  cfg.lambda_diff = 0.99;  // lambda = (0.01, 1.0)
  cfg.eta_planted = eta;
  cfg.seed = seed;
  return cfg;
}

inline ReportTensor make_reports(const SynthConfig& cfg) {
  GroundTruth gt = generate_ground_truth(cfg);
  return generate_reports(gt, ReporterMask::self_dyads(), cfg.n_reporters,
                          cfg.seed + 1);
}

}  // namespace testutil

#endif
