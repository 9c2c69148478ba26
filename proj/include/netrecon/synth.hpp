#ifndef NETRECON_SYNTH_HPP
#define NETRECON_SYNTH_HPP

#include <cstdint>

#include "netrecon/types.hpp"

namespace netrecon {

enum class Scenario { OverReporters, UnderReporters, GammaTheta };
enum class DegreeCorrection { Off, PowerLaw };

// Benchmark generator configuration: an assortative (DC-)SBM ground truth
// plus mutuality-aware double-sampled reports.
struct SynthConfig {
  NodeId n_nodes = 100;
  ReporterId n_reporters = 100;
  int n_communities = 2;
  double avg_degree = 10.0;
  double p_out_ratio = 0.1;  // p_out = p_out_ratio * p_in
  DegreeCorrection degree_correction = DegreeCorrection::Off;
  double dc_in_exponent = 2.0;
  double dc_out_exponent = 2.5;
  Scenario scenario = Scenario::GammaTheta;
  double theta_ratio = 0.0;   // fraction of tagged reporters, <= 0.5
  double theta_over = 50.0;   // reliability of tagged over-reporters
  double theta_under = 0.5;   // reliability of tagged under-reporters
  double theta_gamma_shape = 2.0;
  double theta_gamma_rate = 2.0;
  double lambda0 = 0.01;
  double lambda_diff = 0.99;  // lambda1 = lambda0 + lambda_diff
  double eta_planted = 0.0;
  std::uint64_t seed = 0;

  double p_in() const {
    return avg_degree * static_cast<double>(n_communities) / n_nodes;
  }
  void check() const;
};

GroundTruth generate_ground_truth(const SynthConfig& cfg);

// Two-step sampling per unordered dyad per eligible reporter: coin-flip a
// direction, draw it from the Poisson marginal with mean
// theta*(lambda_{Y_ij} + eta*lambda_{Y_ji})/(1 - eta^2), then draw the reverse
// from the conditional Poisson(theta*lambda_{Y_ji} + eta*X_first). Reporters
// flagged deterministic (scenarios with tagged over/under-reporters,
// theta_m = 1) take rounded means instead of Poisson draws.
ReportTensor generate_reports(const GroundTruth& gt, const ReporterMask& mask,
                              ReporterId n_reporters, std::uint64_t seed);

// Ground truth whose reciprocity is adjusted to target +- tol by symmetrizing
// or breaking randomly chosen dyads; records the achieved value in
// *achieved if given. Throws TargetUnreachable when the adjustment budget is
// exhausted on every attempt.
GroundTruth planted_reciprocity_target(const SynthConfig& cfg, double target,
                                       double tol = 0.02,
                                       double* achieved = nullptr);

}  // namespace netrecon

#endif
