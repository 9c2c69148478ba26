#ifndef NETRECON_VI_HPP
#define NETRECON_VI_HPP

#include <optional>
#include <utility>

#include "netrecon/state.hpp"
#include "netrecon/types.hpp"

namespace netrecon {

// Coordinate-ascent variational inference for the multiply-reported network
// model. Each update is a pure function of (state, data); fit() applies them
// in the fixed order
//   responsibilities -> theta -> lambda -> rho -> eta -> ELBO
// and every sum over eligible reports is computed as the sparse positive part
// plus the contribution of the implicit zeros, never by densification.

VariationalState init_state(const HyperParams& h, const ReportTensor& x,
                            const BoundMask& mask, const FitConfig& config);

AuxiliaryResponsibilities update_responsibilities(const VariationalState& state,
                                                  const ReportTensor& x,
                                                  const BoundMask& mask);

// New (gamma_shape, gamma_rate).
std::pair<std::vector<double>, std::vector<double>> update_theta(
    const VariationalState& state, const AuxiliaryResponsibilities& zhat,
    const ReportTensor& x, const BoundMask& mask, const HyperParams& h);

// New (phi_shape, phi_rate).
std::pair<std::vector<double>, std::vector<double>> update_lambda(
    const VariationalState& state, const AuxiliaryResponsibilities& zhat,
    const ReportTensor& x, const BoundMask& mask, const HyperParams& h);

RhoTable update_rho(const VariationalState& state,
                    const AuxiliaryResponsibilities& zhat, const ReportTensor& x,
                    const BoundMask& mask, const HyperParams& h);

// New (nu_shape, nu_rate). The rate part is data-only and constant across
// iterations: d + sum of reverse reports over the mask.
std::pair<double, double> update_eta(const VariationalState& state,
                                     const AuxiliaryResponsibilities& zhat,
                                     const ReportTensor& x, const BoundMask& mask,
                                     const HyperParams& h);

double compute_elbo(const VariationalState& state, const ReportTensor& x,
                    const BoundMask& mask, const HyperParams& h);

FitResult fit(const ReportTensor& x, const ReporterMask& mask,
              const HyperParams& h, const FitConfig& config);

// Refinement fit: step 1 with the given (weak) priors, step 2 with per-reporter
// prior means rescaled to scale * step-1 posterior means, rates unchanged.
// The step-1 result is attached as first_stage.
FitResult two_step_fit(const ReportTensor& x, const ReporterMask& mask,
                       const HyperParams& h, const FitConfig& config);

// Binary point estimate for K = 2: a tie is present when rho_ij,1 >= t with
// t = override if given, else clamp(0.54 * eta_est - 0.01, 0.05, 0.75).
// Dyads without eligible reporters fall back to the prior row.
BinaryNetwork point_estimate(const VariationalState& state, const BoundMask& mask,
                             std::optional<double> override_threshold = {});

double point_estimate_threshold(double eta_est);

}  // namespace netrecon

#endif
