#ifndef NETRECON_STATE_HPP
#define NETRECON_STATE_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "netrecon/rng.hpp"
#include "netrecon/types.hpp"

namespace netrecon {

// Categorical posterior over levels, per ordered dyad.
//
// Rows are materialized only for "active" dyads (those carrying at least one
// positive eligible report). Every other masked dyad has an implicit row that
// is a pure function of the dyad prior and, after the first coordinate
// update, of the expectation snapshots taken when rho was last updated:
//
//   rho_ij,k  proportional to  exp(log p_ij,k - E[lambda_k] * S_ij),
//   S_ij = sum of E[theta_m] over eligible reporters.
//
// Right after initialization the implicit rows are instead the prior rows
// perturbed by a counter-based hash of (seed, i, j, k), so no per-dyad
// storage is ever needed.
class RhoTable {
 public:
  std::vector<Dyad> dyads;            // sorted active dyads
  std::vector<double> values;         // dyads.size() x K, row-major
  std::vector<double> log_prior;      // K, shared dyad prior
  std::vector<std::pair<Dyad, std::vector<double>>> log_prior_overrides;
  std::vector<double> theta_snapshot;   // M, E[theta] when rho was updated
  std::vector<double> lambda_snapshot;  // K, E[lambda] likewise
  bool perturbed_prior_mode = false;
  std::uint64_t init_seed = 0;
  double init_offset = 0.0;

  std::size_t n_levels() const { return log_prior.size(); }
  std::size_t n_explicit() const { return dyads.size(); }

  const double* explicit_row(NodeId i, NodeId j) const {
    auto it = std::lower_bound(dyads.begin(), dyads.end(), Dyad{i, j});
    if (it == dyads.end() || *it != Dyad{i, j}) return nullptr;
    return values.data() + static_cast<std::size_t>(it - dyads.begin()) * n_levels();
  }

  const std::vector<double>* prior_override(NodeId i, NodeId j) const {
    auto it = std::lower_bound(
        log_prior_overrides.begin(), log_prior_overrides.end(), Dyad{i, j},
        [](const auto& e, const Dyad& d) { return e.first < d; });
    if (it == log_prior_overrides.end() || it->first != Dyad{i, j}) return nullptr;
    return &it->second;
  }

  // Implicit row under the given log prior. theta_sum must be the eligible
  // E[theta] sum taken from theta_snapshot.
  void implicit_row(NodeId i, NodeId j, std::span<const double> logp,
                    double theta_sum, std::span<double> out) const {
    const std::size_t k_n = n_levels();
    if (perturbed_prior_mode) {
      double total = 0.0;
      for (std::size_t k = 0; k < k_n; ++k) {
        double u = init_offset * hash_u01(init_seed, i, j, k);
        out[k] = std::exp(logp[k]) * (1.0 + u);
        total += out[k];
      }
      for (std::size_t k = 0; k < k_n; ++k) out[k] /= total;
      return;
    }
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < k_n; ++k) {
      out[k] = logp[k] - lambda_snapshot[k] * theta_sum;
      if (out[k] > best) best = out[k];
    }
    double total = 0.0;
    for (std::size_t k = 0; k < k_n; ++k) {
      out[k] = std::exp(out[k] - best);
      total += out[k];
    }
    for (std::size_t k = 0; k < k_n; ++k) out[k] /= total;
  }

  // Full accessor: defined on every dyad with at least one eligible reporter;
  // for dyads without eligible reporters it degenerates to the prior row
  // (theta_sum = 0).
  void row(NodeId i, NodeId j, const BoundMask& mask, std::span<double> out) const {
    if (const double* r = explicit_row(i, j)) {
      std::copy(r, r + n_levels(), out.begin());
      return;
    }
    const std::vector<double>* ov = prior_override(i, j);
    double s = mask.eligible_sum(i, j, theta_snapshot);
    implicit_row(i, j, ov ? std::span<const double>(*ov)
                          : std::span<const double>(log_prior), s, out);
  }
};

// Mean-field posterior: Gamma factors for reliabilities (gamma), level rates
// (phi) and mutuality (nu), plus the per-dyad categorical rho.
struct VariationalState {
  std::vector<double> gamma_shape, gamma_rate;  // per reporter
  std::vector<double> phi_shape, phi_rate;      // per level
  double nu_shape = 1.0, nu_rate = 1.0;
  RhoTable rho;

  std::size_t n_levels() const { return phi_shape.size(); }
  std::size_t n_reporters() const { return gamma_shape.size(); }

  double eta_mean() const { return nu_shape / nu_rate; }
  std::vector<double> theta_mean() const {
    std::vector<double> t(gamma_shape.size());
    for (std::size_t m = 0; m < t.size(); ++m) t[m] = gamma_shape[m] / gamma_rate[m];
    return t;
  }
  std::vector<double> lambda_mean() const {
    std::vector<double> t(phi_shape.size());
    for (std::size_t k = 0; k < t.size(); ++k) t[k] = phi_shape[k] / phi_rate[k];
    return t;
  }
};

// Multinomial responsibilities on the sparse support of X, aligned with
// ReportTensor::entries(). For entry e and level k, z1 is the share of the
// reported count explained by theta*lambda and z2 = 1 - z1 the share
// explained by the mutuality echo of the reverse report.
struct AuxiliaryResponsibilities {
  std::size_t n_levels = 0;
  std::vector<double> z1;  // entries x K, row-major

  double z1_at(std::size_t entry, std::size_t k) const {
    return z1[entry * n_levels + k];
  }
  double z2_at(std::size_t entry, std::size_t k) const {
    return 1.0 - z1[entry * n_levels + k];
  }
};

struct FitConfig {
  std::uint64_t seed = 0;
  std::size_t max_iterations = 500;
  double elbo_rel_tol = 1e-5;
  std::size_t elbo_check_every = 1;
  double init_offset_scale = 0.1;
  double monotonicity_tol = 1e-3;  // relative slack on ELBO decreases
  std::size_t n_levels = 2;        // K
  double two_step_scale = 1.0;     // prior-mean scale in the refinement step
};

struct FitResult {
  VariationalState state;
  std::vector<double> elbo_trace;
  std::size_t n_iterations = 0;
  bool converged = false;
  double eta_est = 0.0;                 // nu_shape / nu_rate
  std::vector<double> theta_est;        // posterior means
  std::optional<BinaryNetwork> point_network;
  std::vector<std::string> warnings;
  std::shared_ptr<const FitResult> first_stage;  // set by two_step_fit
};

}  // namespace netrecon

#endif
