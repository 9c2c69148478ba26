#include "netrecon/vi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "netrecon/special.hpp"

namespace netrecon {

namespace {

std::vector<double> digamma_expect(std::span<const double> shape,
                                   std::span<const double> rate) {
  std::vector<double> out(shape.size());
  for (std::size_t t = 0; t < out.size(); ++t)
    out[t] = digamma(shape[t]) - std::log(rate[t]);
  return out;
}

// Reverse counts X_jim aligned with the entries of x.
std::vector<Count> reverse_counts(const ReportTensor& x) {
  std::span<const ReportEntry> entries = x.entries();
  std::vector<Count> rev(entries.size(), 0);
  for (std::size_t e = 0; e < entries.size(); ++e)
    rev[e] = x.count(entries[e].j, entries[e].i, entries[e].m);
  return rev;
}

// Sum of reverse reports over the mask: sum_{masked (i,j,m)} X_jim. Each
// stored count X_abm contributes once per masked triple (b, a, m).
double reverse_mass(const ReportTensor& x, const BoundMask& mask) {
  double total = 0.0;
  for (const ReportEntry& e : x.entries())
    if (mask.contains(e.j, e.i, e.m)) total += static_cast<double>(e.x);
  return total;
}

// Unique ordered dyads carrying at least one stored report.
std::vector<Dyad> active_dyads(const ReportTensor& x) {
  std::vector<Dyad> out;
  for (const ReportEntry& e : x.entries())
    if (out.empty() || out.back() != Dyad{e.i, e.j}) out.push_back({e.i, e.j});
  return out;
}

// Walks the entries of x grouped by dyad, materializing the rho row once per
// dyad. f(entry_index, entry, row).
template <class F>
void for_each_entry_with_row(const VariationalState& state, const ReportTensor& x,
                             const BoundMask& mask, F&& f) {
  const std::size_t k_n = state.n_levels();
  std::vector<double> row(k_n);
  std::span<const ReportEntry> entries = x.entries();
  Dyad current{0, 0};
  bool have_row = false;
  for (std::size_t e = 0; e < entries.size(); ++e) {
    const ReportEntry& entry = entries[e];
    if (!have_row || current != Dyad{entry.i, entry.j}) {
      current = {entry.i, entry.j};
      state.rho.row(entry.i, entry.j, mask, row);
      have_row = true;
    }
    f(e, entry, std::span<const double>(row));
  }
}

// Visits every masked dyad with its rho row, the log prior the row pairs
// with, the live eligible-theta sum and a weight. Dyads are visited as an
// implicit base pass plus (+actual/-base) corrections so that the base never
// looks anything up per dyad; FullRoster masks collapse the base to a single
// call with weight = dyad count.
//
// f(i, j, row, logp, theta_sum_live, weight)
template <class F>
void sweep_masked_dyads(const RhoTable& rho, const BoundMask& mask,
                        std::span<const double> theta_live, F&& f) {
  const std::size_t k_n = rho.n_levels();
  std::vector<double> row(k_n), row2(k_n);
  const std::span<const double> logp(rho.log_prior);

  switch (mask.rule()) {
    case MaskRule::SelfDyads: {
      const NodeId n = mask.n_nodes();
      const ReporterId m = mask.n_reporters();
      if (m == 0) return;
      std::span<const double> snap(rho.theta_snapshot);
      for (NodeId i = 0; i < n; ++i) {
        const bool i_rep = i < m;
        const double si = i_rep ? snap[i] : 0.0;
        const double li = i_rep ? theta_live[i] : 0.0;
        for (NodeId j = 0; j < n; ++j) {
          if (j == i) continue;
          const bool j_rep = j < m;
          if (!i_rep && !j_rep) continue;
          const double s_snap = si + (j_rep ? snap[j] : 0.0);
          const double s_live = li + (j_rep ? theta_live[j] : 0.0);
          rho.implicit_row(i, j, logp, s_snap, row);
          f(i, j, std::span<const double>(row), logp, s_live, 1.0);
        }
      }
      break;
    }
    case MaskRule::FullRoster: {
      if (mask.n_reporters() == 0) return;
      const double count = static_cast<double>(mask.masked_dyad_count());
      if (count == 0) return;
      double s_snap = 0.0, s_live = 0.0;
      for (double v : rho.theta_snapshot) s_snap += v;
      for (double v : theta_live) s_live += v;
      if (rho.perturbed_prior_mode) {
        // perturbations differ per dyad; no uniform base row exists
        mask.for_each_masked_dyad([&](NodeId i, NodeId j) {
          rho.implicit_row(i, j, logp, s_snap, row);
          f(i, j, std::span<const double>(row), logp, s_live, 1.0);
        });
      } else {
        rho.implicit_row(0, 0, logp, s_snap, row);
        f(0, 1, std::span<const double>(row), logp, s_live, count);
      }
      break;
    }
    case MaskRule::Custom: {
      mask.for_each_masked_dyad([&](NodeId i, NodeId j) {
        const double s_snap = mask.eligible_sum(i, j, rho.theta_snapshot);
        const double s_live = mask.eligible_sum(i, j, theta_live);
        const std::vector<double>* ov = rho.prior_override(i, j);
        const std::span<const double> lp =
            ov ? std::span<const double>(*ov) : logp;
        rho.implicit_row(i, j, lp, s_snap, row);
        f(i, j, std::span<const double>(row), lp, s_live, 1.0);
      });
      break;
    }
  }

  if (mask.rule() == MaskRule::Custom) {
    // the base pass already used override priors; only swap in explicit rows
    for (std::size_t t = 0; t < rho.dyads.size(); ++t) {
      const Dyad d = rho.dyads[t];
      if (mask.n_eligible(d.i, d.j) == 0) continue;
      const double s_snap = mask.eligible_sum(d.i, d.j, rho.theta_snapshot);
      const double s_live = mask.eligible_sum(d.i, d.j, theta_live);
      const std::vector<double>* ov = rho.prior_override(d.i, d.j);
      const std::span<const double> lp =
          ov ? std::span<const double>(*ov) : logp;
      rho.implicit_row(d.i, d.j, lp, s_snap, row);
      f(d.i, d.j, std::span<const double>(row), lp, s_live, -1.0);
      f(d.i, d.j,
        std::span<const double>(rho.values.data() + t * k_n, k_n), lp, s_live,
        1.0);
    }
    return;
  }

  // corrections: prior overrides on inactive dyads, then explicit rows
  for (const auto& [d, logp_ov] : rho.log_prior_overrides) {
    if (rho.explicit_row(d.i, d.j)) continue;  // handled below
    if (mask.n_eligible(d.i, d.j) == 0) continue;
    const double s_snap = mask.eligible_sum(d.i, d.j, rho.theta_snapshot);
    const double s_live = mask.eligible_sum(d.i, d.j, theta_live);
    rho.implicit_row(d.i, d.j, logp, s_snap, row);
    f(d.i, d.j, std::span<const double>(row), logp, s_live, -1.0);
    rho.implicit_row(d.i, d.j, std::span<const double>(logp_ov), s_snap, row2);
    f(d.i, d.j, std::span<const double>(row2), std::span<const double>(logp_ov),
      s_live, 1.0);
  }
  for (std::size_t t = 0; t < rho.dyads.size(); ++t) {
    const Dyad d = rho.dyads[t];
    if (mask.n_eligible(d.i, d.j) == 0) continue;
    const double s_snap = mask.eligible_sum(d.i, d.j, rho.theta_snapshot);
    const double s_live = mask.eligible_sum(d.i, d.j, theta_live);
    rho.implicit_row(d.i, d.j, logp, s_snap, row);
    f(d.i, d.j, std::span<const double>(row), logp, s_live, -1.0);
    const std::vector<double>* ov = rho.prior_override(d.i, d.j);
    f(d.i, d.j,
      std::span<const double>(rho.values.data() + t * k_n, k_n),
      ov ? std::span<const double>(*ov) : logp, s_live, 1.0);
  }
}

void check_state_finite(const VariationalState& state) {
  auto bad = [](double v) { return !(v > 0.0) || !std::isfinite(v); };
  for (double v : state.gamma_shape)
    if (bad(v)) fail(ErrorCode::NonFiniteElbo, "non-positive gamma shape");
  for (double v : state.gamma_rate)
    if (bad(v)) fail(ErrorCode::NonFiniteElbo, "non-positive gamma rate");
  for (double v : state.phi_shape)
    if (bad(v)) fail(ErrorCode::NonFiniteElbo, "non-positive phi shape");
  for (double v : state.phi_rate)
    if (bad(v)) fail(ErrorCode::NonFiniteElbo, "non-positive phi rate");
  if (bad(state.nu_shape) || bad(state.nu_rate))
    fail(ErrorCode::NonFiniteElbo, "non-positive nu parameter");
}

}  // namespace

VariationalState init_state(const HyperParams& h, const ReportTensor& x,
                            const BoundMask& mask, const FitConfig& config) {
  (void)mask;
  const std::size_t k_n = config.n_levels;
  const HyperParams hv =
      validate_hyperparams(h, k_n, x.n_nodes(), x.n_reporters());
  const ReporterId m_n = x.n_reporters();

  Rng gen(config.seed);
  auto perturb = [&](double v) {
    return v * (1.0 + config.init_offset_scale * rand_u01(gen));
  };

  VariationalState state;
  state.gamma_shape.resize(m_n);
  state.gamma_rate.resize(m_n);
  for (ReporterId m = 0; m < m_n; ++m) {
    state.gamma_shape[m] = perturb(hv.alpha[m]);
    state.gamma_rate[m] = perturb(hv.beta[m]);
  }
  state.phi_shape.resize(k_n);
  state.phi_rate.resize(k_n);
  for (std::size_t k = 0; k < k_n; ++k) {
    state.phi_shape[k] = perturb(hv.a[k]);
    state.phi_rate[k] = perturb(hv.b[k]);
  }
  // break label symmetry: level means ascending, so the top level reads as
  // "tie present" from the start
  std::vector<std::size_t> order(k_n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t u, std::size_t v) {
    return state.phi_shape[u] / state.phi_rate[u] <
           state.phi_shape[v] / state.phi_rate[v];
  });
  std::vector<double> ps(k_n), pr(k_n);
  for (std::size_t k = 0; k < k_n; ++k) {
    ps[k] = state.phi_shape[order[k]];
    pr[k] = state.phi_rate[order[k]];
  }
  state.phi_shape = std::move(ps);
  state.phi_rate = std::move(pr);
  state.nu_shape = perturb(hv.c);
  state.nu_rate = perturb(hv.d);

  RhoTable& rho = state.rho;
  rho.log_prior.resize(k_n);
  for (std::size_t k = 0; k < k_n; ++k) rho.log_prior[k] = std::log(hv.p[k]);
  for (const auto& [dyad, p] : hv.p_overrides) {
    std::vector<double> lp(k_n);
    for (std::size_t k = 0; k < k_n; ++k) lp[k] = std::log(p[k]);
    rho.log_prior_overrides.emplace_back(dyad, std::move(lp));
  }
  rho.theta_snapshot.resize(m_n);
  for (ReporterId m = 0; m < m_n; ++m)
    rho.theta_snapshot[m] = hv.alpha[m] / hv.beta[m];
  rho.lambda_snapshot.resize(k_n);
  for (std::size_t k = 0; k < k_n; ++k) rho.lambda_snapshot[k] = hv.a[k] / hv.b[k];
  rho.perturbed_prior_mode = true;
  rho.init_seed = config.seed;
  rho.init_offset = config.init_offset_scale;

  rho.dyads = active_dyads(x);
  rho.values.resize(rho.dyads.size() * k_n);
  std::vector<double> row(k_n);
  for (std::size_t t = 0; t < rho.dyads.size(); ++t) {
    const Dyad d = rho.dyads[t];
    const std::vector<double>* ov = rho.prior_override(d.i, d.j);
    rho.implicit_row(d.i, d.j,
                     ov ? std::span<const double>(*ov)
                        : std::span<const double>(rho.log_prior),
                     0.0, row);
    std::copy(row.begin(), row.end(), rho.values.begin() + t * k_n);
  }
  return state;
}

AuxiliaryResponsibilities update_responsibilities(const VariationalState& state,
                                                  const ReportTensor& x,
                                                  const BoundMask& mask) {
  (void)mask;
  const std::size_t k_n = state.n_levels();
  const std::vector<double> elog_theta =
      digamma_expect(state.gamma_shape, state.gamma_rate);
  const std::vector<double> elog_lambda =
      digamma_expect(state.phi_shape, state.phi_rate);
  const double elog_eta =
      digamma(state.nu_shape) - std::log(state.nu_rate);

  const std::vector<Count> rev = reverse_counts(x);
  std::span<const ReportEntry> entries = x.entries();

  AuxiliaryResponsibilities zhat;
  zhat.n_levels = k_n;
  zhat.z1.assign(entries.size() * k_n, 1.0);
  for (std::size_t e = 0; e < entries.size(); ++e) {
    if (rev[e] == 0) continue;  // no reverse report: all mass on theta*lambda
    const double log_u2 = elog_eta + std::log(static_cast<double>(rev[e]));
    const double lt = elog_theta[entries[e].m];
    for (std::size_t k = 0; k < k_n; ++k) {
      const double diff = lt + elog_lambda[k] - log_u2;
      zhat.z1[e * k_n + k] = 1.0 / (1.0 + std::exp(-diff));
    }
  }
  return zhat;
}

std::pair<std::vector<double>, std::vector<double>> update_theta(
    const VariationalState& state, const AuxiliaryResponsibilities& zhat,
    const ReportTensor& x, const BoundMask& mask, const HyperParams& h) {
  const std::size_t k_n = state.n_levels();
  const ReporterId m_n = x.n_reporters();
  const HyperParams hv = validate_hyperparams(h, k_n, x.n_nodes(), m_n);
  const std::vector<double> lambda_mean = state.lambda_mean();
  const std::vector<double> theta_live = state.theta_mean();

  std::vector<double> shape(hv.alpha.begin(), hv.alpha.end());
  for_each_entry_with_row(state, x, mask,
                          [&](std::size_t e, const ReportEntry& entry,
                              std::span<const double> row) {
                            double s = 0.0;
                            for (std::size_t k = 0; k < k_n; ++k)
                              s += row[k] * zhat.z1_at(e, k);
                            shape[entry.m] += static_cast<double>(entry.x) * s;
                          });

  std::vector<double> rate(hv.beta.begin(), hv.beta.end());
  auto row_rate = [&](std::span<const double> row) {
    double g = 0.0;
    for (std::size_t k = 0; k < k_n; ++k) g += row[k] * lambda_mean[k];
    return g;
  };
  switch (mask.rule()) {
    case MaskRule::SelfDyads:
      sweep_masked_dyads(state.rho, mask, theta_live,
                         [&](NodeId i, NodeId j, std::span<const double> row,
                             std::span<const double>, double, double w) {
                           const double g = w * row_rate(row);
                           if (i < m_n) rate[i] += g;
                           if (j < m_n) rate[j] += g;
                         });
      break;
    case MaskRule::FullRoster: {
      double total = 0.0;
      sweep_masked_dyads(state.rho, mask, theta_live,
                         [&](NodeId, NodeId, std::span<const double> row,
                             std::span<const double>, double, double w) {
                           total += w * row_rate(row);
                         });
      for (ReporterId m = 0; m < m_n; ++m) rate[m] += total;
      break;
    }
    case MaskRule::Custom:
      sweep_masked_dyads(state.rho, mask, theta_live,
                         [&](NodeId i, NodeId j, std::span<const double> row,
                             std::span<const double>, double, double w) {
                           const double g = w * row_rate(row);
                           mask.for_each_eligible_reporter(
                               i, j, [&](ReporterId m) { rate[m] += g; });
                         });
      break;
  }
  return {std::move(shape), std::move(rate)};
}

std::pair<std::vector<double>, std::vector<double>> update_lambda(
    const VariationalState& state, const AuxiliaryResponsibilities& zhat,
    const ReportTensor& x, const BoundMask& mask, const HyperParams& h) {
  const std::size_t k_n = state.n_levels();
  const HyperParams hv =
      validate_hyperparams(h, k_n, x.n_nodes(), x.n_reporters());
  const std::vector<double> theta_live = state.theta_mean();

  std::vector<double> shape(hv.a.begin(), hv.a.end());
  for_each_entry_with_row(state, x, mask,
                          [&](std::size_t e, const ReportEntry& entry,
                              std::span<const double> row) {
                            for (std::size_t k = 0; k < k_n; ++k)
                              shape[k] += row[k] *
                                          static_cast<double>(entry.x) *
                                          zhat.z1_at(e, k);
                          });

  std::vector<double> rate(hv.b.begin(), hv.b.end());
  sweep_masked_dyads(state.rho, mask, theta_live,
                     [&](NodeId, NodeId, std::span<const double> row,
                         std::span<const double>, double s_live, double w) {
                       for (std::size_t k = 0; k < k_n; ++k)
                         rate[k] += w * row[k] * s_live;
                     });
  return {std::move(shape), std::move(rate)};
}

RhoTable update_rho(const VariationalState& state,
                    const AuxiliaryResponsibilities& zhat, const ReportTensor& x,
                    const BoundMask& mask, const HyperParams& h) {
  const std::size_t k_n = state.n_levels();
  const HyperParams hv =
      validate_hyperparams(h, k_n, x.n_nodes(), x.n_reporters());
  const std::vector<double> elog_lambda =
      digamma_expect(state.phi_shape, state.phi_rate);
  const std::vector<double> lambda_mean = state.lambda_mean();
  const std::vector<double> theta_live = state.theta_mean();

  RhoTable rho;
  rho.log_prior.resize(k_n);
  for (std::size_t k = 0; k < k_n; ++k) rho.log_prior[k] = std::log(hv.p[k]);
  for (const auto& [dyad, p] : hv.p_overrides) {
    std::vector<double> lp(k_n);
    for (std::size_t k = 0; k < k_n; ++k) lp[k] = std::log(p[k]);
    rho.log_prior_overrides.emplace_back(dyad, std::move(lp));
  }
  rho.theta_snapshot = theta_live;
  rho.lambda_snapshot = lambda_mean;
  rho.perturbed_prior_mode = false;

  rho.dyads = active_dyads(x);
  rho.values.assign(rho.dyads.size() * k_n, 0.0);

  // log-scores: prior + positive-report part; the zero part enters through
  // the eligible-theta sum
  std::vector<double> scores(k_n);
  std::span<const ReportEntry> entries = x.entries();
  std::size_t e = 0;
  for (std::size_t t = 0; t < rho.dyads.size(); ++t) {
    const Dyad d = rho.dyads[t];
    const std::vector<double>* ov = rho.prior_override(d.i, d.j);
    const std::vector<double>& logp = ov ? *ov : rho.log_prior;
    const double s_live = mask.eligible_sum(d.i, d.j, theta_live);
    for (std::size_t k = 0; k < k_n; ++k)
      scores[k] = logp[k] - lambda_mean[k] * s_live;
    for (; e < entries.size() && Dyad{entries[e].i, entries[e].j} == d; ++e)
      for (std::size_t k = 0; k < k_n; ++k)
        scores[k] += static_cast<double>(entries[e].x) * zhat.z1_at(e, k) *
                     elog_lambda[k];
    double best = *std::max_element(scores.begin(), scores.end());
    double total = 0.0;
    for (std::size_t k = 0; k < k_n; ++k) {
      scores[k] = std::exp(scores[k] - best);
      total += scores[k];
    }
    for (std::size_t k = 0; k < k_n; ++k)
      rho.values[t * k_n + k] = scores[k] / total;
  }
  return rho;
}

std::pair<double, double> update_eta(const VariationalState& state,
                                     const AuxiliaryResponsibilities& zhat,
                                     const ReportTensor& x, const BoundMask& mask,
                                     const HyperParams& h) {
  const std::size_t k_n = state.n_levels();
  const HyperParams hv =
      validate_hyperparams(h, k_n, x.n_nodes(), x.n_reporters());
  double shape = hv.c;
  for_each_entry_with_row(state, x, mask,
                          [&](std::size_t e, const ReportEntry& entry,
                              std::span<const double> row) {
                            double s = 0.0;
                            for (std::size_t k = 0; k < k_n; ++k)
                              s += row[k] * zhat.z2_at(e, k);
                            shape += static_cast<double>(entry.x) * s;
                          });
  return {shape, hv.d + reverse_mass(x, mask)};
}

double compute_elbo(const VariationalState& state, const ReportTensor& x,
                    const BoundMask& mask, const HyperParams& h) {
  check_state_finite(state);
  const std::size_t k_n = state.n_levels();
  const HyperParams hv =
      validate_hyperparams(h, k_n, x.n_nodes(), x.n_reporters());

  const std::vector<double> elog_theta =
      digamma_expect(state.gamma_shape, state.gamma_rate);
  const std::vector<double> elog_lambda =
      digamma_expect(state.phi_shape, state.phi_rate);
  const double elog_eta = digamma(state.nu_shape) - std::log(state.nu_rate);
  const std::vector<double> lambda_mean = state.lambda_mean();
  const std::vector<double> theta_live = state.theta_mean();
  const double eta_mean = state.eta_mean();

  double elbo = 0.0;

  // positive reports: x * E[log mu] with the log split across the two
  // channels, each weighted by its responsibility share profiled at this
  // state. Entries without a reverse report have z1 = 1 so the mutuality
  // channel (and its log X_jim) never enters.
  const AuxiliaryResponsibilities zhat =
      update_responsibilities(state, x, mask);
  const std::vector<Count> rev = reverse_counts(x);
  std::vector<double> row(k_n);
  {
    std::span<const ReportEntry> entries = x.entries();
    Dyad current{0, 0};
    bool have_row = false;
    for (std::size_t e = 0; e < entries.size(); ++e) {
      const ReportEntry& entry = entries[e];
      if (!have_row || current != Dyad{entry.i, entry.j}) {
        current = {entry.i, entry.j};
        state.rho.row(entry.i, entry.j, mask, row);
        have_row = true;
      }
      const double mut = rev[e] > 0
          ? elog_eta + std::log(static_cast<double>(rev[e]))
          : 0.0;
      double s = 0.0;
      for (std::size_t k = 0; k < k_n; ++k) {
        const double z1 = zhat.z1_at(e, k);
        const double z2 = 1.0 - z1;
        // channel weights carry the multinomial q(z) entropy; both extra
        // terms vanish exactly when there is no reverse report (z1 = 1)
        s += row[k] * (z1 * (elog_theta[entry.m] + elog_lambda[k]) - xlogx(z1) +
                       z2 * mut - xlogx(z2));
      }
      elbo += static_cast<double>(entry.x) * s;
    }
  }

  // -E[mu] over every eligible triple, plus the categorical cross-entropy
  double dyad_terms = 0.0;
  sweep_masked_dyads(
      state.rho, mask, theta_live,
      [&](NodeId, NodeId, std::span<const double> r,
          std::span<const double> logp, double s_live, double w) {
        double t = 0.0;
        for (std::size_t k = 0; k < k_n; ++k) {
          t -= r[k] * lambda_mean[k] * s_live;
          t += r[k] * logp[k] - xlogx(r[k]);
        }
        dyad_terms += w * t;
      });
  elbo += dyad_terms;
  elbo -= eta_mean * reverse_mass(x, mask);

  // Gamma prior cross terms minus Gamma entropies, per factor
  auto gamma_term = [](double prior_shape, double prior_rate, double shape,
                       double rate) {
    return digamma(shape) * (prior_shape - shape) + log_gamma(shape) -
           prior_shape * std::log(rate) + shape * (1.0 - prior_rate / rate);
  };
  elbo += gamma_term(hv.c, hv.d, state.nu_shape, state.nu_rate);
  for (std::size_t k = 0; k < k_n; ++k)
    elbo += gamma_term(hv.a[k], hv.b[k], state.phi_shape[k], state.phi_rate[k]);
  for (std::size_t m = 0; m < state.gamma_shape.size(); ++m)
    elbo +=
        gamma_term(hv.alpha[m], hv.beta[m], state.gamma_shape[m],
                   state.gamma_rate[m]);

  if (!std::isfinite(elbo)) fail(ErrorCode::NonFiniteElbo, "ELBO is not finite");
  return elbo;
}

namespace {

void relabel_levels_ascending(VariationalState& state) {
  const std::size_t k_n = state.n_levels();
  std::vector<std::size_t> order(k_n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t u, std::size_t v) {
    return state.phi_shape[u] / state.phi_rate[u] <
           state.phi_shape[v] / state.phi_rate[v];
  });
  bool identity = true;
  for (std::size_t k = 0; k < k_n; ++k) identity &= order[k] == k;
  if (identity) return;

  auto permute = [&](std::vector<double>& v) {
    std::vector<double> out(k_n);
    for (std::size_t k = 0; k < k_n; ++k) out[k] = v[order[k]];
    v = std::move(out);
  };
  permute(state.phi_shape);
  permute(state.phi_rate);
  permute(state.rho.log_prior);
  permute(state.rho.lambda_snapshot);
  for (auto& [dyad, lp] : state.rho.log_prior_overrides) permute(lp);
  std::vector<double> tmp(k_n);
  for (std::size_t t = 0; t < state.rho.dyads.size(); ++t) {
    double* r = state.rho.values.data() + t * k_n;
    for (std::size_t k = 0; k < k_n; ++k) tmp[k] = r[order[k]];
    std::copy(tmp.begin(), tmp.end(), r);
  }
}

void validate_tensor_in_mask(const ReportTensor& x, const BoundMask& mask) {
  for (const ReportEntry& e : x.entries())
    if (!mask.contains(e.i, e.j, e.m)) {
      std::ostringstream os;
      os << "stored report (" << e.i << ", " << e.j << ", " << e.m
         << ") outside the reporter mask";
      fail(ErrorCode::MaskViolation, os.str());
    }
}

}  // namespace

FitResult fit(const ReportTensor& x, const ReporterMask& mask,
              const HyperParams& h, const FitConfig& config) {
  const BoundMask bound(mask, x.n_nodes(), x.n_reporters());
  validate_tensor_in_mask(x, bound);
  const HyperParams hv =
      validate_hyperparams(h, config.n_levels, x.n_nodes(), x.n_reporters());

  FitResult result;
  VariationalState state = init_state(hv, x, bound, config);

  double prev_elbo = 0.0;
  bool have_prev = false;
  for (std::size_t it = 1; it <= config.max_iterations; ++it) {
    AuxiliaryResponsibilities zhat = update_responsibilities(state, x, bound);
    auto [gs, gr] = update_theta(state, zhat, x, bound, hv);
    state.gamma_shape = std::move(gs);
    state.gamma_rate = std::move(gr);
    auto [ps, pr] = update_lambda(state, zhat, x, bound, hv);
    state.phi_shape = std::move(ps);
    state.phi_rate = std::move(pr);
    state.rho = update_rho(state, zhat, x, bound, hv);
    auto [ns, nr] = update_eta(state, zhat, x, bound, hv);
    state.nu_shape = ns;
    state.nu_rate = nr;
    result.n_iterations = it;

    if (it % config.elbo_check_every != 0) continue;
    const double elbo = compute_elbo(state, x, bound, hv);
    result.elbo_trace.push_back(elbo);
    if (have_prev) {
      if (elbo < prev_elbo - config.monotonicity_tol * std::fabs(prev_elbo)) {
        std::ostringstream os;
        os << "ELBO decreased beyond tolerance at iteration " << it << ": "
           << prev_elbo << " -> " << elbo;
        result.warnings.push_back(os.str());
      }
      if (std::fabs(elbo - prev_elbo) <
          config.elbo_rel_tol * std::fabs(elbo)) {
        result.converged = true;
        prev_elbo = elbo;
        break;
      }
    }
    prev_elbo = elbo;
    have_prev = true;
  }

  relabel_levels_ascending(state);
  result.eta_est = state.eta_mean();
  result.theta_est = state.theta_mean();
  if (result.eta_est >= 1.0)
    result.warnings.push_back(
        "eta_est >= 1: outside the generative range; interpret with care");
  result.state = std::move(state);
  return result;
}

FitResult two_step_fit(const ReportTensor& x, const ReporterMask& mask,
                       const HyperParams& h, const FitConfig& config) {
  const HyperParams hv =
      validate_hyperparams(h, config.n_levels, x.n_nodes(), x.n_reporters());
  FitResult step1 = fit(x, mask, hv, config);

  HyperParams refined = hv;
  for (std::size_t m = 0; m < refined.alpha.size(); ++m)
    refined.alpha[m] =
        config.two_step_scale * step1.theta_est[m] * refined.beta[m];
  FitResult step2 = fit(x, mask, refined, config);
  step2.first_stage = std::make_shared<FitResult>(std::move(step1));
  return step2;
}

double point_estimate_threshold(double eta_est) {
  return std::clamp(0.54 * eta_est - 0.01, 0.05, 0.75);
}

BinaryNetwork point_estimate(const VariationalState& state, const BoundMask& mask,
                             std::optional<double> override_threshold) {
  if (state.n_levels() != 2)
    fail(ErrorCode::UnsupportedK,
         "binary point estimate requires exactly two levels");
  const double t = override_threshold ? *override_threshold
                                      : point_estimate_threshold(state.eta_mean());
  BinaryNetwork net;
  net.n_nodes = mask.n_nodes();
  std::vector<double> row(2);
  const double p1 = std::exp(state.rho.log_prior[1]);
  for (NodeId i = 0; i < mask.n_nodes(); ++i)
    for (NodeId j = 0; j < mask.n_nodes(); ++j) {
      if (i == j) continue;
      if (mask.n_eligible(i, j) == 0) {
        const std::vector<double>* ov = state.rho.prior_override(i, j);
        const double prior1 = ov ? std::exp((*ov)[1]) : p1;
        if (prior1 >= t) net.edges.push_back({i, j});
        continue;
      }
      state.rho.row(i, j, mask, row);
      if (row[1] >= t) net.edges.push_back({i, j});
    }
  return net;
}

}  // namespace netrecon
