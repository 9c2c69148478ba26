#ifndef NETRECON_TESTS_ORACLE_HPP
#define NETRECON_TESTS_ORACLE_HPP

// Independent dense transcription of the complete-conditional expectation
// parameters and the ELBO closed form. Everything here loops over the full
// (i, j, m, k) box with masked terms, reads X through point lookups and uses
// the GSL digamma, so it shares no numerical path with the sparse production
// code it cross-checks.

#include <gsl/gsl_sf_psi.h>

#include <cmath>
#include <random>
#include <vector>

#include "netrecon/state.hpp"
#include "netrecon/types.hpp"

namespace oracle {

using namespace netrecon;

struct DenseRho {
  // rho for every ordered dyad, [i][j] -> K values (empty where undefined)
  std::vector<std::vector<std::vector<double>>> rows;
};

inline DenseRho materialize_rho(const VariationalState& state,
                                const BoundMask& mask) {
  const NodeId n = mask.n_nodes();
  DenseRho out;
  out.rows.assign(n, std::vector<std::vector<double>>(n));
  std::vector<double> row(state.n_levels());
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = 0; j < n; ++j) {
      if (i == j || mask.n_eligible(i, j) == 0) continue;
      state.rho.row(i, j, mask, row);
      out.rows[i][j] = {row.begin(), row.end()};
    }
  return out;
}

inline double elog_gamma(double shape, double rate) {
  return gsl_sf_psi(shape) - std::log(rate);
}

inline std::vector<double> prior_row(const HyperParams& h, NodeId i, NodeId j) {
  for (const auto& [dyad, p] : h.p_overrides)
    if (dyad.i == i && dyad.j == j) return p;
  return h.p;
}

// z1 for one (i, j, m, k); z2 is its complement.
inline double z1_value(const VariationalState& s, const ReportTensor& x,
                       NodeId i, NodeId j, ReporterId m, std::size_t k) {
  const Count xrev = x.count(j, i, m);
  if (xrev == 0) return 1.0;
  const double u1 = std::exp(elog_gamma(s.gamma_shape[m], s.gamma_rate[m]) +
                             elog_gamma(s.phi_shape[k], s.phi_rate[k]));
  const double u2 = static_cast<double>(xrev) *
                    std::exp(elog_gamma(s.nu_shape, s.nu_rate));
  return u1 / (u1 + u2);
}

inline std::pair<std::vector<double>, std::vector<double>> theta_update(
    const VariationalState& s, const ReportTensor& x, const BoundMask& mask,
    const HyperParams& h, const DenseRho& rho) {
  const std::size_t K = s.n_levels();
  std::vector<double> shape(h.alpha), rate(h.beta);
  for (ReporterId m = 0; m < x.n_reporters(); ++m)
    for (NodeId i = 0; i < x.n_nodes(); ++i)
      for (NodeId j = 0; j < x.n_nodes(); ++j) {
        if (i == j || !mask.contains(i, j, m)) continue;
        const double xv = static_cast<double>(x.count(i, j, m));
        for (std::size_t k = 0; k < K; ++k) {
          shape[m] += rho.rows[i][j][k] * xv * z1_value(s, x, i, j, m, k);
          rate[m] += rho.rows[i][j][k] * s.phi_shape[k] / s.phi_rate[k];
        }
      }
  return {shape, rate};
}

inline std::pair<std::vector<double>, std::vector<double>> lambda_update(
    const VariationalState& s, const ReportTensor& x, const BoundMask& mask,
    const HyperParams& h, const DenseRho& rho) {
  const std::size_t K = s.n_levels();
  std::vector<double> shape(h.a), rate(h.b);
  for (std::size_t k = 0; k < K; ++k)
    for (NodeId i = 0; i < x.n_nodes(); ++i)
      for (NodeId j = 0; j < x.n_nodes(); ++j)
        for (ReporterId m = 0; m < x.n_reporters(); ++m) {
          if (i == j || !mask.contains(i, j, m)) continue;
          const double xv = static_cast<double>(x.count(i, j, m));
          shape[k] += rho.rows[i][j][k] * xv * z1_value(s, x, i, j, m, k);
          rate[k] += rho.rows[i][j][k] * s.gamma_shape[m] / s.gamma_rate[m];
        }
  return {shape, rate};
}

inline DenseRho rho_update(const VariationalState& s, const ReportTensor& x,
                           const BoundMask& mask, const HyperParams& h) {
  const std::size_t K = s.n_levels();
  const NodeId n = x.n_nodes();
  DenseRho out;
  out.rows.assign(n, std::vector<std::vector<double>>(n));
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = 0; j < n; ++j) {
      if (i == j || mask.n_eligible(i, j) == 0) continue;
      const std::vector<double> p = prior_row(h, i, j);
      std::vector<double> score(K);
      for (std::size_t k = 0; k < K; ++k) {
        score[k] = std::log(p[k]);
        for (ReporterId m = 0; m < x.n_reporters(); ++m) {
          if (!mask.contains(i, j, m)) continue;
          const double xv = static_cast<double>(x.count(i, j, m));
          score[k] += xv * z1_value(s, x, i, j, m, k) *
                      elog_gamma(s.phi_shape[k], s.phi_rate[k]);
          score[k] -= s.phi_shape[k] / s.phi_rate[k] * s.gamma_shape[m] /
                      s.gamma_rate[m];
        }
      }
      double total = 0.0;
      std::vector<double> row(K);
      for (std::size_t k = 0; k < K; ++k) {
        row[k] = std::exp(score[k]);
        total += row[k];
      }
      for (std::size_t k = 0; k < K; ++k) row[k] /= total;
      out.rows[i][j] = row;
    }
  return out;
}

inline std::pair<double, double> eta_update(const VariationalState& s,
                                            const ReportTensor& x,
                                            const BoundMask& mask,
                                            const HyperParams& h,
                                            const DenseRho& rho) {
  const std::size_t K = s.n_levels();
  double shape = h.c, rate = h.d;
  for (NodeId i = 0; i < x.n_nodes(); ++i)
    for (NodeId j = 0; j < x.n_nodes(); ++j)
      for (ReporterId m = 0; m < x.n_reporters(); ++m) {
        if (i == j || !mask.contains(i, j, m)) continue;
        const double xv = static_cast<double>(x.count(i, j, m));
        for (std::size_t k = 0; k < K; ++k)
          shape += rho.rows[i][j][k] * xv *
                   (1.0 - z1_value(s, x, i, j, m, k));
        rate += static_cast<double>(x.count(j, i, m));
      }
  return {shape, rate};
}

inline double elbo(const VariationalState& s, const ReportTensor& x,
                   const BoundMask& mask, const HyperParams& h,
                   const DenseRho& rho) {
  const std::size_t K = s.n_levels();
  const double elog_eta = elog_gamma(s.nu_shape, s.nu_rate);
  const double eta_mean = s.nu_shape / s.nu_rate;
  double acc = 0.0;
  for (NodeId i = 0; i < x.n_nodes(); ++i)
    for (NodeId j = 0; j < x.n_nodes(); ++j) {
      if (i == j || mask.n_eligible(i, j) == 0) continue;
      for (ReporterId m = 0; m < x.n_reporters(); ++m) {
        if (!mask.contains(i, j, m)) continue;
        const double xv = static_cast<double>(x.count(i, j, m));
        const double xrev = static_cast<double>(x.count(j, i, m));
        for (std::size_t k = 0; k < K; ++k) {
          const double z1 = z1_value(s, x, i, j, m, k);
          const double z2 = 1.0 - z1;
          double log_mu = z1 * (elog_gamma(s.gamma_shape[m], s.gamma_rate[m]) +
                                elog_gamma(s.phi_shape[k], s.phi_rate[k]));
          if (z1 > 0.0) log_mu -= z1 * std::log(z1);
          if (xrev > 0.0 && z2 > 0.0)
            log_mu += z2 * (elog_eta + std::log(xrev) - std::log(z2));
          const double e_mu = s.gamma_shape[m] / s.gamma_rate[m] *
                                  s.phi_shape[k] / s.phi_rate[k] +
                              eta_mean * xrev;
          acc += rho.rows[i][j][k] * (xv * log_mu - e_mu);
        }
      }
      const std::vector<double> p = prior_row(h, i, j);
      for (std::size_t k = 0; k < K; ++k) {
        const double r = rho.rows[i][j][k];
        if (r > 0.0) acc += r * (std::log(p[k]) - std::log(r));
      }
    }
  auto gamma_part = [](double ps, double pr, double qs, double qr) {
    return gsl_sf_psi(qs) * (ps - qs) + std::lgamma(qs) - ps * std::log(qr) +
           qs * (1.0 - pr / qr);
  };
  acc += gamma_part(h.c, h.d, s.nu_shape, s.nu_rate);
  for (std::size_t k = 0; k < K; ++k)
    acc += gamma_part(h.a[k], h.b[k], s.phi_shape[k], s.phi_rate[k]);
  for (ReporterId m = 0; m < x.n_reporters(); ++m)
    acc += gamma_part(h.alpha[m], h.beta[m], s.gamma_shape[m], s.gamma_rate[m]);
  return acc;
}

// Random N=3, M=3, K=2 instance over the three mask rules, with a random
// snapshot-mode state whose explicit rows sometimes cover every masked dyad.
struct Instance {
  ReportTensor x;
  ReporterMask mask;
  BoundMask bound;
  HyperParams h;
  VariationalState state;
};

inline Instance random_instance(std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  auto u = [&](double lo, double hi) {
    return lo + (hi - lo) * std::generate_canonical<double, 53>(gen);
  };
  const NodeId n = 3;
  const ReporterId m_n = 3;
  const std::size_t K = 2;

  ReporterMask mask;
  switch (gen() % 3) {
    case 0: mask = ReporterMask::self_dyads(); break;
    case 1: mask = ReporterMask::full_roster(); break;
    default: {
      std::vector<MaskEntry> entries;
      for (NodeId i = 0; i < n; ++i)
        for (NodeId j = 0; j < n; ++j)
          for (ReporterId m = 0; m < m_n; ++m)
            if (i != j && gen() % 3 != 0) entries.push_back({i, j, m});
      if (entries.empty()) entries.push_back({0, 1, 0});
      mask = ReporterMask::custom(std::move(entries));
    }
  }
  BoundMask bound(mask, n, m_n);

  std::vector<ReportEntry> entries;
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = 0; j < n; ++j)
      for (ReporterId m = 0; m < m_n; ++m)
        if (i != j && bound.contains(i, j, m) && gen() % 2 == 0)
          entries.push_back({i, j, m, 1 + gen() % 4});
  ReportTensor x(n, m_n, entries);

  HyperParams h;
  h.alpha = {u(0.3, 2.5), u(0.3, 2.5), u(0.3, 2.5)};
  h.beta = {u(0.3, 2.5), u(0.3, 2.5), u(0.3, 2.5)};
  h.a = {u(0.3, 2.5), u(0.3, 2.5)};
  h.b = {u(0.3, 2.5), u(0.3, 2.5)};
  h.c = u(0.3, 2.5);
  h.d = u(0.3, 2.5);
  const double p1 = u(0.2, 0.8);
  h.p = {1.0 - p1, p1};
  if (gen() % 2 == 0) {
    const double q1 = u(0.2, 0.8);
    h.p_overrides.push_back({{0, 2}, {1.0 - q1, q1}});
  }
  h = validate_hyperparams(h, K, n, m_n);

  VariationalState s;
  for (ReporterId m = 0; m < m_n; ++m) {
    s.gamma_shape.push_back(u(0.4, 3.0));
    s.gamma_rate.push_back(u(0.4, 3.0));
  }
  for (std::size_t k = 0; k < K; ++k) {
    s.phi_shape.push_back(u(0.4, 3.0));
    s.phi_rate.push_back(u(0.4, 3.0));
  }
  s.nu_shape = u(0.4, 3.0);
  s.nu_rate = u(0.4, 3.0);

  RhoTable& rho = s.rho;
  rho.log_prior = {std::log(h.p[0]), std::log(h.p[1])};
  for (const auto& [dyad, p] : h.p_overrides)
    rho.log_prior_overrides.push_back({dyad, {std::log(p[0]), std::log(p[1])}});
  for (ReporterId m = 0; m < m_n; ++m) rho.theta_snapshot.push_back(u(0.3, 2.0));
  for (std::size_t k = 0; k < K; ++k) rho.lambda_snapshot.push_back(u(0.3, 2.0));
  rho.perturbed_prior_mode = false;

  const bool explicit_everywhere = gen() % 2 == 0;
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = 0; j < n; ++j) {
      if (i == j || bound.n_eligible(i, j) == 0) continue;
      auto [lo, hi] = x.dyad_range(i, j);
      if (!explicit_everywhere && lo == hi) continue;
      rho.dyads.push_back({i, j});
      const double r1 = u(0.05, 0.95);
      rho.values.push_back(1.0 - r1);
      rho.values.push_back(r1);
    }

  return {std::move(x), std::move(mask), std::move(bound), std::move(h),
          std::move(s)};
}

}  // namespace oracle

#endif
