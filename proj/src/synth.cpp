#include "netrecon/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "netrecon/rng.hpp"

namespace netrecon {

void SynthConfig::check() const {
  if (n_nodes < 2) fail(ErrorCode::InvalidConfig, "need at least two nodes");
  if (n_communities < 1 || static_cast<NodeId>(n_communities) > n_nodes)
    fail(ErrorCode::InvalidConfig, "invalid community count");
  if (!(avg_degree > 0.0)) fail(ErrorCode::InvalidConfig, "avg_degree must be positive");
  const double pin = p_in();
  if (!(pin > 0.0) || pin > 1.0)
    fail(ErrorCode::InvalidProbability, "p_in = <k>*C/N must lie in (0, 1]");
  if (!(p_out_ratio >= 0.0)) fail(ErrorCode::InvalidConfig, "p_out_ratio must be >= 0");
  if (!(theta_ratio >= 0.0 && theta_ratio <= 0.5))
    fail(ErrorCode::InvalidConfig, "theta_ratio must lie in [0, 0.5]");
  if (!(eta_planted >= 0.0 && eta_planted < 1.0))
    fail(ErrorCode::InvalidProbability, "eta_planted must lie in [0, 1)");
  if (!(lambda0 >= 0.0)) fail(ErrorCode::InvalidConfig, "lambda0 must be >= 0");
  if (!(lambda_diff > 0.0)) fail(ErrorCode::InvalidConfig, "lambda_diff must be > 0");
}

namespace {

// Pareto draw with pdf ~ x^-exponent on [1, inf), truncated at 50 before the
// mean-1 normalization.
std::vector<double> dc_propensities(Rng& gen, std::size_t n, double exponent) {
  std::vector<double> s(n);
  for (double& v : s) {
    double u = rand_u01(gen);
    v = std::min(std::pow(1.0 - u, -1.0 / (exponent - 1.0)), 50.0);
  }
  double mean = std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(n);
  for (double& v : s) v /= mean;
  return s;
}

}  // namespace

GroundTruth generate_ground_truth(const SynthConfig& cfg) {
  cfg.check();
  Rng gen(cfg.seed);
  const NodeId n = cfg.n_nodes;
  const ReporterId m = cfg.n_reporters;

  GroundTruth gt;
  gt.n_nodes = n;
  gt.communities.resize(n);
  for (NodeId i = 0; i < n; ++i)
    gt.communities[i] = static_cast<int>(
        (static_cast<std::uint64_t>(i) * cfg.n_communities) / n);

  std::vector<double> s_in(n, 1.0), s_out(n, 1.0);
  if (cfg.degree_correction == DegreeCorrection::PowerLaw) {
    s_in = dc_propensities(gen, n, cfg.dc_in_exponent);
    s_out = dc_propensities(gen, n, cfg.dc_out_exponent);
  }

  const double pin = cfg.p_in();
  const double pout = cfg.p_out_ratio * pin;
  gt.y.n_nodes = n;
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = 0; j < n; ++j) {
      if (i == j) continue;
      double p = (gt.communities[i] == gt.communities[j]) ? pin : pout;
      p = std::min(p * s_out[i] * s_in[j], 1.0);
      if (rand_bernoulli(gen, p)) gt.y.edges.push_back({i, j});
    }
  gt.y.normalize();

  gt.theta.assign(m, 1.0);
  switch (cfg.scenario) {
    case Scenario::OverReporters:
    case Scenario::UnderReporters: {
      const double tagged_value = cfg.scenario == Scenario::OverReporters
                                      ? cfg.theta_over
                                      : cfg.theta_under;
      const std::size_t n_tagged =
          static_cast<std::size_t>(cfg.theta_ratio * static_cast<double>(m));
      std::vector<ReporterId> ids(m);
      std::iota(ids.begin(), ids.end(), 0);
      for (std::size_t t = m; t > 1; --t)
        std::swap(ids[t - 1],
                  ids[static_cast<std::size_t>(rand_u01(gen) * static_cast<double>(t))]);
      for (std::size_t t = 0; t < n_tagged; ++t) gt.theta[ids[t]] = tagged_value;
      gt.deterministic_reliable = true;
      break;
    }
    case Scenario::GammaTheta:
      for (ReporterId r = 0; r < m; ++r)
        gt.theta[r] = rand_gamma(gen, cfg.theta_gamma_shape, cfg.theta_gamma_rate);
      gt.deterministic_reliable = false;
      break;
  }

  gt.lambda = {cfg.lambda0, cfg.lambda0 + cfg.lambda_diff};
  gt.eta = cfg.eta_planted;
  gt.check();
  return gt;
}

ReportTensor generate_reports(const GroundTruth& gt, const ReporterMask& mask,
                              ReporterId n_reporters, std::uint64_t seed) {
  gt.check();
  const NodeId n = gt.n_nodes;
  const BoundMask bound(mask, n, n_reporters);
  if (gt.theta.size() < n_reporters)
    fail(ErrorCode::ShapeMismatch, "ground truth has too few reliabilities");
  Rng gen(seed);

  const double eta = gt.eta;
  const double denom = 1.0 - eta * eta;

  // transpose of the edge list for per-row incoming marks
  std::vector<Dyad> in_edges(gt.y.edges);
  std::sort(in_edges.begin(), in_edges.end(),
            [](const Dyad& a, const Dyad& b) {
              return std::tie(a.j, a.i) < std::tie(b.j, b.i);
            });

  std::vector<ReportEntry> entries;
  std::vector<std::uint8_t> row_out(n, 0), row_in(n, 0);
  std::size_t out_lo = 0, in_lo = 0;
  std::vector<ReporterId> eligible;
  for (NodeId i = 0; i < n; ++i) {
    std::size_t out_hi = out_lo, in_hi = in_lo;
    while (out_hi < gt.y.edges.size() && gt.y.edges[out_hi].i == i) {
      row_out[gt.y.edges[out_hi].j] = 1;
      ++out_hi;
    }
    while (in_hi < in_edges.size() && in_edges[in_hi].j == i) {
      row_in[in_edges[in_hi].i] = 1;
      ++in_hi;
    }

    for (NodeId j = i + 1; j < n; ++j) {
      const int y_ij = row_out[j];
      const int y_ji = row_in[j];
      eligible.clear();
      bound.for_each_eligible_reporter(i, j, [&](ReporterId r) {
        eligible.push_back(r);
      });
      bound.for_each_eligible_reporter(j, i, [&](ReporterId r) {
        if (!bound.contains(i, j, r)) eligible.push_back(r);
      });
      for (ReporterId m : eligible) {
        const double theta = gt.theta[m];
        const bool forward_first = rand_u01(gen) < 0.5;
        const double lam_first = gt.lambda[forward_first ? y_ij : y_ji];
        const double lam_second = gt.lambda[forward_first ? y_ji : y_ij];
        const double mu_first = theta * (lam_first + eta * lam_second) / denom;
        Count x_first, x_second;
        if (gt.deterministic_reliable && theta == 1.0) {
          x_first = static_cast<Count>(std::llround(mu_first));
          x_second = static_cast<Count>(std::llround(
              theta * lam_second + eta * static_cast<double>(x_first)));
        } else {
          x_first = rand_poisson(gen, mu_first);
          x_second = rand_poisson(
              gen, theta * lam_second + eta * static_cast<double>(x_first));
        }
        const NodeId a = forward_first ? i : j;
        const NodeId b = forward_first ? j : i;
        if (x_first > 0 && bound.contains(a, b, m))
          entries.push_back({a, b, m, x_first});
        if (x_second > 0 && bound.contains(b, a, m))
          entries.push_back({b, a, m, x_second});
      }
    }

    for (std::size_t t = out_lo; t < out_hi; ++t) row_out[gt.y.edges[t].j] = 0;
    for (std::size_t t = in_lo; t < in_hi; ++t) row_in[in_edges[t].i] = 0;
    out_lo = out_hi;
    in_lo = in_hi;
  }

  return ReportTensor(n, n_reporters, std::move(entries));
}

GroundTruth planted_reciprocity_target(const SynthConfig& cfg, double target,
                                       double tol, double* achieved) {
  if (!(target >= 0.0 && target <= 1.0))
    fail(ErrorCode::InvalidConfig, "reciprocity target must lie in [0, 1]");
  if (cfg.n_nodes > 4096)
    fail(ErrorCode::InvalidConfig,
         "reciprocity targeting is meant for benchmark-scale networks");

  const NodeId n = cfg.n_nodes;
  const std::size_t max_attempts = 20;
  const std::size_t budget =
      static_cast<std::size_t>(n) * (n - 1) / 8;  // quarter of the dyads

  for (std::size_t attempt = 0; attempt < max_attempts; ++attempt) {
    SynthConfig c = cfg;
    c.seed = cfg.seed + attempt;
    GroundTruth gt = generate_ground_truth(c);
    Rng gen(splitmix64(c.seed) ^ 0x5bd1e995);

    std::vector<std::uint8_t> adj(static_cast<std::size_t>(n) * n, 0);
    for (const Dyad& e : gt.y.edges) adj[static_cast<std::size_t>(e.i) * n + e.j] = 1;
    auto at = [&](NodeId i, NodeId j) -> std::uint8_t& {
      return adj[static_cast<std::size_t>(i) * n + j];
    };

    std::size_t ops = 0;
    for (;;) {
      std::vector<Dyad> asym, mutual;
      std::size_t edges = 0;
      for (NodeId i = 0; i < n; ++i)
        for (NodeId j = 0; j < n; ++j) {
          if (i == j || !at(i, j)) continue;
          ++edges;
          if (at(j, i)) {
            if (i < j) mutual.push_back({i, j});
          } else {
            asym.push_back({i, j});
          }
        }
      const double recip =
          edges == 0 ? 0.0
                     : static_cast<double>(2 * mutual.size()) /
                           static_cast<double>(edges);
      if (std::fabs(recip - target) <= tol) {
        gt.y.edges.clear();
        for (NodeId i = 0; i < n; ++i)
          for (NodeId j = 0; j < n; ++j)
            if (i != j && at(i, j)) gt.y.edges.push_back({i, j});
        gt.y.normalize();
        if (achieved) *achieved = recip;
        return gt;
      }
      if (ops >= budget) break;
      if (recip < target) {
        if (asym.empty()) break;
        const Dyad d = asym[static_cast<std::size_t>(
            rand_u01(gen) * static_cast<double>(asym.size()))];
        at(d.j, d.i) = 1;
      } else {
        if (mutual.empty()) break;
        const Dyad d = mutual[static_cast<std::size_t>(
            rand_u01(gen) * static_cast<double>(mutual.size()))];
        if (rand_bernoulli(gen, 0.5))
          at(d.i, d.j) = 0;
        else
          at(d.j, d.i) = 0;
      }
      ++ops;
    }
  }
  fail(ErrorCode::TargetUnreachable,
       "could not adjust reciprocity to the target within the attempt budget");
}

}  // namespace netrecon
