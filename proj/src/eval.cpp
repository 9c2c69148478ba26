#include "netrecon/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace netrecon {

BinaryNetwork union_baseline(const ReportTensor& x, const BoundMask& mask) {
  (void)mask;  // stored entries already satisfy the mask
  BinaryNetwork net;
  net.n_nodes = x.n_nodes();
  for (const ReportEntry& e : x.entries())
    if (net.edges.empty() || net.edges.back() != Dyad{e.i, e.j})
      net.edges.push_back({e.i, e.j});
  net.normalize();
  return net;
}

BinaryNetwork intersection_baseline(const ReportTensor& x, const BoundMask& mask) {
  BinaryNetwork net;
  net.n_nodes = x.n_nodes();
  std::span<const ReportEntry> entries = x.entries();
  std::size_t e = 0;
  while (e < entries.size()) {
    const Dyad d{entries[e].i, entries[e].j};
    std::size_t positive = 0;
    while (e < entries.size() && Dyad{entries[e].i, entries[e].j} == d) {
      ++positive;
      ++e;
    }
    const std::size_t eligible = mask.n_eligible(d.i, d.j);
    if (eligible > 0 && positive == eligible) net.edges.push_back(d);
  }
  return net;
}

double f1_score(const BinaryNetwork& estimate, const BinaryNetwork& truth) {
  if (estimate.n_nodes != truth.n_nodes)
    fail(ErrorCode::ShapeMismatch, "networks have different sizes");
  std::size_t common = 0;
  auto a = estimate.edges.begin();
  auto b = truth.edges.begin();
  while (a != estimate.edges.end() && b != truth.edges.end()) {
    if (*a < *b)
      ++a;
    else if (*b < *a)
      ++b;
    else {
      ++common;
      ++a;
      ++b;
    }
  }
  if (estimate.edges.empty() || truth.edges.empty()) return 0.0;
  const double precision =
      static_cast<double>(common) / static_cast<double>(estimate.edges.size());
  const double recall =
      static_cast<double>(common) / static_cast<double>(truth.edges.size());
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

double reciprocity(const BinaryNetwork& net) {
  if (net.edges.empty()) return 0.0;
  std::size_t mutual = 0;
  for (const Dyad& e : net.edges)
    if (net.has_edge(e.j, e.i)) ++mutual;
  return static_cast<double>(mutual) / static_cast<double>(net.edges.size());
}

double transitivity(const BinaryNetwork& net, TransitivityKind kind) {
  const NodeId n = net.n_nodes;
  if (kind == TransitivityKind::Undirected) {
    // symmetrized neighbor lists
    std::vector<std::vector<NodeId>> nb(n);
    for (const Dyad& e : net.edges) {
      nb[e.i].push_back(e.j);
      nb[e.j].push_back(e.i);
    }
    for (auto& v : nb) {
      std::sort(v.begin(), v.end());
      v.erase(std::unique(v.begin(), v.end()), v.end());
    }
    std::size_t wedges = 0, closed = 0;
    for (NodeId u = 0; u < n; ++u) {
      const auto& vs = nb[u];
      wedges += vs.size() * (vs.size() >= 1 ? vs.size() - 1 : 0) / 2;
      for (std::size_t s = 0; s < vs.size(); ++s)
        for (std::size_t t = s + 1; t < vs.size(); ++t)
          if (std::binary_search(nb[vs[s]].begin(), nb[vs[s]].end(), vs[t]))
            ++closed;
    }
    return wedges == 0 ? 0.0
                       : static_cast<double>(closed) / static_cast<double>(wedges);
  }
  // directed: closed ordered two-paths i->j->k (i != k) with i->k present
  std::vector<std::vector<NodeId>> out(n);
  for (const Dyad& e : net.edges) out[e.i].push_back(e.j);
  for (auto& v : out) std::sort(v.begin(), v.end());
  std::size_t paths = 0, closed = 0;
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j : out[i])
      for (NodeId k : out[j]) {
        if (k == i) continue;
        ++paths;
        if (std::binary_search(out[i].begin(), out[i].end(), k)) ++closed;
      }
  return paths == 0 ? 0.0
                    : static_cast<double>(closed) / static_cast<double>(paths);
}

NetworkSummary network_summary(const BinaryNetwork& net, TransitivityKind kind) {
  NetworkSummary s;
  const NodeId n = net.n_nodes;
  s.n_edges = net.edges.size();
  std::vector<std::size_t> in_deg(n, 0), out_deg(n, 0);
  for (const Dyad& e : net.edges) {
    ++out_deg[e.i];
    ++in_deg[e.j];
  }
  // per-node degree = (in + out)/2, so the mean equals edges/N
  double mean = n == 0 ? 0.0
                       : static_cast<double>(s.n_edges) / static_cast<double>(n);
  double var = 0.0;
  for (NodeId v = 0; v < n; ++v) {
    const double d = 0.5 * static_cast<double>(in_deg[v] + out_deg[v]) - mean;
    var += d * d;
  }
  s.mean_degree = mean;
  s.degree_std = n == 0 ? 0.0 : std::sqrt(var / static_cast<double>(n));
  s.transitivity = transitivity(net, kind);
  s.reciprocity = reciprocity(net);
  s.density = n > 1 ? static_cast<double>(s.n_edges) /
                          (static_cast<double>(n) * (n - 1))
                    : 0.0;
  return s;
}

double mse_theta(std::span<const double> theta_est,
                 std::span<const double> theta_true) {
  if (theta_est.size() != theta_true.size())
    fail(ErrorCode::LengthMismatch, "reliability vectors differ in length");
  if (theta_est.empty()) fail(ErrorCode::EmptySample, "empty reliability vectors");
  double acc = 0.0;
  for (std::size_t m = 0; m < theta_est.size(); ++m) {
    const double d = theta_est[m] - theta_true[m];
    acc += d * d;
  }
  return acc / static_cast<double>(theta_est.size());
}

double wasserstein_1d(std::span<const double> sample_a,
                      std::span<const double> sample_b) {
  if (sample_a.empty() || sample_b.empty())
    fail(ErrorCode::EmptySample, "wasserstein_1d needs nonempty samples");
  std::vector<double> a(sample_a.begin(), sample_a.end());
  std::vector<double> b(sample_b.begin(), sample_b.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  if (a.size() == b.size()) {
    double acc = 0.0;
    for (std::size_t t = 0; t < a.size(); ++t) acc += std::fabs(a[t] - b[t]);
    return acc / static_cast<double>(a.size());
  }
  // piecewise-constant quantile functions: integrate |Fa^-1 - Fb^-1| over the
  // merged breakpoints
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t ia = 0, ib = 0;
  double q = 0.0, acc = 0.0;
  while (ia < a.size() && ib < b.size()) {
    const double qa = static_cast<double>(ia + 1) / na;
    const double qb = static_cast<double>(ib + 1) / nb;
    const double next = std::min(qa, qb);
    acc += (next - q) * std::fabs(a[ia] - b[ib]);
    q = next;
    if (qa <= next + 1e-15) ++ia;
    if (qb <= next + 1e-15) ++ib;
  }
  return acc;
}

std::optional<double> repeat_nomination_rate(const ReportTensor& x,
                                             const BoundMask& mask, ReporterId m) {
  (void)mask;
  const NodeId n = x.n_nodes();
  if (m >= x.n_reporters())
    fail(ErrorCode::IndexOutOfRange, "reporter index out of range");
  std::size_t gives = 0, repeated = 0;
  for (NodeId j = 0; j < n; ++j) {
    if (j == m) continue;
    if (x.count(m, j, m) > 0) {
      ++gives;
      if (x.count(j, m, m) > 0) ++repeated;
    }
  }
  if (gives == 0) return std::nullopt;  // no nominations to repeat
  return static_cast<double>(repeated) / static_cast<double>(gives);
}

TieConfirmation tie_confirmation_summary(const ReportTensor& x,
                                         const BoundMask& mask, ReporterId m) {
  const NodeId n = x.n_nodes();
  if (m >= x.n_reporters())
    fail(ErrorCode::IndexOutOfRange, "reporter index out of range");
  TieConfirmation c;
  for (NodeId j = 0; j < n; ++j) {
    if (j == m) continue;
    const bool counterpart = j < x.n_reporters() && mask.contains(m, j, j);
    // direction m -> j: m reports as giver, j confirms as receiver
    const bool m_give = x.count(m, j, m) > 0;
    const bool j_conf_give = counterpart && x.count(m, j, j) > 0;
    if (m_give && j_conf_give) ++c.confirmed_give;
    if (m_give && !j_conf_give) ++c.m_only_give;
    if (!m_give && j_conf_give) ++c.other_only_give;
    // direction j -> m: m reports as receiver, j confirms as giver
    const bool m_get = x.count(j, m, m) > 0;
    const bool j_conf_get = counterpart && x.count(j, m, j) > 0;
    if (m_get && j_conf_get) ++c.confirmed_get;
    if (m_get && !j_conf_get) ++c.m_only_get;
    if (!m_get && j_conf_get) ++c.other_only_get;
  }
  return c;
}

EtaRecovery eta_recovery_report(std::span<const double> planted,
                                std::span<const double> estimated) {
  if (planted.size() != estimated.size())
    fail(ErrorCode::LengthMismatch, "planted/estimated lengths differ");
  if (planted.size() < 3)
    fail(ErrorCode::LengthMismatch, "need at least three pairs");
  const double n = static_cast<double>(planted.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t t = 0; t < planted.size(); ++t) {
    mx += planted[t];
    my += estimated[t];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t t = 0; t < planted.size(); ++t) {
    const double dx = planted[t] - mx;
    const double dy = estimated[t] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  EtaRecovery r;
  r.correlation = (sxx > 0.0 && syy > 0.0) ? sxy / std::sqrt(sxx * syy) : 0.0;
  r.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  const double intercept = my - r.slope * mx;
  r.residuals.resize(planted.size());
  for (std::size_t t = 0; t < planted.size(); ++t)
    r.residuals[t] = estimated[t] - (intercept + r.slope * planted[t]);
  return r;
}

}  // namespace netrecon
