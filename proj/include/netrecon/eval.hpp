#ifndef NETRECON_EVAL_HPP
#define NETRECON_EVAL_HPP

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "netrecon/types.hpp"

namespace netrecon {

struct NetworkSummary {
  std::size_t n_edges = 0;
  double mean_degree = 0.0;
  double degree_std = 0.0;  // over nodes, of (in + out)/2
  double transitivity = 0.0;
  double reciprocity = 0.0;
  double density = 0.0;
};

enum class TransitivityKind {
  Undirected,  // triangle closure on the symmetrized graph (default)
  Directed,    // closed ordered two-paths i->j->k with i->k present
};

// Tie exists if at least one eligible reporter reported it.
BinaryNetwork union_baseline(const ReportTensor& x, const BoundMask& mask);

// Tie exists if the dyad has eligible reporters and all of them reported it.
BinaryNetwork intersection_baseline(const ReportTensor& x, const BoundMask& mask);

// Harmonic mean of precision and recall on directed edge sets; 0 when both
// are empty of agreement.
double f1_score(const BinaryNetwork& estimate, const BinaryNetwork& truth);

double reciprocity(const BinaryNetwork& net);
double transitivity(const BinaryNetwork& net,
                    TransitivityKind kind = TransitivityKind::Undirected);
NetworkSummary network_summary(const BinaryNetwork& net,
                               TransitivityKind kind = TransitivityKind::Undirected);

double mse_theta(std::span<const double> theta_est,
                 std::span<const double> theta_true);

// Order-1 distance between empirical distributions via the quantile coupling.
double wasserstein_1d(std::span<const double> sample_a,
                      std::span<const double> sample_b);

// Proportion of alters reporter m named on the give direction that m also
// named on the get direction; nullopt when m made no give nominations.
std::optional<double> repeat_nomination_rate(const ReportTensor& x,
                                             const BoundMask& mask, ReporterId m);

// Six-way categorization of reporter m's double-sampled ties.
struct TieConfirmation {
  std::size_t confirmed_give = 0;   // m reports m->j, j confirms
  std::size_t confirmed_get = 0;    // m reports j->m, j confirms
  std::size_t m_only_give = 0;      // m reports m->j, j silent
  std::size_t m_only_get = 0;       // m reports j->m, j silent
  std::size_t other_only_give = 0;  // j reports m->j, m silent
  std::size_t other_only_get = 0;   // j reports j->m, m silent
};
TieConfirmation tie_confirmation_summary(const ReportTensor& x,
                                         const BoundMask& mask, ReporterId m);

struct EtaRecovery {
  double correlation = 0.0;
  double slope = 0.0;  // least-squares slope of estimated on planted
  std::vector<double> residuals;
};
EtaRecovery eta_recovery_report(std::span<const double> planted,
                                std::span<const double> estimated);

}  // namespace netrecon

#endif
