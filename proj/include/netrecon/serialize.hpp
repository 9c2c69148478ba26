#ifndef NETRECON_SERIALIZE_HPP
#define NETRECON_SERIALIZE_HPP

#include <json.hpp>

#include "netrecon/state.hpp"
#include "netrecon/synth.hpp"
#include "netrecon/types.hpp"

// JSON persistence for the domain types. Integers round-trip bit-exactly;
// doubles are emitted with shortest round-trip formatting so deserialization
// reproduces them exactly.

namespace netrecon {

using nlohmann::json;

inline void to_json(json& j, const Dyad& d) { j = json::array({d.i, d.j}); }
inline void from_json(const json& j, Dyad& d) {
  d.i = j.at(0).get<NodeId>();
  d.j = j.at(1).get<NodeId>();
}

inline void to_json(json& j, const ReportEntry& e) {
  j = json::array({e.i, e.j, e.m, e.x});
}
inline void from_json(const json& j, ReportEntry& e) {
  e.i = j.at(0).get<NodeId>();
  e.j = j.at(1).get<NodeId>();
  e.m = j.at(2).get<ReporterId>();
  e.x = j.at(3).get<Count>();
}

inline void to_json(json& j, const MaskEntry& e) {
  j = json::array({e.i, e.j, e.m});
}
inline void from_json(const json& j, MaskEntry& e) {
  e.i = j.at(0).get<NodeId>();
  e.j = j.at(1).get<NodeId>();
  e.m = j.at(2).get<ReporterId>();
}

NLOHMANN_JSON_SERIALIZE_ENUM(MaskRule, {
  {MaskRule::SelfDyads, "self_dyads"},
  {MaskRule::FullRoster, "full_roster"},
  {MaskRule::Custom, "custom"},
})

NLOHMANN_JSON_SERIALIZE_ENUM(Scenario, {
  {Scenario::OverReporters, "over_reporters"},
  {Scenario::UnderReporters, "under_reporters"},
  {Scenario::GammaTheta, "gamma_theta"},
})

NLOHMANN_JSON_SERIALIZE_ENUM(DegreeCorrection, {
  {DegreeCorrection::Off, "off"},
  {DegreeCorrection::PowerLaw, "power_law"},
})

inline void to_json(json& j, const ReporterMask& m) {
  j = json{{"rule", m.rule}, {"custom_entries", m.custom_entries}};
}
inline void from_json(const json& j, ReporterMask& m) {
  j.at("rule").get_to(m.rule);
  j.at("custom_entries").get_to(m.custom_entries);
}

inline void to_json(json& j, const ReportTensor& x) {
  j = json{{"n_nodes", x.n_nodes()},
           {"n_reporters", x.n_reporters()},
           {"entries", std::vector<ReportEntry>(x.entries().begin(),
                                                x.entries().end())}};
}
inline ReportTensor report_tensor_from_json(const json& j) {
  return ReportTensor(j.at("n_nodes").get<NodeId>(),
                      j.at("n_reporters").get<ReporterId>(),
                      j.at("entries").get<std::vector<ReportEntry>>());
}

inline void to_json(json& j, const HyperParams& h) {
  j = json{{"alpha", h.alpha}, {"beta", h.beta}, {"a", h.a}, {"b", h.b},
           {"c", h.c},         {"d", h.d},       {"p", h.p}};
  json ov = json::array();
  for (const auto& [dyad, p] : h.p_overrides)
    ov.push_back(json{{"dyad", dyad}, {"p", p}});
  j["p_overrides"] = std::move(ov);
}
inline void from_json(const json& j, HyperParams& h) {
  j.at("alpha").get_to(h.alpha);
  j.at("beta").get_to(h.beta);
  j.at("a").get_to(h.a);
  j.at("b").get_to(h.b);
  j.at("c").get_to(h.c);
  j.at("d").get_to(h.d);
  j.at("p").get_to(h.p);
  h.p_overrides.clear();
  for (const auto& e : j.at("p_overrides"))
    h.p_overrides.emplace_back(e.at("dyad").get<Dyad>(),
                               e.at("p").get<std::vector<double>>());
}

inline void to_json(json& j, const BinaryNetwork& n) {
  j = json{{"n_nodes", n.n_nodes}, {"edges", n.edges}};
}
inline void from_json(const json& j, BinaryNetwork& n) {
  j.at("n_nodes").get_to(n.n_nodes);
  j.at("edges").get_to(n.edges);
}

inline void to_json(json& j, const GroundTruth& g) {
  j = json{{"n_nodes", g.n_nodes},
           {"y", g.y},
           {"theta", g.theta},
           {"lambda", g.lambda},
           {"eta", g.eta},
           {"communities", g.communities},
           {"deterministic_reliable", g.deterministic_reliable}};
}
inline void from_json(const json& j, GroundTruth& g) {
  j.at("n_nodes").get_to(g.n_nodes);
  j.at("y").get_to(g.y);
  j.at("theta").get_to(g.theta);
  j.at("lambda").get_to(g.lambda);
  j.at("eta").get_to(g.eta);
  j.at("communities").get_to(g.communities);
  j.at("deterministic_reliable").get_to(g.deterministic_reliable);
}

inline void to_json(json& j, const RhoTable& r) {
  j = json{{"dyads", r.dyads},
           {"values", r.values},
           {"log_prior", r.log_prior},
           {"theta_snapshot", r.theta_snapshot},
           {"lambda_snapshot", r.lambda_snapshot},
           {"perturbed_prior_mode", r.perturbed_prior_mode},
           {"init_seed", r.init_seed},
           {"init_offset", r.init_offset}};
  json ov = json::array();
  for (const auto& [dyad, lp] : r.log_prior_overrides)
    ov.push_back(json{{"dyad", dyad}, {"log_p", lp}});
  j["log_prior_overrides"] = std::move(ov);
}
inline void from_json(const json& j, RhoTable& r) {
  j.at("dyads").get_to(r.dyads);
  j.at("values").get_to(r.values);
  j.at("log_prior").get_to(r.log_prior);
  j.at("theta_snapshot").get_to(r.theta_snapshot);
  j.at("lambda_snapshot").get_to(r.lambda_snapshot);
  j.at("perturbed_prior_mode").get_to(r.perturbed_prior_mode);
  j.at("init_seed").get_to(r.init_seed);
  j.at("init_offset").get_to(r.init_offset);
  r.log_prior_overrides.clear();
  for (const auto& e : j.at("log_prior_overrides"))
    r.log_prior_overrides.emplace_back(e.at("dyad").get<Dyad>(),
                                       e.at("log_p").get<std::vector<double>>());
}

inline void to_json(json& j, const VariationalState& s) {
  j = json{{"gamma_shape", s.gamma_shape}, {"gamma_rate", s.gamma_rate},
           {"phi_shape", s.phi_shape},     {"phi_rate", s.phi_rate},
           {"nu_shape", s.nu_shape},       {"nu_rate", s.nu_rate},
           {"rho", s.rho}};
}
inline void from_json(const json& j, VariationalState& s) {
  j.at("gamma_shape").get_to(s.gamma_shape);
  j.at("gamma_rate").get_to(s.gamma_rate);
  j.at("phi_shape").get_to(s.phi_shape);
  j.at("phi_rate").get_to(s.phi_rate);
  j.at("nu_shape").get_to(s.nu_shape);
  j.at("nu_rate").get_to(s.nu_rate);
  j.at("rho").get_to(s.rho);
}

inline void to_json(json& j, const AuxiliaryResponsibilities& z) {
  j = json{{"n_levels", z.n_levels}, {"z1", z.z1}};
}
inline void from_json(const json& j, AuxiliaryResponsibilities& z) {
  j.at("n_levels").get_to(z.n_levels);
  j.at("z1").get_to(z.z1);
}

inline void to_json(json& j, const FitResult& r) {
  j = json{{"state", r.state},
           {"elbo_trace", r.elbo_trace},
           {"n_iterations", r.n_iterations},
           {"converged", r.converged},
           {"eta_est", r.eta_est},
           {"theta_est", r.theta_est},
           {"warnings", r.warnings}};
  if (r.point_network) j["point_network"] = *r.point_network;
  if (r.first_stage) j["first_stage"] = *r.first_stage;
}
inline void from_json(const json& j, FitResult& r) {
  j.at("state").get_to(r.state);
  j.at("elbo_trace").get_to(r.elbo_trace);
  j.at("n_iterations").get_to(r.n_iterations);
  j.at("converged").get_to(r.converged);
  j.at("eta_est").get_to(r.eta_est);
  j.at("theta_est").get_to(r.theta_est);
  j.at("warnings").get_to(r.warnings);
  if (j.contains("point_network"))
    r.point_network = j.at("point_network").get<BinaryNetwork>();
  else
    r.point_network.reset();
  if (j.contains("first_stage")) {
    auto fs = std::make_shared<FitResult>();
    j.at("first_stage").get_to(*fs);
    r.first_stage = std::move(fs);
  } else {
    r.first_stage.reset();
  }
}

inline void to_json(json& j, const SynthConfig& c) {
  j = json{{"n_nodes", c.n_nodes},
           {"n_reporters", c.n_reporters},
           {"n_communities", c.n_communities},
           {"avg_degree", c.avg_degree},
           {"p_out_ratio", c.p_out_ratio},
           {"degree_correction", c.degree_correction},
           {"dc_in_exponent", c.dc_in_exponent},
           {"dc_out_exponent", c.dc_out_exponent},
           {"scenario", c.scenario},
           {"theta_ratio", c.theta_ratio},
           {"theta_over", c.theta_over},
           {"theta_under", c.theta_under},
           {"theta_gamma_shape", c.theta_gamma_shape},
           {"theta_gamma_rate", c.theta_gamma_rate},
           {"lambda0", c.lambda0},
           {"lambda_diff", c.lambda_diff},
           {"eta_planted", c.eta_planted},
           {"seed", c.seed}};
}
inline void from_json(const json& j, SynthConfig& c) {
  j.at("n_nodes").get_to(c.n_nodes);
  j.at("n_reporters").get_to(c.n_reporters);
  j.at("n_communities").get_to(c.n_communities);
  j.at("avg_degree").get_to(c.avg_degree);
  j.at("p_out_ratio").get_to(c.p_out_ratio);
  j.at("degree_correction").get_to(c.degree_correction);
  j.at("dc_in_exponent").get_to(c.dc_in_exponent);
  j.at("dc_out_exponent").get_to(c.dc_out_exponent);
  j.at("scenario").get_to(c.scenario);
  j.at("theta_ratio").get_to(c.theta_ratio);
  j.at("theta_over").get_to(c.theta_over);
  j.at("theta_under").get_to(c.theta_under);
  j.at("theta_gamma_shape").get_to(c.theta_gamma_shape);
  j.at("theta_gamma_rate").get_to(c.theta_gamma_rate);
  j.at("lambda0").get_to(c.lambda0);
  j.at("lambda_diff").get_to(c.lambda_diff);
  j.at("eta_planted").get_to(c.eta_planted);
  j.at("seed").get_to(c.seed);
}

}  // namespace netrecon

#endif
