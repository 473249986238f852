#include "erasure/transcript_json.hpp"
#include "erasure/serialize.hpp"

#include <cmath>

namespace erasure {

nlohmann::json json_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

nlohmann::json to_json(const DensityMatrix& state) {
  return {{"layout", state.layout().describe()}, {"matrix", write_matrix(state)}};
}

nlohmann::json to_json(const ProtocolTranscript& t) {
  nlohmann::json j;
  j["protocol"] = t.protocol;
  j["free_set"] = t.free_set;
  j["input_state"] = t.input_state ? to_json(*t.input_state) : nlohmann::json();
  j["eps_target"] = json_number(t.eps);
  j["delta"] = json_number(t.delta);
  j["seed"] = t.seed;
  j["parties"] = t.parties;
  j["n_copies"] = t.n_copies;
  j["n_simulated"] = t.n_simulated;
  j["simulated"] = t.simulated;
  j["k"] = json_number(t.k);
  j["k_lower"] = json_number(t.k_lower);
  j["log_J"] = json_number(t.log_J);
  j["catalyst_description"] = {{"sigma", t.catalyst ? to_json(*t.catalyst) : nlohmann::json()},
                               {"copies", t.n_copies},
                               {"catalyst_qubits", json_number(t.catalyst_qubits)}};
  j["output_state"] = {{"trace", json_number(t.output_trace)},
                       {"rank", t.output_rank},
                       {"register_deviation", json_number(t.register_deviation)}};
  j["achieved_distance"] = json_number(t.achieved_distance);
  j["catalyst_return_distance"] = json_number(t.catalyst_return_distance);
  j["distance_bound"] = json_number(t.distance_bound);
  j["structure"] = {{"verified", t.structure_verified},
                    {"copies_checked", t.structure_copies},
                    {"detail", t.structure_detail}};
  j["converse_lower_bound"] = json_number(t.converse_lower_bound);
  j["converse_factor"] = json_number(t.converse_factor);
  if (t.protocol == "block") {
    nlohmann::json distances = nlohmann::json::array();
    for (const double d : t.block_distances) distances.push_back(json_number(d));
    j["block"] = {{"ell", t.ell},
                  {"blocks", t.blocks},
                  {"block_distances", distances},
                  {"accumulation_bound", json_number(t.accumulation_bound)},
                  {"idle_catalyst_shift", json_number(t.idle_catalyst_shift)}};
  }
  if (t.protocol == "multiparty") {
    j["multiparty"] = {{"shared_randomness_free", t.shared_randomness_free},
                       {"local_operations", t.local_operations}};
  }
  j["notes"] = t.notes;
  j["failures"] = t.failures;
  j["ok"] = t.ok();
  return j;
}

nlohmann::json to_json(const BlockProtocolPlan& p) {
  return {{"m", p.m},
          {"gamma", json_number(p.gamma)},
          {"eps", json_number(p.eps)},
          {"D", json_number(p.D)},
          {"V", json_number(p.V)},
          {"ell", p.ell},
          {"blocks", p.blocks},
          {"last_block", p.last_block},
          {"eps_block", json_number(p.eps_block)},
          {"overhead", json_number(p.overhead)},
          {"k_per_block", json_number(p.k_per_block)},
          {"k_method", p.k_method},
          {"k_second_order", json_number(p.k_second_order)},
          {"catalyst_qubits", json_number(p.catalyst_qubits)},
          {"second_order_consistent", p.second_order_consistent},
          {"exact_consistent", p.exact_consistent},
          {"notes", p.notes}};
}

nlohmann::json to_json(const ConvexSplitCheck& c) {
  return {{"lhs", json_number(c.lhs)},
          {"rhs", json_number(c.rhs)},
          {"k", json_number(c.k)},
          {"classical", c.classical},
          {"ok", c.ok}};
}

nlohmann::json to_json(const RateReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"eps", json_number(row.eps)},
                    {"n", row.n},
                    {"converse", json_number(row.converse)},
                    {"upper", json_number(row.upper)},
                    {"achievable", json_number(row.achievable)},
                    {"E_over_n", json_number(row.E_over_n)}});
  }
  return {{"free_set", r.free_set},
          {"c_constant", json_number(r.c_constant)},
          {"skipped", r.skipped},
          {"notice", r.notice},
          {"rows", rows},
          {"failures", r.failures},
          {"ok", r.ok()}};
}

}  // namespace erasure
