#pragma once

// JSON and CSV interchange for every module.

#include <string>
#include <vector>

#include <json.hpp>

#include "fricshare/axioms.hpp"
#include "fricshare/empirical.hpp"
#include "fricshare/gaussian.hpp"
#include "fricshare/mechanisms.hpp"

namespace fricshare::io {

using json = nlohmann::json;

/// 17 significant digits; round-trips doubles.
std::string full(double v);
/// 4 significant digits for human tables.
std::string sig4(double v);

json read_json_file(const std::string& path);

struct SpaceProfile {
  prob::FiniteSpace space;
  prob::EndowmentProfile profile;
  prob::InfoPartition g;
};

/// {"probs":[...], "agents":[[...],...], "partition":[[...],...]}. Probabilities
/// off normalization by more than 1e-9 are rejected; smaller drift is divided
/// out. A missing partition means the trivial one.
SpaceProfile space_profile_from_json(const json& j, double tie_tol = 0.0);
json space_profile_to_json(const prob::FiniteSpace& space, const prob::EndowmentProfile& profile,
                           const prob::InfoPartition& g);

/// Inline JSON such as {"kind":"left_es","lambda":0.9} or shorthand such as
/// "left_es:0.9", "mean_deviation:std:1", "cmrs".
mech::MechanismSpec parse_spec(const std::string& text);
mech::MechanismSpec spec_from_json(const json& j);
json spec_to_json(const mech::MechanismSpec& spec);

json allocation_to_json(const mech::Allocation& alloc, const mech::CostReport& costs);
/// One row per outcome: outcome,H_1..H_n,cost.
std::string allocation_to_csv(const mech::Allocation& alloc, const mech::CostReport& costs);

/// {"mu","sigma","rho"} or {"mu","cov"}.
gauss::GaussianPool pool_from_json(const json& j);

emp::SummaryStats stats_from_json(const json& j);
json stats_to_json(const emp::SummaryStats& s);

std::string sweep_to_csv(const std::vector<gauss::SweepRow>& rows);

json counterexample_to_json(const axioms::Counterexample& c);
axioms::Counterexample counterexample_from_json(const json& j);
json check_result_to_json(const axioms::CheckResult& r);

}  // namespace fricshare::io
