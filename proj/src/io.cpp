#include "fricshare/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "fricshare/error.hpp"

namespace fricshare::io {

namespace {

template <class T>
T field(const json& j, const char* key, const char* what) {
  if (!j.is_object() || !j.contains(key))
    throw DomainError(std::string(what) + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw DomainError(std::string(what) + ": field '" + key + "' has the wrong type");
  }
}

std::vector<double> normalized(std::vector<double> p, const char* what) {
  double total = 0.0;
  for (double v : p) total += v;
  if (!(std::abs(total - 1.0) <= 1e-9))
    throw DomainError(std::string(what) + " must sum to 1 within 1e-9 (got " + full(total) + ")");
  for (double& v : p) v /= total;
  return p;
}

double number(const std::string& s, const std::string& context) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw DomainError(context + ": '" + s + "' is not a number");
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, sep)) out.push_back(part);
  return out;
}

mech::Deviation parse_deviation(const std::string& s) {
  if (s == "std") return mech::Deviation::CondStdDev;
  if (s == "mad") return mech::Deviation::CondMeanAbsDev;
  if (s == "lsd") return mech::Deviation::CondLowerSemiDev;
  throw DomainError("unknown deviation '" + s + "' (expected std, mad or lsd)");
}

}  // namespace

std::string full(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string sig4(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw DomainError(path + ": invalid JSON: " + e.what());
  }
}

SpaceProfile space_profile_from_json(const json& j, double tie_tol) {
  auto probs = normalized(field<std::vector<double>>(j, "probs", "space"), "probs");
  const auto agents = field<std::vector<std::vector<double>>>(j, "agents", "space");
  const std::size_t m = probs.size();
  std::vector<prob::RandVar> vars;
  for (const auto& a : agents) {
    if (a.size() != m) throw DomainError("space: every agent needs one value per outcome");
    vars.emplace_back(a);
  }
  prob::InfoPartition g = prob::InfoPartition::trivial(m);
  if (j.contains("partition"))
    g = prob::InfoPartition(field<std::vector<std::vector<std::size_t>>>(j, "partition", "space"),
                            m);
  return {prob::FiniteSpace(std::move(probs), tie_tol), prob::EndowmentProfile(std::move(vars)),
          std::move(g)};
}

json space_profile_to_json(const prob::FiniteSpace& space, const prob::EndowmentProfile& profile,
                           const prob::InfoPartition& g) {
  json agents = json::array();
  for (const auto& a : profile.agents()) agents.push_back(a.vec());
  return json{{"probs", std::vector<double>(space.probs().begin(), space.probs().end())},
              {"agents", agents},
              {"partition", g.blocks()}};
}

mech::MechanismSpec spec_from_json(const json& j) {
  const auto kind = field<std::string>(j, "kind", "rule");
  mech::MechanismSpec spec;
  if (kind == "cmrs") {
    spec = mech::Cmrs{};
  } else if (kind == "subjective_cmrs") {
    spec = mech::SubjectiveCmrs{prob::Measure(field<std::vector<double>>(j, "q", "rule"))};
  } else if (kind == "robust_cmrs") {
    std::vector<prob::Measure> ms;
    for (auto& q : field<std::vector<std::vector<double>>>(j, "measures", "rule"))
      ms.emplace_back(std::move(q));
    spec = mech::RobustCmrs{std::move(ms)};
  } else if (kind == "left_es") {
    spec = mech::LeftEs{field<double>(j, "lambda", "rule")};
  } else if (kind == "mean_deviation") {
    const auto dev = j.contains("dev") ? field<std::string>(j, "dev", "rule") : std::string("std");
    spec = mech::MeanDeviation{parse_deviation(dev), field<double>(j, "theta", "rule")};
  } else if (kind == "qbrs") {
    spec = mech::Qbrs{};
  } else if (kind == "proportional") {
    spec = mech::Proportional{};
  } else {
    throw DomainError("unknown rule kind '" + kind + "'");
  }
  mech::validate(spec);
  return spec;
}

mech::MechanismSpec parse_spec(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\n");
  if (first != std::string::npos && text[first] == '{') {
    try {
      return spec_from_json(json::parse(text));
    } catch (const json::parse_error& e) {
      throw DomainError(std::string("rule: invalid JSON: ") + e.what());
    }
  }
  const auto parts = split(text, ':');
  const std::string head = parts.empty() ? "" : parts[0];
  mech::MechanismSpec spec;
  if (head == "cmrs" && parts.size() == 1) {
    spec = mech::Cmrs{};
  } else if (head == "qbrs" && parts.size() == 1) {
    spec = mech::Qbrs{};
  } else if (head == "proportional" && parts.size() == 1) {
    spec = mech::Proportional{};
  } else if (head == "left_es" && parts.size() == 2) {
    spec = mech::LeftEs{number(parts[1], "left_es lambda")};
  } else if (head == "mean_deviation" && parts.size() == 3) {
    spec = mech::MeanDeviation{parse_deviation(parts[1]), number(parts[2], "mean_deviation theta")};
  } else {
    throw DomainError("cannot parse rule '" + text +
                      "' (shorthand: cmrs, qbrs, proportional, left_es:LAMBDA, "
                      "mean_deviation:std|mad|lsd:THETA; measure-based rules need JSON)");
  }
  mech::validate(spec);
  return spec;
}

json spec_to_json(const mech::MechanismSpec& spec) {
  return std::visit(
      [](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        auto probs = [](const prob::Measure& q) {
          return std::vector<double>(q.probs().begin(), q.probs().end());
        };
        if constexpr (std::is_same_v<T, mech::Cmrs>) {
          return {{"kind", "cmrs"}};
        } else if constexpr (std::is_same_v<T, mech::SubjectiveCmrs>) {
          return {{"kind", "subjective_cmrs"}, {"q", probs(s.q)}};
        } else if constexpr (std::is_same_v<T, mech::RobustCmrs>) {
          json ms = json::array();
          for (const auto& q : s.measures) ms.push_back(probs(q));
          return {{"kind", "robust_cmrs"}, {"measures", ms}};
        } else if constexpr (std::is_same_v<T, mech::LeftEs>) {
          return {{"kind", "left_es"}, {"lambda", s.lambda}};
        } else if constexpr (std::is_same_v<T, mech::MeanDeviation>) {
          return {{"kind", "mean_deviation"}, {"dev", mech::deviation_name(s.dev)}, {"theta", s.theta}};
        } else if constexpr (std::is_same_v<T, mech::Qbrs>) {
          return {{"kind", "qbrs"}};
        } else {
          return {{"kind", "proportional"}};
        }
      },
      spec);
}

json allocation_to_json(const mech::Allocation& alloc, const mech::CostReport& costs) {
  json parts = json::array();
  for (const auto& h : alloc.parts) parts.push_back(h.vec());
  json pairwise = json::array();
  for (const auto& [key, c] : costs.pairwise)
    pairwise.push_back({{"i", key.first}, {"j", key.second}, {"cost", c.vec()}});
  return json{{"allocation", parts},
              {"info_used", alloc.info_used.blocks()},
              {"global_cost", costs.global.vec()},
              {"pairwise_cost", pairwise}};
}

std::string allocation_to_csv(const mech::Allocation& alloc, const mech::CostReport& costs) {
  std::ostringstream os;
  os << "outcome";
  for (std::size_t i = 0; i < alloc.parts.size(); ++i) os << ",H_" << (i + 1);
  os << ",cost\n";
  for (std::size_t w = 0; w < costs.global.size(); ++w) {
    os << w;
    for (const auto& h : alloc.parts) os << ',' << full(h[w]);
    os << ',' << full(costs.global[w]) << '\n';
  }
  return os.str();
}

gauss::GaussianPool pool_from_json(const json& j) {
  auto mu = field<std::vector<double>>(j, "mu", "pool");
  gauss::GaussianPool pool;
  if (j.contains("cov")) {
    pool = {std::move(mu), field<std::vector<std::vector<double>>>(j, "cov", "pool")};
  } else {
    const auto sigma = field<std::vector<double>>(j, "sigma", "pool");
    const auto rho = field<std::vector<std::vector<double>>>(j, "rho", "pool");
    pool = gauss::GaussianPool::from_correlation(std::move(mu), sigma, rho);
  }
  gauss::validate(pool);
  return pool;
}

emp::SummaryStats stats_from_json(const json& j) {
  emp::SummaryStats s;
  s.means = field<std::vector<double>>(j, "means", "stats");
  s.variances = field<std::vector<double>>(j, "variances", "stats");
  s.correlation = field<std::vector<std::vector<double>>>(j, "correlation", "stats");
  if (j.contains("names")) s.names = field<std::vector<std::string>>(j, "names", "stats");
  for (std::size_t i = 0; i < s.variances.size(); ++i)
    if (s.variances[i] == 0.0) s.zero_variance.push_back(i);
  return s;
}

json stats_to_json(const emp::SummaryStats& s) {
  return json{{"names", s.names},
              {"means", s.means},
              {"variances", s.variances},
              {"correlation", s.correlation},
              {"zero_variance", s.zero_variance}};
}

std::string sweep_to_csv(const std::vector<gauss::SweepRow>& rows) {
  std::ostringstream os;
  os << "param,global_cost,avg_T,avg_cost_per_agent\n";
  for (const auto& r : rows)
    os << full(r.param) << ',' << full(r.global_cost) << ',' << full(r.avg_benefit) << ','
       << full(r.avg_cost_per_agent) << '\n';
  return os.str();
}

json counterexample_to_json(const axioms::Counterexample& c) {
  const auto& in = c.instance;
  return json{{"axiom", axioms::axiom_name(c.axiom)},
              {"rule", c.rule},
              {"tol", c.tol},
              {"probs", in.probs},
              {"profile", in.x},
              {"companion", in.y},
              {"partition", in.g},
              {"i", in.i},
              {"j", in.j},
              {"alpha", in.alpha},
              {"perm", in.perm},
              {"witness",
               {{"agent", c.witness.agent},
                {"outcome", c.witness.outcome},
                {"lhs", c.witness.lhs},
                {"rhs", c.witness.rhs},
                {"detail", c.witness.detail}}}};
}

axioms::Counterexample counterexample_from_json(const json& j) {
  axioms::Counterexample c;
  const auto name = field<std::string>(j, "axiom", "counterexample");
  const auto id = axioms::parse_axiom(name);
  if (!id) throw DomainError("counterexample: unknown axiom '" + name + "'");
  c.axiom = *id;
  c.rule = field<std::string>(j, "rule", "counterexample");
  c.tol = field<double>(j, "tol", "counterexample");
  auto& in = c.instance;
  in.probs = field<std::vector<double>>(j, "probs", "counterexample");
  in.x = field<std::vector<std::vector<double>>>(j, "profile", "counterexample");
  in.y = field<std::vector<std::vector<double>>>(j, "companion", "counterexample");
  in.g = field<std::vector<std::vector<std::size_t>>>(j, "partition", "counterexample");
  in.i = field<std::size_t>(j, "i", "counterexample");
  in.j = field<std::size_t>(j, "j", "counterexample");
  in.alpha = field<double>(j, "alpha", "counterexample");
  in.perm = field<std::vector<std::size_t>>(j, "perm", "counterexample");
  const auto& w = j.at("witness");
  c.witness = {field<std::size_t>(w, "agent", "witness"), field<std::size_t>(w, "outcome", "witness"),
               field<double>(w, "lhs", "witness"), field<double>(w, "rhs", "witness"),
               field<std::string>(w, "detail", "witness")};
  return c;
}

json check_result_to_json(const axioms::CheckResult& r) {
  json out{{"axiom", axioms::axiom_name(r.axiom)},
           {"passed", r.passed},
           {"trials_run", r.trials_run}};
  if (r.counterexample) out["counterexample"] = counterexample_to_json(*r.counterexample);
  return out;
}

}  // namespace fricshare::io
