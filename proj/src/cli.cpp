#include "fricshare/cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "fricshare/axioms.hpp"
#include "fricshare/crra.hpp"
#include "fricshare/empirical.hpp"
#include "fricshare/error.hpp"
#include "fricshare/gaussian.hpp"
#include "fricshare/io.hpp"
#include "fricshare/mechanisms.hpp"

namespace fricshare::cli {

namespace {

using io::full;
using io::json;
using io::sig4;

std::uint64_t default_seed() {
  if (const char* env = std::getenv("FRICSHARE_SEED")) {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(env, &used);
      if (used == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw DomainError(std::string("FRICSHARE_SEED is not an unsigned integer: ") + env);
  }
  return 42;
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw DomainError("cannot write " + path);
  f << text;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, sep))
    if (!part.empty()) out.push_back(part);
  return out;
}

/// "lo:hi:step" or a comma-separated list.
std::vector<double> parse_grid(const std::string& text) {
  auto num = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw DomainError("grid: '" + s + "' is not a number");
  };
  const auto colon = split(text, ':');
  if (colon.size() == 3) {
    const double lo = num(colon[0]);
    const double hi = num(colon[1]);
    const double step = num(colon[2]);
    if (!(step > 0.0) || hi < lo) throw DomainError("grid: need lo <= hi and step > 0");
    const auto count = static_cast<long long>(std::floor((hi - lo) / step + 1e-9));
    std::vector<double> g;
    for (long long k = 0; k <= count; ++k) g.push_back(lo + static_cast<double>(k) * step);
    return g;
  }
  std::vector<double> g;
  for (const auto& s : split(text, ',')) g.push_back(num(s));
  if (g.empty()) throw DomainError("grid: empty");
  return g;
}

std::string file_stem(const std::string& s) {
  std::string out;
  for (char c : s) out += std::isalnum(static_cast<unsigned char>(c)) || c == '.' ? c : '_';
  return out;
}

std::string table(const std::vector<std::string>& header,
                  const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
  for (const auto& r : rows)
    for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
  std::ostringstream os;
  auto line = [&](const std::vector<std::string>& r) {
    for (std::size_t c = 0; c < r.size(); ++c)
      os << (c ? "  " : "") << std::setw(static_cast<int>(width[c])) << r[c];
    os << '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return os.str();
}

struct AxiomOptions {
  std::string rule;
  std::vector<std::string> axioms;
  bool matrix = false;
  std::string rules = "cmrs,qbrs,left_es:0.9";
  std::string report = "table";
  std::string cex_dir;
  std::string replay;
  axioms::CheckConfig cfg;
};

std::vector<axioms::AxiomId> parse_axioms(const std::vector<std::string>& names) {
  std::vector<axioms::AxiomId> ids;
  for (const auto& joined : names)
    for (const auto& n : split(joined, ',')) {
      if (n == "all") {
        for (auto id : axioms::all_axioms()) ids.push_back(id);
        continue;
      }
      const auto id = axioms::parse_axiom(n);
      if (!id) throw DomainError("unknown axiom '" + n + "'");
      ids.push_back(*id);
    }
  return ids;
}

std::string write_cex(const axioms::CheckResult& r, const std::string& dir) {
  if (dir.empty() || !r.counterexample) return "";
  std::filesystem::create_directories(dir);
  const auto path = (std::filesystem::path(dir) /
                     (file_stem(r.counterexample->rule) + "_" +
                      file_stem(axioms::axiom_name(r.axiom)) + ".json"))
                        .string();
  std::ofstream f(path);
  if (!f) throw DomainError("cannot write " + path);
  f << io::counterexample_to_json(*r.counterexample).dump(2) << '\n';
  return path;
}

int run_axioms(const AxiomOptions& o, std::ostream& out) {
  if (!o.replay.empty()) {
    if (o.rule.empty()) throw DomainError("--replay needs --rule");
    const auto cex = io::counterexample_from_json(io::read_json_file(o.replay));
    const bool reproduced = axioms::reverify(axioms::make_rule(io::parse_spec(o.rule)), cex);
    out << (reproduced ? "reproduced" : "not reproduced") << ": " << axioms::axiom_name(cex.axiom)
        << " on " << o.rule << '\n';
    return reproduced ? 0 : 1;
  }

  std::vector<mech::MechanismSpec> specs;
  if (o.matrix) {
    for (const auto& r : split(o.rules, ',')) specs.push_back(io::parse_spec(r));
  } else {
    if (o.rule.empty()) throw DomainError("axioms needs --rule or --matrix");
    specs.push_back(io::parse_spec(o.rule));
  }
  std::vector<axioms::AxiomId> ids =
      o.axioms.empty() ? std::vector<axioms::AxiomId>{axioms::AxiomId::Com, axioms::AxiomId::UI,
                                                      axioms::AxiomId::IF, axioms::AxiomId::AF,
                                                      axioms::AxiomId::RF, axioms::AxiomId::ZP,
                                                      axioms::AxiomId::AA, axioms::AxiomId::OA,
                                                      axioms::AxiomId::IA}
                       : parse_axioms(o.axioms);
  const auto m = axioms::comparison_matrix(specs, ids, o.cfg);

  std::vector<std::vector<std::string>> paths(m.rows.size());
  for (std::size_t r = 0; r < m.rows.size(); ++r)
    for (const auto& cell : m.cells[r]) paths[r].push_back(write_cex(cell, o.cex_dir));

  if (o.report == "json") {
    json rows = json::array();
    for (std::size_t r = 0; r < m.rows.size(); ++r) {
      json cells = json::array();
      for (std::size_t c = 0; c < m.cols.size(); ++c) {
        json cell = io::check_result_to_json(m.cells[r][c]);
        if (!paths[r][c].empty()) cell["counterexample_file"] = paths[r][c];
        cells.push_back(cell);
      }
      rows.push_back({{"rule", m.rows[r]}, {"results", cells}});
    }
    out << json{{"seed", o.cfg.seed}, {"trials", o.cfg.trials}, {"rows", rows}}.dump(2) << '\n';
  } else if (o.report == "csv") {
    out << "rule";
    for (auto a : m.cols) out << ',' << axioms::axiom_name(a);
    out << ",counterexamples\n";
    for (std::size_t r = 0; r < m.rows.size(); ++r) {
      out << m.rows[r];
      std::string files;
      for (std::size_t c = 0; c < m.cols.size(); ++c) {
        out << ',' << (m.cells[r][c].passed ? "pass" : "fail");
        if (!paths[r][c].empty())
          files += (files.empty() ? "" : ";") + axioms::axiom_name(m.cols[c]) + "=" + paths[r][c];
      }
      out << ',' << files << '\n';
    }
  } else {
    out << axioms::render_table(m);
    for (std::size_t r = 0; r < m.rows.size(); ++r)
      for (std::size_t c = 0; c < m.cols.size(); ++c) {
        const auto& cell = m.cells[r][c];
        if (cell.passed) continue;
        const auto& w = cell.counterexample->witness;
        out << m.rows[r] << ' ' << axioms::axiom_name(cell.axiom) << ": trial "
            << cell.trials_run << ", agent " << w.agent << ", index " << w.outcome << ", "
            << sig4(w.lhs) << " vs " << sig4(w.rhs) << " (" << w.detail << ")";
        if (!paths[r][c].empty()) out << " -> " << paths[r][c];
        out << '\n';
      }
  }
  return 0;
}

std::vector<double> broadcast(const std::vector<double>& v, std::size_t n, const char* what) {
  if (v.size() == 1) return std::vector<double>(n, v.front());
  if (v.size() != n) throw DomainError(std::string(what) + " needs one value or one per agent");
  return v;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Allocation rules with frictions: evaluation, axiom checks, Gaussian analytics"};
  app.require_subcommand(1);
  std::uint64_t seed = 0;
  std::string output;

  // allocate
  auto* alloc_cmd = app.add_subcommand("allocate", "Evaluate a rule on a space+profile JSON");
  std::string space_path, rule_text, alloc_format = "json";
  double tie_tol = 0.0;
  alloc_cmd->add_option("--space", space_path, "Space/profile JSON")->required();
  alloc_cmd->add_option("--rule", rule_text, "Rule as JSON or shorthand")->required();
  alloc_cmd->add_option("--format", alloc_format)->check(CLI::IsMember({"json", "csv"}));
  alloc_cmd->add_option("--tie-tol", tie_tol, "Gap below which aggregate values are tied");
  alloc_cmd->add_option("--out", output);

  // axioms
  auto* ax_cmd = app.add_subcommand("axioms", "Randomized axiom checks and the comparison matrix");
  AxiomOptions ax;
  ax_cmd->add_option("--rule", ax.rule);
  ax_cmd->add_option("--axiom,--axioms", ax.axioms, "Axiom names, comma separated, or all");
  ax_cmd->add_flag("--matrix", ax.matrix);
  ax_cmd->add_option("--rules", ax.rules, "Comma-separated rule shorthands for --matrix");
  ax_cmd->add_option("--trials", ax.cfg.trials);
  ax_cmd->add_option("--seed", seed);
  ax_cmd->add_option("--space-size", ax.cfg.space_size);
  ax_cmd->add_option("--agents", ax.cfg.n_agents);
  ax_cmd->add_option("--lo", ax.cfg.value_lo);
  ax_cmd->add_option("--hi", ax.cfg.value_hi);
  ax_cmd->add_option("--tol", ax.cfg.tol);
  ax_cmd->add_option("--report", ax.report)->check(CLI::IsMember({"json", "csv", "table"}));
  ax_cmd->add_option("--cex-dir", ax.cex_dir, "Directory for counterexample JSON files");
  ax_cmd->add_option("--replay", ax.replay, "Re-evaluate a stored counterexample");
  ax_cmd->add_option("--out", output);

  // gaussian
  auto* g_cmd = app.add_subcommand("gaussian", "Closed forms for a Gaussian pool");
  std::string pool_path, g_format = "table";
  double lambda = 0.99;
  std::vector<double> theta{0.5};
  g_cmd->add_option("--pool", pool_path)->required();
  g_cmd->add_option("--lambda", lambda);
  g_cmd->add_option("--theta", theta)->delimiter(',');
  g_cmd->add_option("--format", g_format)->check(CLI::IsMember({"json", "table"}));
  g_cmd->add_option("--out", output);

  // sweep
  auto* s_cmd = app.add_subcommand("sweep", "Cost and benefit curves as CSV");
  std::string sweep_kind = "correlation", grid = "-0.95:0.95:0.05", scheme = "constant";
  std::size_t sweep_n = 2, n_min = 2, n_max = 20;
  double sweep_sigma = 1.0, sweep_rho = 0.2, sweep_theta = 0.5;
  s_cmd->add_option("--kind", sweep_kind)->check(CLI::IsMember({"correlation", "participants"}));
  s_cmd->add_option("--grid", grid, "lo:hi:step or comma list");
  s_cmd->add_option("--n", sweep_n);
  s_cmd->add_option("--n-min", n_min);
  s_cmd->add_option("--n-max", n_max);
  s_cmd->add_option("--scheme", scheme)->check(CLI::IsMember({"constant", "geometric"}));
  s_cmd->add_option("--rho", sweep_rho);
  s_cmd->add_option("--sigma", sweep_sigma);
  s_cmd->add_option("--lambda", lambda);
  s_cmd->add_option("--theta", sweep_theta);
  s_cmd->add_option("--out", output);

  // lambda-star
  auto* l_cmd = app.add_subcommand("lambda-star", "Participation threshold in lambda");
  double l_theta = 0.5;
  std::optional<std::size_t> agent;
  l_cmd->add_option("--pool", pool_path)->required();
  l_cmd->add_option("--theta", l_theta)->required();
  l_cmd->add_option("--agent", agent);

  // crra
  auto* c_cmd = app.add_subcommand("crra", "Monte Carlo friction level for CRRA agents");
  std::string sampler_text = "lognormal:0:0.5";
  double gamma = 1.0;
  std::size_t crra_n = 3;
  crra::McConfig mc;
  c_cmd->add_option("--sampler", sampler_text, "lognormal:MU:SIGMA, constant:C, uniform:LO:HI");
  c_cmd->add_option("--gamma", gamma);
  c_cmd->add_option("--n", crra_n);
  c_cmd->add_option("--samples", mc.samples);
  c_cmd->add_option("--batches", mc.batches);
  c_cmd->add_option("--seed", seed);

  // ingest
  auto* i_cmd = app.add_subcommand("ingest", "CSV period,entity,amount to summary statistics");
  std::string input_path;
  i_cmd->add_option("--input", input_path)->required();
  i_cmd->add_option("--out", output);

  // report
  auto* r_cmd = app.add_subcommand("report", "Allocation table from summary statistics");
  std::string stats_path, r_format = "table";
  r_cmd->add_option("--stats", stats_path)->required();
  r_cmd->add_option("--lambda", lambda);
  r_cmd->add_option("--theta", theta)->delimiter(',');
  r_cmd->add_option("--format", r_format)->check(CLI::IsMember({"json", "csv", "table"}));
  r_cmd->add_option("--out", output);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  try {
    const bool seeded = (ax_cmd->parsed() && ax_cmd->count("--seed")) ||
                        (c_cmd->parsed() && c_cmd->count("--seed"));
    if (!seeded) seed = default_seed();

    if (alloc_cmd->parsed()) {
      const auto sp = io::space_profile_from_json(io::read_json_file(space_path), tie_tol);
      const auto spec = io::parse_spec(rule_text);
      const auto a = mech::apply(spec, sp.profile, sp.g, sp.space);
      const auto costs = mech::frictional_costs(sp.profile, a);
      if (alloc_format == "csv") {
        emit(io::allocation_to_csv(a, costs), output, out);
      } else {
        json j = io::allocation_to_json(a, costs);
        j["rule"] = io::spec_to_json(spec);
        emit(j.dump(2) + "\n", output, out);
      }
    } else if (ax_cmd->parsed()) {
      ax.cfg.seed = seed;
      std::ostringstream buf;
      const int code = run_axioms(ax, buf);
      emit(buf.str(), output, out);
      return code;
    } else if (g_cmd->parsed()) {
      const auto pool = io::pool_from_json(io::read_json_file(pool_path));
      const auto th = broadcast(theta, pool.size(), "--theta");
      const auto st = gauss::pool_stats(pool);
      const auto f = gauss::es_closed_form(pool, lambda);
      const auto t = gauss::tradeoff(pool, lambda, th);
      if (g_format == "json") {
        json j{{"lambda", lambda},
               {"kappa", f.kappa},
               {"sigma_total", st.sigma_total},
               {"rho_bar", st.rho_bar},
               {"intercept", f.a},
               {"slope", f.b},
               {"penalty", f.c},
               {"expected_allocation", t.expected_alloc},
               {"expected_cost", t.expected_cost},
               {"benefit", t.benefit},
               {"global_cost", t.global_cost}};
        emit(j.dump(2) + "\n", output, out);
      } else {
        std::vector<std::vector<std::string>> rows;
        for (std::size_t i = 0; i < pool.size(); ++i)
          rows.push_back({std::to_string(i), sig4(st.rho_bar[i]), sig4(f.a[i]), sig4(f.b[i]),
                          sig4(f.c[i]), sig4(t.expected_alloc[i]), sig4(t.benefit[i])});
        std::string text = table({"agent", "rho_bar", "a", "b", "c", "E[H]", "T"}, rows);
        text += "global cost " + sig4(t.global_cost) + ", sigma_total " + sig4(st.sigma_total) +
                ", kappa " + sig4(f.kappa) + "\n";
        emit(text, output, out);
      }
    } else if (s_cmd->parsed()) {
      gauss::SweepKind kind;
      if (sweep_kind == "correlation") {
        kind = gauss::CorrelationSweep{parse_grid(grid), sweep_n, sweep_sigma};
      } else {
        kind = gauss::ParticipantsSweep{
            n_min, n_max,
            scheme == "constant" ? gauss::CorrelationScheme::Constant
                                 : gauss::CorrelationScheme::Geometric,
            s_cmd->count("--rho") ? sweep_rho : (scheme == "constant" ? 0.2 : 0.5), sweep_sigma};
      }
      emit(io::sweep_to_csv(gauss::sweep(kind, lambda, sweep_theta)), output, out);
    } else if (l_cmd->parsed()) {
      const auto pool = io::pool_from_json(io::read_json_file(pool_path));
      out << "agent,lambda_star\n";
      for (std::size_t i = 0; i < pool.size(); ++i) {
        if (agent && *agent != i) continue;
        const auto ls = gauss::lambda_star(pool, l_theta, i);
        out << i << ',' << (ls ? full(*ls) : "none") << '\n';
      }
      if (agent && *agent >= pool.size()) throw DomainError("agent index out of range");
    } else if (c_cmd->parsed()) {
      mc.seed = seed;
      const auto r = crra::crra_epsilon0(crra::parse_sampler(sampler_text), gamma, crra_n, mc);
      json j{{"sampler", crra::sampler_name(crra::parse_sampler(sampler_text))},
             {"gamma", gamma},
             {"n", crra_n},
             {"samples", mc.samples},
             {"seed", mc.seed},
             {"epsilon0", r.epsilon0},
             {"epsilon_merged", r.epsilon_merged},
             {"se_epsilon0", r.se_epsilon0},
             {"se_merged", r.se_merged},
             {"se_difference", r.se_difference},
             {"margin_in_se", std::isfinite(r.margin_in_se) ? json(r.margin_in_se) : json("inf")}};
      out << j.dump(2) << '\n';
    } else if (i_cmd->parsed()) {
      const auto t = emp::ingest(input_path);
      for (const auto& d : t.dropped) err << "ingest: " << d << '\n';
      const auto st = emp::summarize(t);
      for (std::size_t i : st.zero_variance)
        err << "ingest: " << st.names[i] << " has zero variance\n";
      emit(io::stats_to_json(st).dump(2) + "\n", output, out);
    } else if (r_cmd->parsed()) {
      const auto st = io::stats_from_json(io::read_json_file(stats_path));
      const auto rep = emp::report(st, lambda, theta);
      if (rep.projected) err << "report: correlation matrix projected to the nearest PSD matrix\n";
      if (r_format == "json") {
        json rows = json::array();
        for (const auto& r : rep.rows)
          rows.push_back({{"name", r.name},
                          {"expected_allocation", r.expected_alloc},
                          {"expected_cost", r.expected_cost},
                          {"benefit", r.benefit}});
        emit(json{{"rows", rows}, {"global_cost", rep.global_cost}, {"projected", rep.projected}}
                     .dump(2) +
                 "\n",
             output, out);
      } else if (r_format == "csv") {
        std::string text = "name,expected_allocation,expected_cost,benefit\n";
        for (const auto& r : rep.rows)
          text += r.name + "," + full(r.expected_alloc) + "," + full(r.expected_cost) + "," +
                  full(r.benefit) + "\n";
        emit(text, output, out);
      } else {
        std::vector<std::vector<std::string>> rows;
        for (const auto& r : rep.rows)
          rows.push_back({r.name, sig4(r.expected_alloc), sig4(r.expected_cost), sig4(r.benefit)});
        emit(table({"name", "E[H]", "C", "T"}, rows) + "global cost " + sig4(rep.global_cost) + "\n",
             output, out);
      }
    }
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace fricshare::cli
