#include "commands.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "badmarket/builders.hpp"
#include "badmarket/experiments.hpp"
#include "badmarket/io.hpp"
#include "badmarket/quota.hpp"
#include "badmarket/welfare.hpp"
#include "json.hpp"

namespace badmarket::cli {

namespace {

constexpr std::size_t kListLimit = 10;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v + 0.0);
  return buf;
}

std::vector<std::string> source_labels(const Economy& econ) {
  std::vector<std::string> labels(static_cast<std::size_t>(econ.ell()));
  for (int i = 0; i < econ.ell(); ++i) {
    const int pos = econ.source_order.empty() ? i : econ.source_order[static_cast<std::size_t>(i)];
    const std::string name = i < static_cast<int>(econ.commodities.labels.size())
                                 ? econ.commodities.labels[static_cast<std::size_t>(i)]
                                 : "c" + std::to_string(i);
    labels[static_cast<std::size_t>(pos)] = name;
  }
  return labels;
}

// Commodity vector in source order with labels.
std::string labeled(const Economy& econ, const Vector& internal) {
  const Vector v = econ.to_source_order(internal);
  const std::vector<std::string> labels = source_labels(econ);
  std::string out;
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (k) out += "  ";
    out += labels[static_cast<std::size_t>(k)] + "=" + fmt(v[k]);
  }
  return out;
}

CommandOutcome guarded(const std::function<CommandOutcome()>& body) {
  try {
    return body();
  } catch (const Error& e) {
    CommandOutcome o;
    o.exit_code = kInputError;
    o.diagnostics = std::string("error: ") + e.what() + "\n";
    return o;
  } catch (const std::exception& e) {
    CommandOutcome o;
    o.exit_code = kInputError;
    o.diagnostics = std::string("error: unexpected failure: ") + e.what() + "\n";
    return o;
  }
}

Economy load_validated(const std::string& path, CommandOutcome& o) {
  Economy econ = load_economy_file(path);
  const ValidationReport rep = validate_economy(econ);
  std::string errors;
  for (const Finding& f : rep.findings) {
    const bool err = f.severity == Severity::Error;
    (err ? errors : o.diagnostics) += std::string(err ? "error" : "warning") + " [" + f.rule + "]: " + f.message + "\n";
  }
  if (!rep.passed) throw SchemaError("economy failed validation\n" + errors);
  return econ;
}

void describe_certificate(const Economy& econ, const EquilibriumCertificate& cert, std::ostringstream& os) {
  os << "price: " << labeled(econ, cert.price) << "\n";
  const Residuals& r = cert.residuals;
  os << "clearing residual: " << fmt(r.clearing.size() ? r.clearing.lpNorm<Eigen::Infinity>() : 0.0) << "\n";
  os << "worst budget violation: " << fmt(r.worst_budget_violation) << "\n";
  os << "worst optimality gap: " << fmt(r.worst_optimality_gap) << "\n";
  os << "worst profit gap: " << fmt(r.worst_profit_gap) << "\n";
  for (std::size_t i = 0; i < cert.bundles.size() && i < kListLimit; ++i)
    os << "bundle " << econ.consumers[i].id << ": " << labeled(econ, cert.bundles[i]) << "\n";
  if (cert.bundles.size() > kListLimit) os << "... " << cert.bundles.size() - kListLimit << " more bundles\n";
  for (std::size_t j = 0; j < cert.productions.size() && j < kListLimit; ++j)
    os << "production " << econ.firms[j].id << ": " << labeled(econ, cert.productions[j]) << "\n";
  if (cert.productions.size() > kListLimit) os << "... " << cert.productions.size() - kListLimit << " more productions\n";
}

void describe_report(const VerificationReport& rep, double tol, std::ostringstream& os) {
  auto line = [&](const char* name, bool ok) { os << name << ": " << (ok ? "ok" : "FAIL") << "\n"; };
  line("(i) quasi-demand", rep.demand_ok);
  line("(ii) profit maximization", rep.profit_ok);
  line("(iii) market clearing", rep.clearing_ok);
  line("cheaper points", rep.promotion_ok);
  line("price normalization", rep.normalization_ok);
  line("production consistency", rep.consistency_ok);
  for (const std::string& m : rep.messages) os << "  " << m << "\n";
  os << "result: " << (rep.passed() ? "verified" : "verification failed") << " at tol " << fmt(tol) << "\n";
}

NoConvergence no_convergence_of(const SolveResult& r) { return std::get<NoConvergence>(r); }

CommandOutcome no_convergence(const NoConvergence& nc, CommandOutcome o) {
  o.exit_code = kNoConvergence;
  std::ostringstream os;
  os << "status: no convergence after " << nc.restarts_tried << " restart(s)\n";
  os << "best residual: " << fmt(nc.best_residual) << "\n";
  if (!nc.reason.empty()) os << "reason: " << nc.reason << "\n";
  o.summary = os.str();
  return o;
}

void write_artifact(const std::string& path, const std::string& text, CommandOutcome& o, std::ostringstream& os,
                    const char* what) {
  write_text_file(path, text);
  o.artifacts.push_back(path);
  os << what << ": " << path << "\n";
}

std::string header(const Economy& econ) {
  return "economy: " + econ.name + " (" + std::to_string(econ.consumer_count()) + " consumers, " +
         std::to_string(econ.firm_count()) + " firms, " + std::to_string(econ.ell()) + " commodities)\n";
}

bool scheme_is_zero(const QuotaScheme& s) {
  auto zero = [](const Vector& v) { return v.size() == 0 || v.cwiseAbs().maxCoeff() == 0.0; };
  return zero(s.government) && std::all_of(s.firm_quotas.begin(), s.firm_quotas.end(), zero);
}

std::vector<int> parse_ns(const std::string& text) {
  std::vector<int> ns;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    int n = 0;
    try {
      n = std::stoi(item, &used);
    } catch (const std::exception&) {
      throw DomainError("--ns: '" + item + "' is not an integer");
    }
    if (used != item.size()) throw DomainError("--ns: '" + item + "' is not an integer");
    ns.push_back(n);
  }
  if (ns.empty()) throw DomainError("--ns needs at least one size");
  return ns;
}

Allocation allocation_of_file(const Economy& econ, const std::string& path) {
  return Allocation::of(load_certificate(econ, read_text_file(path)));
}

void utility_table(const Economy& econ, const UtilityComparison& cmp, std::ostringstream& os) {
  os << "consumer,first,second,difference\n";
  for (std::size_t i = 0; i < cmp.first.size(); ++i)
    os << econ.consumers[i].id << "," << fmt(cmp.first[i]) << "," << fmt(cmp.second[i]) << ","
       << fmt(cmp.first[i] - cmp.second[i]) << "\n";
}

}  // namespace

SolverConfig solver_config(const GlobalOptions& opts) {
  if (!(opts.tol > 0.0)) throw DomainError("--tol must be positive");
  SolverConfig cfg;
  cfg.clearing_tol = std::min(cfg.clearing_tol, opts.tol);
  cfg.optimality_tol = std::min(cfg.optimality_tol, opts.tol);
  cfg.seed = opts.seed;
  cfg.restarts = opts.restarts;
  cfg.validate();
  return cfg;
}

CommandOutcome cmd_solve(const std::string& economy_path, const GlobalOptions& opts) {
  return guarded([&] {
    CommandOutcome o;
    const SolverConfig cfg = solver_config(opts);
    const Economy econ = load_validated(economy_path, o);
    const SolveResult res = solve_equilibrium(econ, cfg);
    if (std::holds_alternative<NoConvergence>(res)) return no_convergence(no_convergence_of(res), o);
    const auto& cert = std::get<EquilibriumCertificate>(res);
    const VerificationReport rep = verify_equilibrium(econ, cert, Tolerances{opts.tol, opts.tol});
    std::ostringstream os;
    os << header(econ);
    os << "status: " << (rep.passed() ? "verified equilibrium" : "equilibrium failed verification") << " at tol "
       << fmt(opts.tol) << "\n";
    describe_certificate(econ, cert, os);
    if (!rep.passed()) {
      describe_report(rep, opts.tol, os);
      o.exit_code = kVerificationFailed;
    }
    if (!opts.out.empty()) write_artifact(opts.out, serialize_certificate(econ, cert), o, os, "certificate");
    o.summary = os.str();
    return o;
  });
}

CommandOutcome cmd_verify(const std::string& economy_path, const std::string& certificate_path,
                          const GlobalOptions& opts) {
  return guarded([&] {
    CommandOutcome o;
    if (!(opts.tol > 0.0)) throw DomainError("--tol must be positive");
    const Economy econ = load_validated(economy_path, o);
    const std::string text = read_text_file(certificate_path);
    VerificationReport rep;
    if (!opts.quota.empty()) {
      const QuotaScheme scheme = load_quota(econ, read_text_file(opts.quota));
      rep = verify_quota(econ, scheme, load_quota_certificate(econ, text), opts.tol);
    } else {
      rep = verify_equilibrium(econ, load_certificate(econ, text), Tolerances{opts.tol, opts.tol});
    }
    std::ostringstream os;
    os << header(econ);
    describe_report(rep, opts.tol, os);
    o.summary = os.str();
    o.exit_code = rep.passed() ? kOk : kVerificationFailed;
    return o;
  });
}

CommandOutcome cmd_quota(const std::string& economy_path, const GlobalOptions& opts) {
  return guarded([&] {
    CommandOutcome o;
    if (opts.quota.empty()) throw DomainError("quota needs --quota <path>");
    const SolverConfig cfg = solver_config(opts);
    const Economy econ = load_validated(economy_path, o);
    const QuotaScheme scheme = load_quota(econ, read_text_file(opts.quota));
    const QuotaResult res = solve_quota(econ, scheme, cfg);
    if (const auto* nc = std::get_if<NoConvergence>(&res)) return no_convergence(*nc, o);
    const auto& cert = std::get<QuotaCertificate>(res);
    const VerificationReport rep = verify_quota(econ, scheme, cert, opts.tol);
    std::ostringstream os;
    os << header(econ);
    os << "status: " << (rep.passed() ? "verified equilibrium" : "equilibrium failed verification") << " at tol "
       << fmt(opts.tol) << "\n";
    describe_certificate(econ, cert.base, os);
    if (!scheme_is_zero(scheme)) {
      os << "rent government: " << fmt(cert.government_rent) << "\n";
      for (std::size_t j = 0; j < cert.firm_rents.size(); ++j)
        os << "rent " << econ.firms[j].id << ": " << fmt(cert.firm_rents[j]) << "\n";
      os << "compliance residual: "
         << fmt(cert.compliance_residual.size() ? cert.compliance_residual.lpNorm<Eigen::Infinity>() : 0.0) << "\n";
    }
    if (!rep.passed()) {
      describe_report(rep, opts.tol, os);
      o.exit_code = kVerificationFailed;
    }
    if (!opts.out.empty()) write_artifact(opts.out, serialize_quota_certificate(econ, cert), o, os, "certificate");
    o.summary = os.str();
    return o;
  });
}

CommandOutcome cmd_welfare(const std::string& economy_path, const WelfareOptions& wopts, const GlobalOptions& opts) {
  return guarded([&] {
    CommandOutcome o;
    const bool compare = !wopts.compare.empty();
    const bool search = !wopts.search.empty();
    if (compare == search) throw DomainError("welfare needs exactly one of --compare or --search");
    const Economy econ = load_validated(economy_path, o);
    std::ostringstream os, csv;
    os << header(econ);
    if (compare) {
      if (wopts.compare.size() != 2) throw DomainError("--compare takes two certificate paths");
      const Allocation a = allocation_of_file(econ, wopts.compare[0]);
      const Allocation b = allocation_of_file(econ, wopts.compare[1]);
      const UtilityComparison cmp = compare_allocations(econ, a, b);
      utility_table(econ, cmp, csv);
      os << csv.str();
      os << "weighted sums: " << fmt(cmp.weighted_first) << " " << fmt(cmp.weighted_second) << "\n";
      os << "unweighted sums: " << fmt(cmp.unweighted_first) << " " << fmt(cmp.unweighted_second) << "\n";
      os << "verdict: "
         << (cmp.first_dominates ? "first dominates" : cmp.second_dominates ? "second dominates" : "no dominance")
         << "\n";
    } else {
      if (wopts.samples < 0) throw DomainError("--samples must be nonnegative");
      const EquilibriumCertificate cert = load_certificate(econ, read_text_file(wopts.search));
      const auto found = search_pareto_improvement(econ, cert, wopts.samples, opts.seed);
      if (!found) {
        csv << "consumer,first,second,difference\n";
        os << "search: no Pareto improvement in " << wopts.samples << " samples (evidence, not a proof)\n";
      } else {
        const UtilityComparison cmp = compare_allocations(econ, found->improved, found->original);
        utility_table(econ, cmp, csv);
        os << "search: Pareto improvement found\n" << csv.str();
        if (!opts.out.empty()) {
          EquilibriumCertificate improved;
          improved.price = found->improved.price;
          improved.bundles = found->improved.bundles;
          improved.productions = found->improved.productions;
          write_artifact(opts.out, serialize_certificate(econ, improved), o, os, "allocation");
        }
      }
    }
    if (!wopts.csv.empty()) write_artifact(wopts.csv, csv.str(), o, os, "csv");
    o.summary = os.str();
    return o;
  });
}

CommandOutcome cmd_family(const FamilyOptions& fopts, const GlobalOptions& opts) {
  return guarded([&] {
    CommandOutcome o;
    const FamilyKind kind = family_kind_from_string(fopts.family);
    const std::vector<int> ns = parse_ns(fopts.ns);
    const SolverConfig cfg = solver_config(opts);
    const std::vector<FamilyRecord> records = run_family(kind, ns, cfg);
    std::ostringstream os;
    os << "n,verified,oracle_gap,allowance,ui_share\n";
    for (const FamilyRecord& r : records) {
      os << r.n << "," << (r.verified ? 1 : 0) << "," << fmt(r.oracle_gap) << "," << fmt(r.allowance) << ","
         << fmt(r.ui_share);
      if (!r.note.empty()) os << "  # " << r.note;
      os << "\n";
      if (!r.certificate)
        o.exit_code = kNoConvergence;
      else if (!r.verified && o.exit_code == kOk)
        o.exit_code = kVerificationFailed;
    }
    if (!opts.out.empty())
      write_artifact(opts.out, csv_string(records, fopts.runtime), o, os, "csv");
    else
      os << csv_string(records, fopts.runtime);
    o.summary = os.str();
    return o;
  });
}

CommandOutcome cmd_oracle(const OracleOptions& oopts, const GlobalOptions& opts) {
  return guarded([&] {
    CommandOutcome o;
    std::ostringstream os;
    Economy econ;
    std::string artifact;
    if (oopts.family == "hara") {
      econ = build_hara_economy(oopts.n);
      const EquilibriumCertificate cert = hara_oracle(oopts.n);
      os << "hara oracle, n = " << oopts.n << ", S = " << fmt(harmonic_number(oopts.n)) << "\n";
      describe_certificate(econ, cert, os);
      artifact = serialize_certificate(econ, cert);
    } else if (oopts.family == "one-agent") {
      econ = build_one_agent_economy();
      EquilibriumCertificate cert;
      cert.price = Vector(2);
      cert.price << -0.5, 0.5;
      cert.bundles = {Vector::Ones(2)};
      compute_residuals(econ, cert);
      os << "one-agent equilibrium\n";
      describe_certificate(econ, cert, os);
      artifact = serialize_certificate(econ, cert);
    } else if (oopts.family == "garbage") {
      econ = build_garbage_economy(oopts.n);
      const GarbageReference ref = garbage_oracle();
      os << "garbage continuum reference\n";
      os << "price: " << labeled(econ, ref.price) << "\n";
      os << "aggregate garbage: " << fmt(ref.aggregate_garbage) << "\n";
      os << "aggregate consumption good: " << fmt(ref.aggregate_good) << "\n";
      os << "activities: " << fmt(ref.activities[0]) << " " << fmt(ref.activities[1]) << "\n";
      nlohmann::json doc;
      doc["price"] = std::vector<double>(ref.price.data(), ref.price.data() + ref.price.size());
      doc["aggregate_garbage"] = ref.aggregate_garbage;
      doc["aggregate_good"] = ref.aggregate_good;
      doc["activities"] = {ref.activities[0], ref.activities[1]};
      artifact = doc.dump(2) + "\n";
    } else {
      throw DomainError("unknown oracle family '" + oopts.family + "' (expected hara, garbage or one-agent)");
    }
    if (!opts.out.empty()) write_artifact(opts.out, artifact, o, os, "reference");
    if (!oopts.economy_out.empty()) write_artifact(oopts.economy_out, serialize_economy(econ), o, os, "economy");
    o.summary = os.str();
    return o;
  });
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Competitive equilibria with bads, negative prices and quotas", "badmarket"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_help_all_flag("--help-all", "Expand all help");

  GlobalOptions g;
  app.add_option("--tol", g.tol, "Verification tolerance, also caps solver tolerances")->capture_default_str();
  app.add_option("--seed", g.seed, "Seed for every stochastic path")->capture_default_str();
  app.add_option("--restarts", g.restarts, "Solver restarts")->capture_default_str();
  app.add_option("--out", g.out, "Output artifact path");
  app.add_option("--quota", g.quota, "Quota document path");

  std::string economy, certificate;
  WelfareOptions w;
  FamilyOptions f;
  OracleOptions oc;

  CLI::App* solve = app.add_subcommand("solve", "Solve an economy, verify and summarize the certificate");
  solve->add_option("economy", economy, "Economy document")->required();
  CLI::App* verify = app.add_subcommand("verify", "Check a certificate (a quota certificate with --quota)");
  verify->add_option("economy", economy, "Economy document")->required();
  verify->add_option("certificate", certificate, "Certificate document")->required();
  CLI::App* quota = app.add_subcommand("quota", "Solve the quota equilibrium given by --quota");
  quota->add_option("economy", economy, "Economy document")->required();
  CLI::App* welfare = app.add_subcommand("welfare", "Compare allocations or search for a Pareto improvement");
  welfare->add_option("economy", economy, "Economy document")->required();
  welfare->add_option("--compare", w.compare, "Two certificates to compare")->expected(2);
  welfare->add_option("--search", w.search, "Certificate to search around");
  welfare->add_option("--samples", w.samples, "Search samples")->capture_default_str();
  welfare->add_option("--csv", w.csv, "Write the utility table as CSV");
  CLI::App* family = app.add_subcommand("family", "Solve a family of economies and emit CSV");
  family->add_option("--family", f.family, "hara or garbage")->required()->check(CLI::IsMember({"hara", "garbage"}));
  family->add_option("--ns", f.ns, "Comma-separated sizes")->required();
  family->add_flag("--runtime", f.runtime, "Add a runtime_ms column (not reproducible)");
  CLI::App* oracle = app.add_subcommand("oracle", "Write a closed-form reference equilibrium");
  oracle->add_option("--family", oc.family, "hara, garbage or one-agent")
      ->required()
      ->check(CLI::IsMember({"hara", "garbage", "one-agent"}));
  oracle->add_option("--n", oc.n, "Instance size")->capture_default_str();
  oracle->add_option("--economy-out", oc.economy_out, "Also write the matching economy");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }

  CommandOutcome o;
  if (*solve)
    o = cmd_solve(economy, g);
  else if (*verify)
    o = cmd_verify(economy, certificate, g);
  else if (*quota)
    o = cmd_quota(economy, g);
  else if (*welfare)
    o = cmd_welfare(economy, w, g);
  else if (*family)
    o = cmd_family(f, g);
  else
    o = cmd_oracle(oc, g);
  out << o.summary;
  err << o.diagnostics;
  return o.exit_code;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("badmarket");
  for (const std::string& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace badmarket::cli
