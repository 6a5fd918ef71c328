#include "badmarket/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace badmarket {

using json = nlohmann::json;

std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IOError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IOError("cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw IOError("failed writing '" + path + "'");
}

namespace {

json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed document: ") + e.what());
  }
}

const json& field(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) throw SchemaError(where + ": missing field '" + key + "'");
  return obj.at(key);
}

double number(const json& v, const std::string& where) {
  if (v.is_null()) return kInf;
  if (!v.is_number()) throw SchemaError(where + ": expected a number");
  return v.get<double>();
}

Vector vec(const json& v, const std::string& where) {
  if (!v.is_array()) throw SchemaError(where + ": expected an array");
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = number(v[i], where);
  return out;
}

Vector vec_sized(const json& v, Eigen::Index n, const std::string& where) {
  Vector out = vec(v, where);
  if (out.size() != n) throw SchemaError(where + ": expected " + std::to_string(n) + " entries");
  return out;
}

int integer(const json& v, const std::string& where) {
  if (!v.is_number_integer()) throw SchemaError(where + ": expected an integer");
  return v.get<int>();
}

json num_json(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json vec_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(num_json(v[i]));
  return a;
}

std::string firm_key(const Technology& t, std::size_t j) { return t.id.empty() ? std::to_string(j + 1) : t.id; }
std::string consumer_key(const Consumer& c, std::size_t i) { return c.id.empty() ? std::to_string(i + 1) : c.id; }

PreferenceSpec load_preference(const json& p, int ell, const std::string& where) {
  const std::string family = field(p, "family", where).get<std::string>();
  const json params = p.contains("params") ? p.at("params") : json::object();
  PreferenceSpec spec;
  const Family f = [&] {
    try {
      return family_from_string(family);
    } catch (const Error& e) {
      throw SchemaError(where + ": " + e.what());
    }
  }();
  switch (f) {
    case Family::QuadraticBad:
      spec = PreferenceSpec::quadratic_bad(integer(field(params, "good", where), where),
                                           integer(field(params, "bad", where), where),
                                           number(field(params, "c", where), where));
      break;
    case Family::LogMinusLinear:
      spec = PreferenceSpec::log_minus_linear(integer(field(params, "good", where), where),
                                              integer(field(params, "bad", where), where),
                                              number(field(params, "sigma", where), where));
      break;
    case Family::Linear:
      spec = PreferenceSpec::linear(vec_sized(field(params, "coefficients", where), ell, where + ".coefficients"));
      break;
    case Family::CobbDouglas: {
      const Vector alpha = vec_sized(field(params, "exponents", where), ell, where + ".exponents");
      const Vector eps =
          params.contains("shifts") ? vec_sized(params.at("shifts"), ell, where + ".shifts") : Vector::Zero(ell);
      spec = PreferenceSpec::cobb_douglas(alpha, eps);
      break;
    }
  }
  if (params.contains("scale")) spec.scale = number(params.at("scale"), where + ".scale");
  if (p.contains("externality") && !p.at("externality").is_null()) {
    const json& e = p.at("externality");
    Externality ext;
    ext.gamma = vec_sized(field(e, "gamma", where + ".externality"), ell, where + ".externality.gamma");
    try {
      ext.statistic = statistic_from_string(field(e, "statistic", where + ".externality").get<std::string>());
    } catch (const Error& err) {
      throw SchemaError(where + ": " + err.what());
    }
    if (e.contains("production_correction"))
      ext.production_correction = vec_sized(e.at("production_correction"), ell, where + ".production_correction");
    spec.externality = ext;
  }
  return spec;
}

json preference_json(const PreferenceSpec& s) {
  json p;
  p["family"] = std::string(to_string(s.family));
  json params;
  switch (s.family) {
    case Family::QuadraticBad:
      params = {{"good", s.good}, {"bad", s.bad}, {"c", s.coefficient}};
      break;
    case Family::LogMinusLinear:
      params = {{"good", s.good}, {"bad", s.bad}, {"sigma", s.coefficient}};
      break;
    case Family::Linear:
      params = {{"coefficients", vec_json(s.weights)}};
      break;
    case Family::CobbDouglas:
      params = {{"exponents", vec_json(s.weights)}, {"shifts", vec_json(s.shifts)}};
      break;
  }
  if (s.scale != 1.0) params["scale"] = s.scale;
  p["params"] = params;
  if (s.externality) {
    json e = {{"gamma", vec_json(s.externality->gamma)},
              {"statistic", std::string(to_string(s.externality->statistic))}};
    if (s.externality->production_correction.size() > 0)
      e["production_correction"] = vec_json(s.externality->production_correction);
    p["externality"] = e;
  } else {
    p["externality"] = nullptr;
  }
  return p;
}

template <class F>
auto schema_guard(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw SchemaError(std::string("invalid document: ") + e.what());
  } catch (const IndexError& e) {
    throw SchemaError(e.what());
  }
}

}  // namespace

Economy load_economy(const std::string& text) {
  const json doc = parse(text);
  return schema_guard([&] {
    Economy econ;
    if (!doc.is_object()) throw SchemaError("economy document must be an object");
    econ.name = doc.value("name", std::string());
    const json& cs = field(doc, "commodities", "economy");
    econ.commodities.ell = integer(field(cs, "ell", "commodities"), "commodities.ell");
    econ.commodities.bad_count = cs.contains("bad_count") ? integer(cs.at("bad_count"), "commodities.bad_count") : 0;
    econ.commodities.regulated_count =
        cs.contains("regulated_count") ? integer(cs.at("regulated_count"), "commodities.regulated_count") : 0;
    if (cs.contains("labels")) econ.commodities.labels = cs.at("labels").get<std::vector<std::string>>();
    const int ell = econ.commodities.ell;
    if (ell <= 0) throw SchemaError("commodities.ell must be positive");

    const json firms = doc.contains("firms") ? doc.at("firms") : json::array();
    if (!firms.is_array()) throw SchemaError("firms must be an array");
    for (std::size_t j = 0; j < firms.size(); ++j) {
      const json& f = firms[j];
      const std::string where = "firms[" + std::to_string(j) + "]";
      Technology t;
      t.id = f.contains("id") ? f.at("id").get<std::string>() : std::to_string(j + 1);
      try {
        t.kind = technology_kind_from_string(field(f, "kind", where).get<std::string>());
      } catch (const Error& e) {
        if (dynamic_cast<const SchemaError*>(&e)) throw;
        throw SchemaError(where + ": " + e.what());
      }
      t.offset = f.contains("offset") ? vec_sized(f.at("offset"), ell, where + ".offset") : Vector::Zero(ell);
      if (f.contains("generators"))
        for (const json& g : f.at("generators")) t.generators.push_back(vec_sized(g, ell, where + ".generators"));
      t.free_disposal = f.value("free_disposal", false);
      if (t.kind == TechnologyKind::ZeroFirm && !t.generators.empty())
        throw SchemaError(where + ": a zero firm has no generators");
      if (t.kind == TechnologyKind::Polytope && t.generators.empty())
        throw SchemaError(where + ": a polytope needs at least one vertex");
      econ.firms.push_back(std::move(t));
    }

    const json& consumers = field(doc, "consumers", "economy");
    if (!consumers.is_array()) throw SchemaError("consumers must be an array");
    const double n = static_cast<double>(consumers.size());
    for (std::size_t i = 0; i < consumers.size(); ++i) {
      const json& c = consumers[i];
      const std::string where = "consumers[" + std::to_string(i) + "]";
      Consumer con;
      con.id = c.contains("id") ? c.at("id").get<std::string>() : std::to_string(i + 1);
      con.weight = c.contains("weight") ? number(c.at("weight"), where + ".weight") : 1.0 / n;
      con.endowment = vec_sized(field(c, "endowment", where), ell, where + ".endowment");
      if (c.contains("shares")) {
        con.shares = vec_sized(c.at("shares"), static_cast<Eigen::Index>(econ.firms.size()), where + ".shares");
      } else if (econ.firms.empty()) {
        con.shares = Vector(0);
      } else {
        throw SchemaError(where + ": missing field 'shares'");
      }
      con.bounds = c.contains("bounds") ? vec_sized(c.at("bounds"), ell, where + ".bounds") : Vector::Constant(ell, kInf);
      con.preference = load_preference(field(c, "preference", where), ell, where + ".preference");
      econ.consumers.push_back(std::move(con));
    }

    if (doc.contains("monotone_witnesses")) {
      for (const auto& [key, ids] : doc.at("monotone_witnesses").items()) {
        int good = 0;
        try {
          good = std::stoi(key);
        } catch (const std::exception&) {
          throw SchemaError("monotone_witnesses: key '" + key + "' is not a commodity index");
        }
        econ.monotone_witnesses[good] = ids.get<std::vector<std::string>>();
      }
    }
    if (doc.contains("source_order")) econ.source_order = doc.at("source_order").get<std::vector<int>>();
    check_dimensions(econ);
    return econ;
  });
}

Economy load_economy_file(const std::string& path) { return load_economy(read_text_file(path)); }

std::string serialize_economy(const Economy& econ) {
  json doc;
  if (!econ.name.empty()) doc["name"] = econ.name;
  doc["commodities"] = {{"ell", econ.commodities.ell},
                        {"bad_count", econ.commodities.bad_count},
                        {"regulated_count", econ.commodities.regulated_count},
                        {"labels", econ.commodities.labels}};
  if (!econ.source_order.empty()) doc["source_order"] = econ.source_order;
  json cons = json::array();
  for (const Consumer& c : econ.consumers) {
    cons.push_back({{"id", c.id},
                    {"weight", c.weight},
                    {"endowment", vec_json(c.endowment)},
                    {"shares", vec_json(c.shares)},
                    {"bounds", vec_json(c.bounds)},
                    {"preference", preference_json(c.preference)}});
  }
  doc["consumers"] = cons;
  json firms = json::array();
  for (const Technology& t : econ.firms) {
    json gens = json::array();
    for (const Vector& g : t.generators) gens.push_back(vec_json(g));
    firms.push_back({{"id", t.id},
                     {"kind", std::string(to_string(t.kind))},
                     {"offset", vec_json(t.offset)},
                     {"generators", gens},
                     {"free_disposal", t.free_disposal}});
  }
  doc["firms"] = firms;
  json wit = json::object();
  for (const auto& [good, ids] : econ.monotone_witnesses) wit[std::to_string(good)] = ids;
  doc["monotone_witnesses"] = wit;
  return doc.dump(2) + "\n";
}

namespace {

json certificate_json(const Economy& econ, const EquilibriumCertificate& cert) {
  json doc;
  doc["price"] = vec_json(cert.price);
  json bundles = json::object();
  for (std::size_t i = 0; i < cert.bundles.size() && i < econ.consumers.size(); ++i)
    bundles[consumer_key(econ.consumers[i], i)] = vec_json(cert.bundles[i]);
  doc["bundles"] = bundles;
  json acts = json::object(), prods = json::object();
  for (std::size_t j = 0; j < econ.firms.size(); ++j) {
    const std::string key = firm_key(econ.firms[j], j);
    if (j < cert.activities.size()) acts[key] = vec_json(cert.activities[j]);
    if (j < cert.productions.size()) prods[key] = vec_json(cert.productions[j]);
  }
  doc["activities"] = acts;
  doc["productions"] = prods;
  doc["free_disposal"] = cert.free_disposal;
  doc["residuals"] = {{"clearing", vec_json(cert.residuals.clearing)},
                      {"worst_budget_violation", num_json(cert.residuals.worst_budget_violation)},
                      {"worst_optimality_gap", num_json(cert.residuals.worst_optimality_gap)},
                      {"worst_profit_gap", num_json(cert.residuals.worst_profit_gap)}};
  return doc;
}

EquilibriumCertificate certificate_from_json(const Economy& econ, const json& doc) {
  const int ell = econ.ell();
  EquilibriumCertificate cert;
  cert.price = vec_sized(field(doc, "price", "certificate"), ell, "certificate.price");
  const json& bundles = field(doc, "bundles", "certificate");
  for (std::size_t i = 0; i < econ.consumers.size(); ++i) {
    const std::string key = consumer_key(econ.consumers[i], i);
    cert.bundles.push_back(vec_sized(field(bundles, key.c_str(), "certificate.bundles"), ell, "bundle '" + key + "'"));
  }
  const json acts = doc.contains("activities") ? doc.at("activities") : json::object();
  const json prods = doc.contains("productions") ? doc.at("productions") : json::object();
  for (std::size_t j = 0; j < econ.firms.size(); ++j) {
    const Technology& t = econ.firms[j];
    const std::string key = firm_key(t, j);
    const Vector a = acts.contains(key) ? vec_sized(acts.at(key), activity_count(t), "activities '" + key + "'")
                                        : Vector::Zero(activity_count(t));
    cert.activities.push_back(a);
    cert.productions.push_back(prods.contains(key) ? vec_sized(prods.at(key), ell, "production '" + key + "'")
                                                   : production_from_activities(t, a));
  }
  cert.free_disposal = doc.value("free_disposal", false);
  if (doc.contains("residuals")) {
    const json& r = doc.at("residuals");
    if (r.contains("clearing")) cert.residuals.clearing = vec(r.at("clearing"), "residuals.clearing");
    if (r.contains("worst_budget_violation")) cert.residuals.worst_budget_violation = number(r.at("worst_budget_violation"), "residuals");
    if (r.contains("worst_optimality_gap")) cert.residuals.worst_optimality_gap = number(r.at("worst_optimality_gap"), "residuals");
    if (r.contains("worst_profit_gap")) cert.residuals.worst_profit_gap = number(r.at("worst_profit_gap"), "residuals");
  }
  return cert;
}

bool is_government_key(const std::string& key) { return key == "government" || key == "0"; }

}  // namespace

std::string serialize_certificate(const Economy& econ, const EquilibriumCertificate& cert) {
  return certificate_json(econ, cert).dump(2) + "\n";
}

EquilibriumCertificate load_certificate(const Economy& econ, const std::string& text) {
  const json doc = parse(text);
  return schema_guard([&] { return certificate_from_json(econ, doc); });
}

QuotaScheme load_quota(const Economy& econ, const std::string& text) {
  const json doc = parse(text);
  return schema_guard([&] {
    const int t = integer(field(doc, "regulated_count", "quota"), "quota.regulated_count");
    if (t < 0 || t > econ.ell()) throw SchemaError("quota.regulated_count must lie in [0, ell]");
    QuotaScheme s = QuotaScheme::zero(t, econ.firm_count());
    const json quotas = doc.contains("quotas") ? doc.at("quotas") : json::object();
    for (const auto& [key, v] : quotas.items()) {
      const Vector m = vec_sized(v, t, "quota '" + key + "'");
      if (is_government_key(key)) {
        s.government = m;
        continue;
      }
      bool matched = false;
      for (std::size_t j = 0; j < econ.firms.size(); ++j) {
        if (firm_key(econ.firms[j], j) == key) {
          s.firm_quotas[j] = m;
          matched = true;
        }
      }
      if (!matched) throw SchemaError("quota names unknown firm '" + key + "'");
    }
    if (doc.contains("government_shares"))
      s.government_shares = doc.at("government_shares").get<std::vector<double>>();
    try {
      check_scheme(econ, s);
    } catch (const Error& e) {
      throw SchemaError(std::string("quota: ") + e.what());
    }
    return s;
  });
}

std::string serialize_quota(const Economy& econ, const QuotaScheme& s) {
  json doc;
  doc["regulated_count"] = s.regulated_count;
  json q = json::object();
  q["government"] = vec_json(s.government.size() == s.regulated_count ? s.government : Vector::Zero(s.regulated_count));
  for (std::size_t j = 0; j < s.firm_quotas.size() && j < econ.firms.size(); ++j)
    q[firm_key(econ.firms[j], j)] = vec_json(s.firm_quotas[j]);
  doc["quotas"] = q;
  if (!s.government_shares.empty()) doc["government_shares"] = s.government_shares;
  return doc.dump(2) + "\n";
}

std::string serialize_quota_certificate(const Economy& econ, const QuotaCertificate& cert) {
  json doc = certificate_json(econ, cert.base);
  json rents = json::object();
  rents["government"] = num_json(cert.government_rent);
  for (std::size_t j = 0; j < cert.firm_rents.size() && j < econ.firms.size(); ++j)
    rents[firm_key(econ.firms[j], j)] = num_json(cert.firm_rents[j]);
  doc["rents"] = rents;
  doc["compliance_residual"] = vec_json(cert.compliance_residual);
  return doc.dump(2) + "\n";
}

QuotaCertificate load_quota_certificate(const Economy& econ, const std::string& text) {
  const json doc = parse(text);
  return schema_guard([&] {
    QuotaCertificate q;
    q.base = certificate_from_json(econ, doc);
    const json rents = doc.contains("rents") ? doc.at("rents") : json::object();
    q.government_rent = rents.contains("government") ? number(rents.at("government"), "rents") : 0.0;
    for (std::size_t j = 0; j < econ.firms.size(); ++j) {
      const std::string key = firm_key(econ.firms[j], j);
      q.firm_rents.push_back(rents.contains(key) ? number(rents.at(key), "rents") : 0.0);
    }
    if (doc.contains("compliance_residual")) q.compliance_residual = vec(doc.at("compliance_residual"), "compliance_residual");
    return q;
  });
}

}  // namespace badmarket
