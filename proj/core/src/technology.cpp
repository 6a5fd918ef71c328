#include "badmarket/technology.hpp"

#include <cmath>
#include <algorithm>

namespace badmarket {

std::string_view to_string(TechnologyKind k) {
  switch (k) {
    case TechnologyKind::ZeroFirm: return "zero";
    case TechnologyKind::ConeRays: return "cone";
    case TechnologyKind::Polytope: return "polytope";
  }
  return "unknown";
}

TechnologyKind technology_kind_from_string(std::string_view name) {
  if (name == "zero") return TechnologyKind::ZeroFirm;
  if (name == "cone") return TechnologyKind::ConeRays;
  if (name == "polytope") return TechnologyKind::Polytope;
  throw SchemaError("unknown technology kind '" + std::string(name) + "'");
}

Technology Technology::zero_firm(int ell, std::string id) {
  Technology t;
  t.id = std::move(id);
  t.kind = TechnologyKind::ZeroFirm;
  t.offset = Vector::Zero(ell);
  return t;
}

Technology Technology::cone(std::vector<Vector> rays, std::string id, bool free_disposal) {
  if (rays.empty()) throw DomainError("a cone technology needs at least one ray");
  Technology t;
  t.id = std::move(id);
  t.kind = TechnologyKind::ConeRays;
  t.offset = Vector::Zero(rays.front().size());
  t.generators = std::move(rays);
  t.free_disposal = free_disposal;
  return t;
}

Technology Technology::disposal(int ell, std::string id) {
  Technology t;
  t.id = std::move(id);
  t.kind = TechnologyKind::ConeRays;
  t.offset = Vector::Zero(ell);
  t.free_disposal = true;
  return t;
}

Technology Technology::polytope(std::vector<Vector> vertices, std::string id) {
  if (vertices.empty()) throw DomainError("a polytope technology needs at least one vertex");
  Technology t;
  t.id = std::move(id);
  t.kind = TechnologyKind::Polytope;
  t.offset = Vector::Zero(vertices.front().size());
  t.generators = std::move(vertices);
  return t;
}

std::vector<Vector> effective_generators(const Technology& tech) {
  std::vector<Vector> gens;
  if (tech.kind == TechnologyKind::ZeroFirm) return gens;
  gens = tech.generators;
  if (tech.has_free_disposal()) {
    for (int i = 0; i < tech.ell(); ++i) gens.push_back(-Vector::Unit(tech.ell(), i));
  }
  return gens;
}

int activity_count(const Technology& tech) {
  switch (tech.kind) {
    case TechnologyKind::ZeroFirm: return 0;
    case TechnologyKind::ConeRays:
      return static_cast<int>(tech.generators.size()) + (tech.free_disposal ? tech.ell() : 0);
    case TechnologyKind::Polytope: return static_cast<int>(tech.generators.size());
  }
  return 0;
}

double max_profit(const Technology& tech, const Vector& price, double ray_tol) {
  if (price.size() != tech.ell()) throw DimensionError("price and technology dimensions differ");
  const double base = price.dot(tech.offset);
  switch (tech.kind) {
    case TechnologyKind::ZeroFirm:
      return base;
    case TechnologyKind::ConeRays:
      for (const Vector& g : effective_generators(tech))
        if (price.dot(g) > ray_tol) return kInf;
      return base;
    case TechnologyKind::Polytope: {
      double best = -kInf;
      for (const Vector& v : tech.generators) best = std::max(best, price.dot(v));
      return base + best;
    }
  }
  return base;
}

std::vector<int> supply_active_set(const Technology& tech, const Vector& price, double tol) {
  std::vector<int> active;
  const auto gens = effective_generators(tech);
  switch (tech.kind) {
    case TechnologyKind::ZeroFirm:
      break;
    case TechnologyKind::ConeRays:
      if (max_profit(tech, price, tol) == kInf)
        throw UnboundedSupply("a ray earns positive profit at this price");
      for (std::size_t r = 0; r < gens.size(); ++r)
        if (std::abs(price.dot(gens[r])) <= tol) active.push_back(static_cast<int>(r));
      break;
    case TechnologyKind::Polytope: {
      const double best = max_profit(tech, price) - price.dot(tech.offset);
      for (std::size_t v = 0; v < gens.size(); ++v)
        if (price.dot(gens[v]) >= best - tol) active.push_back(static_cast<int>(v));
      break;
    }
  }
  return active;
}

Vector production_from_activities(const Technology& tech, const ActivityVector& activities) {
  if (activities.size() != activity_count(tech))
    throw DimensionError("activity vector has " + std::to_string(activities.size()) +
                         " entries, technology expects " + std::to_string(activity_count(tech)));
  Vector y = tech.offset;
  const auto gens = effective_generators(tech);
  for (std::size_t r = 0; r < gens.size(); ++r) y += activities[static_cast<Eigen::Index>(r)] * gens[r];
  return y;
}

}  // namespace badmarket
