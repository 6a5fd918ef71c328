#pragma once

#include <string>
#include <vector>

#include "badmarket/common.hpp"

namespace badmarket {

enum class TechnologyKind { ZeroFirm, ConeRays, Polytope };

std::string_view to_string(TechnologyKind k);
TechnologyKind technology_kind_from_string(std::string_view name);

/// A firm's production set.
///
///  - ZeroFirm: {offset} (offset is zero unless the set was shifted by a quota).
///  - ConeRays: { offset + sum_r a_r g_r : a_r >= 0 }; with free_disposal the
///    rays -e_1, ..., -e_ell are appended after the explicit generators.
///  - Polytope: conv{ offset + v } over the listed vertices.
struct Technology {
  std::string id;
  TechnologyKind kind = TechnologyKind::ZeroFirm;
  Vector offset;
  std::vector<Vector> generators;
  bool free_disposal = false;

  static Technology zero_firm(int ell, std::string id = {});
  static Technology cone(std::vector<Vector> rays, std::string id = {}, bool free_disposal = false);
  /// Pure disposal technology: the cone spanned by -e_1, ..., -e_ell.
  static Technology disposal(int ell, std::string id = {});
  static Technology polytope(std::vector<Vector> vertices, std::string id = {});

  int ell() const { return static_cast<int>(offset.size()); }
  bool has_free_disposal() const { return kind == TechnologyKind::ConeRays && free_disposal; }
};

/// Nonnegative levels per ray of a cone technology, or convex weights per
/// vertex of a polytope technology. Empty for ZeroFirm.
using ActivityVector = Vector;

/// Rays of a cone technology including the implicit free-disposal rays, or the
/// vertices of a polytope (without the offset).
std::vector<Vector> effective_generators(const Technology& tech);

/// Number of activity variables the technology carries.
int activity_count(const Technology& tech);

/// sup over the production set of p . y. A ray counts as profitable when
/// p . g > ray_tol, in which case the result is +inf.
double max_profit(const Technology& tech, const Vector& price, double ray_tol = 0.0);

/// Indices of rays with |p . g| <= tol (cone) or vertices within tol of the
/// maximum (polytope). Throws UnboundedSupply when max_profit is +inf.
std::vector<int> supply_active_set(const Technology& tech, const Vector& price, double tol = 1e-9);

/// offset + sum a_r g_r for cones; offset + sum w_v v for polytopes.
Vector production_from_activities(const Technology& tech, const ActivityVector& activities);

}  // namespace badmarket
