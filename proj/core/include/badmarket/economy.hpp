#pragma once

#include <map>
#include <string>
#include <vector>

#include "badmarket/common.hpp"
#include "badmarket/preferences.hpp"
#include "badmarket/technology.hpp"

namespace badmarket {

/// Commodity metadata. The first `bad_count` coordinates are bads and the
/// first `regulated_count` coordinates may carry quotas.
struct CommoditySpace {
  int ell = 0;
  int bad_count = 0;
  int regulated_count = 0;
  std::vector<std::string> labels;
};

/// A consumer with mass `weight` and the consumption box prod_i [0, bounds_i].
struct Consumer {
  std::string id;
  double weight = 0.0;
  Vector endowment;
  Vector shares;
  Vector bounds;
  PreferenceSpec preference;
};

/// A finite weighted production economy.
struct Economy {
  std::string name;
  CommoditySpace commodities;
  std::vector<Consumer> consumers;
  std::vector<Technology> firms;
  /// Good index -> ids of consumers declared strongly monotone in that good.
  std::map<int, std::vector<std::string>> monotone_witnesses;
  /// source_order[i] is the position of internal commodity i in the source
  /// (e.g. the order a builder's reference model lists commodities in). Empty
  /// means identity.
  std::vector<int> source_order;

  int ell() const { return commodities.ell; }
  int consumer_count() const { return static_cast<int>(consumers.size()); }
  int firm_count() const { return static_cast<int>(firms.size()); }

  /// Weighted aggregate endowment sum_w mu_w e_w.
  Vector mean_endowment() const;
  /// Index of the consumer with `id`, or -1.
  int consumer_index(const std::string& id) const;
  /// Maps an internal commodity vector to source order.
  Vector to_source_order(const Vector& internal) const;
  /// Maps a vector given in source order to internal order.
  Vector from_source_order(const Vector& source) const;
};

enum class Severity { Error, Warning };

struct Finding {
  std::string rule;
  Severity severity = Severity::Error;
  std::string message;
};

struct ValidationReport {
  bool passed = true;
  std::vector<Finding> findings;

  void add(std::string rule, Severity severity, std::string message);
  bool has_rule(std::string_view rule) const;
  int error_count() const;
};

/// Checks the structural assumptions of the model. Never throws; every problem
/// becomes a finding. The aggregate-cone check is a necessary-condition test
/// only and is labeled partial in its messages.
ValidationReport validate_economy(const Economy& econ);

/// Throws SchemaError if vector dimensions are inconsistent with ell and the
/// firm count.
void check_dimensions(const Economy& econ);

/// Maps a weighted economy to one with uniform weights 1/n: every consumer's
/// box, endowment and shares are multiplied by n * mu_w and its utility is
/// composed with x -> x / (n * mu_w). Equilibria of the result map back to the
/// original through bundle -> bundle / (n * mu_w) at the same price.
Economy rescale_to_unweighted(const Economy& econ);

/// The factor n * mu_w applied to consumer w by rescale_to_unweighted.
std::vector<double> rescale_factors(const Economy& econ);

}  // namespace badmarket
