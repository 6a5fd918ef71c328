#pragma once

#include <string>

#include "badmarket/certificate.hpp"
#include "badmarket/economy.hpp"
#include "badmarket/quota.hpp"

namespace badmarket {

/// Reads a whole file; throws IOError.
std::string read_text_file(const std::string& path);

/// Writes a whole file; throws IOError.
void write_text_file(const std::string& path, const std::string& text);

/// Parses an economy document. Missing weights default to 1/n, missing
/// offsets to zero, missing ids to the 1-based position, null bounds to +inf.
/// Throws ParseError for malformed JSON and SchemaError for missing fields or
/// inconsistent dimensions.
Economy load_economy(const std::string& text);
Economy load_economy_file(const std::string& path);
std::string serialize_economy(const Economy& econ);

/// Certificates key bundles by consumer id and activities/productions by firm
/// id; non-finite numbers are written as null.
std::string serialize_certificate(const Economy& econ, const EquilibriumCertificate& cert);
EquilibriumCertificate load_certificate(const Economy& econ, const std::string& text);

/// Quota documents: {regulated_count, quotas: {firm id: t-vector}} where the
/// id "government" (or "0") names the government firm, plus optional
/// government_shares.
QuotaScheme load_quota(const Economy& econ, const std::string& text);
std::string serialize_quota(const Economy& econ, const QuotaScheme& scheme);

std::string serialize_quota_certificate(const Economy& econ, const QuotaCertificate& cert);
QuotaCertificate load_quota_certificate(const Economy& econ, const std::string& text);

}  // namespace badmarket
