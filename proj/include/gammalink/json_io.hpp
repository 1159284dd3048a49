#pragma once

#include <string>

#include <json.hpp>

#include "gammalink/interleave.hpp"
#include "gammalink/linkage.hpp"
#include "gammalink/persistence.hpp"

namespace gammalink {

using nlohmann::json;

// compact, sorted keys, %.17g floats, trailing newline; stable under parse + dump
std::string canonical_dump(const json& j);
json parse_json(const std::string& text);
json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

json forest_to_json(const MergeForest& F);
MergeForest forest_from_json(const json& j);

json diagram_to_json(const Diagram& D);
Diagram diagram_from_json(const json& j);

json family_to_json(const Family& f);
json vineyard_to_json(const Vineyard& v);

json flat_to_json(const FlatClustering& c, double tau, double m, const std::string& order);

json correspondence_to_json(const Correspondence& R);
Correspondence correspondence_from_json(const json& j);

json band_entry_to_json(const Band& b, std::size_t i);

json interleave_result_to_json(const InterleaveResult& r, double eps, double m);

std::uint64_t fnv1a64(const std::string& s);

} // namespace gammalink
