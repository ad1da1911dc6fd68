#pragma once

#include <json.hpp>

#include "deopt/program.hpp"

namespace deopt::detail {

using nlohmann::json;

json value_to_json(const Value& v);
Value value_from_json(const json& j);
json term_to_json(const Term& t);
Term term_from_json(const json& j);
json rule_to_json(const Rule& r);
Rule rule_from_json(const json& j);
json program_to_json(const Program& p, bool strip_annotations = false);
Program program_from_json(const json& j);
json tuples_to_json(const TupleSet& tuples);
TupleSet tuples_from_json(const json& j, const std::vector<Kind>& kinds);
json facts_to_json(const FactStore& facts);

/// Fact-file token, with NaN payloads spelled out ("nan:0x7ff8...").
std::string value_token(const Value& v);
std::optional<Value> value_from_token(const std::string& token, Kind kind);

}  // namespace deopt::detail
