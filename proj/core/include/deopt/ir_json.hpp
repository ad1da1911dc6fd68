#pragma once

#include <optional>
#include <string>

#include "deopt/program.hpp"

namespace deopt {

/// Lossless JSON form of a program (float constants keep their bit pattern).
std::string program_to_json_text(const Program& p, bool strip_annotations = false);
std::optional<Program> program_from_json_text(const std::string& text, std::string* error = nullptr);

/// {"rel": [["1", "-0", "a"], ...]} using the fact-file token form.
std::string facts_to_json_text(const FactStore& facts);
std::optional<FactStore> facts_from_json_text(const std::string& text, const Program& decls,
                                              std::string* error = nullptr);

}  // namespace deopt
