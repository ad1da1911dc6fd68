#pragma once

#include <optional>
#include <string>

#include "deopt/render.hpp"

namespace deopt {

/// Syntactic validator for the text render_program emits in each dialect.
/// Returns a "line N: ..." message for the first rejected statement.
std::optional<std::string> check_syntax(Dialect d, const std::string& text);

}  // namespace deopt
