#pragma once

#include <optional>
#include <string>
#include <vector>

#include "deopt/program.hpp"

namespace deopt {

/// Evaluation order for a rule body: indices into Rule::body. Positive atoms
/// are taken in body order as soon as the arithmetic inside them can be
/// evaluated; every constraint and negated atom is placed right after the
/// point where all of its variables are bound.
struct BodyPlan {
  std::vector<std::size_t> order;
};

/// A variable binds only through a plain (non-arithmetic) argument of a
/// positive atom. Returns nullopt when the rule cannot be fully scheduled.
std::optional<BodyPlan> plan_body(const Rule& rule);

/// Returns the first variable (head first, then body literals left to right)
/// that is not bound by the positive body atoms, or nullopt if the rule is safe.
std::optional<std::string> check_safety(const Rule& rule);

}  // namespace deopt
