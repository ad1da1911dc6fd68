#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "deopt/program.hpp"

namespace deopt {

enum class Dialect : std::uint8_t { SouffleLike, CozoLike, MuZLike, Embedded };

std::string_view dialect_name(Dialect d);  // souffle, cozo, muz, embedded
std::optional<Dialect> parse_dialect(std::string_view name);

enum class FactChannel : std::uint8_t { Inline, Files };

struct DialectFeatures {
  bool supports_negation_in_recursion = false;
  bool supports_subsumption = false;
  bool requires_decls = true;
  FactChannel fact_channel = FactChannel::Files;
  bool supports_symbols = true;
  bool supports_floats = true;
  bool supports_unsigned = true;
  bool supports_zero_arity = true;
  std::size_t max_outputs = SIZE_MAX;
};

DialectFeatures dialect_features(Dialect d);

/// Why `p` is outside the dialect's feature set, if it is.
std::optional<std::string> check_feature_set(const Program& p, Dialect d);

enum class Role : std::uint8_t { Reference, Optimized };

/// Program text plus fact files (path relative to the case directory).
struct RenderedArtifacts {
  std::string program_text;
  std::map<std::string, std::string> files;
  std::vector<std::string> outputs;
};

/// Deterministic rendering. With `strip_annotations` the reference role drops
/// optimization annotations; Souffle-like reference programs never carry
/// `inline`.
RenderedArtifacts render_program(const Program& p, Dialect d, Role role, bool strip_annotations);

/// One tuple per line, tab separated, floats in shortest round-trip form.
std::string render_fact_file(const TupleSet& tuples);

/// Parses tab- or comma-separated rows according to `kinds`.
/// Blank lines are skipped; returns nullopt with `error` set on a bad row.
std::optional<TupleSet> parse_fact_rows(const std::string& text, const std::vector<Kind>& kinds, std::string* error,
                                        char delimiter = '\t');

/// Reads engine output for each relation in `outputs` from `outdir` (file
/// based dialects) or from `stdout_text`.
std::optional<FactStore> parse_engine_output(Dialect d, const Program& p, const std::vector<std::string>& outputs,
                                             const std::string& outdir, const std::string& stdout_text,
                                             std::string* error);

/// Souffle-like text of a whole program (declarations, rules, subsumptions,
/// facts inlined) for bug reports.
std::string render_readable(const Program& p);

}  // namespace deopt
