#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace deopt {

/// Attribute kinds. The order matches the alternatives of Value's storage.
enum class Kind : std::uint8_t { Signed, Unsigned, Float, Symbol };

/// Dialect-neutral kind names ("number", "unsigned", "float", "symbol").
std::string_view kind_name(Kind kind);
std::optional<Kind> parse_kind(std::string_view name);
bool is_numeric(Kind kind);

/// A constant. Floats keep their exact IEEE-754 bit pattern: equality is
/// bitwise, so -0.0 and 0.0 are different values and a NaN equals itself.
/// Ordering is total: kind first, then a per-kind order (floats use the IEEE
/// totalOrder predicate, so -0.0 < 0.0).
class Value {
 public:
  Value() : rep_(std::int64_t{0}) {}

  static Value signed_int(std::int64_t v) { return Value(Rep(std::in_place_index<0>, v)); }
  static Value unsigned_int(std::uint64_t v) { return Value(Rep(std::in_place_index<1>, v)); }
  static Value floating(double v);
  static Value float_bits(std::uint64_t bits) { return Value(Rep(std::in_place_index<2>, FloatRep{bits})); }
  static Value symbol(std::string s) { return Value(Rep(std::in_place_index<3>, std::move(s))); }

  Kind kind() const { return static_cast<Kind>(rep_.index()); }

  std::int64_t as_signed() const { return std::get<0>(rep_); }
  std::uint64_t as_unsigned() const { return std::get<1>(rep_); }
  double as_float() const;
  std::uint64_t float_bits() const { return std::get<2>(rep_).bits; }
  const std::string& as_symbol() const { return std::get<3>(rep_); }

  friend bool operator==(const Value&, const Value&) = default;
  friend std::strong_ordering operator<=>(const Value& a, const Value& b);

  std::size_t hash() const;

 private:
  struct FloatRep {
    std::uint64_t bits;
    bool operator==(const FloatRep&) const = default;
  };
  using Rep = std::variant<std::int64_t, std::uint64_t, FloatRep, std::string>;

  explicit Value(Rep rep) : rep_(std::move(rep)) {}

  Rep rep_;
};

using Tuple = std::vector<Value>;
using TupleSet = std::set<Tuple>;

struct ValueHash {
  std::size_t operator()(const Value& v) const { return v.hash(); }
};

struct TupleHash {
  std::size_t operator()(const Tuple& t) const;
};

/// Shortest round-trip decimal form; negative zero renders as "-0".
std::string format_float(double v);

/// Plain text form used in fact files: integers in decimal, floats via
/// format_float, symbols verbatim.
std::string format_value(const Value& v);

/// Parses a fact-file token according to the declared kind.
std::optional<Value> parse_value(std::string_view token, Kind kind);

/// Human readable "(1, -0, "a")" form for diagnostics.
std::string format_tuple(const Tuple& t);

/// Symbols must not carry fact-file delimiters.
bool is_valid_symbol(std::string_view s);

}  // namespace deopt
