#include "deopt/value.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <functional>

namespace deopt {

namespace {

// Maps float bits onto a signed integer whose natural order is IEEE totalOrder.
std::int64_t total_order_key(std::uint64_t bits) {
  auto key = static_cast<std::int64_t>(bits);
  if (key < 0) key ^= std::numeric_limits<std::int64_t>::max();
  return key;
}

std::size_t mix(std::size_t h) {
  h ^= h >> 33;
  h *= 0xff51afd7ed558ccdULL;
  h ^= h >> 33;
  return h;
}

}  // namespace

std::string_view kind_name(Kind kind) {
  switch (kind) {
    case Kind::Signed: return "number";
    case Kind::Unsigned: return "unsigned";
    case Kind::Float: return "float";
    case Kind::Symbol: return "symbol";
  }
  return "?";
}

std::optional<Kind> parse_kind(std::string_view name) {
  if (name == "number") return Kind::Signed;
  if (name == "unsigned") return Kind::Unsigned;
  if (name == "float") return Kind::Float;
  if (name == "symbol") return Kind::Symbol;
  return std::nullopt;
}

bool is_numeric(Kind kind) { return kind != Kind::Symbol; }

Value Value::floating(double v) { return float_bits(std::bit_cast<std::uint64_t>(v)); }

double Value::as_float() const { return std::bit_cast<double>(std::get<2>(rep_).bits); }

std::strong_ordering operator<=>(const Value& a, const Value& b) {
  if (a.rep_.index() != b.rep_.index()) return a.rep_.index() <=> b.rep_.index();
  switch (a.kind()) {
    case Kind::Signed: return a.as_signed() <=> b.as_signed();
    case Kind::Unsigned: return a.as_unsigned() <=> b.as_unsigned();
    case Kind::Float: return total_order_key(a.float_bits()) <=> total_order_key(b.float_bits());
    case Kind::Symbol: return a.as_symbol().compare(b.as_symbol()) <=> 0;
  }
  return std::strong_ordering::equal;
}

std::size_t Value::hash() const {
  std::size_t h = 0;
  switch (kind()) {
    case Kind::Signed: h = static_cast<std::size_t>(as_signed()); break;
    case Kind::Unsigned: h = static_cast<std::size_t>(as_unsigned()); break;
    case Kind::Float: h = static_cast<std::size_t>(float_bits()); break;
    case Kind::Symbol: h = std::hash<std::string>{}(as_symbol()); break;
  }
  return mix(h + 0x9e3779b97f4a7c15ULL * (rep_.index() + 1));
}

std::size_t TupleHash::operator()(const Tuple& t) const {
  std::size_t h = t.size();
  for (const auto& v : t) h = mix(h ^ (v.hash() + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)));
  return h;
}

std::string format_float(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string format_value(const Value& v) {
  switch (v.kind()) {
    case Kind::Signed: return std::to_string(v.as_signed());
    case Kind::Unsigned: return std::to_string(v.as_unsigned());
    case Kind::Float: return format_float(v.as_float());
    case Kind::Symbol: return v.as_symbol();
  }
  return {};
}

std::optional<Value> parse_value(std::string_view token, Kind kind) {
  const char* first = token.data();
  const char* last = token.data() + token.size();
  switch (kind) {
    case Kind::Signed: {
      std::int64_t x = 0;
      auto [p, ec] = std::from_chars(first, last, x);
      if (ec != std::errc{} || p != last) return std::nullopt;
      return Value::signed_int(x);
    }
    case Kind::Unsigned: {
      std::uint64_t x = 0;
      auto [p, ec] = std::from_chars(first, last, x);
      if (ec != std::errc{} || p != last) return std::nullopt;
      return Value::unsigned_int(x);
    }
    case Kind::Float: {
      double x = 0;
      auto [p, ec] = std::from_chars(first, last, x);
      if (ec != std::errc{} || p != last) return std::nullopt;
      return Value::floating(x);
    }
    case Kind::Symbol:
      if (!is_valid_symbol(token)) return std::nullopt;
      return Value::symbol(std::string(token));
  }
  return std::nullopt;
}

std::string format_tuple(const Tuple& t) {
  std::string out = "(";
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i) out += ", ";
    if (t[i].kind() == Kind::Symbol)
      out += "\"" + t[i].as_symbol() + "\"";
    else
      out += format_value(t[i]);
  }
  return out + ")";
}

bool is_valid_symbol(std::string_view s) {
  for (char c : s)
    if (c == '\t' || c == '\n' || c == '\0' || c == '\r') return false;
  return true;
}

}  // namespace deopt
