#pragma once

#include <bit>
#include <charconv>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace atg {

// A canonical attribute value. IPv4 addresses are stored as their 32-bit
// host-order value, integers as the two's-complement bits of an int64 and
// opaque strings as an id handed out by a ValueCodec.
using Value = std::uint64_t;

using Timestamp = std::uint64_t;

// Bit k set <=> fact k (declaration order) of a type is in the subset.
using FactMask = std::uint32_t;
inline constexpr std::size_t kMaxFactsPerType = 32;

using TypeId = std::uint32_t;
using VertexId = std::uint32_t;

enum class Canonicalizer { ipv4_address, integer, opaque_string };

inline std::string_view canonicalizer_keyword(Canonicalizer c) {
  switch (c) {
    case Canonicalizer::ipv4_address: return "ipv4";
    case Canonicalizer::integer: return "int";
    case Canonicalizer::opaque_string: return "str";
  }
  return "?";
}

inline std::optional<Canonicalizer> canonicalizer_from_keyword(std::string_view kw) {
  if (kw == "ipv4") return Canonicalizer::ipv4_address;
  if (kw == "int") return Canonicalizer::integer;
  if (kw == "str") return Canonicalizer::opaque_string;
  return std::nullopt;
}

inline int mask_size(FactMask m) { return std::popcount(m); }

inline bool mask_contains(FactMask outer, FactMask inner) { return (outer & inner) == inner; }

// Fact positions of a mask in ascending declaration order.
inline std::vector<int> mask_positions(FactMask m) {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(std::popcount(m)));
  while (m != 0) {
    out.push_back(std::countr_zero(m));
    m &= m - 1;
  }
  return out;
}

inline std::optional<std::uint32_t> parse_ipv4(std::string_view s) {
  std::uint32_t out = 0;
  const char* p = s.data();
  const char* end = s.data() + s.size();
  for (int octet = 0; octet < 4; ++octet) {
    if (octet > 0) {
      if (p == end || *p != '.') return std::nullopt;
      ++p;
    }
    if (p == end || *p < '0' || *p > '9') return std::nullopt;
    unsigned v = 0;
    auto [next, ec] = std::from_chars(p, end, v);
    if (ec != std::errc{} || v > 255 || next - p > 3) return std::nullopt;
    p = next;
    out = (out << 8) | v;
  }
  if (p != end) return std::nullopt;
  return out;
}

inline std::string format_ipv4(std::uint32_t v) {
  std::string out;
  out.reserve(15);
  for (int shift = 24; shift >= 0; shift -= 8) {
    if (shift != 24) out.push_back('.');
    out += std::to_string((v >> shift) & 0xFFu);
  }
  return out;
}

class ValueError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Maps raw attribute text/integers to canonical Values and back. Owns the
// string pool for opaque-string classes, so the same codec must be used for
// reading alerts and for exporting graphs built from them.
class ValueCodec {
 public:
  Value from_text(Canonicalizer c, std::string_view text) {
    switch (c) {
      case Canonicalizer::ipv4_address: {
        auto ip = parse_ipv4(text);
        if (!ip) throw ValueError("invalid ipv4 address '" + std::string(text) + "'");
        return *ip;
      }
      case Canonicalizer::integer: {
        std::int64_t v = 0;
        auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v, 10);
        if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty())
          throw ValueError("invalid integer '" + std::string(text) + "'");
        return static_cast<Value>(v);
      }
      case Canonicalizer::opaque_string: return intern(text);
    }
    throw ValueError("unknown canonicalizer");
  }

  Value from_integer(Canonicalizer c, std::int64_t v) {
    switch (c) {
      case Canonicalizer::ipv4_address:
        if (v < 0 || v > static_cast<std::int64_t>(std::numeric_limits<std::uint32_t>::max()))
          throw ValueError("ipv4 integer out of range: " + std::to_string(v));
        return static_cast<Value>(v);
      case Canonicalizer::integer: return static_cast<Value>(v);
      case Canonicalizer::opaque_string: return intern(std::to_string(v));
    }
    throw ValueError("unknown canonicalizer");
  }

  std::string to_text(Canonicalizer c, Value v) const {
    switch (c) {
      case Canonicalizer::ipv4_address: return format_ipv4(static_cast<std::uint32_t>(v));
      case Canonicalizer::integer: return std::to_string(static_cast<std::int64_t>(v));
      case Canonicalizer::opaque_string:
        if (v >= strings_.size()) return "<unknown-string>";
        return strings_[static_cast<std::size_t>(v)];
    }
    return "?";
  }

  Value intern(std::string_view s) {
    auto it = ids_.find(std::string(s));
    if (it != ids_.end()) return it->second;
    const Value id = strings_.size();
    strings_.emplace_back(s);
    ids_.emplace(strings_.back(), id);
    return id;
  }

 private:
  std::deque<std::string> strings_;
  std::unordered_map<std::string, Value> ids_;
};

}  // namespace atg
