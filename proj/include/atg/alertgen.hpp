#pragma once

// Synthetic false-alarm streams. Each alert has one endpoint inside the
// monitored network and one anywhere outside it, one low (< 1024) port and
// one fully random port, with sides chosen by independent coin flips.
//
// The generator is std::mt19937_64, whose output sequence is fixed by the
// standard; values are taken from raw draws (masks and modulo) rather than
// std distributions, so streams are identical across platforms.

#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "atg/attack_model.hpp"
#include "atg/session.hpp"
#include "atg/value.hpp"

namespace atg {

enum class NetworkClass { B, C };

inline int host_bits(NetworkClass c) { return c == NetworkClass::B ? 16 : 8; }

struct GenSpec {
  NetworkClass network_class = NetworkClass::C;
  std::uint32_t network_prefix = 0;
  std::uint64_t count = 0;
  std::uint64_t seed = 0;
  std::vector<TypeId> type_pool;
};

class GenError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// "a.b.c.d/len"; the length must match the network class.
inline std::uint32_t parse_prefix(std::string_view text, NetworkClass c) {
  const auto slash = text.find('/');
  auto ip = parse_ipv4(text.substr(0, slash));
  if (!ip) throw GenError("invalid prefix '" + std::string(text) + "'");
  if (slash != std::string_view::npos) {
    const std::string len(text.substr(slash + 1));
    if (len != std::to_string(32 - host_bits(c)))
      throw GenError("prefix length /" + len + " does not match class " +
                     (c == NetworkClass::B ? "B (/16)" : "C (/24)"));
  }
  const std::uint32_t host_mask = (std::uint32_t{1} << host_bits(c)) - 1;
  return *ip & ~host_mask;
}

class NoiseGenerator {
 public:
  NoiseGenerator(const AttackModel& m, GenSpec spec) : spec_(std::move(spec)), rng_(spec_.seed) {
    if (spec_.type_pool.empty()) throw GenError("type pool is empty");
    host_mask_ = (std::uint32_t{1} << host_bits(spec_.network_class)) - 1;
    spec_.network_prefix &= ~host_mask_;
    for (TypeId t : spec_.type_pool) {
      if (t >= m.types.size()) throw GenError("type pool refers to an unknown type");
      const HyperAlertType& ty = m.types[t];
      Layout l;
      auto need = [&](const char* name, Canonicalizer c) {
        auto f = ty.find_fact(name);
        if (!f) throw GenError("type " + ty.name + " lacks standard fact " + name);
        if (m.canonicalizer(t, *f) != c)
          throw GenError("type " + ty.name + ": fact " + name + " has the wrong class");
        return *f;
      };
      l.src_ip = need("SrcIP", Canonicalizer::ipv4_address);
      l.src_port = need("SrcPort", Canonicalizer::integer);
      l.dst_ip = need("DstIP", Canonicalizer::ipv4_address);
      l.dst_port = need("DstPort", Canonicalizer::integer);
      if (ty.facts.size() != 4)
        throw GenError("type " + ty.name + " has facts beyond SrcIP, SrcPort, DstIP, DstPort");
      layouts_.push_back(l);
    }
  }

  bool done() const { return produced_ >= spec_.count; }

  InputAlert next() {
    const std::size_t pick = static_cast<std::size_t>(rng_() % layouts_.size());
    const Layout& l = layouts_[pick];
    // The outside address is redrawn until it falls outside the network, so
    // exactly one endpoint is always in-network.
    std::uint32_t outside_ip = 0;
    do {
      outside_ip = static_cast<std::uint32_t>(rng_());
    } while ((outside_ip & ~host_mask_) == spec_.network_prefix);
    const auto random_port = static_cast<std::uint32_t>(rng_() & 0xFFFFu);
    const std::uint32_t inside_ip = spec_.network_prefix | (static_cast<std::uint32_t>(rng_()) & host_mask_);
    const auto low_port = static_cast<std::uint32_t>(rng_() & 0x3FFu);
    const bool outside_is_src = rng_() & 1u;
    const bool random_port_is_src = rng_() & 1u;

    InputAlert a;
    a.type = spec_.type_pool[pick];
    a.ts = produced_++;
    a.attrs.assign(4, 0);
    a.attrs[static_cast<std::size_t>(l.src_ip)] = outside_is_src ? outside_ip : inside_ip;
    a.attrs[static_cast<std::size_t>(l.dst_ip)] = outside_is_src ? inside_ip : outside_ip;
    a.attrs[static_cast<std::size_t>(l.src_port)] = random_port_is_src ? random_port : low_port;
    a.attrs[static_cast<std::size_t>(l.dst_port)] = random_port_is_src ? low_port : random_port;
    return a;
  }

 private:
  struct Layout {
    int src_ip, src_port, dst_ip, dst_port;
  };
  GenSpec spec_;
  std::mt19937_64 rng_;
  std::uint32_t host_mask_ = 0;
  std::vector<Layout> layouts_;
  std::uint64_t produced_ = 0;
};

inline std::vector<InputAlert> generate_noise(const AttackModel& m, const GenSpec& spec) {
  NoiseGenerator gen(m, spec);
  std::vector<InputAlert> out;
  out.reserve(static_cast<std::size_t>(spec.count));
  while (!gen.done()) out.push_back(gen.next());
  return out;
}

// Merges the two streams at seeded-random positions, keeping each input's
// order, and rewrites timestamps to the output position.
inline std::vector<InputAlert> interleave(std::vector<InputAlert> scenario, std::vector<InputAlert> noise,
                                          std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<InputAlert> out;
  out.reserve(scenario.size() + noise.size());
  std::size_t si = 0, ni = 0;
  while (si < scenario.size() || ni < noise.size()) {
    const std::uint64_t rs = scenario.size() - si;
    const std::uint64_t rn = noise.size() - ni;
    const bool take_scenario = rn == 0 || (rs != 0 && rng() % (rs + rn) < rs);
    InputAlert a = take_scenario ? std::move(scenario[si++]) : std::move(noise[ni++]);
    a.ts = out.size();
    out.push_back(std::move(a));
  }
  return out;
}

}  // namespace atg
