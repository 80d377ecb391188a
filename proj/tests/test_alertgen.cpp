#include <gtest/gtest.h>

#include "support.hpp"

using namespace atg;
using namespace atg::test;

namespace {

GenSpec spec_for(const AttackModel& m, NetworkClass c, const char* prefix, std::uint64_t count,
                 std::uint64_t seed) {
  GenSpec s;
  s.network_class = c;
  s.network_prefix = parse_prefix(prefix, c);
  s.count = count;
  s.seed = seed;
  for (TypeId t = 0; t < m.types.size(); ++t) s.type_pool.push_back(t);
  return s;
}

std::string serialize(const AttackModel& m, const std::vector<InputAlert>& alerts) {
  ValueCodec codec;
  std::string out;
  for (const InputAlert& a : alerts) out += format_alert(m, codec, a) + "\n";
  return out;
}

}  // namespace

TEST(ParsePrefix, MatchesClass) {
  EXPECT_EQ(parse_prefix("172.16.115.0/24", NetworkClass::C), 0xAC107300u);
  EXPECT_EQ(parse_prefix("172.16.115.9", NetworkClass::C), 0xAC107300u);
  EXPECT_EQ(parse_prefix("172.16.0.0/16", NetworkClass::B), 0xAC100000u);
  EXPECT_THROW(parse_prefix("172.16.0.0/16", NetworkClass::C), GenError);
  EXPECT_THROW(parse_prefix("172.16.0/24", NetworkClass::C), GenError);
}

TEST(GenerateNoise, ZeroCount) {
  const AttackModel m = load_file("lldos4.atg");
  EXPECT_TRUE(generate_noise(m, spec_for(m, NetworkClass::C, "10.1.2.0/24", 0, 1)).empty());
}

TEST(GenerateNoise, ClassCShape) {
  const AttackModel m = load_file("lldos4.atg");
  const GenSpec spec = spec_for(m, NetworkClass::C, "10.1.2.0/24", 1000, 42);
  const auto alerts = generate_noise(m, spec);
  ASSERT_EQ(alerts.size(), 1000u);
  std::set<TypeId> types;
  int src_inside = 0, low_src_port = 0;
  for (std::size_t i = 0; i < alerts.size(); ++i) {
    const InputAlert& a = alerts[i];
    const HyperAlertType& t = m.types[a.type];
    const auto at = [&](const char* f) { return a.attrs[static_cast<std::size_t>(*t.find_fact(f))]; };
    const bool s_in = (at("SrcIP") & 0xFFFFFF00u) == spec.network_prefix;
    const bool d_in = (at("DstIP") & 0xFFFFFF00u) == spec.network_prefix;
    EXPECT_NE(s_in, d_in) << i;  // exactly one endpoint inside
    EXPECT_TRUE(at("SrcPort") < 1024 || at("DstPort") < 1024) << i;
    EXPECT_LT(at("SrcPort"), 65536u);
    EXPECT_LT(at("DstPort"), 65536u);
    EXPECT_EQ(a.ts, i);
    src_inside += s_in;
    low_src_port += at("SrcPort") < 1024;
    types.insert(a.type);
  }
  EXPECT_EQ(types.size(), m.types.size());
  // Both coin flips are used in both directions.
  EXPECT_GT(src_inside, 400);
  EXPECT_LT(src_inside, 600);
  EXPECT_GT(low_src_port, 400);
  EXPECT_LT(low_src_port, 600);
}

TEST(GenerateNoise, ClassBRange) {
  const AttackModel m = load_file("lldos20.atg");
  const GenSpec spec = spec_for(m, NetworkClass::B, "172.16.0.0/16", 5000, 7);
  std::set<std::uint32_t> inside;
  for (const InputAlert& a : generate_noise(m, spec)) {
    const HyperAlertType& t = m.types[a.type];
    for (const char* f : {"SrcIP", "DstIP"}) {
      const auto ip = static_cast<std::uint32_t>(a.attrs[static_cast<std::size_t>(*t.find_fact(f))]);
      if ((ip & 0xFFFF0000u) == spec.network_prefix) inside.insert(ip);
    }
  }
  // Far more distinct inside hosts than a class C network could hold.
  EXPECT_GT(inside.size(), 1000u);
}

TEST(GenerateNoise, DeterministicPerSeed) {
  const AttackModel m = load_file("lldos20.atg");
  const auto s1 = serialize(m, generate_noise(m, spec_for(m, NetworkClass::C, "10.1.2.0/24", 1000, 9)));
  const auto s2 = serialize(m, generate_noise(m, spec_for(m, NetworkClass::C, "10.1.2.0/24", 1000, 9)));
  const auto s3 = serialize(m, generate_noise(m, spec_for(m, NetworkClass::C, "10.1.2.0/24", 1000, 10)));
  EXPECT_EQ(s1, s2);
  EXPECT_NE(s1, s3);
}

TEST(GenerateNoise, FixedGeneratorOutput) {
  // mt19937_64 is fully specified; this pins the draw order.
  const AttackModel m = load_file("lldos4.atg");
  const auto alerts = generate_noise(m, spec_for(m, NetworkClass::C, "10.1.2.0/24", 1, 5489));
  std::mt19937_64 rng(5489);
  const std::uint64_t type_draw = rng();
  std::uint32_t outside = 0;
  do {
    outside = static_cast<std::uint32_t>(rng());
  } while ((outside & 0xFFFFFF00u) == 0x0A010200u);
  const std::uint64_t port = rng() & 0xFFFF;
  const std::uint32_t inside = 0x0A010200u | (static_cast<std::uint32_t>(rng()) & 0xFF);
  const std::uint64_t low = rng() & 0x3FF;
  const bool outside_src = rng() & 1, port_src = rng() & 1;
  ASSERT_EQ(alerts.size(), 1u);
  const InputAlert& a = alerts[0];
  EXPECT_EQ(a.type, type_draw % 4);
  EXPECT_EQ(a.attrs[0], outside_src ? outside : inside);  // SrcIP
  EXPECT_EQ(a.attrs[2], outside_src ? inside : outside);  // DstIP
  EXPECT_EQ(a.attrs[1], port_src ? port : low);           // SrcPort
  EXPECT_EQ(a.attrs[3], port_src ? low : port);           // DstPort
}

TEST(GenerateNoise, RejectsNonStandardTypes) {
  const AttackModel m = load_text(R"(
class addr ipv4
type Odd { facts { SrcIP: addr, DstIP: addr } prereq { } conseq { } }
)");
  GenSpec s;
  s.count = 1;
  s.type_pool = {0};
  EXPECT_THROW(generate_noise(m, s), GenError);
  s.type_pool.clear();
  EXPECT_THROW(generate_noise(m, s), GenError);
}

TEST(Interleave, EmptyInputs) {
  const AttackModel m = load_file("lldos4.atg");
  ValueCodec codec;
  const auto scenario = load_stream(data_path("lldos4_scenario.ndjson"), m, codec);
  const auto merged = interleave(scenario, {}, 1);
  ASSERT_EQ(merged.size(), scenario.size());
  for (std::size_t i = 0; i < merged.size(); ++i) {
    EXPECT_EQ(merged[i].id, scenario[i].id);
    EXPECT_EQ(merged[i].attrs, scenario[i].attrs);
    EXPECT_EQ(merged[i].ts, i);
  }
  const auto noise = generate_noise(m, spec_for(m, NetworkClass::C, "10.1.2.0/24", 50, 3));
  const auto only_noise = interleave({}, noise, 1);
  ASSERT_EQ(only_noise.size(), noise.size());
  for (std::size_t i = 0; i < noise.size(); ++i) EXPECT_EQ(only_noise[i].attrs, noise[i].attrs);
}

TEST(Interleave, PreservesBothOrders) {
  const AttackModel m = load_file("lldos20.atg");
  std::vector<InputAlert> scenario;
  for (int i = 0; i < 855; ++i) scenario.push_back(InputAlert{"s" + std::to_string(i), 0, 0, {0, 0, 0, 0}});
  auto noise = generate_noise(m, spec_for(m, NetworkClass::B, "172.16.0.0/16", 100000, 11));
  for (std::size_t i = 0; i < noise.size(); ++i) noise[i].id = "n" + std::to_string(i);
  const auto merged = interleave(scenario, noise, 99);
  ASSERT_EQ(merged.size(), 100855u);
  std::size_t next_s = 0, next_n = 0;
  Timestamp last = 0;
  for (const InputAlert& a : merged) {
    EXPECT_GE(a.ts, last);
    last = a.ts;
    if (a.id[0] == 's')
      EXPECT_EQ(a.id, "s" + std::to_string(next_s++));
    else
      EXPECT_EQ(a.id, "n" + std::to_string(next_n++));
  }
  EXPECT_EQ(next_s, 855u);
  // Scenario alerts are spread out rather than bunched at either end.
  std::size_t first_s = merged.size();
  for (std::size_t i = 0; i < merged.size(); ++i)
    if (merged[i].id[0] == 's') {
      first_s = i;
      break;
    }
  EXPECT_LT(first_s, 2000u);
}
