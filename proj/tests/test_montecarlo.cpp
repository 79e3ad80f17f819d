#include <gtest/gtest.h>

#include <functional>
#include <nlohmann/json.hpp>

#include "oneperc/montecarlo.hpp"

using namespace oneperc;

namespace {

class FunctionEdges : public LatticeEdges {
 public:
  using Rule = std::function<bool(int, int)>;
  FunctionEdges(Rule h, Rule v) : h_(std::move(h)), v_(std::move(v)) {}
  bool horizontal(int x, int y) override { return h_(x, y); }
  bool vertical(int x, int y) override { return v_(x, y); }

 private:
  Rule h_, v_;
};

std::array<std::uint32_t, 8> rfc_key() {
  std::array<std::uint32_t, 8> key{};
  for (std::uint32_t i = 0; i < 8; ++i) key[i] = (4 * i) | ((4 * i + 1) << 8) | ((4 * i + 2) << 16) | ((4 * i + 3) << 24);
  return key;
}

const ModelSpec kSimulated{ModelKind::direction, 0.30134};

}  // namespace

TEST(ChaCha20, Rfc8439BlockVector) {
  // Key 00..1f, nonce 00:00:00:09:00:00:00:4a:00:00:00:00, counter 1.
  const auto out = chacha20_block(rfc_key(), 1, {0x09000000, 0x4a000000, 0x00000000});
  const std::array<std::uint32_t, 16> want = {0xe4e7f110, 0x15593bd1, 0x1fdd0f50, 0xc47120a3, 0xc7f4d1c7, 0x0368c033,
                                              0x9aaa2204, 0x4e6cd4c3, 0x466482d2, 0x09aa9f07, 0x05d7c214, 0xa2028bd9,
                                              0xd19c12b5, 0xb94e16de, 0xe883d0cb, 0x4e3c50a2};
  EXPECT_EQ(out, want);
}

TEST(ChaCha20, OracleTiles) {
  const KeyedSiteOracle o(rfc_key());
  const auto t = o.tile(1, 5);
  EXPECT_EQ(t, chacha20_block(rfc_key(), 1, {5, 0, 0}));
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) EXPECT_EQ(o.draw(4 + x, 20 + y), t[static_cast<std::size_t>(4 * y + x)]);
  EXPECT_NE(KeyedSiteOracle::for_trial(1, 0).draw(0, 0), KeyedSiteOracle::for_trial(1, 1).draw(0, 0));
  EXPECT_EQ(KeyedSiteOracle::for_trial(1, 5).draw(17, 3), KeyedSiteOracle::for_trial(1, 5).draw(17, 3));
}

TEST(Arc4x16, KnownAnswers) {
  // Reference values from an independent implementation of the same cipher.
  const std::uint16_t k1[] = {1, 2, 3, 4, 5};
  Arc4x16 a(k1, 0);
  const std::array<std::uint16_t, 8> want_a = {0x95b7, 0x3382, 0xa41b, 0x9f61, 0x5526, 0xd80f, 0x54b6, 0x532a};
  for (auto w : want_a) EXPECT_EQ(a.next16(), w);

  const std::uint16_t k2[] = {0x0102, 0x0304, 0x0506, 0x0708};
  Arc4x16 b(k2);
  EXPECT_EQ(b.next(), 0x66a5f52fU);
  EXPECT_EQ(b.next(), 0x4124accdU);
}

TEST(Arc4x16, StateIsAPermutation) {
  Arc4x16 a = Arc4x16::for_trial(3, 4);
  std::vector<std::uint16_t> s = a.state();
  std::sort(s.begin(), s.end());
  for (std::size_t i = 0; i < s.size(); ++i) ASSERT_EQ(s[i], i);
  EXPECT_THROW(Arc4x16(std::span<const std::uint16_t>{}), std::invalid_argument);
}

TEST(Keys, TagsSeparateGenerators) {
  EXPECT_NE(derive_key(1, 0, 1), derive_key(1, 0, 2));
  EXPECT_NE(derive_key(1, 0, 1), derive_key(1, 1, 1));
  EXPECT_NE(derive_key(1, 0, 1), derive_key(2, 0, 1));
  EXPECT_EQ(derive_key(9, 9, 1), derive_key(9, 9, 1));
}

TEST(Crossing, HandBuiltLattices) {
  // One open column at x = 3 plus an open bottom row.
  FunctionEdges column([](int, int y) { return y == 0; }, [](int x, int) { return x == 3; });
  EXPECT_TRUE(has_vertical_crossing(8, 5, column));
  EXPECT_TRUE(has_horizontal_crossing(8, 5, column));
  FunctionEdges only_column([](int, int) { return false; }, [](int x, int) { return x == 3; });
  EXPECT_TRUE(has_vertical_crossing(8, 5, only_column));
  EXPECT_FALSE(has_horizontal_crossing(8, 5, only_column));
  // A column broken once is not a crossing.
  FunctionEdges broken([](int, int) { return false; }, [](int x, int y) { return x == 3 && y != 2; });
  EXPECT_FALSE(has_vertical_crossing(8, 5, broken));
  // A staircase.
  FunctionEdges stairs([](int x, int y) { return x == y; }, [](int x, int y) { return x == y + 1; });
  EXPECT_TRUE(has_vertical_crossing(10, 6, stairs));
  ConstantEdges open(true), closed(false);
  EXPECT_TRUE(has_vertical_crossing(1, 1, closed));
  EXPECT_FALSE(has_vertical_crossing(3, 2, closed));
  EXPECT_TRUE(has_horizontal_crossing(3, 2, open));
}

TEST(Crossing, ConstantLattices) {
  ConstantEdges open(true), closed(false);
  EXPECT_FALSE(crossings_event(8, open));
  EXPECT_TRUE(crossings_event(8, closed));
  EXPECT_EQ(crossings_oracle(8, open), crossings_event(8, open));
  EXPECT_EQ(crossings_oracle(8, closed), crossings_event(8, closed));
}

TEST(Dual, ConstantLattices) {
  ConstantEdges open(true), closed(false);
  // All faces isolated: no unique largest component.
  EXPECT_FALSE(dual_components_event(8, open));
  EXPECT_FALSE(dual_components_oracle(8, open));
  EXPECT_TRUE(dual_components_event(8, closed));
  EXPECT_TRUE(dual_components_oracle(8, closed));
  EXPECT_THROW(dual_components_event(3, closed), std::invalid_argument);
}

TEST(Dual, OracleEquivalenceThousandTrials) {
  for (int N : {4, 8, 16}) {
    int positive = 0;
    for (std::uint64_t t = 0; t < 1000; ++t) {
      Arc4x16 a = Arc4x16::for_trial(2024, t);
      Arc4x16 b = a;
      const bool fast = dual_components_trial(N, kSimulated, a);
      const bool slow = dual_components_oracle(N, kSimulated, b);
      ASSERT_EQ(fast, slow) << "N=" << N << " trial " << t;
      positive += fast;
    }
    EXPECT_GT(positive, 0) << N;
    EXPECT_LT(positive, 1000) << N;
  }
}

TEST(Dual, OracleEquivalenceOtherModels) {
  for (const ModelSpec& m : {ModelSpec{ModelKind::udlra, 0.6}, ModelSpec{ModelKind::signs, 0.5}})
    for (int N : {4, 8, 16})
      for (std::uint64_t t = 0; t < 100; ++t) {
        Arc4x16 a = Arc4x16::for_trial(7, t);
        Arc4x16 b = a;
        ASSERT_EQ(dual_components_trial(N, m, a), dual_components_oracle(N, m, b)) << m.name() << " N=" << N;
      }
}

TEST(Crossing, OracleEquivalenceThousandTrials) {
  for (int N : {8, 16, 64}) {
    int positive = 0;
    for (std::uint64_t t = 0; t < 1000; ++t) {
      const KeyedSiteOracle o = KeyedSiteOracle::for_trial(2024, t);
      const bool fast = crossings_trial(N, kSimulated, o);
      ASSERT_EQ(fast, crossings_oracle(N, kSimulated, o)) << "N=" << N << " trial " << t;
      positive += fast;
    }
    EXPECT_GT(positive, 0) << N;
    EXPECT_LT(positive, 1000) << N;
  }
}

TEST(Crossing, OracleEquivalenceOtherModels) {
  for (const ModelSpec& m : {ModelSpec{ModelKind::udlra, 0.6}, ModelSpec{ModelKind::signs, 0.5}})
    for (int N : {8, 16, 64})
      for (std::uint64_t t = 0; t < 100; ++t) {
        const KeyedSiteOracle o = KeyedSiteOracle::for_trial(7, t);
        ASSERT_EQ(crossings_trial(N, m, o), crossings_oracle(N, m, o)) << m.name() << " N=" << N;
      }
}

TEST(Binomial, TailsMatchExactSums) {
  // Exact rational sums computed independently.
  EXPECT_NEAR(binomial_tail(300, 0.8457, 292) / 3.1148568614046889e-13, 1.0, 1e-6);
  EXPECT_NEAR(binomial_tail(300, 0.8457, 291) / 1.8853206507173363e-12, 1.0, 1e-6);
  EXPECT_NEAR(binomial_tail(300, 0.8457, 260) / 0.17799286061602321, 1.0, 1e-6);
  EXPECT_NEAR(binomial_tail(30, 0.5, 20) / 0.049368573352694511, 1.0, 1e-6);
  EXPECT_LT(binomial_tail(300, 0.8457, 292), 1e-12);
  EXPECT_LT(binomial_tail(300, 0.8457, 291), 1e-11);
  for (int k : {0, 1, 150, 250, 291, 292, 299, 300})
    EXPECT_NEAR(binomial_tail(300, 0.8457, k) / binomial_tail_exact(300, 0.8457, k), 1.0, 1e-6) << k;
  EXPECT_EQ(binomial_tail(300, 0.8457, 0), 1.0);
  EXPECT_EQ(binomial_tail(10, 0.0, 1), 0.0);
  EXPECT_THROW(binomial_tail(10, 0.5, 11), std::invalid_argument);
}

TEST(Experiment, ConfigValidation) {
  ExperimentConfig c;
  EXPECT_NO_THROW(c.validate());
  c.N = 3;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.model = {ModelKind::planted, 0.5};
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.significance = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  EXPECT_EQ(parse_experiment("dual"), Experiment::dual_components);
  EXPECT_EQ(parse_experiment("crossing"), Experiment::crossings);
  EXPECT_THROW(parse_experiment("other"), std::invalid_argument);
}

TEST(Experiment, ThreadCountDoesNotChangeOutcomes) {
  for (Experiment e : {Experiment::dual_components, Experiment::crossings}) {
    ExperimentConfig c;
    c.experiment = e;
    c.N = 24;
    c.T = 12;
    c.seed = 99;
    c.threads = 1;
    const ExperimentReport one = run_experiment(c);
    c.threads = 3;
    const ExperimentReport three = run_experiment(c);
    EXPECT_EQ(one.outcomes, three.outcomes);
    EXPECT_EQ(one.successes, three.successes);
    EXPECT_EQ(one.p_value, three.p_value);
  }
}

TEST(Experiment, ReportJson) {
  ExperimentConfig c;
  c.N = 16;
  c.T = 5;
  const ExperimentReport r = run_experiment(c);
  const auto j = nlohmann::json::parse(r.to_json());
  EXPECT_EQ(j.at("experiment"), "crossing");
  EXPECT_EQ(j.at("N"), 16);
  EXPECT_EQ(j.at("T"), 5);
  EXPECT_EQ(j.at("model"), kSimulated.name());
  EXPECT_EQ(j.at("outcomes").size(), 5U);
  EXPECT_EQ(j.at("durations_s").size(), 5U);
  EXPECT_EQ(j.at("successes"), r.successes);
  EXPECT_EQ(j.at("passes"), r.p_value < c.significance);
}

TEST(Experiment, SupercriticalModelNeverBlocks) {
  // Edge probability 0.6825, well above the simulated threshold.
  ExperimentConfig c;
  c.model = {ModelKind::direction, 0.1};
  c.N = 64;
  c.T = 20;
  const ExperimentReport r = run_experiment(c);
  EXPECT_EQ(r.successes, 0);
  EXPECT_EQ(r.p_value, 1.0);
  EXPECT_FALSE(r.passes);
}
