#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "oneperc/models.hpp"

namespace oneperc {

// splitmix64 step.
std::uint64_t splitmix64(std::uint64_t& state);

// 256-bit key for trial `trial` of a run seeded with `seed`. `tag` separates
// the two generators so they never share key material.
std::array<std::uint32_t, 8> derive_key(std::uint64_t seed, std::uint64_t trial, std::uint32_t tag);

// arc4 lifted to 16-bit words: a permutation of 65536 words, the usual key
// schedule with 16-bit arithmetic, and the first `drop` outputs discarded.
class Arc4x16 : public DrawStream {
 public:
  static constexpr std::size_t kDefaultDrop = std::size_t{1} << 17;

  explicit Arc4x16(std::span<const std::uint16_t> key, std::size_t drop = kDefaultDrop);
  static Arc4x16 for_trial(std::uint64_t seed, std::uint64_t trial);

  std::uint16_t next16();
  // High half first.
  std::uint32_t next() override;

  const std::vector<std::uint16_t>& state() const { return s_; }

 private:
  std::vector<std::uint16_t> s_;
  std::uint16_t i_ = 0;
  std::uint16_t j_ = 0;
};

// The 20-round block function: key words, 32-bit block counter, three nonce
// words, sixteen output words.
std::array<std::uint32_t, 16> chacha20_block(const std::array<std::uint32_t, 8>& key, std::uint32_t counter,
                                             const std::array<std::uint32_t, 3>& nonce);

// Pure map (x, y) -> 32-bit draw. Site (x, y) lives in the 4x4 tile
// (x >> 2, y >> 2); the tile's column goes in the counter word, its row in the
// first nonce word, and the site takes word 4 (y & 3) + (x & 3) of the block.
class KeyedSiteOracle {
 public:
  explicit KeyedSiteOracle(const std::array<std::uint32_t, 8>& key) : key_(key) {}
  static KeyedSiteOracle for_trial(std::uint64_t seed, std::uint64_t trial);

  std::uint32_t draw(int x, int y) const;
  std::array<std::uint32_t, 16> tile(int tx, int ty) const;

 private:
  std::array<std::uint32_t, 8> key_;
};

// Edge states of a planar lattice.
class LatticeEdges {
 public:
  virtual ~LatticeEdges() = default;
  virtual bool horizontal(int x, int y) = 0;  // (x, y) - (x+1, y)
  virtual bool vertical(int x, int y) = 0;    // (x, y) - (x, y+1)
};

class ConstantEdges : public LatticeEdges {
 public:
  explicit ConstantEdges(bool open) : open_(open) {}
  bool horizontal(int, int) override { return open_; }
  bool vertical(int, int) override { return open_; }

 private:
  bool open_;
};

class DrawTable;

// Reveals site columns x = 0, 1, 2, ... from a stream, N draws per column
// (y = 0..N-1), keeping three columns. Queries must not go back more than
// two columns behind the furthest one revealed.
class StreamColumns : public LatticeEdges {
 public:
  StreamColumns(const ModelSpec& spec, int height, DrawStream& stream);
  std::uint8_t state(int x, int y);
  bool horizontal(int x, int y) override;
  bool vertical(int x, int y) override;

  std::size_t bytes() const;

 private:
  ModelSpec spec_;
  int height_;
  DrawStream& stream_;
  std::shared_ptr<const DrawTable> table_;
  int revealed_ = -1;
  std::array<std::vector<std::uint8_t>, 3> cols_;
};

// Lazy site states from a keyed oracle through a direct-mapped tile cache.
class OracleSites final : public LatticeEdges {
 public:
  OracleSites(const ModelSpec& spec, const KeyedSiteOracle& oracle, int cache_bits = 14);

  std::uint8_t state(int x, int y) {
    const int tx = x >> 2;
    const int ty = y >> 2;
    const Slot* s = last_->tx == tx && last_->ty == ty ? last_ : &fill(tx, ty);
    return s->states[static_cast<std::size_t>(4 * (y & 3) + (x & 3))];
  }
  bool horizontal(int x, int y) override {
    const int a = state(x, y);
    return right_[static_cast<std::size_t>((x + y) & 1)][static_cast<std::size_t>(a * kMaxStates + state(x + 1, y))];
  }
  bool vertical(int x, int y) override {
    const int a = state(x, y);
    return up_[static_cast<std::size_t>((x + y) & 1)][static_cast<std::size_t>(a * kMaxStates + state(x, y + 1))];
  }

 private:
  struct Slot {
    int tx = std::numeric_limits<int>::min();  // no tile
    int ty = 0;
    std::array<std::uint8_t, 16> states{};
  };
  Slot& fill(int tx, int ty);

  static constexpr int kMaxStates = 8;
  using EdgeTable = std::array<std::array<bool, kMaxStates * kMaxStates>, 2>;  // [parity of u][su * 8 + sv]

  ModelSpec spec_;
  const KeyedSiteOracle& oracle_;
  std::shared_ptr<const DrawTable> table_;
  std::vector<Slot> cache_;
  std::uint32_t mask_;
  Slot* last_;
  EdgeTable right_{};
  EdgeTable up_{};
};

// Experiment 1 on the 2N x N site rectangle [0, 2N) x [0, N). Faces are
// indexed by their lower-left site; a dual bond is open iff the primal edge
// it crosses is closed. True iff each (N-1) x (N-1) block dual has a unique
// largest component and the two lie in one component of the
// (2N-1) x (N-1) dual. Edges are queried column by column, so memory is O(N).
// A positive `max_columns` stops after that many face columns (the result is
// then meaningless); it exists for memory measurements.
bool dual_components_event(int N, LatticeEdges& edges, int max_columns = 0);
bool dual_components_trial(int N, const ModelSpec& spec, DrawStream& stream);
// Materialises all 2N^2 sites from the same stream and searches the three
// dual graphs directly.
bool dual_components_oracle(int N, const ModelSpec& spec, DrawStream& stream);
bool dual_components_oracle(int N, LatticeEdges& edges);

// Open bottom-to-top crossing of [0, W) x [0, H), found by walking the
// boundary of the cluster attached to the bottom with the left hand on the
// wall. Only edges next to that boundary are queried.
bool has_vertical_crossing(int W, int H, LatticeEdges& edges);
// Left-to-right crossing of [0, W) x [0, H).
bool has_horizontal_crossing(int W, int H, LatticeEdges& edges);

// Experiment 2: no bottom-to-top crossing of the 2N x N rectangle and no
// left-to-right crossing of the left N x N square.
bool crossings_event(int N, LatticeEdges& edges);
bool crossings_trial(int N, const ModelSpec& spec, const KeyedSiteOracle& oracle);
// Breadth-first search over the fully materialised rectangle.
bool crossings_oracle(int N, LatticeEdges& edges);
bool crossings_oracle(int N, const ModelSpec& spec, const KeyedSiteOracle& oracle);

// P(Bin(T, p0) >= k), summed in log space from the largest term.
double binomial_tail(int T, double p0, int k);
// The same sum in exact rational arithmetic (p0 taken as its exact binary
// value), rounded to double.
double binomial_tail_exact(int T, double p0, int k);

enum class Experiment { dual_components, crossings };
const char* to_string(Experiment e);
Experiment parse_experiment(const std::string& text);

struct ExperimentConfig {
  int N = 50000;
  int T = 30;
  ModelSpec model{ModelKind::direction, 0.30134};
  double threshold = 0.8457;
  Experiment experiment = Experiment::crossings;
  std::uint64_t seed = 1;
  double significance = 0.01;
  int threads = 0;  // 0: ONEPERC_THREADS, else hardware concurrency

  void validate() const;
};

struct ExperimentReport {
  ExperimentConfig config;
  int successes = 0;
  int trials = 0;
  double p_value = 1.0;
  bool passes = false;
  std::vector<bool> outcomes;
  std::vector<double> durations;  // seconds per trial
  double wall_seconds = 0.0;

  std::string to_json() const;
};

int default_thread_count();

// Trial i uses the generators keyed by (seed, i), so the report does not
// depend on the thread count.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

}  // namespace oneperc
