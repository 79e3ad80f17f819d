#include "oneperc/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <exception>
#include <memory>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

#include <gmpxx.h>

#include "json.hpp"

namespace oneperc {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::array<std::uint32_t, 8> derive_key(std::uint64_t seed, std::uint64_t trial, std::uint32_t tag) {
  std::uint64_t st = seed;
  std::uint64_t mixed = splitmix64(st) ^ (trial * 0x9e3779b97f4a7c15ULL) ^ (static_cast<std::uint64_t>(tag) << 32);
  std::array<std::uint32_t, 8> key{};
  for (int i = 0; i < 4; ++i) {
    const std::uint64_t w = splitmix64(mixed);
    key[2 * i] = static_cast<std::uint32_t>(w);
    key[2 * i + 1] = static_cast<std::uint32_t>(w >> 32);
  }
  return key;
}

Arc4x16::Arc4x16(std::span<const std::uint16_t> key, std::size_t drop) : s_(65536) {
  if (key.empty()) throw std::invalid_argument("arc4 key must not be empty");
  std::iota(s_.begin(), s_.end(), std::uint16_t{0});
  std::uint16_t j = 0;
  for (std::size_t k = 0; k < s_.size(); ++k) {
    j = static_cast<std::uint16_t>(j + s_[k] + key[k % key.size()]);
    std::swap(s_[k], s_[j]);
  }
  for (std::size_t k = 0; k < drop; ++k) next16();
}

Arc4x16 Arc4x16::for_trial(std::uint64_t seed, std::uint64_t trial) {
  const auto words = derive_key(seed, trial, 1);
  std::array<std::uint16_t, 16> key{};
  for (int i = 0; i < 8; ++i) {
    key[2 * i] = static_cast<std::uint16_t>(words[i]);
    key[2 * i + 1] = static_cast<std::uint16_t>(words[i] >> 16);
  }
  return Arc4x16(key);
}

std::uint16_t Arc4x16::next16() {
  i_ = static_cast<std::uint16_t>(i_ + 1);
  j_ = static_cast<std::uint16_t>(j_ + s_[i_]);
  std::swap(s_[i_], s_[j_]);
  return s_[static_cast<std::uint16_t>(s_[i_] + s_[j_])];
}

std::uint32_t Arc4x16::next() {
  const std::uint32_t hi = next16();
  return (hi << 16) | next16();
}

namespace {

inline std::uint32_t rotl(std::uint32_t v, int c) { return (v << c) | (v >> (32 - c)); }

inline void quarter_round(std::uint32_t& a, std::uint32_t& b, std::uint32_t& c, std::uint32_t& d) {
  a += b; d ^= a; d = rotl(d, 16);
  c += d; b ^= c; b = rotl(b, 12);
  a += b; d ^= a; d = rotl(d, 8);
  c += d; b ^= c; b = rotl(b, 7);
}

}  // namespace

std::array<std::uint32_t, 16> chacha20_block(const std::array<std::uint32_t, 8>& key, std::uint32_t counter,
                                             const std::array<std::uint32_t, 3>& nonce) {
  std::array<std::uint32_t, 16> in{0x61707865, 0x3320646e, 0x79622d32, 0x6b206574};
  for (int i = 0; i < 8; ++i) in[4 + i] = key[i];
  in[12] = counter;
  for (int i = 0; i < 3; ++i) in[13 + i] = nonce[i];
  std::array<std::uint32_t, 16> x = in;
  for (int r = 0; r < 10; ++r) {
    quarter_round(x[0], x[4], x[8], x[12]);
    quarter_round(x[1], x[5], x[9], x[13]);
    quarter_round(x[2], x[6], x[10], x[14]);
    quarter_round(x[3], x[7], x[11], x[15]);
    quarter_round(x[0], x[5], x[10], x[15]);
    quarter_round(x[1], x[6], x[11], x[12]);
    quarter_round(x[2], x[7], x[8], x[13]);
    quarter_round(x[3], x[4], x[9], x[14]);
  }
  for (int i = 0; i < 16; ++i) x[i] += in[i];
  return x;
}

KeyedSiteOracle KeyedSiteOracle::for_trial(std::uint64_t seed, std::uint64_t trial) {
  return KeyedSiteOracle(derive_key(seed, trial, 2));
}

std::array<std::uint32_t, 16> KeyedSiteOracle::tile(int tx, int ty) const {
  return chacha20_block(key_, static_cast<std::uint32_t>(tx), {static_cast<std::uint32_t>(ty), 0, 0});
}

std::uint32_t KeyedSiteOracle::draw(int x, int y) const { return tile(x >> 2, y >> 2)[4 * (y & 3) + (x & 3)]; }

// Inverse-CDF thresholds matching site_state_from_draw: u < cum iff
// draw < ceil(cum * 2^32).
class DrawTable {
 public:
  explicit DrawTable(const ModelSpec& spec) {
    if (spec.kind == ModelKind::planted) throw std::invalid_argument("the planted fixture cannot be simulated");
    for (int parity = 0; parity < 2; ++parity) {
      const Site s{parity, 0};
      double cum = 0.0;
      for (int k = 0; k < site_state_count(spec, s); ++k) {
        const double pk = site_state_probability(spec, s, k);
        if (pk <= 0.0) continue;
        cum += pk;
        rows_[parity].push_back({static_cast<std::uint64_t>(std::ceil(std::ldexp(cum, 32))), static_cast<std::uint8_t>(k)});
      }
    }
  }

  std::uint8_t operator()(int x, int y, std::uint32_t draw) const {
    const auto& r = rows_[(x + y) & 1];
    for (const auto& [thr, st] : r)
      if (draw < thr) return st;
    return r.back().second;
  }

 private:
  std::array<std::vector<std::pair<std::uint64_t, std::uint8_t>>, 2> rows_;
};

StreamColumns::StreamColumns(const ModelSpec& spec, int height, DrawStream& stream)
    : spec_(spec), height_(height), stream_(stream), table_(std::make_shared<DrawTable>(spec)) {
  if (height < 1) throw std::invalid_argument("height must be positive");
}

std::uint8_t StreamColumns::state(int x, int y) {
  if (x < 0 || y < 0 || y >= height_) throw std::out_of_range("site outside the revealed strip");
  if (x + 2 < revealed_) throw std::logic_error("column already discarded");
  while (revealed_ < x) {
    ++revealed_;
    auto& col = cols_[static_cast<std::size_t>(revealed_ % 3)];
    col.resize(static_cast<std::size_t>(height_));
    for (int yy = 0; yy < height_; ++yy) col[static_cast<std::size_t>(yy)] = (*table_)(revealed_, yy, stream_.next());
  }
  return cols_[static_cast<std::size_t>(x % 3)][static_cast<std::size_t>(y)];
}

bool StreamColumns::horizontal(int x, int y) {
  const std::uint8_t a = state(x, y);
  return edge_open_local(spec_.kind, {x, y}, a, {x + 1, y}, state(x + 1, y));
}

bool StreamColumns::vertical(int x, int y) {
  return edge_open_local(spec_.kind, {x, y}, state(x, y), {x, y + 1}, state(x, y + 1));
}

std::size_t StreamColumns::bytes() const {
  std::size_t b = 0;
  for (const auto& c : cols_) b += c.capacity();
  return b;
}

OracleSites::OracleSites(const ModelSpec& spec, const KeyedSiteOracle& oracle, int cache_bits)
    : spec_(spec), oracle_(oracle), table_(std::make_shared<DrawTable>(spec)), cache_(std::size_t{1} << cache_bits),
      mask_((std::uint32_t{1} << cache_bits) - 1), last_(cache_.data()) {
  // Edge rules only see the endpoint states, their offset and the parity of
  // the lower endpoint.
  for (int parity = 0; parity < 2; ++parity) {
    const Site u{parity, 0};
    const int nu = site_state_count(spec, u);
    if (nu > kMaxStates || site_state_count(spec, Site{parity + 1, 0}) > kMaxStates)
      throw std::invalid_argument("too many site states");
    for (int a = 0; a < nu; ++a)
      for (int b = 0; b < kMaxStates; ++b) {
        const auto i = static_cast<std::size_t>(a * kMaxStates + b);
        const auto sa = static_cast<std::uint8_t>(a), sb = static_cast<std::uint8_t>(b);
        if (b < site_state_count(spec, Site{parity + 1, 0}))
          right_[static_cast<std::size_t>(parity)][i] = edge_open_local(spec.kind, u, sa, Site{parity + 1, 0}, sb);
        if (b < site_state_count(spec, Site{parity, 1}))
          up_[static_cast<std::size_t>(parity)][i] = edge_open_local(spec.kind, u, sa, Site{parity, 1}, sb);
      }
  }
}

OracleSites::Slot& OracleSites::fill(int tx, int ty) {
  const std::uint32_t h =
      (static_cast<std::uint32_t>(tx) * 0x9e3779b1U) ^ (static_cast<std::uint32_t>(ty) * 0x85ebca77U);
  Slot& s = cache_[(h ^ (h >> 15)) & mask_];
  if (s.tx != tx || s.ty != ty) {
    const auto block = oracle_.tile(tx, ty);
    for (int k = 0; k < 16; ++k) s.states[k] = (*table_)(4 * tx + (k & 3), 4 * ty + (k >> 2), block[k]);
    s.tx = tx;
    s.ty = ty;
  }
  last_ = &s;
  return s;
}

namespace {

// Union-find over one column of faces plus the components of the previous
// column, relabelled compactly after every column so storage stays O(F).
class Frontier {
 public:
  explicit Frontier(int faces) : f_(faces), label_(static_cast<std::size_t>(faces), -1) {
    const auto cap = static_cast<std::size_t>(2 * faces);
    for (auto* v : {&parent_, &scratch_a_, &scratch_b_}) v->reserve(cap);
    size_.reserve(cap);
    flags_.reserve(cap);
    rep_.reserve(cap);
    new_label_.resize(static_cast<std::size_t>(faces));
  }

  void open() {
    k_ = count_;
    const std::size_t n = static_cast<std::size_t>(k_ + f_);
    parent_.resize(n);
    size_.resize(n);
    flags_.resize(n);
    for (int j = 0; j < f_; ++j) {
      const auto v = static_cast<std::size_t>(k_ + j);
      parent_[v] = k_ + j;
      size_[v] = 1;
      flags_[v] = 0;
    }
  }

  int new_node(int j) const { return k_ + j; }
  int old_node(int j) const { return label_[static_cast<std::size_t>(j)]; }

  int find(int a) {
    while (parent_[a] != a) {
      parent_[a] = parent_[parent_[a]];
      a = parent_[a];
    }
    return a;
  }

  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    flags_[a] |= flags_[b];
  }

  void watch(int node) {
    watch_ = node;
    watch_done_ = false;
  }

  // Ends the column. on_frozen(size, flags, row) runs once for each component
  // of the previous column that has no face in this one; row is one of its
  // faces in the previous column.
  template <class Fn>
  void close(Fn&& on_frozen) {
    const std::size_t n = static_cast<std::size_t>(k_ + f_);
    scratch_a_.assign(n, -1);  // root -> new label
    scratch_b_.assign(n, 0);   // root already reported
    int count = 0;
    std::vector<std::uint64_t>& nsize = nsize_;
    std::vector<std::uint8_t>& nflags = nflags_;
    std::vector<int>& nrep = nrep_;
    nsize.clear();
    nflags.clear();
    nrep.clear();
    for (int j = 0; j < f_; ++j) {
      const int r = find(k_ + j);
      if (scratch_a_[r] < 0) {
        scratch_a_[r] = count++;
        nsize.push_back(size_[r]);
        nflags.push_back(flags_[r]);
        nrep.push_back(j);
      }
      new_label_[static_cast<std::size_t>(j)] = scratch_a_[r];
    }
    for (int l = 0; l < k_; ++l) {
      const int r = find(l);
      if (scratch_a_[r] < 0 && !scratch_b_[r]) {
        scratch_b_[r] = 1;
        on_frozen(size_[r], flags_[r], rep_[static_cast<std::size_t>(l)]);
      }
    }
    if (watch_ >= 0) {
      const int r = find(watch_);
      if (scratch_a_[r] >= 0) {
        watch_ = scratch_a_[r];
      } else {
        watch_done_ = true;
        watch_flags_ = flags_[r];
        watch_ = -1;
      }
    }
    count_ = count;
    parent_.resize(static_cast<std::size_t>(count));
    std::iota(parent_.begin(), parent_.end(), 0);
    size_.assign(nsize.begin(), nsize.end());
    flags_.assign(nflags.begin(), nflags.end());
    rep_.assign(nrep.begin(), nrep.end());
    label_.swap(new_label_);
    k_ = count;
  }

  int count() const { return count_; }
  std::uint64_t size(int l) const { return size_[static_cast<std::size_t>(l)]; }
  std::uint8_t flags(int l) const { return flags_[static_cast<std::size_t>(l)]; }
  int rep(int l) const { return rep_[static_cast<std::size_t>(l)]; }
  int label(int row) const { return label_[static_cast<std::size_t>(row)]; }
  void set_flag(int l, std::uint8_t bit) { flags_[static_cast<std::size_t>(l)] |= bit; }
  std::uint8_t watched_flags() const { return watch_done_ ? watch_flags_ : watch_ >= 0 ? flags(watch_) : 0; }

 private:
  int f_;
  int k_ = 0;
  int count_ = 0;
  std::vector<int> parent_;
  std::vector<std::uint64_t> size_;
  std::vector<std::uint8_t> flags_;
  std::vector<int> rep_;
  std::vector<int> label_;
  std::vector<int> new_label_;
  std::vector<int> scratch_a_;
  std::vector<int> scratch_b_;
  std::vector<std::uint64_t> nsize_;
  std::vector<std::uint8_t> nflags_;
  std::vector<int> nrep_;
  int watch_ = -1;
  bool watch_done_ = false;
  std::uint8_t watch_flags_ = 0;
};

struct Largest {
  std::uint64_t size = 0;
  int count = 0;

  // True when `s` becomes the new strict maximum.
  bool offer(std::uint64_t s) {
    if (s > size) {
      size = s;
      count = 1;
      return true;
    }
    if (s == size) ++count;
    return false;
  }
};

void check_block_side(int N) {
  if (N < 4) throw std::invalid_argument("N must be at least 4");
  if (N > 100'000'000) throw std::invalid_argument("N too large");
}

}  // namespace

bool dual_components_event(int N, LatticeEdges& edges, int max_columns) {
  check_block_side(N);
  const int F = N - 1;
  const int columns = 2 * N - 1;
  constexpr std::uint8_t kHasCu = 1;
  Frontier full(F), block_v(F);
  std::vector<char> vopen(static_cast<std::size_t>(F - 1)), hopen(static_cast<std::size_t>(F));
  Largest lu, lv;

  for (int c = 0; c < columns; ++c) {
    if (max_columns > 0 && c >= max_columns) return false;
    for (int j = 0; j + 1 < F; ++j) vopen[j] = !edges.horizontal(c, j + 1);
    if (c > 0)
      for (int j = 0; j < F; ++j) hopen[j] = !edges.vertical(c, j);

    full.open();
    for (int j = 0; j + 1 < F; ++j)
      if (vopen[j]) full.unite(full.new_node(j), full.new_node(j + 1));
    if (c > 0)
      for (int j = 0; j < F; ++j)
        if (hopen[j]) full.unite(full.old_node(j), full.new_node(j));

    if (c >= N) {
      block_v.open();
      for (int j = 0; j + 1 < F; ++j)
        if (vopen[j]) block_v.unite(block_v.new_node(j), block_v.new_node(j + 1));
      if (c > N)
        for (int j = 0; j < F; ++j)
          if (hopen[j]) block_v.unite(block_v.old_node(j), block_v.new_node(j));
      block_v.close([&](std::uint64_t size, std::uint8_t, int row) {
        if (lv.offer(size)) full.watch(full.old_node(row));
      });
    }

    full.close([&](std::uint64_t size, std::uint8_t, int) {
      if (c <= N - 2) lu.offer(size);
    });

    if (c == N - 2) {
      // The full dual restricted to columns <= N-2 is the left block's dual.
      int cu = -1;
      for (int l = 0; l < full.count(); ++l)
        if (lu.offer(full.size(l))) cu = l;
      if (lu.count != 1 || cu < 0) return false;
      full.set_flag(cu, kHasCu);
    }
  }

  int cv = -1;
  for (int l = 0; l < block_v.count(); ++l)
    if (lv.offer(block_v.size(l))) cv = l;
  if (lv.count != 1) return false;
  if (cv >= 0) return full.flags(full.label(block_v.rep(cv))) & kHasCu;
  return full.watched_flags() & kHasCu;
}

bool dual_components_trial(int N, const ModelSpec& spec, DrawStream& stream) {
  StreamColumns cols(spec, N, stream);
  return dual_components_event(N, cols);
}

namespace {

// Face (i, j), i < 2N-1, j < N-1, has index i * (N-1) + j.
struct DualMaterialised {
  int N;
  std::vector<char> right_open;  // bond (i,j)-(i+1,j)
  std::vector<char> up_open;     // bond (i,j)-(i,j+1)
};

std::vector<int> label_faces(const DualMaterialised& d, int lo, int hi) {
  const int F = d.N - 1;
  std::vector<int> lab(static_cast<std::size_t>((2 * d.N - 1) * F), -1);
  int next = 0;
  std::vector<int> stack;
  for (int i = lo; i < hi; ++i)
    for (int j = 0; j < F; ++j) {
      const int s = i * F + j;
      if (lab[s] >= 0) continue;
      lab[s] = next;
      stack.push_back(s);
      while (!stack.empty()) {
        const int f = stack.back();
        stack.pop_back();
        const int fi = f / F, fj = f % F;
        auto visit = [&](int g) {
          if (lab[g] < 0) {
            lab[g] = next;
            stack.push_back(g);
          }
        };
        if (fi + 1 < hi && d.right_open[f]) visit(f + F);
        if (fi > lo && d.right_open[f - F]) visit(f - F);
        if (fj + 1 < F && d.up_open[f]) visit(f + 1);
        if (fj > 0 && d.up_open[f - 1]) visit(f - 1);
      }
      ++next;
    }
  return lab;
}

// Index of the unique largest label among faces in [lo, hi), or -1.
int unique_largest(const std::vector<int>& lab, int F, int lo, int hi) {
  std::vector<std::uint64_t> count;
  for (int f = lo * F; f < hi * F; ++f) {
    if (lab[f] >= static_cast<int>(count.size())) count.resize(lab[f] + 1, 0);
    ++count[lab[f]];
  }
  const auto best = *std::max_element(count.begin(), count.end());
  int which = -1;
  for (std::size_t l = 0; l < count.size(); ++l)
    if (count[l] == best) {
      if (which >= 0) return -1;
      which = static_cast<int>(l);
    }
  return which;
}

bool dual_event_from(const DualMaterialised& d) {
  const int N = d.N, F = N - 1, I = 2 * N - 1;
  const auto lu = label_faces(d, 0, N - 1);
  const auto lv = label_faces(d, N, I);
  const auto lf = label_faces(d, 0, I);
  const int cu = unique_largest(lu, F, 0, N - 1);
  const int cv = unique_largest(lv, F, N, I);
  if (cu < 0 || cv < 0) return false;
  int fu = -1, fv = -1;
  for (int f = 0; f < (N - 1) * F; ++f)
    if (lu[f] == cu) fu = f;
  for (int f = N * F; f < I * F; ++f)
    if (lv[f] == cv) fv = f;
  return lf[fu] == lf[fv];
}

}  // namespace

bool dual_components_oracle(int N, LatticeEdges& edges) {
  check_block_side(N);
  const int F = N - 1, I = 2 * N - 1;
  DualMaterialised d{N, std::vector<char>(static_cast<std::size_t>(I * F), 0),
                     std::vector<char>(static_cast<std::size_t>(I * F), 0)};
  for (int x = 0; x < 2 * N; ++x) {
    for (int j = 0; j < F; ++j)
      if (x >= 1) d.right_open[(x - 1) * F + j] = !edges.vertical(x, j);
    if (x < I)
      for (int j = 0; j + 1 < F; ++j) d.up_open[x * F + j] = !edges.horizontal(x, j + 1);
  }
  return dual_event_from(d);
}

bool dual_components_oracle(int N, const ModelSpec& spec, DrawStream& stream) {
  check_block_side(N);
  std::vector<std::uint8_t> st(static_cast<std::size_t>(2 * N) * N);
  for (int x = 0; x < 2 * N; ++x)
    for (int y = 0; y < N; ++y) st[static_cast<std::size_t>(x) * N + y] = site_state_from_draw(spec, {x, y}, stream.next());
  auto s = [&](int x, int y) { return st[static_cast<std::size_t>(x) * N + y]; };
  const int F = N - 1, I = 2 * N - 1;
  DualMaterialised d{N, std::vector<char>(static_cast<std::size_t>(I * F), 0),
                     std::vector<char>(static_cast<std::size_t>(I * F), 0)};
  for (int i = 0; i < I; ++i)
    for (int j = 0; j < F; ++j) {
      // Right bond crosses the primal edge (i+1, j)-(i+1, j+1).
      d.right_open[i * F + j] = i + 1 < I && !edge_open_local(spec.kind, {i + 1, j}, s(i + 1, j), {i + 1, j + 1}, s(i + 1, j + 1));
      // Up bond crosses (i, j+1)-(i+1, j+1).
      d.up_open[i * F + j] = j + 1 < F && !edge_open_local(spec.kind, {i, j + 1}, s(i, j + 1), {i + 1, j + 1}, s(i + 1, j + 1));
    }
  return dual_event_from(d);
}

namespace {

constexpr int kDx[4] = {0, 1, 0, -1};
constexpr int kDy[4] = {1, 0, -1, 0};

template <class Edges>
class Transposed {
 public:
  explicit Transposed(Edges& base) : base_(base) {}
  bool horizontal(int x, int y) { return base_.vertical(y, x); }
  bool vertical(int x, int y) { return base_.horizontal(y, x); }

 private:
  Edges& base_;
};

// A virtual open row y = -1 joins the bottom sites. The walker starts in its
// left cell heading north and keeps its left hand on the wall, tracing the
// face of the cluster attached to the bottom that meets the left side. It
// only ever stands on sites joined to the bottom, and it reaches the top row
// unless a closed dual path separates the left side from the top. Face
// tracing is a permutation of directed moves, so it returns to its first
// move when it fails.
template <class Edges>
bool walk_vertical(int W, int H, Edges& edges) {
  if (W < 1 || H < 1) throw std::invalid_argument("empty rectangle");
  if (H == 1) return true;
  auto can_move = [&](int x, int y, int d) {
    const int nx = x + kDx[d], ny = y + kDy[d];
    if (nx < 0 || nx >= W || ny < -1 || ny >= H) return false;
    if (y == -1 || ny == -1) return true;
    switch (d) {
      case 0: return edges.vertical(x, y);
      case 1: return edges.horizontal(x, y);
      case 2: return edges.vertical(x, ny);
      default: return edges.horizontal(nx, y);
    }
  };
  int x = 0, y = -1, d = 0;
  int fx = 0, fy = 0, fd = -1;
  for (;;) {
    int nd = -1;
    for (int turn : {3, 0, 1, 2}) {
      const int cand = (d + turn) & 3;
      if (can_move(x, y, cand)) {
        nd = cand;
        break;
      }
    }
    x += kDx[nd];
    y += kDy[nd];
    d = nd;
    if (y == H - 1) return true;
    if (fd < 0) {
      fx = x;
      fy = y;
      fd = d;
    } else if (x == fx && y == fy && d == fd) {
      return false;
    }
  }
}

template <class Edges>
bool walk_horizontal(int W, int H, Edges& edges) {
  Transposed<Edges> t(edges);
  return walk_vertical(H, W, t);
}

template <class Edges>
bool crossings_walk(int N, Edges& edges) {
  check_block_side(N);
  return !walk_vertical(2 * N, N, edges) && !walk_horizontal(N, N, edges);
}

}  // namespace

bool has_vertical_crossing(int W, int H, LatticeEdges& edges) { return walk_vertical(W, H, edges); }

bool has_horizontal_crossing(int W, int H, LatticeEdges& edges) { return walk_horizontal(W, H, edges); }

bool crossings_event(int N, LatticeEdges& edges) { return crossings_walk(N, edges); }

bool crossings_trial(int N, const ModelSpec& spec, const KeyedSiteOracle& oracle) {
  OracleSites sites(spec, oracle);
  return crossings_walk(N, sites);
}

namespace {

struct Materialised {
  int W, H;
  std::vector<char> h, v;  // h[x*H+y]: (x,y)-(x+1,y); v[x*H+y]: (x,y)-(x,y+1)
};

bool bfs_cross(const Materialised& m, int W, int H, bool vertical) {
  // vertical: from y = 0 to y = H-1; otherwise from x = 0 to x = W-1.
  std::vector<char> seen(static_cast<std::size_t>(W) * H, 0);
  std::deque<std::pair<int, int>> q;
  auto push = [&](int x, int y) {
    char& s = seen[static_cast<std::size_t>(x) * H + y];
    if (!s) {
      s = 1;
      q.emplace_back(x, y);
    }
  };
  if (vertical)
    for (int x = 0; x < W; ++x) push(x, 0);
  else
    for (int y = 0; y < H; ++y) push(0, y);
  while (!q.empty()) {
    const auto [x, y] = q.front();
    q.pop_front();
    if (vertical ? y == H - 1 : x == W - 1) return true;
    const std::size_t i = static_cast<std::size_t>(x) * m.H + y;
    if (x + 1 < W && m.h[i]) push(x + 1, y);
    if (x > 0 && m.h[i - m.H]) push(x - 1, y);
    if (y + 1 < H && m.v[i]) push(x, y + 1);
    if (y > 0 && m.v[i - 1]) push(x, y - 1);
  }
  return false;
}

bool crossings_from(const Materialised& m, int N) {
  return !bfs_cross(m, 2 * N, N, true) && !bfs_cross(m, N, N, false);
}

}  // namespace

bool crossings_oracle(int N, LatticeEdges& edges) {
  check_block_side(N);
  Materialised m{2 * N, N, std::vector<char>(static_cast<std::size_t>(2 * N) * N, 0),
                 std::vector<char>(static_cast<std::size_t>(2 * N) * N, 0)};
  for (int x = 0; x < 2 * N; ++x)
    for (int y = 0; y < N; ++y) {
      const std::size_t i = static_cast<std::size_t>(x) * N + y;
      if (x + 1 < 2 * N) m.h[i] = edges.horizontal(x, y);
      if (y + 1 < N) m.v[i] = edges.vertical(x, y);
    }
  return crossings_from(m, N);
}

bool crossings_oracle(int N, const ModelSpec& spec, const KeyedSiteOracle& oracle) {
  check_block_side(N);
  std::vector<std::uint8_t> st(static_cast<std::size_t>(2 * N) * N);
  for (int x = 0; x < 2 * N; ++x)
    for (int y = 0; y < N; ++y) st[static_cast<std::size_t>(x) * N + y] = site_state_from_draw(spec, {x, y}, oracle.draw(x, y));
  auto s = [&](int x, int y) { return st[static_cast<std::size_t>(x) * N + y]; };
  Materialised m{2 * N, N, std::vector<char>(st.size(), 0), std::vector<char>(st.size(), 0)};
  for (int x = 0; x < 2 * N; ++x)
    for (int y = 0; y < N; ++y) {
      const std::size_t i = static_cast<std::size_t>(x) * N + y;
      if (x + 1 < 2 * N) m.h[i] = edge_open_local(spec.kind, {x, y}, s(x, y), {x + 1, y}, s(x + 1, y));
      if (y + 1 < N) m.v[i] = edge_open_local(spec.kind, {x, y}, s(x, y), {x, y + 1}, s(x, y + 1));
    }
  return crossings_from(m, N);
}

namespace {

void check_binomial(int T, double p0, int k) {
  if (T < 0 || k < 0 || k > T) throw std::invalid_argument("binomial tail needs 0 <= k <= T");
  if (!(p0 >= 0.0 && p0 <= 1.0)) throw std::invalid_argument("p0 must lie in [0, 1]");
}

}  // namespace

double binomial_tail(int T, double p0, int k) {
  check_binomial(T, p0, k);
  if (k == 0) return 1.0;
  if (p0 == 0.0) return 0.0;
  if (p0 == 1.0) return 1.0;
  const long double lp = std::log(static_cast<long double>(p0));
  const long double lq = std::log1p(-static_cast<long double>(p0));
  const long double lt = std::lgamma(static_cast<long double>(T) + 1);
  auto log_term = [&](int i) {
    return lt - std::lgamma(static_cast<long double>(i) + 1) - std::lgamma(static_cast<long double>(T - i) + 1) +
           i * lp + (T - i) * lq;
  };
  const int mode = std::clamp(static_cast<int>(std::floor((T + 1) * static_cast<long double>(p0))), k, T);
  const long double top = log_term(mode);
  long double sum = 1.0L;
  for (int i = mode + 1; i <= T; ++i) sum += std::exp(log_term(i) - top);
  for (int i = mode - 1; i >= k; --i) sum += std::exp(log_term(i) - top);
  return static_cast<double>(std::min(1.0L, std::exp(top) * sum));
}

double binomial_tail_exact(int T, double p0, int k) {
  check_binomial(T, p0, k);
  const mpq_class p(p0);
  const mpq_class q = mpq_class(1) - p;
  mpq_class sum = 0;
  for (int i = k; i <= T; ++i) {
    mpz_class c;
    mpz_bin_uiui(c.get_mpz_t(), static_cast<unsigned long>(T), static_cast<unsigned long>(i));
    mpq_class pi, qi;
    mpz_class pn, pd, qn, qd;
    mpz_pow_ui(pn.get_mpz_t(), p.get_num_mpz_t(), static_cast<unsigned long>(i));
    mpz_pow_ui(pd.get_mpz_t(), p.get_den_mpz_t(), static_cast<unsigned long>(i));
    mpz_pow_ui(qn.get_mpz_t(), q.get_num_mpz_t(), static_cast<unsigned long>(T - i));
    mpz_pow_ui(qd.get_mpz_t(), q.get_den_mpz_t(), static_cast<unsigned long>(T - i));
    mpq_class term(c * pn * qn, pd * qd);
    term.canonicalize();
    sum += term;
  }
  return sum.get_d();
}

const char* to_string(Experiment e) { return e == Experiment::dual_components ? "dual" : "crossing"; }

Experiment parse_experiment(const std::string& text) {
  if (text == "dual" || text == "dual_components") return Experiment::dual_components;
  if (text == "crossing" || text == "crossings") return Experiment::crossings;
  throw std::invalid_argument("unknown experiment: " + text);
}

void ExperimentConfig::validate() const {
  check_block_side(N);
  if (T < 1) throw std::invalid_argument("T must be at least 1");
  if (!(threshold > 0.0 && threshold < 1.0)) throw std::invalid_argument("threshold must lie in (0, 1)");
  if (!(significance > 0.0 && significance < 1.0)) throw std::invalid_argument("significance must lie in (0, 1)");
  if (threads < 0) throw std::invalid_argument("threads must be nonnegative");
  model.validate();
  if (model.kind == ModelKind::planted) throw std::invalid_argument("the planted fixture cannot be simulated");
}

int default_thread_count() {
  if (const char* env = std::getenv("ONEPERC_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0 && v <= 4096) return static_cast<int>(v);
  }
  return static_cast<int>(std::max(1U, std::thread::hardware_concurrency()));
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentReport rep;
  rep.config = cfg;
  rep.trials = cfg.T;
  std::vector<char> outcomes(static_cast<std::size_t>(cfg.T), 0);
  rep.durations.assign(static_cast<std::size_t>(cfg.T), 0.0);
  const auto start = std::chrono::steady_clock::now();

  std::atomic<int> next{0};
  std::mutex err_mu;
  std::exception_ptr err;
  int err_trial = -1;
  auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= cfg.T) return;
      {
        std::lock_guard lock(err_mu);
        if (err) return;
      }
      const auto t0 = std::chrono::steady_clock::now();
      try {
        bool ok;
        if (cfg.experiment == Experiment::dual_components) {
          Arc4x16 stream = Arc4x16::for_trial(cfg.seed, static_cast<std::uint64_t>(i));
          ok = dual_components_trial(cfg.N, cfg.model, stream);
        } else {
          ok = crossings_trial(cfg.N, cfg.model, KeyedSiteOracle::for_trial(cfg.seed, static_cast<std::uint64_t>(i)));
        }
        outcomes[static_cast<std::size_t>(i)] = ok;
      } catch (...) {
        std::lock_guard lock(err_mu);
        if (!err || i < err_trial) {
          err = std::current_exception();
          err_trial = i;
        }
      }
      rep.durations[static_cast<std::size_t>(i)] =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
  };
  const int threads = std::min(cfg.threads > 0 ? cfg.threads : default_thread_count(), cfg.T);
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (err) {
    try {
      std::rethrow_exception(err);
    } catch (const std::exception& e) {
      throw std::runtime_error("trial " + std::to_string(err_trial) + " failed: " + e.what());
    }
  }

  rep.outcomes.assign(outcomes.begin(), outcomes.end());
  rep.successes = static_cast<int>(std::count(rep.outcomes.begin(), rep.outcomes.end(), true));
  rep.p_value = binomial_tail(cfg.T, cfg.threshold, rep.successes);
  rep.passes = rep.p_value < cfg.significance;
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

std::string ExperimentReport::to_json() const {
  nlohmann::json j;
  j["experiment"] = to_string(config.experiment);
  j["N"] = config.N;
  j["T"] = config.T;
  j["model"] = config.model.name();
  j["edge_probability"] = edge_probability(config.model);
  j["threshold"] = config.threshold;
  j["seed"] = config.seed;
  j["significance"] = config.significance;
  j["successes"] = successes;
  j["trials"] = trials;
  j["p_value"] = p_value;
  j["passes"] = passes;
  j["outcomes"] = outcomes;
  j["durations_s"] = durations;
  j["wall_seconds"] = wall_seconds;
  return j.dump(2);
}

}  // namespace oneperc
