#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "oneperc/grid.hpp"

namespace oneperc {

// udlra: site parameter p, states A,U,D,L,R on even sites only.
// direction: theta, states U,D,L,R on every site.
// signs: theta = P(+).
// planted: theta = P(heads); edge from r is open iff the coins at r and
// r + (1,1) are both heads. Two vertex-disjoint edges can share a coin, so
// this one is 2-dependent but not 1-independent; it exists to be rejected.
enum class ModelKind { udlra, direction, signs, planted };

struct ModelSpec {
  ModelKind kind = ModelKind::signs;
  double parameter = 0.5;

  void validate() const;
  std::string name() const;  // "direction:0.30134"
  // Inverse of name(); throws std::invalid_argument.
  static ModelSpec parse(const std::string& text);
};

const char* to_string(ModelKind k);

struct Site {
  int x = 0;
  int y = 0;
  friend bool operator==(const Site&, const Site&) = default;
  friend auto operator<=>(const Site&, const Site&) = default;
};

enum : std::uint8_t { kUdlraA = 0, kUp = 1, kDown = 2, kLeft = 3, kRight = 4 };
enum : std::uint8_t { kPlus = 0, kMinus = 1 };

int site_state_count(const ModelSpec& spec, Site s);
double site_state_probability(const ModelSpec& spec, Site s, int state);
// Inverse CDF on u = draw / 2^32.
std::uint8_t site_state_from_draw(const ModelSpec& spec, Site s, std::uint32_t draw);

// Sites whose states decide the edge uv (u, v lattice neighbours).
std::vector<Site> edge_dependencies(const ModelSpec& spec, Site u, Site v);
using SiteLookup = std::function<std::uint8_t(Site)>;
bool edge_open(const ModelSpec& spec, Site u, Site v, const SiteLookup& state);
// The same rule from the two endpoint states, for every kind but planted.
bool edge_open_local(ModelKind kind, Site u, std::uint8_t su, Site v, std::uint8_t sv);

double edge_probability(const ModelSpec& spec);
// Roots of (3/4)(theta^2 - theta + 1) = target, smaller first.
std::optional<std::pair<double, double>> theta_for_edge_prob(double target);

// Sites {x0..x0+width-1} x {y0..y0+height-1}, placed in absolute lattice
// coordinates so that udlra parity is global.
struct SiteRect {
  int x0 = 0;
  int y0 = 0;
  int width = 1;
  int height = 1;

  bool contains(Site s) const;
};

struct WindowEdge {
  Site u;  // lexicographically smaller endpoint
  Site v;
};

// Edges induced by the window, ordered lexicographically on (u, v).
std::vector<WindowEdge> window_edges(const SiteRect& rect);

struct WindowDistribution {
  SiteRect window;
  std::vector<WindowEdge> edges;
  // Sorted by mask; zero-probability masks are omitted.
  std::vector<std::pair<std::uint32_t, double>> support;

  double total() const;
  double marginal(int edge) const;
  double probability_of(std::uint32_t mask) const;
};

inline constexpr int kMaxWindowSide = 4;

// Exact law of the window's edges. Sites outside the window that some edge
// depends on are enumerated too and summed out.
WindowDistribution exact_window_distribution(const ModelSpec& spec, const SiteRect& rect);

// Checks P(a, b) = P(a) P(b) within tol for the edge sets induced by every
// 2-colouring of the window's sites, over all value pairs (a, b). Every pair
// of vertex-disjoint edge sets sits inside one such colouring.
bool verify_one_independence(const ModelSpec& spec, const SiteRect& rect, double tol);
bool verify_one_independence(const WindowDistribution& dist, double tol);

// Law of the open-edge set of a planar SmallGridGraph whose vertices fill a
// rectangle, indexed by the graph's own edge masks.
std::vector<double> graph_subset_law(const ModelSpec& spec, const SmallGridGraph& g);

struct LowerBoundCombination {
  double x_star = 0.0;
  double value = 0.0;
};

double udlra_bound(double p_site);  // 1 - 3x/4
double dfh_bound(double p_site);    // x^2 + (1 - x)/2
LowerBoundCombination lower_bound_combination();

// Source of 32-bit site draws.
class DrawStream {
 public:
  virtual ~DrawStream() = default;
  virtual std::uint32_t next() = 0;
};

// Replays a fixed list; throws std::out_of_range once exhausted.
class VectorDrawStream : public DrawStream {
 public:
  explicit VectorDrawStream(std::vector<std::uint32_t> draws) : draws_(std::move(draws)) {}
  std::uint32_t next() override;

 private:
  std::vector<std::uint32_t> draws_;
  std::size_t pos_ = 0;
};

// Draws one value per site, row by row from the bottom row (x fastest),
// over the bounding box of every site the window's edges depend on. Returns
// the open-edge mask in window_edges order.
std::uint32_t sample_window(const ModelSpec& spec, const SiteRect& rect, DrawStream& stream);

// The same rule applied to explicitly given states (row by row, x fastest,
// over `rect` itself).
std::uint32_t window_edges_from_states(const ModelSpec& spec, const SiteRect& rect,
                                       const std::vector<std::uint8_t>& states);

}  // namespace oneperc
