#pragma once

#include <array>
#include <initializer_list>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace oneperc {

// Edge tag used by the two-probability renormalisation: edges inside one
// 2x2 square carry probability p, the two edges joining the squares carry p'.
enum class EdgeLabel : std::uint8_t { plain, intra_square, cross_square };

using Point = std::vector<int>;

struct Edge {
  std::uint8_t u = 0;
  std::uint8_t v = 0;
  EdgeLabel label = EdgeLabel::plain;
};

// Bitmask over the edges of a SmallGridGraph. Bit i is edge i in the graph's
// deterministic edge order.
class EdgeSubset {
 public:
  constexpr EdgeSubset() = default;
  constexpr explicit EdgeSubset(std::uint32_t mask) : mask_(mask) {}

  static constexpr EdgeSubset of(std::initializer_list<int> edges) {
    std::uint32_t m = 0;
    for (int e : edges) m |= std::uint32_t{1} << e;
    return EdgeSubset(m);
  }

  constexpr std::uint32_t mask() const { return mask_; }
  constexpr bool contains(int e) const { return (mask_ >> e) & 1U; }
  constexpr EdgeSubset with(int e) const { return EdgeSubset(mask_ | (std::uint32_t{1} << e)); }
  constexpr EdgeSubset without(int e) const { return EdgeSubset(mask_ & ~(std::uint32_t{1} << e)); }
  constexpr bool is_subset_of(EdgeSubset o) const { return (mask_ & ~o.mask_) == 0; }
  constexpr bool disjoint_from(EdgeSubset o) const { return (mask_ & o.mask_) == 0; }
  int size() const;

  friend constexpr bool operator==(EdgeSubset, EdgeSubset) = default;

 private:
  std::uint32_t mask_ = 0;
};

// A finite grid graph small enough that every edge subset fits in one 32-bit
// word. Vertices are sorted lexicographically and edges are sorted
// lexicographically on (lower endpoint coordinates, upper endpoint
// coordinates), so subset indices are reproducible.
class SmallGridGraph {
 public:
  static constexpr int kMaxEdges = 32;
  static constexpr int kMaxVertices = 32;

  SmallGridGraph(std::vector<Point> vertices, std::vector<Edge> edges, std::string name);

  const std::string& name() const { return name_; }
  int vertex_count() const { return static_cast<int>(vertices_.size()); }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  const std::vector<Point>& vertices() const { return vertices_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(int e) const { return edges_[static_cast<std::size_t>(e)]; }

  // -1 when absent.
  int vertex_index(const Point& p) const;
  int edge_index(const Point& a, const Point& b) const;

  EdgeSubset all_edges() const;
  bool is_valid(EdgeSubset s) const { return (s.mask() & ~all_edges().mask()) == 0; }

  // Edges sharing at least one endpoint with e, including e itself.
  EdgeSubset touching(int e) const { return touching_[static_cast<std::size_t>(e)]; }
  // Edges of s that share no endpoint with any other edge of s.
  EdgeSubset isolated_edges(EdgeSubset s) const;

  int degree(int v) const;
  std::uint32_t vertex_mask(std::span<const Point> points) const;

 private:
  std::vector<Point> vertices_;
  std::vector<Edge> edges_;
  std::vector<EdgeSubset> touching_;
  std::string name_;
};

SmallGridGraph build_hypercube(int k);
SmallGridGraph build_rectangle_4x2();

// Component label (smallest vertex index in the component) for every vertex.
std::array<std::uint8_t, SmallGridGraph::kMaxVertices> component_labels(const SmallGridGraph& g,
                                                                         EdgeSubset s);

bool is_connected_spanning(const SmallGridGraph& g, EdgeSubset s);

// A = 3 vertices of the left 2x2 square, B = 3 vertices of the right one,
// both stored as vertex bitmasks of the 4x2 rectangle.
struct TargetPair {
  std::uint32_t left = 0;
  std::uint32_t right = 0;
};

// S_{(i,0)} minus the corner (2i + r, s).
std::uint32_t square_minus_corner(const SmallGridGraph& rect, int square, int r, int s);

// C0..C3 in the order used by the mixture weights.
std::array<TargetPair, 4> config_target_pairs(const SmallGridGraph& rect);
void validate_target_pair(const SmallGridGraph& rect, const TargetPair& tp);

bool good_pair_event(const SmallGridGraph& rect, EdgeSubset s, const TargetPair& tp);

// Some component meets at least three vertices of each 2x2 square.
bool three_of_four_event(const SmallGridGraph& rect, EdgeSubset s);

// The ten two-edge sets of which at least one is closed whenever the
// three-of-four event fails.
std::array<EdgeSubset, 10> ten_closed_patterns(const SmallGridGraph& rect);
bool verify_ten_pattern_cover();

// Image of s under (x, y) -> (3 - x, y) on the 4x2 rectangle.
EdgeSubset reflect_horizontally(const SmallGridGraph& rect, EdgeSubset s);
std::uint32_t reflect_vertices_horizontally(const SmallGridGraph& rect, std::uint32_t vmask);

struct EnumerationFixture {
  std::string graph;
  int edge_count = 0;
  std::uint64_t subsets = 0;
  std::uint64_t connected_spanning = 0;
  // Only filled for the rectangle.
  std::array<std::uint64_t, 4> good_pair{};
  std::uint64_t three_of_four = 0;
};

EnumerationFixture enumerate_fixture(const SmallGridGraph& g);

}  // namespace oneperc
