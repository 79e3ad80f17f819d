#include "oneperc/grid.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <stdexcept>

namespace oneperc {

int EdgeSubset::size() const { return std::popcount(mask_); }

SmallGridGraph::SmallGridGraph(std::vector<Point> vertices, std::vector<Edge> edges,
                               std::string name)
    : vertices_(std::move(vertices)), edges_(std::move(edges)), name_(std::move(name)) {
  if (vertex_count() > kMaxVertices) throw std::invalid_argument("too many vertices");
  if (edge_count() > kMaxEdges) throw std::invalid_argument("too many edges for a 32-bit subset");
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    const Edge& e = edges_[i];
    if (e.u == e.v || e.u >= vertices_.size() || e.v >= vertices_.size())
      throw std::invalid_argument("malformed edge");
    for (std::size_t j = 0; j < i; ++j) {
      const Edge& f = edges_[j];
      if ((f.u == e.u && f.v == e.v) || (f.u == e.v && f.v == e.u))
        throw std::invalid_argument("duplicate edge");
    }
  }
  touching_.resize(edges_.size());
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    std::uint32_t m = 0;
    for (std::size_t j = 0; j < edges_.size(); ++j) {
      const Edge& a = edges_[i];
      const Edge& b = edges_[j];
      if (a.u == b.u || a.u == b.v || a.v == b.u || a.v == b.v) m |= std::uint32_t{1} << j;
    }
    touching_[i] = EdgeSubset(m);
  }
}

int SmallGridGraph::vertex_index(const Point& p) const {
  auto it = std::find(vertices_.begin(), vertices_.end(), p);
  return it == vertices_.end() ? -1 : static_cast<int>(it - vertices_.begin());
}

int SmallGridGraph::edge_index(const Point& a, const Point& b) const {
  int ia = vertex_index(a);
  int ib = vertex_index(b);
  if (ia < 0 || ib < 0) return -1;
  for (int e = 0; e < edge_count(); ++e) {
    const Edge& ed = edges_[static_cast<std::size_t>(e)];
    if ((ed.u == ia && ed.v == ib) || (ed.u == ib && ed.v == ia)) return e;
  }
  return -1;
}

EdgeSubset SmallGridGraph::all_edges() const {
  if (edge_count() == 32) return EdgeSubset(0xFFFFFFFFu);
  return EdgeSubset((std::uint32_t{1} << edge_count()) - 1);
}

EdgeSubset SmallGridGraph::isolated_edges(EdgeSubset s) const {
  std::uint32_t out = 0;
  for (std::uint32_t m = s.mask(); m != 0; m &= m - 1) {
    int e = std::countr_zero(m);
    if ((touching_[static_cast<std::size_t>(e)].mask() & s.mask()) == (std::uint32_t{1} << e))
      out |= std::uint32_t{1} << e;
  }
  return EdgeSubset(out);
}

int SmallGridGraph::degree(int v) const {
  int d = 0;
  for (const Edge& e : edges_) d += (e.u == v) + (e.v == v);
  return d;
}

std::uint32_t SmallGridGraph::vertex_mask(std::span<const Point> points) const {
  std::uint32_t m = 0;
  for (const Point& p : points) {
    int i = vertex_index(p);
    if (i < 0) throw std::invalid_argument("point not in graph");
    m |= std::uint32_t{1} << i;
  }
  return m;
}

namespace {

// Builds the graph with the canonical vertex and edge order from an unordered
// point set and an adjacency predicate.
template <class Adjacent, class Label>
SmallGridGraph make_graph(std::vector<Point> pts, Adjacent adjacent, Label label, std::string name) {
  std::sort(pts.begin(), pts.end());
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      if (adjacent(pts[i], pts[j]))
        edges.push_back(Edge{static_cast<std::uint8_t>(i), static_cast<std::uint8_t>(j),
                             label(pts[i], pts[j])});
  // Vertices are sorted, so (u, v) with u < v orders edges lexicographically
  // on (min endpoint, max endpoint) coordinates.
  std::sort(edges.begin(), edges.end(),
            [](const Edge& a, const Edge& b) { return a.u != b.u ? a.u < b.u : a.v < b.v; });
  return SmallGridGraph(std::move(pts), std::move(edges), std::move(name));
}

int l1(const Point& a, const Point& b) {
  int d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(a[i] - b[i]);
  return d;
}

}  // namespace

SmallGridGraph build_hypercube(int k) {
  if (k < 1 || k > 4) throw std::invalid_argument("hypercube dimension must be in [1, 4]");
  std::vector<Point> pts;
  for (int m = 0; m < (1 << k); ++m) {
    Point p(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) p[static_cast<std::size_t>(i)] = (m >> (k - 1 - i)) & 1;
    pts.push_back(std::move(p));
  }
  return make_graph(
      std::move(pts), [](const Point& a, const Point& b) { return l1(a, b) == 1; },
      [](const Point&, const Point&) { return EdgeLabel::plain; }, "Q" + std::to_string(k));
}

SmallGridGraph build_rectangle_4x2() {
  std::vector<Point> pts;
  for (int x = 0; x < 4; ++x)
    for (int y = 0; y < 2; ++y) pts.push_back({x, y});
  return make_graph(
      std::move(pts), [](const Point& a, const Point& b) { return l1(a, b) == 1; },
      [](const Point& a, const Point& b) {
        return (a[0] / 2 == b[0] / 2) ? EdgeLabel::intra_square : EdgeLabel::cross_square;
      },
      "R4x2");
}

std::array<std::uint8_t, SmallGridGraph::kMaxVertices> component_labels(const SmallGridGraph& g,
                                                                         EdgeSubset s) {
  std::array<std::uint8_t, SmallGridGraph::kMaxVertices> parent{};
  std::iota(parent.begin(), parent.end(), std::uint8_t{0});
  auto find = [&](std::uint8_t v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  for (std::uint32_t m = s.mask(); m != 0; m &= m - 1) {
    const Edge& e = g.edge(std::countr_zero(m));
    std::uint8_t a = find(e.u);
    std::uint8_t b = find(e.v);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  for (int v = 0; v < g.vertex_count(); ++v) parent[static_cast<std::size_t>(v)] = find(static_cast<std::uint8_t>(v));
  return parent;
}

bool is_connected_spanning(const SmallGridGraph& g, EdgeSubset s) {
  if (g.vertex_count() <= 1) return true;
  if (s.size() < g.vertex_count() - 1) return false;
  auto lab = component_labels(g, s);
  for (int v = 0; v < g.vertex_count(); ++v)
    if (lab[static_cast<std::size_t>(v)] != 0) return false;
  return true;
}

namespace {

void require_rectangle(const SmallGridGraph& g) {
  if (g.vertex_count() != 8 || g.edge_count() != 10 || g.vertices()[0].size() != 2)
    throw std::invalid_argument("operation requires the 4x2 rectangle");
}

// Bitmask of vertices of component `label`.
std::uint32_t component_mask(const std::array<std::uint8_t, SmallGridGraph::kMaxVertices>& lab,
                             int n, std::uint8_t label) {
  std::uint32_t m = 0;
  for (int v = 0; v < n; ++v)
    if (lab[static_cast<std::size_t>(v)] == label) m |= std::uint32_t{1} << v;
  return m;
}

}  // namespace

std::uint32_t square_minus_corner(const SmallGridGraph& rect, int square, int r, int s) {
  require_rectangle(rect);
  std::uint32_t m = 0;
  for (int dx = 0; dx < 2; ++dx)
    for (int dy = 0; dy < 2; ++dy)
      if (dx != r || dy != s) m |= std::uint32_t{1} << rect.vertex_index({2 * square + dx, dy});
  return m;
}

std::array<TargetPair, 4> config_target_pairs(const SmallGridGraph& rect) {
  return {TargetPair{square_minus_corner(rect, 0, 0, 1), square_minus_corner(rect, 1, 1, 1)},
          TargetPair{square_minus_corner(rect, 0, 1, 0), square_minus_corner(rect, 1, 1, 1)},
          TargetPair{square_minus_corner(rect, 0, 0, 1), square_minus_corner(rect, 1, 0, 0)},
          TargetPair{square_minus_corner(rect, 0, 1, 0), square_minus_corner(rect, 1, 0, 0)}};
}

void validate_target_pair(const SmallGridGraph& rect, const TargetPair& tp) {
  require_rectangle(rect);
  std::uint32_t left_sq = 0;
  std::uint32_t right_sq = 0;
  for (int v = 0; v < 8; ++v)
    (rect.vertices()[static_cast<std::size_t>(v)][0] < 2 ? left_sq : right_sq) |= std::uint32_t{1} << v;
  if (std::popcount(tp.left) != 3 || std::popcount(tp.right) != 3)
    throw std::invalid_argument("target sets must have three vertices");
  if ((tp.left & ~left_sq) != 0 || (tp.right & ~right_sq) != 0)
    throw std::invalid_argument("target sets must lie in their own square");
}

bool good_pair_event(const SmallGridGraph& rect, EdgeSubset s, const TargetPair& tp) {
  auto lab = component_labels(rect, s);
  std::uint32_t seen = 0;
  for (std::uint32_t m = tp.left; m != 0; m &= m - 1) {
    std::uint8_t l = lab[static_cast<std::size_t>(std::countr_zero(m))];
    if (seen & (std::uint32_t{1} << l)) continue;
    seen |= std::uint32_t{1} << l;
    std::uint32_t comp = component_mask(lab, rect.vertex_count(), l);
    if (std::popcount(comp & tp.left) >= 2 && std::popcount(comp & tp.right) >= 2) return true;
  }
  return false;
}

bool three_of_four_event(const SmallGridGraph& rect, EdgeSubset s) {
  require_rectangle(rect);
  auto lab = component_labels(rect, s);
  std::uint32_t left_sq = 0;
  for (int v = 0; v < 8; ++v)
    if (rect.vertices()[static_cast<std::size_t>(v)][0] < 2) left_sq |= std::uint32_t{1} << v;
  std::uint32_t right_sq = 0xFFu & ~left_sq;
  for (int v = 0; v < 8; ++v) {
    std::uint32_t comp = component_mask(lab, 8, lab[static_cast<std::size_t>(v)]);
    if (std::popcount(comp & left_sq) >= 3 && std::popcount(comp & right_sq) >= 3) return true;
  }
  return false;
}

std::array<EdgeSubset, 10> ten_closed_patterns(const SmallGridGraph& rect) {
  require_rectangle(rect);
  auto e = [&](int x0, int y0, int x1, int y1) { return rect.edge_index({x0, y0}, {x1, y1}); };
  auto vert = [&](int x) { return e(x, 0, x, 1); };
  auto bottom = [&](int x) { return e(x, 0, x + 1, 0); };
  auto top = [&](int x) { return e(x, 1, x + 1, 1); };
  return {EdgeSubset::of({vert(0), vert(1)}),     EdgeSubset::of({vert(1), vert(2)}),
          EdgeSubset::of({vert(2), vert(3)}),     EdgeSubset::of({bottom(0), top(0)}),
          EdgeSubset::of({bottom(1), top(1)}),    EdgeSubset::of({bottom(2), top(2)}),
          EdgeSubset::of({bottom(0), top(1)}),    EdgeSubset::of({bottom(2), top(1)}),
          EdgeSubset::of({bottom(1), top(0)}),    EdgeSubset::of({bottom(1), top(2)})};
}

bool verify_ten_pattern_cover() {
  const SmallGridGraph rect = build_rectangle_4x2();
  const auto patterns = ten_closed_patterns(rect);
  const std::uint32_t n = std::uint32_t{1} << rect.edge_count();
  for (std::uint32_t m = 0; m < n; ++m) {
    EdgeSubset s(m);
    if (three_of_four_event(rect, s)) continue;
    bool covered = std::any_of(patterns.begin(), patterns.end(),
                               [&](EdgeSubset p) { return p.disjoint_from(s); });
    if (!covered) return false;
  }
  return true;
}

std::uint32_t reflect_vertices_horizontally(const SmallGridGraph& rect, std::uint32_t vmask) {
  require_rectangle(rect);
  std::uint32_t out = 0;
  for (std::uint32_t m = vmask; m != 0; m &= m - 1) {
    const Point& p = rect.vertices()[static_cast<std::size_t>(std::countr_zero(m))];
    out |= std::uint32_t{1} << rect.vertex_index({3 - p[0], p[1]});
  }
  return out;
}

EdgeSubset reflect_horizontally(const SmallGridGraph& rect, EdgeSubset s) {
  require_rectangle(rect);
  std::uint32_t out = 0;
  for (std::uint32_t m = s.mask(); m != 0; m &= m - 1) {
    const Edge& e = rect.edge(std::countr_zero(m));
    const Point& a = rect.vertices()[e.u];
    const Point& b = rect.vertices()[e.v];
    out |= std::uint32_t{1} << rect.edge_index({3 - a[0], a[1]}, {3 - b[0], b[1]});
  }
  return EdgeSubset(out);
}

EnumerationFixture enumerate_fixture(const SmallGridGraph& g) {
  if (g.edge_count() > 24) throw std::invalid_argument("enumeration fixture limited to 24 edges");
  EnumerationFixture f;
  f.graph = g.name();
  f.edge_count = g.edge_count();
  f.subsets = std::uint64_t{1} << g.edge_count();
  const bool is_rect = g.name() == "R4x2";
  std::array<TargetPair, 4> pairs{};
  if (is_rect) pairs = config_target_pairs(g);
  for (std::uint64_t m = 0; m < f.subsets; ++m) {
    EdgeSubset s(static_cast<std::uint32_t>(m));
    f.connected_spanning += is_connected_spanning(g, s);
    if (is_rect) {
      for (std::size_t i = 0; i < 4; ++i) f.good_pair[i] += good_pair_event(g, s, pairs[i]);
      f.three_of_four += three_of_four_event(g, s);
    }
  }
  return f;
}

}  // namespace oneperc
