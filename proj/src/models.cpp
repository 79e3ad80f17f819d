#include "oneperc/models.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>
#include <unordered_map>

namespace oneperc {

namespace {

bool is_even(Site s) { return ((s.x + s.y) % 2 + 2) % 2 == 0; }

Site step(Site s, std::uint8_t dir) {
  switch (dir) {
    case kUp: return {s.x, s.y + 1};
    case kDown: return {s.x, s.y - 1};
    case kLeft: return {s.x - 1, s.y};
    case kRight: return {s.x + 1, s.y};
  }
  return s;
}

void check_neighbours(Site u, Site v) {
  if (std::abs(u.x - v.x) + std::abs(u.y - v.y) != 1) throw std::invalid_argument("sites are not lattice neighbours");
}

}  // namespace

const char* to_string(ModelKind k) {
  switch (k) {
    case ModelKind::udlra: return "udlra";
    case ModelKind::direction: return "direction";
    case ModelKind::signs: return "signs";
    case ModelKind::planted: return "planted";
  }
  return "?";
}

void ModelSpec::validate() const {
  if (!(parameter >= 0.0 && parameter <= 1.0)) throw std::invalid_argument("model parameter must lie in [0, 1]");
}

std::string ModelSpec::name() const {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s:%.17g", to_string(kind), parameter);
  return buf;
}

ModelSpec ModelSpec::parse(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw std::invalid_argument("model must be kind:parameter, got " + text);
  const std::string kind = text.substr(0, colon);
  ModelSpec spec;
  if (kind == "udlra") spec.kind = ModelKind::udlra;
  else if (kind == "direction") spec.kind = ModelKind::direction;
  else if (kind == "signs") spec.kind = ModelKind::signs;
  else if (kind == "planted") spec.kind = ModelKind::planted;
  else throw std::invalid_argument("unknown model kind: " + kind);
  const std::string num = text.substr(colon + 1);
  std::size_t used = 0;
  try {
    spec.parameter = std::stod(num, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != num.size()) throw std::invalid_argument("bad model parameter: " + num);
  spec.validate();
  return spec;
}

int site_state_count(const ModelSpec& spec, Site s) {
  switch (spec.kind) {
    case ModelKind::udlra: return is_even(s) ? 5 : 1;
    case ModelKind::direction: return 5;  // code 0 (A) has probability 0
    case ModelKind::signs:
    case ModelKind::planted: return 2;
  }
  return 1;
}

double site_state_probability(const ModelSpec& spec, Site s, int state) {
  const double t = spec.parameter;
  switch (spec.kind) {
    case ModelKind::udlra:
      if (!is_even(s)) return state == 0 ? 1.0 : 0.0;
      return state == kUdlraA ? 1.0 - t : t / 4.0;
    case ModelKind::direction:
      switch (state) {
        case kUp:
        case kRight: return t / 2.0;
        case kDown:
        case kLeft: return (1.0 - t) / 2.0;
        default: return 0.0;
      }
    case ModelKind::signs:
    case ModelKind::planted: return state == 0 ? t : 1.0 - t;
  }
  return 0.0;
}

std::uint8_t site_state_from_draw(const ModelSpec& spec, Site s, std::uint32_t draw) {
  const double u = std::ldexp(static_cast<double>(draw), -32);
  const int n = site_state_count(spec, s);
  double cum = 0.0;
  int last = 0;
  for (int k = 0; k < n; ++k) {
    const double pk = site_state_probability(spec, s, k);
    if (pk <= 0.0) continue;
    cum += pk;
    last = k;
    if (u < cum) return static_cast<std::uint8_t>(k);
  }
  return static_cast<std::uint8_t>(last);
}

std::vector<Site> edge_dependencies(const ModelSpec& spec, Site u, Site v) {
  check_neighbours(u, v);
  if (v < u) std::swap(u, v);
  switch (spec.kind) {
    case ModelKind::udlra: return {is_even(u) ? u : v};
    case ModelKind::direction:
    case ModelKind::signs: return {u, v};
    case ModelKind::planted: return {u, Site{u.x + 1, u.y + 1}};
  }
  return {};
}

bool edge_open_local(ModelKind kind, Site u, std::uint8_t su, Site v, std::uint8_t sv) {
  if (v < u) {
    std::swap(u, v);
    std::swap(su, sv);
  }
  switch (kind) {
    case ModelKind::udlra:
      if (is_even(u)) return su == kUdlraA || step(u, su) == v;
      return sv == kUdlraA || step(v, sv) == u;
    case ModelKind::direction: return su == sv || step(u, su) == v || step(v, sv) == u;
    case ModelKind::signs: return su == sv;
    case ModelKind::planted: break;
  }
  throw std::invalid_argument("model edges do not depend on the endpoints alone");
}

bool edge_open(const ModelSpec& spec, Site u, Site v, const SiteLookup& state) {
  check_neighbours(u, v);
  if (v < u) std::swap(u, v);
  if (spec.kind == ModelKind::planted) return state(u) == 0 && state(Site{u.x + 1, u.y + 1}) == 0;
  if (spec.kind == ModelKind::udlra) {
    // Odd sites carry no variable.
    const Site e = is_even(u) ? u : v;
    return edge_open_local(spec.kind, e, state(e), e == u ? v : u, 0);
  }
  return edge_open_local(spec.kind, u, state(u), v, state(v));
}

double edge_probability(const ModelSpec& spec) {
  spec.validate();
  const double t = spec.parameter;
  switch (spec.kind) {
    case ModelKind::udlra: return 1.0 - 0.75 * t;
    case ModelKind::direction: return 0.75 * (t * t - t + 1.0);
    case ModelKind::signs: return t * t + (1.0 - t) * (1.0 - t);
    case ModelKind::planted: return t * t;
  }
  return 0.0;
}

std::optional<std::pair<double, double>> theta_for_edge_prob(double target) {
  // theta^2 - theta + (1 - 4 target / 3) = 0
  const double disc = 1.0 - 4.0 * (1.0 - 4.0 * target / 3.0);
  if (!(target >= 0.5625 - 1e-15 && target <= 0.75 + 1e-15)) return std::nullopt;
  const double root = std::sqrt(std::max(0.0, disc));
  return std::make_pair((1.0 - root) / 2.0, (1.0 + root) / 2.0);
}

bool SiteRect::contains(Site s) const {
  return s.x >= x0 && s.x < x0 + width && s.y >= y0 && s.y < y0 + height;
}

std::vector<WindowEdge> window_edges(const SiteRect& rect) {
  if (rect.width < 1 || rect.height < 1) throw std::invalid_argument("empty window");
  std::vector<WindowEdge> out;
  for (int x = rect.x0; x < rect.x0 + rect.width; ++x)
    for (int y = rect.y0; y < rect.y0 + rect.height; ++y) {
      const Site u{x, y};
      if (y + 1 < rect.y0 + rect.height) out.push_back({u, {x, y + 1}});
      if (x + 1 < rect.x0 + rect.width) out.push_back({u, {x + 1, y}});
    }
  std::sort(out.begin(), out.end(), [](const WindowEdge& a, const WindowEdge& b) {
    return a.u != b.u ? a.u < b.u : a.v < b.v;
  });
  return out;
}

double WindowDistribution::total() const {
  long double t = 0.0L;
  for (const auto& [m, p] : support) t += p;
  return static_cast<double>(t);
}

double WindowDistribution::marginal(int edge) const {
  long double t = 0.0L;
  for (const auto& [m, p] : support)
    if ((m >> edge) & 1U) t += p;
  return static_cast<double>(t);
}

double WindowDistribution::probability_of(std::uint32_t mask) const {
  auto it = std::lower_bound(support.begin(), support.end(), mask,
                             [](const auto& e, std::uint32_t m) { return e.first < m; });
  return it != support.end() && it->first == mask ? it->second : 0.0;
}

namespace {

void check_window(const SiteRect& rect) {
  if (rect.width < 1 || rect.height < 1 || rect.width > kMaxWindowSide || rect.height > kMaxWindowSide)
    throw std::invalid_argument("window sides must lie in [1, 4]");
}

bool row_major_less(Site a, Site b) { return a.y != b.y ? a.y < b.y : a.x < b.x; }

struct DpKey {
  std::uint32_t mask;
  std::uint64_t live;
  friend bool operator==(const DpKey&, const DpKey&) = default;
};

struct DpKeyHash {
  std::size_t operator()(const DpKey& k) const {
    return std::hash<std::uint64_t>{}(k.live * 0x9e3779b97f4a7c15ULL ^ k.mask);
  }
};

}  // namespace

// Sites are assigned one at a time in row-major order. An edge is decided as
// soon as its last dependency is assigned; a site's state is kept in the key
// only while some undecided edge still needs it.
WindowDistribution exact_window_distribution(const ModelSpec& spec, const SiteRect& rect) {
  spec.validate();
  check_window(rect);
  WindowDistribution dist;
  dist.window = rect;
  dist.edges = window_edges(rect);

  std::vector<std::vector<Site>> deps;
  std::vector<Site> sites;
  for (const auto& e : dist.edges) {
    deps.push_back(edge_dependencies(spec, e.u, e.v));
    sites.insert(sites.end(), deps.back().begin(), deps.back().end());
  }
  std::sort(sites.begin(), sites.end(), row_major_less);
  sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
  auto pos_of = [&](Site s) {
    return static_cast<int>(std::lower_bound(sites.begin(), sites.end(), s, row_major_less) - sites.begin());
  };

  const int n = static_cast<int>(sites.size());
  std::vector<int> last_use(n, -1);
  std::vector<std::vector<int>> decided_at(n);
  for (std::size_t e = 0; e < dist.edges.size(); ++e) {
    int when = 0;
    for (Site s : deps[e]) when = std::max(when, pos_of(s));
    decided_at[when].push_back(static_cast<int>(e));
    for (Site s : deps[e]) last_use[pos_of(s)] = std::max(last_use[pos_of(s)], when);
  }

  std::unordered_map<DpKey, double, DpKeyHash> cur{{DpKey{0, 0}, 1.0}};
  std::vector<int> live;  // site positions, slot i holds bits [3i, 3i+3)
  for (int k = 0; k < n; ++k) {
    std::vector<int> with_k = live;
    with_k.push_back(k);
    std::vector<int> keep;
    for (int s : with_k)
      if (last_use[s] > k) keep.push_back(s);
    auto slot_of = [&](int pos) {
      return static_cast<int>(std::find(with_k.begin(), with_k.end(), pos) - with_k.begin());
    };

    std::unordered_map<DpKey, double, DpKeyHash> next;
    next.reserve(cur.size() * 2);
    const int nstates = site_state_count(spec, sites[k]);
    for (const auto& [key, prob] : cur) {
      for (int st = 0; st < nstates; ++st) {
        const double ps = site_state_probability(spec, sites[k], st);
        if (ps <= 0.0) continue;
        const std::uint64_t full = key.live | (static_cast<std::uint64_t>(st) << (3 * live.size()));
        auto lookup = [&](Site s) -> std::uint8_t {
          const int slot = slot_of(pos_of(s));
          return static_cast<std::uint8_t>((full >> (3 * slot)) & 7U);
        };
        std::uint32_t mask = key.mask;
        for (int e : decided_at[k])
          if (edge_open(spec, dist.edges[e].u, dist.edges[e].v, lookup)) mask |= std::uint32_t{1} << e;
        std::uint64_t packed = 0;
        for (std::size_t i = 0; i < keep.size(); ++i)
          packed |= ((full >> (3 * slot_of(keep[i]))) & 7U) << (3 * i);
        next[DpKey{mask, packed}] += prob * ps;
      }
    }
    cur = std::move(next);
    live = std::move(keep);
  }

  std::map<std::uint32_t, double> by_mask;
  for (const auto& [key, prob] : cur) by_mask[key.mask] += prob;
  for (const auto& [m, p] : by_mask)
    if (p > 0.0) dist.support.emplace_back(m, p);
  return dist;
}

bool verify_one_independence(const WindowDistribution& dist, double tol) {
  const SiteRect& r = dist.window;
  const int n = r.width * r.height;
  if (n > 16) throw std::invalid_argument("window too large for the independence check");
  auto index = [&](Site s) { return (s.y - r.y0) * r.width + (s.x - r.x0); };

  // Colourings with site 0 in class 1 cover every unordered split.
  for (std::uint32_t colour = 1; colour < (std::uint32_t{1} << n); colour += 2) {
    std::uint32_t e1 = 0, e2 = 0;
    for (std::size_t e = 0; e < dist.edges.size(); ++e) {
      const bool cu = (colour >> index(dist.edges[e].u)) & 1U;
      const bool cv = (colour >> index(dist.edges[e].v)) & 1U;
      if (cu && cv) e1 |= std::uint32_t{1} << e;
      if (!cu && !cv) e2 |= std::uint32_t{1} << e;
    }
    if (e1 == 0 || e2 == 0) continue;
    std::unordered_map<std::uint32_t, double> m1, m2;
    std::unordered_map<std::uint64_t, double> joint;
    for (const auto& [m, p] : dist.support) {
      m1[m & e1] += p;
      m2[m & e2] += p;
      joint[(static_cast<std::uint64_t>(m & e1) << 32) | (m & e2)] += p;
    }
    for (const auto& [a, pa] : m1)
      for (const auto& [b, pb] : m2) {
        auto it = joint.find((static_cast<std::uint64_t>(a) << 32) | b);
        const double pab = it == joint.end() ? 0.0 : it->second;
        if (std::fabs(pab - pa * pb) > tol) return false;
      }
  }
  return true;
}

bool verify_one_independence(const ModelSpec& spec, const SiteRect& rect, double tol) {
  return verify_one_independence(exact_window_distribution(spec, rect), tol);
}

std::vector<double> graph_subset_law(const ModelSpec& spec, const SmallGridGraph& g) {
  if (g.vertex_count() == 0) throw std::invalid_argument("empty graph");
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  for (int v = 0; v < g.vertex_count(); ++v) {
    const Point& p = g.vertices()[static_cast<std::size_t>(v)];
    if (p.size() != 2) throw std::invalid_argument("graph is not planar");
    if (v == 0 || p[0] < x0) x0 = p[0];
    if (v == 0 || p[1] < y0) y0 = p[1];
    if (v == 0 || p[0] > x1) x1 = p[0];
    if (v == 0 || p[1] > y1) y1 = p[1];
  }
  const SiteRect rect{x0, y0, x1 - x0 + 1, y1 - y0 + 1};
  if (rect.width * rect.height != g.vertex_count()) throw std::invalid_argument("graph does not fill its bounding box");
  const WindowDistribution dist = exact_window_distribution(spec, rect);
  if (static_cast<int>(dist.edges.size()) != g.edge_count()) throw std::invalid_argument("graph is not the full grid on its box");

  std::vector<int> to_graph(dist.edges.size());
  for (std::size_t e = 0; e < dist.edges.size(); ++e) {
    const int idx = g.edge_index({dist.edges[e].u.x, dist.edges[e].u.y}, {dist.edges[e].v.x, dist.edges[e].v.y});
    if (idx < 0) throw std::invalid_argument("graph is not the full grid on its box");
    to_graph[e] = idx;
  }
  std::vector<double> law(std::size_t{1} << g.edge_count(), 0.0);
  for (const auto& [m, p] : dist.support) {
    std::uint32_t gm = 0;
    for (std::size_t e = 0; e < to_graph.size(); ++e)
      if ((m >> e) & 1U) gm |= std::uint32_t{1} << to_graph[e];
    law[gm] += p;
  }
  return law;
}

double udlra_bound(double p_site) { return 1.0 - 0.75 * p_site; }

double dfh_bound(double p_site) { return p_site * p_site + 0.5 * (1.0 - p_site); }

// 1 - 3x/4 = x^2 + (1 - x)/2  <=>  x^2 + x/4 - 1/2 = 0.
LowerBoundCombination lower_bound_combination() {
  LowerBoundCombination c;
  c.x_star = (std::sqrt(33.0) - 1.0) / 8.0;
  c.value = (35.0 - 3.0 * std::sqrt(33.0)) / 32.0;
  return c;
}

std::uint32_t VectorDrawStream::next() {
  if (pos_ >= draws_.size()) throw std::out_of_range("draw stream exhausted");
  return draws_[pos_++];
}

std::uint32_t sample_window(const ModelSpec& spec, const SiteRect& rect, DrawStream& stream) {
  spec.validate();
  const auto edges = window_edges(rect);
  if (edges.size() > 32) throw std::invalid_argument("window has more than 32 edges");
  Site lo{rect.x0, rect.y0};
  Site hi{rect.x0 + rect.width - 1, rect.y0 + rect.height - 1};
  for (const auto& e : edges)
    for (Site s : edge_dependencies(spec, e.u, e.v)) {
      lo = {std::min(lo.x, s.x), std::min(lo.y, s.y)};
      hi = {std::max(hi.x, s.x), std::max(hi.y, s.y)};
    }
  const int w = hi.x - lo.x + 1;
  std::vector<std::uint8_t> states(static_cast<std::size_t>(w) * (hi.y - lo.y + 1));
  for (int y = lo.y; y <= hi.y; ++y)
    for (int x = lo.x; x <= hi.x; ++x)
      states[static_cast<std::size_t>((y - lo.y) * w + (x - lo.x))] = site_state_from_draw(spec, {x, y}, stream.next());
  auto lookup = [&](Site s) { return states[static_cast<std::size_t>((s.y - lo.y) * w + (s.x - lo.x))]; };
  std::uint32_t mask = 0;
  for (std::size_t e = 0; e < edges.size(); ++e)
    if (edge_open(spec, edges[e].u, edges[e].v, lookup)) mask |= std::uint32_t{1} << e;
  return mask;
}

std::uint32_t window_edges_from_states(const ModelSpec& spec, const SiteRect& rect,
                                       const std::vector<std::uint8_t>& states) {
  if (states.size() != static_cast<std::size_t>(rect.width) * rect.height)
    throw std::invalid_argument("one state per window site");
  const auto edges = window_edges(rect);
  if (edges.size() > 32) throw std::invalid_argument("window has more than 32 edges");
  auto lookup = [&](Site s) {
    if (!rect.contains(s)) throw std::out_of_range("edge depends on a site outside the window");
    return states[static_cast<std::size_t>((s.y - rect.y0) * rect.width + (s.x - rect.x0))];
  };
  std::uint32_t mask = 0;
  for (std::size_t e = 0; e < edges.size(); ++e)
    if (edge_open(spec, edges[e].u, edges[e].v, lookup)) mask |= std::uint32_t{1} << e;
  return mask;
}

}  // namespace oneperc
