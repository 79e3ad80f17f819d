#include "oneperc/relaxation.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <gmpxx.h>

namespace oneperc {

namespace {

void check_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument(std::string(what) + " must lie in [0, 1]");
}

mpq_class floor_decimal(const mpq_class& q, int decimals) {
  mpz_class scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(decimals));
  mpq_class scaled = q * scale;
  mpz_class fl;
  mpz_fdiv_q(fl.get_mpz_t(), scaled.get_num_mpz_t(), scaled.get_den_mpz_t());
  mpq_class out(fl, scale);
  out.canonicalize();
  return out;
}

double floor_to_double(const mpq_class& q) {
  double d = q.get_d();
  while (mpq_class(d) > q) d = std::nextafter(d, -INFINITY);
  return d;
}

}  // namespace

LinearProgramSpec build_relaxation_lp(const SmallGridGraph& g, std::span<const double> edge_prob,
                                      std::span<const double> objective, ConstraintFamily family) {
  const int m = g.edge_count();
  if (m > kMaxRelaxationEdges) throw std::invalid_argument("graph too large for the relaxation LP");
  if (edge_prob.size() != static_cast<std::size_t>(m)) throw std::invalid_argument("one probability per edge");
  for (double p : edge_prob) check_probability(p, "edge probability");
  const std::uint32_t n = std::uint32_t{1} << m;
  if (objective.size() != n) throw std::invalid_argument("objective must have 2^|E| entries");

  LinearProgramSpec lp;
  lp.n_vars = n;
  lp.objective.assign(objective.begin(), objective.end());

  LinearConstraint mass;
  mass.rhs = 1.0;
  mass.index.resize(n);
  mass.coeff.assign(n, 1.0);
  for (std::uint32_t u = 0; u < n; ++u) mass.index[u] = u;
  lp.constraints.push_back(std::move(mass));

  const std::uint32_t full = n - 1;
  for (std::uint32_t t = 1; t < n; ++t) {
    std::uint32_t iso = g.isolated_edges(EdgeSubset(t)).mask();
    if (family == ConstraintFamily::canonical) iso &= -iso;
    for (; iso != 0; iso &= iso - 1) {
      const int e = std::countr_zero(iso);
      const std::uint32_t ebit = std::uint32_t{1} << e;
      const std::uint32_t s = t & ~ebit;
      const double p = edge_prob[static_cast<std::size_t>(e)];
      // sum_{U >= T} x_U - p * sum_{U >= S} x_U; 1 - p is exact for p >= 1/2.
      LinearConstraint row;
      const std::uint32_t free = full & ~s;
      for (std::uint32_t sub = free;; sub = (sub - 1) & free) {
        const std::uint32_t u = s | sub;
        const double c = (u & ebit) ? 1.0 - p : -p;
        if (c != 0.0) {
          row.index.push_back(u);
          row.coeff.push_back(c);
        }
        if (sub == 0) break;
      }
      if (!row.index.empty()) lp.constraints.push_back(std::move(row));
    }
  }
  return lp;
}

std::vector<double> product_measure(const SmallGridGraph& g, std::span<const double> edge_prob) {
  const int m = g.edge_count();
  if (m > kMaxRelaxationEdges) throw std::invalid_argument("graph too large");
  if (edge_prob.size() != static_cast<std::size_t>(m)) throw std::invalid_argument("one probability per edge");
  std::vector<double> x(std::size_t{1} << m, 1.0);
  for (std::size_t u = 0; u < x.size(); ++u)
    for (int e = 0; e < m; ++e) x[u] *= ((u >> e) & 1U) ? edge_prob[e] : 1.0 - edge_prob[e];
  return x;
}

double max_constraint_residual(const LinearProgramSpec& lp, std::span<const double> x) {
  if (x.size() != lp.n_vars) throw std::invalid_argument("point has the wrong dimension");
  double worst = 0.0;
  for (const auto& row : lp.constraints) {
    long double acc = 0.0L;
    for (std::size_t k = 0; k < row.index.size(); ++k)
      acc += static_cast<long double>(row.coeff[k]) * x[row.index[k]];
    worst = std::max(worst, static_cast<double>(std::fabs(acc - row.rhs)));
  }
  return worst;
}

// Closed-form optimal dual when every edge is open almost surely: the mass
// row carries c(E) and each singleton row {e}, which reads
// -sum_{U without e} x_U = 0, gets M = max_U (c(E) - c(U)). Reduced costs are
// then c(U) - c(E) + M * |E minus U| >= 0.
std::vector<double> all_open_dual(const SmallGridGraph& g, std::span<const double> edge_prob,
                                  const LinearProgramSpec& lp, ConstraintFamily family) {
  for (double p : edge_prob)
    if (p != 1.0) return {};
  const auto full = static_cast<std::uint32_t>(lp.n_vars - 1);
  const double top = lp.objective[full];
  double m = 0.0;
  for (double c : lp.objective) m = std::max(m, top - c);
  std::vector<double> y(lp.constraints.size(), 0.0);
  y[0] = top;
  std::size_t row = 1;
  for (std::uint32_t t = 1; t <= full; ++t) {
    const int iso = g.isolated_edges(EdgeSubset(t)).size();
    const int rows = family == ConstraintFamily::canonical ? (iso > 0 ? 1 : 0) : iso;
    if (rows == 0) continue;
    if (row >= y.size()) return {};
    if (std::popcount(t) == 1) y[row] = m;
    row += static_cast<std::size_t>(rows);
  }
  if (row != y.size()) return {};
  return y;
}

LinearProgramSpec build_connectivity_lp(const SmallGridGraph& g, double p, ConstraintFamily family) {
  check_probability(p, "p");
  if (g.edge_count() > kMaxRelaxationEdges) throw std::invalid_argument("graph too large for the relaxation LP");
  const std::uint32_t n = std::uint32_t{1} << g.edge_count();
  std::vector<double> obj(n);
  for (std::uint32_t u = 0; u < n; ++u) obj[u] = is_connected_spanning(g, EdgeSubset(u)) ? 1.0 : 0.0;
  std::vector<double> probs(static_cast<std::size_t>(g.edge_count()), p);
  return build_relaxation_lp(g, probs, obj, family);
}

CertifiedBound solve_certified(const LinearProgramSpec& lp, int decimals,
                               std::span<const std::vector<double>> hints) {
  LpOutcome out = minimize(lp);
  if (out.status != LpStatus::optimal)
    throw std::runtime_error(std::string("relaxation LP not optimal: ") + to_string(out.status));
  CertifiedBound cb;
  cb.lp_optimum = out.objective_value;
  cb.pivots = out.pivots;
  // The solver's dual carries rounding noise; snapping it to a dyadic grid
  // often yields an exactly feasible dual (and e.g. a bound of exactly 1).
  // Every candidate is checked exactly, so keeping the best one is sound.
  std::vector<double> best_dual = out.dual;
  cb.rigorous = rigorous_lower_bound(lp, out.dual, decimals);
  for (int bits : {40, 30, 20, 10}) {
    std::vector<double> y(out.dual.size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::ldexp(std::nearbyint(std::ldexp(out.dual[i], bits)), -bits);
    RigorousBound rb = rigorous_lower_bound(lp, y, decimals);
    if (rb.valid && (!cb.rigorous.valid || rb.value > cb.rigorous.value)) {
      cb.rigorous = rb;
      best_dual = std::move(y);
    }
  }
  for (const auto& y : hints) {
    if (y.size() != lp.constraints.size()) continue;
    RigorousBound rb = rigorous_lower_bound(lp, y, decimals);
    if (rb.valid && (!cb.rigorous.valid || rb.value > cb.rigorous.value)) {
      cb.rigorous = rb;
      best_dual = y;
    }
  }
  if (!cb.rigorous.valid) throw std::runtime_error("dual does not certify a bound: " + cb.rigorous.reason);
  cb.certificate = make_certificate(lp, best_dual);
  cb.certificate_ok = verify_lower_bound(lp, cb.certificate, 1e-9);
  cb.value = cb.rigorous.truncated;
  cb.problem_hash = problem_hash(lp);
  cb.certificate_hash = certificate_hash(cb.problem_hash, cb.certificate.dual);
  return cb;
}

CertifiedBound min_connect_prob(const SmallGridGraph& g, double p) {
  const LinearProgramSpec lp = build_connectivity_lp(g, p);
  std::vector<double> probs(static_cast<std::size_t>(g.edge_count()), p);
  const std::vector<std::vector<double>> hints{all_open_dual(g, probs, lp, ConstraintFamily::canonical)};
  return solve_certified(lp, 6, hints);
}

Q6Chain q6_connectivity_bound(double p, int p_second_decimals) {
  if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("p must lie in (0, 1]");
  const SmallGridGraph q3 = build_hypercube(3);
  Q6Chain c;
  c.p = p;
  c.threshold = static_cast<double>(std::pow(1.0L - p, 32) * std::numbers::phi_v<long double>);
  c.first = min_connect_prob(q3, p);
  c.P0 = c.first.value;

  const mpq_class q8 = [&] {
    mpq_class one_minus = mpq_class(1) - mpq_class(p);
    mpq_class r = 1;
    for (int i = 0; i < 8; ++i) r *= one_minus;
    return r;
  }();
  const mpq_class p0(c.P0);
  if (p0 * p0 <= q8) {
    c.collapsed = true;
    return c;
  }
  mpq_class ps = mpq_class(1) - q8 / (p0 * p0);
  if (p_second_decimals >= 0) ps = floor_decimal(ps, p_second_decimals);
  c.p_second = floor_to_double(ps);
  c.second = min_connect_prob(q3, c.p_second);
  c.P1 = c.second.value;

  mpq_class prod = mpq_class(c.P1);
  for (int i = 0; i < 8; ++i) prod *= p0;
  c.P = floor_to_double(prod);
  c.passes = c.P > c.threshold;
  return c;
}

MixtureWeights MixtureWeights::intra(double theta) {
  check_probability(theta, "theta");
  return {theta, {(1 - theta) * (1 - theta), theta * (1 - theta), theta * (1 - theta), theta * theta}};
}

MixtureWeights MixtureWeights::cross(double theta) {
  check_probability(theta, "theta");
  return {theta, {theta * theta, theta * (1 - theta), theta * (1 - theta), (1 - theta) * (1 - theta)}};
}

namespace {

std::vector<double> rectangle_probs(const SmallGridGraph& rect, const TwoProbability& tp) {
  check_probability(tp.p, "p");
  check_probability(tp.p_prime, "p_prime");
  std::vector<double> probs;
  for (const Edge& e : rect.edges()) probs.push_back(e.label == EdgeLabel::cross_square ? tp.p_prime : tp.p);
  return probs;
}

void check_weights(const MixtureWeights& w) {
  double sum = 0.0;
  for (double x : w.w) {
    if (!(x >= 0.0)) throw std::invalid_argument("mixture weights must be nonnegative");
    sum += x;
  }
  if (std::fabs(sum - 1.0) > 1e-12) throw std::invalid_argument("mixture weights must sum to 1");
}

std::vector<double> weighted_objective(const SmallGridGraph& rect, const MixtureWeights& w,
                                       std::uint32_t forced) {
  const auto pairs = config_target_pairs(rect);
  std::vector<double> obj(std::size_t{1} << rect.edge_count(), 0.0);
  for (std::uint32_t u = 0; u < obj.size(); ++u)
    for (std::size_t i = 0; i < 4; ++i)
      if (good_pair_event(rect, EdgeSubset(u | forced), pairs[i])) obj[u] += w.w[i];
  return obj;
}

}  // namespace

LinearProgramSpec build_renorm_lp(const TwoProbability& tp, const MixtureWeights& weights,
                                  ConstraintFamily family) {
  check_weights(weights);
  const SmallGridGraph rect = build_rectangle_4x2();
  return build_relaxation_lp(rect, rectangle_probs(rect, tp), weighted_objective(rect, weights, 0), family);
}

LinearProgramSpec build_origin_lp(const TwoProbability& tp, const MixtureWeights& weights) {
  check_weights(weights);
  const SmallGridGraph rect = build_rectangle_4x2();
  const int m = rect.edge_index({1, 0}, {1, 1});
  return build_relaxation_lp(rect, rectangle_probs(rect, tp),
                             weighted_objective(rect, weights, std::uint32_t{1} << m));
}

namespace {

CertifiedBound solve_rectangle(const LinearProgramSpec& lp, const TwoProbability& tp) {
  const SmallGridGraph rect = build_rectangle_4x2();
  const std::vector<std::vector<double>> hints{
      all_open_dual(rect, rectangle_probs(rect, tp), lp, ConstraintFamily::canonical)};
  return solve_certified(lp, 6, hints);
}

}  // namespace

RenormStep renorm_step(const TwoProbability& tp, double theta) {
  RenormStep r;
  r.intra = solve_rectangle(build_renorm_lp(tp, MixtureWeights::intra(theta)), tp);
  r.cross = solve_rectangle(build_renorm_lp(tp, MixtureWeights::cross(theta)), tp);
  r.next = {r.intra.value, r.cross.value};
  return r;
}

OriginStep origin_step(const TwoProbability& tp, double theta) {
  OriginStep o;
  o.bound = solve_rectangle(build_origin_lp(tp, MixtureWeights::intra(theta)), tp);
  o.g_complement = complement_round_up(o.bound.rigorous.value, 6);
  return o;
}

}  // namespace oneperc
