#include "oneperc/cascades.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace oneperc {

namespace {

constexpr long double kPhi = std::numbers::phi_v<long double>;

long double log_one_minus(double p) { return std::log1p(-static_cast<long double>(p)); }

long long micro_units(double x) { return std::llround(x * 1e6); }

// Start values and certified trace values are decimals stored as doubles;
// complement the shortest decimal that reads back as x.
double decimal_complement6(double x) {
  char buf[64];
  const auto conv = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::fixed);
  return decimal_complement_round_up(std::string(buf, conv.ptr), 6);
}

}  // namespace

double golden_threshold(double p, int k) {
  if (k < 1) throw std::invalid_argument("k must be at least 1");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p must lie in [0, 1]");
  if (p == 1.0) return 0.0;
  const long double lg = std::ldexp(log_one_minus(p), k - 1) + std::log(kPhi);
  return static_cast<double>(std::exp(lg));
}

long double CubeCascade::identity_error() const {
  long double worst = 0.0L;
  for (std::size_t j = 0; j + 1 < trace.size(); ++j) {
    const long double want = next_inverse_ratio(trace[j].inv_r);
    const long double got = trace[j + 1].inv_r;
    if (std::isinf(want) && std::isinf(got)) continue;
    worst = std::max(worst, std::fabs(got - want) / want);
  }
  return worst;
}

bool CubeCascade::growth_holds(long double rel_tol) const {
  const long double phi2 = kPhi * kPhi;
  for (std::size_t a = 0; a < trace.size(); ++a) {
    const long double eps = trace[a].inv_r - phi2;
    if (!(eps > 0.0L) || std::isinf(eps)) continue;
    long double factor = 1.0L;
    for (std::size_t b = a; b < trace.size(); ++b, factor *= 2.0L * kPhi) {
      const long double bound = phi2 + factor * eps;
      if (trace[b].inv_r < bound * (1.0L - rel_tol)) return false;
    }
  }
  return true;
}

long double next_inverse_ratio(long double inv_r) { return (inv_r - 1.0L) * (inv_r - 1.0L); }

CubeCascade cube_cascade(double p, int k, double P, int max_depth) {
  if (k < 1) throw std::invalid_argument("k must be at least 1");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p must lie in [0, 1]");
  if (!(P > 0.0 && P <= 1.0)) throw std::invalid_argument("P must lie in (0, 1]");
  CubeCascade c;
  c.p = p;
  c.k = k;
  c.P = P;

  long double log_q = p == 1.0 ? -std::numeric_limits<long double>::infinity() : std::ldexp(log_one_minus(p), k);
  long double log_s = std::log(static_cast<long double>(P));
  // P > sqrt(q_k) phi, i.e. s^2 > q phi^2.
  c.started = 2.0L * log_s > log_q + 2.0L * std::log(kPhi);
  if (!c.started) return c;

  for (int i = k; i <= k + max_depth; ++i) {
    CubeStage st;
    st.i = i;
    st.log_q = log_q;
    st.log_s = log_s;
    const long double lr = log_q - 2.0L * log_s;
    st.r = std::exp(lr);
    st.inv_r = std::exp(-lr);
    c.trace.push_back(st);
    if (st.r < 1.0L / 19.0L) {
      c.I = i;
      break;
    }
    // s_{i+1} = s_i^2 - q_i = s_i^2 (1 - r_i);  q_{i+1} = q_i^2.
    log_s = 2.0L * log_s + std::log1p(-st.r);
    log_q = 2.0L * log_q;
  }
  return c;
}

const char* to_string(CascadeStop s) {
  switch (s) {
    case CascadeStop::reached: return "reached";
    case CascadeStop::stalled: return "stalled";
    case CascadeStop::max_depth: return "max_depth";
  }
  return "?";
}

Z2Result z2_upper_iterate(const TwoProbability& start, const Z2Options& opts, const RowCallback& on_row) {
  if (!(opts.target > 0.0 && opts.target < 1.0)) throw std::invalid_argument("target must lie in (0, 1)");
  if (opts.max_depth < 0) throw std::invalid_argument("max depth must be nonnegative");
  Z2Result res;
  RenormRow row;
  row.tp = start;
  res.rows.push_back(row);
  if (on_row) on_row(row);

  for (;;) {
    const RenormRow& cur = res.rows.back();
    const double lo = std::min(cur.tp.p, cur.tp.p_prime);
    if (lo >= opts.target && res.reached_at < 0) res.reached_at = cur.i;
    if (res.reached_at >= 0 && (lo > opts.handoff || lo >= 1.0)) {
      res.stop = CascadeStop::reached;
      break;
    }
    if (cur.i >= opts.max_depth) {
      res.stop = res.reached_at >= 0 ? CascadeStop::reached : CascadeStop::max_depth;
      break;
    }
    const RenormStep step = renorm_step(cur.tp, opts.theta);
    RenormRow next;
    next.i = cur.i + 1;
    next.tp = step.next;
    next.intra_certificate = step.intra.certificate_hash;
    next.cross_certificate = step.cross.certificate_hash;
    const bool down = next.tp.p <= cur.tp.p && next.tp.p_prime <= cur.tp.p_prime;
    res.rows.push_back(next);
    if (on_row) on_row(next);
    if (down && res.reached_at < 0) {
      res.stop = CascadeStop::stalled;
      break;
    }
  }
  res.verdict = res.reached_at >= 0;
  return res;
}

double crude_tail(double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("q must lie in [0, 1]");
  return std::clamp(1.0 - 10.0 * q * q, 0.0, 1.0);
}

OriginSum origin_sum(const TwoProbability& start, double theta, int last_row, const RowCallback& on_row) {
  if (last_row < 0) throw std::invalid_argument("last row must be nonnegative");
  OriginSum out;
  RenormRow row;
  row.tp = start;
  row.g_complement = decimal_complement6(start.p);  // G_0 is the single edge (0,0)-(1,0)
  out.rows.push_back(row);
  if (on_row) on_row(row);

  for (int i = 1; i <= last_row; ++i) {
    const TwoProbability prev = out.rows.back().tp;
    const RenormStep step = renorm_step(prev, theta);
    const OriginStep origin = origin_step(prev, theta);
    RenormRow next;
    next.i = i;
    next.tp = step.next;
    next.intra_certificate = step.intra.certificate_hash;
    next.cross_certificate = step.cross.certificate_hash;
    next.g_complement = origin.g_complement;
    next.origin_certificate = origin.bound.certificate_hash;
    out.rows.push_back(next);
    if (on_row) on_row(next);
  }

  long long sum = 0;
  for (const auto& r : out.rows) sum += micro_units(r.g_complement);
  out.finite_sum = static_cast<double>(sum) / 1e6;

  const TwoProbability& last = out.rows.back().tp;
  out.q_last = decimal_complement6(std::min(last.p, last.p_prime));
  // With x = 10 q the tail is sum_{i>=1} x^(2^i) / 10 <= x^2 / (10 (1 - x^2)).
  const long double x = 10.0L * out.q_last;
  if (x < 1.0L) {
    const long double bound = x * x / (10.0L * (1.0L - x * x));
    out.tail_bound = round_up(static_cast<double>(bound * (1.0L + 1e-15L)), 9);
  } else {
    out.tail_bound = std::numeric_limits<double>::infinity();
  }
  out.total = out.finite_sum + out.tail_bound;
  out.positive_probability = std::isfinite(out.tail_bound) &&
                             static_cast<long double>(sum) / 1e6L + out.tail_bound < 1.0L;
  return out;
}

std::string format_decimal6(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

void write_trace_csv(std::ostream& out, const std::vector<RenormRow>& rows, bool with_g) {
  out << (with_g ? "i,p_i,p_i_prime,g_bound\n" : "i,p_i,p_i_prime\n");
  for (const auto& r : rows) {
    out << r.i << ',' << format_decimal6(r.tp.p) << ',' << format_decimal6(r.tp.p_prime);
    if (with_g) out << ',' << format_decimal6(r.g_complement);
    out << '\n';
  }
}

}  // namespace oneperc
