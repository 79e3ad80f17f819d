#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "oneperc/relaxation.hpp"

namespace oneperc {

// (1-p)^(2^(k-1)) * phi.
double golden_threshold(double p, int k);

// Stage values are kept as natural logs: q_i and s_i leave the range of any
// floating type after a handful of squarings.
struct CubeStage {
  int i = 0;
  long double log_q = 0.0L;
  long double log_s = 0.0L;
  long double r = 0.0L;      // q_i / s_i^2
  long double inv_r = 0.0L;  // 1 / r_i, +inf once q_i underflows to 0
};

struct CubeCascade {
  double p = 0.0;
  int k = 0;
  double P = 0.0;
  bool started = false;  // P > golden_threshold(p, k), tested in log space
  int I = -1;            // first stage with r_I < 1/19, -1 if not reached
  std::vector<CubeStage> trace;

  // Largest relative error of 1/r_{i+1} = (1/r_i - 1)^2 along the trace.
  long double identity_error() const;
  // True iff 1/r_{i+j} >= phi^2 + (2 phi)^j (1/r_i - phi^2) for every i <= i+j
  // in the trace, up to relative slack `rel_tol`.
  bool growth_holds(long double rel_tol = 1e-12L) const;
};

// 1/r_{i+1} = (1/r_i - 1)^2.
long double next_inverse_ratio(long double inv_r);

// Starts from q_k = (1-p)^(2^k), s_k = P and stops at the first r_I < 1/19
// or after max_depth stages.
CubeCascade cube_cascade(double p, int k, double P, int max_depth = 64);

struct RenormRow {
  int i = 0;
  TwoProbability tp;
  // Set on rows produced by a step; zero for the starting row.
  std::uint64_t intra_certificate = 0;
  std::uint64_t cross_certificate = 0;
  // Upper bound on P(G_i^c) at 6 decimals; negative when not computed.
  double g_complement = -1.0;
  std::uint64_t origin_certificate = 0;
};

enum class CascadeStop { reached, stalled, max_depth };
const char* to_string(CascadeStop s);

struct Z2Options {
  double theta = 0.18;
  double target = 0.8639;
  // Rows keep coming after the target until min(p, p') exceeds this, where
  // the 1 - 10 q^2 estimate takes over.
  double handoff = 0.9;
  int max_depth = 64;
};

struct Z2Result {
  std::vector<RenormRow> rows;
  bool verdict = false;
  int reached_at = -1;
  CascadeStop stop = CascadeStop::max_depth;
};

using RowCallback = std::function<void(const RenormRow&)>;

// A step that lowers both coordinates stops the run as stalled: the step map
// is monotone, so the sequence can only keep decreasing from there.
Z2Result z2_upper_iterate(const TwoProbability& start, const Z2Options& opts = {},
                          const RowCallback& on_row = {});

// 1 - 10 q^2 clamped to [0, 1].
double crude_tail(double q);

struct OriginSum {
  std::vector<RenormRow> rows;
  double finite_sum = 0.0;  // exact sum of the 6-decimal row bounds
  double q_last = 0.0;      // 1 - min(p, p') on the last row
  double tail_bound = 0.0;  // upper bound on sum_{i>=1} 10^(2^i - 1) q_last^(2^i)
  double total = 0.0;
  bool positive_probability = false;
};

OriginSum origin_sum(const TwoProbability& start, double theta = 0.18, int last_row = 13,
                     const RowCallback& on_row = {});

// CSV with columns i,p_i,p_i_prime and, when with_g is set, g_bound; 6 decimals.
void write_trace_csv(std::ostream& out, const std::vector<RenormRow>& rows, bool with_g);
std::string format_decimal6(double x);

}  // namespace oneperc
