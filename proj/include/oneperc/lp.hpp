#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace oneperc {

// sum_k coeff[k] * x[index[k]] == rhs
struct LinearConstraint {
  std::vector<std::uint32_t> index;
  std::vector<double> coeff;
  double rhs = 0.0;
};

// minimise objective . x  subject to  every constraint (equalities), x >= 0.
struct LinearProgramSpec {
  std::size_t n_vars = 0;
  std::vector<double> objective;
  std::vector<LinearConstraint> constraints;

  // Throws std::invalid_argument on size mismatches, out-of-range indices or
  // non-finite coefficients.
  void validate() const;
  std::size_t nonzeros() const;
};

enum class LpStatus { optimal, infeasible, unbounded };
const char* to_string(LpStatus s);

struct LpOutcome {
  LpStatus status = LpStatus::infeasible;
  std::vector<double> primal;
  double objective_value = 0.0;
  // One multiplier per constraint, in constraint order.
  std::vector<double> dual;
  std::size_t pivots = 0;
};

struct SimplexOptions {
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-9;
  double pivot_tol = 1e-9;
  std::size_t max_pivots = 500000;
  // Consecutive non-improving pivots before switching to Bland's rule.
  std::size_t stall_limit = 60;
  // Relative size of the anti-degeneracy shift of the right-hand side; 0
  // disables it.
  double perturbation = 1e-7;
  // Phase-two pivots between refactorisations of the tableau; 0 disables.
  std::size_t refactor_period = 1500;
};

// Dense two-phase tableau simplex. The final basis is refactorised and the
// primal/dual pair recomputed from the original data; a numerically broken
// basis raises std::runtime_error rather than returning a wrong answer.
LpOutcome minimize(const LinearProgramSpec& lp, const SimplexOptions& opts = {});

// Dual multipliers y proving  objective . x >= rhs . y  for every feasible x
// (exactly so when all reduced costs objective - A^T y are nonnegative).
struct BoundCertificate {
  std::vector<double> dual;
  double certified_bound = 0.0;  // rhs . y
  double max_residual = 0.0;     // max(0, -min reduced cost)
};

BoundCertificate make_certificate(const LinearProgramSpec& lp, std::span<const double> dual);

// True iff every reduced cost is >= -tol and certified_bound matches rhs . y.
// When it holds, every feasible x satisfies objective . x >= certified_bound -
// tol * sum(x). Throws std::invalid_argument on dimension mismatch.
bool verify_lower_bound(const LinearProgramSpec& lp, const BoundCertificate& cert, double tol);

// Reduced costs objective - A^T y in double precision.
std::vector<double> reduced_costs(const LinearProgramSpec& lp, std::span<const double> dual);

// Lower bound re-derived in exact rational arithmetic from the double data
// (every double is an exact dyadic rational). Negative reduced costs are
// charged against the total-mass row sum(x) == m when the LP has one.
struct RigorousBound {
  bool valid = false;
  double value = 0.0;              // exact bound rounded toward -infinity
  double truncated = 0.0;          // exact bound truncated down to `decimals`
  double min_reduced_cost = 0.0;   // exact, rounded toward -infinity
  int decimals = 6;
  std::string reason;
};

RigorousBound rigorous_lower_bound(const LinearProgramSpec& lp, std::span<const double> dual,
                                   int decimals = 6);

// Largest double not exceeding the decimal number `text` (e.g. "0.5847").
double decimal_floor_to_double(const std::string& text);
// floor(x * 10^decimals) / 10^decimals, computed exactly, then rounded down to a double.
double truncate_down(double x, int decimals);
// Smallest multiple of 10^-decimals that is >= x, rounded up to a double.
double round_up(double x, int decimals);

// Smallest multiple of 10^-decimals that is >= 1 - x, computed exactly.
double complement_round_up(double x, int decimals);
// The same for the decimal number `text`.
double decimal_complement_round_up(const std::string& text, int decimals);

// FNV-1a over the canonical byte image of the program.
std::uint64_t problem_hash(const LinearProgramSpec& lp);
// FNV-1a over the problem hash followed by the dual vector.
std::uint64_t certificate_hash(std::uint64_t problem, std::span<const double> dual);

}  // namespace oneperc
