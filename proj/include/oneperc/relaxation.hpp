#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "oneperc/grid.hpp"
#include "oneperc/lp.hpp"

namespace oneperc {

// Which equalities y_{S+e} = p_e * y_S to emit. `full` emits one row per
// (S, e) with e vertex-disjoint from S. `canonical` keeps only the row for the
// lowest-index isolated edge of each T = S+e; the others follow from it, since
// deleting an isolated edge leaves the remaining isolated edges isolated.
enum class ConstraintFamily { canonical, full };

// Variables are x_U for every edge subset U (index = mask), with y_S
// substituted by sum_{U >= S} x_U. Row 0 is the total-mass row y_empty = 1.
LinearProgramSpec build_relaxation_lp(const SmallGridGraph& g, std::span<const double> edge_prob,
                                      std::span<const double> objective,
                                      ConstraintFamily family = ConstraintFamily::canonical);

// x_U = prod_{e in U} p_e prod_{f not in U} (1 - p_f).
std::vector<double> product_measure(const SmallGridGraph& g, std::span<const double> edge_prob);

// Largest absolute residual of lp's equalities at x.
double max_constraint_residual(const LinearProgramSpec& lp, std::span<const double> x);

inline constexpr int kMaxRelaxationEdges = 12;

LinearProgramSpec build_connectivity_lp(const SmallGridGraph& g, double p,
                                        ConstraintFamily family = ConstraintFamily::canonical);

// An LP minimum together with the evidence that it is a lower bound.
struct CertifiedBound {
  double value = 0.0;        // exact dual bound truncated down at `decimals`
  double lp_optimum = 0.0;   // floating-point objective reported by the solver
  BoundCertificate certificate;
  bool certificate_ok = false;  // verify_lower_bound at 1e-9
  RigorousBound rigorous;
  std::uint64_t problem_hash = 0;
  std::uint64_t certificate_hash = 0;
  std::size_t pivots = 0;
};

// Throws std::runtime_error when the LP is not optimal or no valid bound
// could be derived from its dual. `hints` are extra dual vectors to try; the
// best exactly verified bound wins.
CertifiedBound solve_certified(const LinearProgramSpec& lp, int decimals = 6,
                               std::span<const std::vector<double>> hints = {});

CertifiedBound min_connect_prob(const SmallGridGraph& g, double p);

struct Q6Chain {
  double p = 0.0;
  double P0 = 0.0;
  double p_second = 0.0;
  double P1 = 0.0;
  double P = 0.0;
  double threshold = 0.0;
  bool passes = false;
  // P0^2 <= (1-p)^8: no second-level probability can be derived.
  bool collapsed = false;
  CertifiedBound first;
  CertifiedBound second;
};

// p_second is 1 - (1-p)^8 / P0^2 truncated down to `p_second_decimals`
// places; a negative value disables the truncation.
Q6Chain q6_connectivity_bound(double p, int p_second_decimals = 4);

struct TwoProbability {
  double p = 0.0;        // edges inside a 2x2 square
  double p_prime = 0.0;  // the two edges joining the squares
};

struct MixtureWeights {
  double theta = 0.0;
  std::array<double, 4> w{};  // over C0..C3

  static MixtureWeights intra(double theta);
  static MixtureWeights cross(double theta);
};

LinearProgramSpec build_renorm_lp(const TwoProbability& tp, const MixtureWeights& weights,
                                  ConstraintFamily family = ConstraintFamily::canonical);

// The objective counts S when S together with the middle edge (1,0)-(1,1)
// realises the weighted C_i event.
LinearProgramSpec build_origin_lp(const TwoProbability& tp, const MixtureWeights& weights);

struct RenormStep {
  TwoProbability next;
  CertifiedBound intra;
  CertifiedBound cross;
};

RenormStep renorm_step(const TwoProbability& tp, double theta);

struct OriginStep {
  double g_complement = 0.0;  // 1 - certified minimum, rounded up at 6 decimals
  CertifiedBound bound;
};

OriginStep origin_step(const TwoProbability& tp, double theta);

}  // namespace oneperc
