#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>

#include <Eigen/Dense>

#include "oneperc/lp.hpp"

namespace oneperc {

const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
  }
  return "unknown";
}

void LinearProgramSpec::validate() const {
  if (objective.size() != n_vars) throw std::invalid_argument("objective length != n_vars");
  for (double c : objective)
    if (!std::isfinite(c)) throw std::invalid_argument("non-finite objective coefficient");
  for (const auto& row : constraints) {
    if (row.index.size() != row.coeff.size()) throw std::invalid_argument("ragged constraint row");
    if (!std::isfinite(row.rhs)) throw std::invalid_argument("non-finite right-hand side");
    for (std::size_t k = 0; k < row.index.size(); ++k) {
      if (row.index[k] >= n_vars) throw std::invalid_argument("constraint index out of range");
      if (!std::isfinite(row.coeff[k])) throw std::invalid_argument("non-finite constraint coefficient");
    }
  }
}

std::size_t LinearProgramSpec::nonzeros() const {
  std::size_t nz = 0;
  for (const auto& row : constraints) nz += row.index.size();
  return nz;
}

namespace {

constexpr int kArtificial = -1;

class Tableau {
 public:
  Tableau(const LinearProgramSpec& lp, const SimplexOptions& opts)
      : lp_(lp), opts_(opts), m_(lp.constraints.size()), n_(lp.n_vars),
        a_(m_ * n_, 0.0), rhs_(m_), sign_(m_, 1.0), head_(m_, kArtificial),
        active_(m_, true), basic_(n_, false), d_(n_, 0.0), w_(n_, 1.0),
        shifted_rhs_(m_, 0.0) {
    // Solve first against b + t*A*x0 for a fixed positive x0: the shifted
    // problem is feasible whenever the original is, and its vertices are
    // almost surely nondegenerate.
    std::vector<double> shift(m_, 0.0);
    if (opts_.perturbation > 0.0) {
      std::mt19937_64 rng(0x9e3779b97f4a7c15ULL);
      std::uniform_real_distribution<double> unif(1.0, 2.0);
      std::vector<double> x0(n_);
      for (double& v : x0) v = unif(rng);
      double bmax = 1.0;
      double smax = 0.0;
      for (std::size_t i = 0; i < m_; ++i) {
        const auto& row = lp.constraints[i];
        for (std::size_t k = 0; k < row.index.size(); ++k) shift[i] += row.coeff[k] * x0[row.index[k]];
        bmax = std::max(bmax, std::abs(row.rhs));
        smax = std::max(smax, std::abs(shift[i]));
      }
      const double t = smax > 0.0 ? opts_.perturbation * bmax / smax : 0.0;
      rhs_scale_ = bmax;
      for (double& v : shift) v *= t;
    }
    for (std::size_t i = 0; i < m_; ++i) {
      const auto& row = lp.constraints[i];
      const double b = row.rhs + shift[i];
      sign_[i] = b < 0 ? -1.0 : 1.0;
      rhs_[i] = sign_[i] * b;
      shifted_rhs_[i] = rhs_[i];
      double* r = &a_[i * n_];
      for (std::size_t k = 0; k < row.index.size(); ++k) r[row.index[k]] += sign_[i] * row.coeff[k];
    }
  }

  LpOutcome solve() {
    LpOutcome out;
    out.pivots = 0;
    drop_dependent_rows();
    phase_one();
    double infeas = 0.0;
    const double scale = std::max(1.0, rhs_abs_max_);
    for (std::size_t i = 0; i < m_; ++i)
      if (active_[i] && head_[i] == kArtificial) infeas += rhs_[i];
    // Residues at the perturbation scale are left to the dual-simplex
    // cleanup, which decides infeasibility against the true data.
    if (infeas > std::max(1e-6, 10.0 * opts_.perturbation) * scale) {
      out.status = LpStatus::infeasible;
      out.pivots = pivots_;
      return out;
    }
    drive_out_artificials();
    if (!phase_two(true)) {
      out.status = LpStatus::unbounded;
      out.pivots = pivots_;
      return out;
    }

    // Back to the true right-hand side: the basis stays dual feasible, so
    // dual simplex pivots restore primal feasibility. If refactorisation
    // then shows negative reduced costs, shift the working right-hand side
    // again (still a feasible shift of b) and continue primal pivots.
    std::mt19937_64 rng(0x243f6a8885a308d3ULL);
    std::uniform_real_distribution<double> unif(1.0, 2.0);
    for (int round = 0;; ++round) {
      rebuild_from_basis();
      set_phase_two_costs();
      if (!dual_iterate()) {
        out.status = LpStatus::infeasible;
        out.pivots = pivots_;
        return out;
      }
      if (refactor_and_check()) break;
      if (round >= 8) throw std::runtime_error("simplex: refactorised basis not optimal after refinement");
      for (std::size_t i = 0; i < m_; ++i)
        if (active_[i]) rhs_[i] += opts_.perturbation * rhs_scale_ * unif(rng);
      if (!phase_two()) {
        out.status = LpStatus::unbounded;
        out.pivots = pivots_;
        return out;
      }
    }

    if (inconsistent_) {
      out.status = LpStatus::infeasible;
      out.pivots = pivots_;
      return out;
    }
    out.status = LpStatus::optimal;
    out.primal = x_;
    out.dual = y_;
    out.objective_value = 0.0;
    for (std::size_t j = 0; j < n_; ++j) out.objective_value += lp_.objective[j] * x_[j];
    out.pivots = pivots_;
    return out;
  }

 private:
  double* row(std::size_t i) { return &a_[i * n_]; }

  void pivot(std::size_t r, std::size_t j) {
    double* pr = row(r);
    const double inv = 1.0 / pr[j];
    nz_.clear();
    for (std::size_t k = 0; k < n_; ++k) {
      if (pr[k] == 0.0) continue;
      pr[k] *= inv;
      nz_.push_back(static_cast<std::uint32_t>(k));
    }
    pr[j] = 1.0;
    rhs_[r] *= inv;
    const bool sparse = nz_.size() * 3 < n_;
    auto eliminate = [&](double* target, double f) {
      if (sparse) {
        for (std::uint32_t k : nz_) target[k] -= f * pr[k];
      } else {
        for (std::size_t k = 0; k < n_; ++k) target[k] -= f * pr[k];
      }
      target[j] = 0.0;
    };
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r || !active_[i]) continue;
      double* pi = row(i);
      const double f = pi[j];
      if (f == 0.0) continue;
      eliminate(pi, f);
      rhs_[i] -= f * rhs_[r];
      if (rhs_[i] < 0.0 && rhs_[i] > -opts_.feasibility_tol) rhs_[i] = 0.0;
    }
    const double f = d_[j];
    if (f != 0.0) {
      eliminate(d_.data(), f);
      objective_ -= f * rhs_[r];
    }
    if (head_[r] != kArtificial) basic_[static_cast<std::size_t>(head_[r])] = false;
    head_[r] = static_cast<int>(j);
    basic_[j] = true;
    ++pivots_;
    if (pivots_ > opts_.max_pivots) throw std::runtime_error("simplex: pivot limit exceeded");
  }

  // Entering column: Devex (largest d_j^2 / w_j), or Bland's smallest
  // index while stalled.
  std::ptrdiff_t choose_entering(bool bland) const {
    std::ptrdiff_t best = -1;
    double best_score = 0.0;
    std::ptrdiff_t steepest = -1;
    for (std::size_t j = 0; j < n_; ++j) {
      if (basic_[j] || d_[j] >= -opts_.optimality_tol) continue;
      if (bland) return static_cast<std::ptrdiff_t>(j);
      if (steepest < 0 || d_[j] < d_[static_cast<std::size_t>(steepest)]) steepest = static_cast<std::ptrdiff_t>(j);
      const double score = d_[j] * d_[j] / w_[j];
      if (score > best_score) {
        best_score = score;
        best = static_cast<std::ptrdiff_t>(j);
      }
    }
    return best >= 0 ? best : steepest;
  }

  void update_devex(std::size_t r, std::size_t q) {
    const double* pr = row(r);
    const double aq = pr[q];
    const double wq = w_[q];
    for (std::size_t j = 0; j < n_; ++j) {
      if (basic_[j] || j == q || pr[j] == 0.0) continue;
      const double ratio = pr[j] / aq;
      w_[j] = std::max(w_[j], ratio * ratio * wq);
    }
    if (head_[r] != kArtificial) {
      const auto out = static_cast<std::size_t>(head_[r]);
      w_[out] = std::max(wq / (aq * aq), 1.0);
    }
    // Reset the reference framework before the weights lose meaning.
    if (*std::max_element(w_.begin(), w_.end()) > 1e12) std::fill(w_.begin(), w_.end(), 1.0);
  }

  // Harris two-pass ratio test: bound the step with every row relaxed by
  // the feasibility tolerance, then take the largest pivot within it.
  std::ptrdiff_t choose_leaving(std::size_t j, bool bland) const {
    double cap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m_; ++i) {
      if (!active_[i]) continue;
      const double aij = a_[i * n_ + j];
      if (aij <= opts_.pivot_tol) continue;
      cap = std::min(cap, (std::max(rhs_[i], 0.0) + opts_.feasibility_tol) / aij);
    }
    std::ptrdiff_t best = -1;
    double best_piv = 0.0;
    for (std::size_t i = 0; i < m_; ++i) {
      if (!active_[i]) continue;
      const double aij = a_[i * n_ + j];
      if (aij <= opts_.pivot_tol) continue;
      if (std::max(rhs_[i], 0.0) / aij > cap) continue;
      bool take = best < 0;
      if (!take) {
        const bool art_i = head_[i] == kArtificial;
        const bool art_b = head_[static_cast<std::size_t>(best)] == kArtificial;
        if (art_i != art_b)
          take = art_i;
        else if (bland)
          take = head_[i] < head_[static_cast<std::size_t>(best)];
        else
          take = aij > best_piv;
      }
      if (take) {
        best = static_cast<std::ptrdiff_t>(i);
        best_piv = aij;
      }
    }
    return best;
  }

  // Returns false on unboundedness.
  // `refactor` periodically rebuilds the tableau from the basis against the
  // shifted right-hand side.
  bool iterate(bool refactor = false) {
    std::fill(w_.begin(), w_.end(), 1.0);
    std::size_t stalled = 0;
    double last = objective_;
    std::size_t since = 0;
    for (;;) {
      if (refactor && opts_.refactor_period > 0 && ++since > refactor_period()) {
        since = 0;
        rebuild_from_basis(true);
        set_costs();
        last = objective_;
      }
      const bool bland = stalled >= opts_.stall_limit;
      const std::ptrdiff_t j = choose_entering(bland);
      if (j < 0) return true;
      const std::ptrdiff_t r = choose_leaving(static_cast<std::size_t>(j), bland);
      if (r < 0) return false;
      update_devex(static_cast<std::size_t>(r), static_cast<std::size_t>(j));
      pivot(static_cast<std::size_t>(r), static_cast<std::size_t>(j));
      // objective_ tracks -(current objective value)
      if (objective_ > last + 1e-13 * (1.0 + std::abs(last))) {
        stalled = 0;
        last = objective_;
      } else {
        ++stalled;
      }
    }
  }

  void phase_one() {
    rhs_abs_max_ = 0.0;
    for (double v : rhs_) rhs_abs_max_ = std::max(rhs_abs_max_, v);
    phase_one_ = true;
    set_costs();
    if (!iterate(true)) throw std::runtime_error("simplex: phase one reported unbounded");
    // Resume once from a fresh factorisation, so leftover artificials are
    // judged on an undrifted tableau.
    rebuild_from_basis(true);
    set_costs();
    if (!iterate(true)) throw std::runtime_error("simplex: phase one reported unbounded");
    rebuild_from_basis(true);
    phase_one_ = false;
  }

  void set_costs() { phase_one_ ? set_phase_one_costs() : set_phase_two_costs(); }

  void set_phase_one_costs() {
    std::fill(d_.begin(), d_.end(), 0.0);
    objective_ = 0.0;
    for (std::size_t i = 0; i < m_; ++i) {
      if (!active_[i] || head_[i] != kArtificial) continue;
      const double* r = &a_[i * n_];
      for (std::size_t k = 0; k < n_; ++k) d_[k] -= r[k];
      objective_ -= rhs_[i];
    }
    for (std::size_t k = 0; k < n_; ++k)
      if (basic_[k]) d_[k] = 0.0;
  }

  // Linearly dependent rows are decided on the original data with a
  // rank-revealing QR; left in, they end up as near-singular pivots once
  // the tableau has drifted. The final check still tests them.
  void drop_dependent_rows() {
    Eigen::MatrixXd at = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(m_));
    for (std::size_t i = 0; i < m_; ++i) {
      const auto& row = lp_.constraints[i];
      double s = 0.0;
      for (double c : row.coeff) s = std::max(s, std::abs(c));
      if (s == 0.0) continue;
      for (std::size_t k = 0; k < row.index.size(); ++k)
        at(static_cast<Eigen::Index>(row.index[k]), static_cast<Eigen::Index>(i)) += row.coeff[k] / s;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(at);
    qr.setThreshold(1e-9);
    const auto rank = qr.rank();
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index t = rank; t < perm.size(); ++t) active_[static_cast<std::size_t>(perm(t))] = false;
  }

  void drive_out_artificials() {
    for (std::size_t i = 0; i < m_; ++i) {
      if (!active_[i] || head_[i] != kArtificial) continue;
      const double* r = row(i);
      std::size_t best = n_;
      double best_abs = 1e-9;
      for (std::size_t k = 0; k < n_; ++k) {
        if (basic_[k]) continue;
        if (std::abs(r[k]) > best_abs) {
          best_abs = std::abs(r[k]);
          best = k;
        }
      }
      if (best == n_) {
        active_[i] = false;  // redundant row
      } else {
        rhs_[i] = 0.0;
        pivot(i, best);
      }
    }
  }

  void set_phase_two_costs() {
    for (std::size_t k = 0; k < n_; ++k) d_[k] = lp_.objective[k];
    objective_ = 0.0;
    for (std::size_t i = 0; i < m_; ++i) {
      if (!active_[i]) continue;
      const double cb = lp_.objective[static_cast<std::size_t>(head_[i])];
      if (cb == 0.0) continue;
      const double* r = &a_[i * n_];
      for (std::size_t k = 0; k < n_; ++k) d_[k] -= cb * r[k];
      objective_ -= cb * rhs_[i];
    }
    for (std::size_t k = 0; k < n_; ++k)
      if (basic_[k]) d_[k] = 0.0;
  }

  bool phase_two(bool refactor = false) {
    set_phase_two_costs();
    return iterate(refactor);
  }

  // Dual simplex on a dual-feasible tableau; false when the row with the
  // violated right-hand side proves primal infeasibility.
  // Dual simplex on the true right-hand side with a Harris two-pass ratio
  // test: pass one bounds the step with reduced costs relaxed by the
  // optimality tolerance, pass two takes the largest pivot within it.
  bool dual_iterate() {
    std::size_t since = 0;
    for (;;) {
      if (opts_.refactor_period > 0 && ++since > refactor_period()) {
        since = 0;
        rebuild_from_basis();
        set_phase_two_costs();
      }
      std::ptrdiff_t r = -1;
      double worst = -opts_.feasibility_tol;
      for (std::size_t i = 0; i < m_; ++i)
        if (active_[i] && rhs_[i] < worst) {
          worst = rhs_[i];
          r = static_cast<std::ptrdiff_t>(i);
        }
      if (r < 0) return true;
      const double* pr = row(static_cast<std::size_t>(r));
      double bound = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < n_; ++j) {
        if (basic_[j] || pr[j] >= -opts_.pivot_tol) continue;
        bound = std::min(bound, (std::max(d_[j], 0.0) + opts_.optimality_tol) / -pr[j]);
      }
      if (!std::isfinite(bound)) return false;
      std::ptrdiff_t best = -1;
      double best_piv = 0.0;
      for (std::size_t j = 0; j < n_; ++j) {
        if (basic_[j] || pr[j] >= -opts_.pivot_tol) continue;
        if (std::max(d_[j], 0.0) / -pr[j] <= bound && -pr[j] > best_piv) {
          best = static_cast<std::ptrdiff_t>(j);
          best_piv = -pr[j];
        }
      }
      const auto q = static_cast<std::size_t>(best);
      // The step may push a reduced cost slightly negative; the final
      // refactorisation decides optimality against the true costs.
      if (d_[q] < 0.0) d_[q] = 0.0;
      pivot(static_cast<std::size_t>(r), q);
    }
  }

  // A rebuild costs about as much as one pivot per row, so large programs
  // refactorise less often.
  std::size_t refactor_period() const { return std::max(opts_.refactor_period, 3 * m_); }

  std::vector<std::size_t> active_rows() const {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < m_; ++i)
      if (active_[i]) rows.push_back(i);
    return rows;
  }

  Eigen::MatrixXd basis_matrix(const std::vector<std::size_t>& rows) const {
    const auto k = static_cast<Eigen::Index>(rows.size());
    std::vector<std::ptrdiff_t> pos(m_, -1);
    for (std::size_t t = 0; t < rows.size(); ++t) pos[rows[t]] = static_cast<std::ptrdiff_t>(t);
    std::vector<std::ptrdiff_t> colpos(n_, -1);
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(k, k);
    for (std::size_t t = 0; t < rows.size(); ++t) {
      const auto ti = static_cast<Eigen::Index>(t);
      if (head_[rows[t]] == kArtificial)
        b(ti, ti) = 1.0;  // a row's own artificial is the unit column
      else
        colpos[static_cast<std::size_t>(head_[rows[t]])] = static_cast<std::ptrdiff_t>(t);
    }
    for (std::size_t i = 0; i < m_; ++i) {
      if (pos[i] < 0) continue;
      const auto& row = lp_.constraints[i];
      for (std::size_t t = 0; t < row.index.size(); ++t) {
        const std::ptrdiff_t c = colpos[row.index[t]];
        if (c >= 0) b(pos[i], c) += sign_[i] * row.coeff[t];
      }
    }
    return b;
  }

  // Recomputes x_B and y from the original data; true when the basis is
  // primal feasible and dual feasible to tolerance.
  bool refactor_and_check() {
    const auto rows = active_rows();
    const auto k = static_cast<Eigen::Index>(rows.size());
    const Eigen::MatrixXd b = basis_matrix(rows);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(b);
    Eigen::VectorXd rhs(k), cb(k);
    for (Eigen::Index t = 0; t < k; ++t) {
      const std::size_t i = rows[static_cast<std::size_t>(t)];
      rhs(t) = sign_[i] * lp_.constraints[i].rhs;
      cb(t) = lp_.objective[static_cast<std::size_t>(head_[i])];
    }
    const Eigen::VectorXd xb = lu.solve(rhs);
    const Eigen::VectorXd yb = lu.transpose().solve(cb);
    if (!xb.allFinite() || !yb.allFinite()) throw std::runtime_error("simplex: singular final basis");
    const double resid = (b * xb - rhs).lpNorm<Eigen::Infinity>();
    if (resid > 1e-7) throw std::runtime_error("simplex: inaccurate basis solve");

    x_.assign(n_, 0.0);
    bool feasible = true;
    for (Eigen::Index t = 0; t < k; ++t) {
      double v = xb(t);
      if (v < -opts_.feasibility_tol) feasible = false;
      x_[static_cast<std::size_t>(head_[rows[static_cast<std::size_t>(t)]])] = std::max(v, 0.0);
    }
    // Rows dropped as dependent must hold as well; if one does not, its
    // right-hand side contradicts the rows it depends on.
    for (std::size_t i = 0; i < m_; ++i) {
      if (active_[i]) continue;
      const auto& row = lp_.constraints[i];
      double acc = -row.rhs;
      double mag = std::abs(row.rhs);
      for (std::size_t q = 0; q < row.index.size(); ++q) {
        acc += row.coeff[q] * x_[row.index[q]];
        mag += std::abs(row.coeff[q] * x_[row.index[q]]);
      }
      if (std::abs(acc) > 1e-7 * (1.0 + mag)) {
        inconsistent_ = true;
        return true;
      }
    }
    y_.assign(m_, 0.0);
    for (Eigen::Index t = 0; t < k; ++t) {
      const std::size_t i = rows[static_cast<std::size_t>(t)];
      y_[i] = sign_[i] * yb(t);
    }
    const auto d = reduced_costs(lp_, y_);
    const double worst = *std::min_element(d.begin(), d.end());
    return feasible && worst >= -opts_.optimality_tol;
  }

  // Re-derives the tableau as B^{-1} A from the original data.
  // With `shifted`, the right-hand side is the perturbed one the solve
  // started from; small negative values are clamped, which only moves the
  // perturbation.
  void rebuild_from_basis(bool shifted = false) {
    const auto rows = active_rows();
    const auto k = static_cast<Eigen::Index>(rows.size());
    const Eigen::MatrixXd b = basis_matrix(rows);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(b);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(k, static_cast<Eigen::Index>(n_));
    Eigen::VectorXd rhs(k);
    for (Eigen::Index t = 0; t < k; ++t) {
      const std::size_t i = rows[static_cast<std::size_t>(t)];
      const auto& row = lp_.constraints[i];
      for (std::size_t q = 0; q < row.index.size(); ++q)
        a(t, static_cast<Eigen::Index>(row.index[q])) += sign_[i] * row.coeff[q];
      rhs(t) = shifted ? shifted_rhs_[i] : sign_[i] * row.rhs;
    }
    const Eigen::MatrixXd ta = lu.solve(a);
    const Eigen::VectorXd tr = lu.solve(rhs);
    for (Eigen::Index t = 0; t < k; ++t) {
      const std::size_t i = rows[static_cast<std::size_t>(t)];
      double* r = row(i);
      for (std::size_t q = 0; q < n_; ++q) r[q] = ta(t, static_cast<Eigen::Index>(q));
      rhs_[i] = shifted ? std::max(tr(t), 0.0) : tr(t);
    }
  }

  const LinearProgramSpec& lp_;
  SimplexOptions opts_;
  std::size_t m_;
  std::size_t n_;
  std::vector<double> a_;
  std::vector<double> rhs_;
  std::vector<double> sign_;
  std::vector<int> head_;
  std::vector<bool> active_;
  std::vector<bool> basic_;
  std::vector<double> d_;
  std::vector<double> w_;  // Devex reference weights
  std::vector<std::uint32_t> nz_;
  std::vector<double> shifted_rhs_;
  bool phase_one_ = false;
  bool inconsistent_ = false;
  double objective_ = 0.0;
  double rhs_abs_max_ = 0.0;
  double rhs_scale_ = 1.0;
  std::size_t pivots_ = 0;
  std::vector<double> x_;
  std::vector<double> y_;
};

}  // namespace

LpOutcome minimize(const LinearProgramSpec& lp, const SimplexOptions& opts) {
  lp.validate();
  if (lp.n_vars == 0) throw std::invalid_argument("LP without variables");
  Tableau t(lp, opts);
  return t.solve();
}

std::vector<double> reduced_costs(const LinearProgramSpec& lp, std::span<const double> dual) {
  if (dual.size() != lp.constraints.size()) throw std::invalid_argument("dual length != constraint count");
  std::vector<double> d(lp.objective);
  for (std::size_t i = 0; i < lp.constraints.size(); ++i) {
    const auto& row = lp.constraints[i];
    if (dual[i] == 0.0) continue;
    for (std::size_t k = 0; k < row.index.size(); ++k) d[row.index[k]] -= dual[i] * row.coeff[k];
  }
  return d;
}

BoundCertificate make_certificate(const LinearProgramSpec& lp, std::span<const double> dual) {
  BoundCertificate c;
  c.dual.assign(dual.begin(), dual.end());
  const auto d = reduced_costs(lp, dual);
  for (std::size_t i = 0; i < lp.constraints.size(); ++i) c.certified_bound += lp.constraints[i].rhs * dual[i];
  double worst = 0.0;
  for (double v : d) worst = std::min(worst, v);
  c.max_residual = -worst;
  return c;
}

bool verify_lower_bound(const LinearProgramSpec& lp, const BoundCertificate& cert, double tol) {
  if (cert.dual.size() != lp.constraints.size()) throw std::invalid_argument("certificate dimension mismatch");
  lp.validate();
  for (double y : cert.dual)
    if (!std::isfinite(y)) return false;
  const auto d = reduced_costs(lp, cert.dual);
  for (double v : d)
    if (v < -tol) return false;
  double by = 0.0;
  double mag = 0.0;
  for (std::size_t i = 0; i < lp.constraints.size(); ++i) {
    by += lp.constraints[i].rhs * cert.dual[i];
    mag += std::abs(lp.constraints[i].rhs * cert.dual[i]);
  }
  return std::abs(by - cert.certified_bound) <= tol * (1.0 + mag);
}

}  // namespace oneperc
