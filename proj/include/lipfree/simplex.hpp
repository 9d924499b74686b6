#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lipfree/error.hpp"

/// Dense revised simplex for  min c^T x  s.t.  A x = b,  x >= 0,  with A given
/// column-wise in sparse form.
///
/// Two phases with artificial variables; rows that already own a positive unit
/// column start with that column basic. Pricing is Dantzig's rule until a run
/// of degenerate pivots is seen, after which the phase finishes under Bland's
/// rule (smallest entering index, smallest leaving index on ratio ties).
namespace lipfree::lp {

struct Entry {
  std::size_t row = 0;
  double value = 0.0;
};
using Column = std::vector<Entry>;

enum class Status { optimal, infeasible, unbounded };

struct Options {
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-10;
  double pivot_tol = 1e-10;
  std::size_t refactor_every = 64;
  std::size_t degenerate_streak = 200;
  std::size_t max_iterations = 0;  // 0: derived from problem size
};

class Problem {
 public:
  explicit Problem(std::size_t rows) : rhs_(rows, 0.0) { start_.push_back(0); }

  std::size_t rows() const { return rhs_.size(); }
  std::size_t cols() const { return costs_.size(); }

  std::size_t add_column(std::span<const Entry> column, double cost = 0.0) {
    for (const auto& e : column)
      if (e.row >= rows()) throw Error(ErrorCode::InvalidArgument, "column entry outside the row range");
    entries_.insert(entries_.end(), column.begin(), column.end());
    start_.push_back(entries_.size());
    costs_.push_back(cost);
    return costs_.size() - 1;
  }
  std::size_t add_column(std::initializer_list<Entry> column, double cost = 0.0) {
    return add_column(std::span<const Entry>(column.begin(), column.size()), cost);
  }
  void reserve(std::size_t cols, std::size_t entries) {
    costs_.reserve(cols);
    start_.reserve(cols + 1);
    entries_.reserve(entries);
  }
  void set_rhs(std::size_t row, double value) { rhs_.at(row) = value; }

  std::span<const Entry> column(std::size_t j) const {
    return {entries_.data() + start_[j], start_[j + 1] - start_[j]};
  }
  double cost(std::size_t j) const { return costs_[j]; }
  double rhs(std::size_t i) const { return rhs_[i]; }

 private:
  std::vector<Entry> entries_;
  std::vector<std::size_t> start_;
  std::vector<double> costs_;
  std::vector<double> rhs_;
};

struct Solution {
  Status status = Status::infeasible;
  double objective = 0.0;
  std::vector<double> x;
  /// Simplex multipliers y with c_j - y^T A_j >= 0 at optimality.
  std::vector<double> duals;
  /// Phase-one residual: total artificial mass left (0 when feasible).
  double infeasibility = 0.0;
  std::size_t iterations = 0;
};

namespace detail {

class RevisedSimplex {
 public:
  RevisedSimplex(const Problem& problem, const Options& options)
      : p_(problem), opt_(options), m_(problem.rows()), n_(problem.cols()) {
    sign_.resize(m_);
    b_.resize(m_);
    scale_ = 1.0;
    for (std::size_t i = 0; i < m_; ++i) {
      sign_[i] = problem.rhs(i) < 0.0 ? -1.0 : 1.0;
      b_[i] = sign_[i] * problem.rhs(i);
      scale_ = std::max(scale_, b_[i]);
    }
    max_iter_ = opt_.max_iterations ? opt_.max_iterations : 50 * (m_ + n_) + 1000;
    start_.reserve(n_ + 1);
    start_.push_back(0);
    for (std::size_t j = 0; j < n_; ++j) {
      for (const auto& e : problem.column(j)) {
        rows_.push_back(e.row);
        vals_.push_back(sign_[e.row] * e.value);
      }
      start_.push_back(rows_.size());
    }
  }

  Solution run() {
    Solution sol;
    crash();
    const bool needs_phase_one =
        std::any_of(basis_.begin(), basis_.end(), [&](std::size_t j) { return j >= n_; });
    if (needs_phase_one) {
      auto cost = [&](std::size_t j) { return j >= n_ ? 1.0 : 0.0; };
      if (iterate(cost) == Status::unbounded)
        throw Error(ErrorCode::SolverFailure, "phase one reported an unbounded ray");
      double residual = 0.0;
      for (std::size_t i = 0; i < m_; ++i)
        if (basis_[i] >= n_) residual += std::max(0.0, xb_[i]);
      sol.infeasibility = residual;
      if (residual > opt_.feasibility_tol * scale_) {
        sol.status = Status::infeasible;
        sol.iterations = iterations_;
        return sol;
      }
      drive_out_artificials();
    }
    bool has_cost = false;
    for (std::size_t j = 0; j < n_; ++j) has_cost = has_cost || p_.cost(j) != 0.0;
    Status status = Status::optimal;
    if (has_cost) {
      auto cost = [&](std::size_t j) { return j >= n_ ? 0.0 : p_.cost(j); };
      status = iterate(cost);
    }
    sol.status = status;
    sol.iterations = iterations_;
    sol.x.assign(n_, 0.0);
    for (std::size_t i = 0; i < m_; ++i)
      if (basis_[i] < n_) sol.x[basis_[i]] = std::max(0.0, xb_[i]);
    for (std::size_t j = 0; j < n_; ++j) sol.objective += p_.cost(j) * sol.x[j];
    std::vector<double> y = multipliers([&](std::size_t j) { return j >= n_ ? 0.0 : p_.cost(j); });
    sol.duals.resize(m_);
    for (std::size_t i = 0; i < m_; ++i) sol.duals[i] = y[i] * sign_[i];
    return sol;
  }

 private:
  template <class Fn>
  void for_each_entry(std::size_t j, Fn&& fn) const {
    if (j >= n_) {
      fn(j - n_, 1.0);
      return;
    }
    for (std::size_t k = start_[j]; k < start_[j + 1]; ++k) fn(rows_[k], vals_[k]);
  }

  void crash() {
    basis_.assign(m_, 0);
    is_basic_.assign(n_ + m_, 0);
    binv_.assign(m_ * m_, 0.0);
    xb_.assign(m_, 0.0);
    std::vector<char> covered(m_, 0);
    for (std::size_t j = 0; j < n_; ++j) {
      const auto col = p_.column(j);
      if (col.size() != 1) continue;
      const std::size_t r = col[0].row;
      const double v = sign_[r] * col[0].value;
      if (covered[r] || !(v > 0.0)) continue;
      covered[r] = 1;
      basis_[r] = j;
      is_basic_[j] = 1;
      binv_[r * m_ + r] = 1.0 / v;
      xb_[r] = b_[r] / v;
    }
    for (std::size_t r = 0; r < m_; ++r) {
      if (covered[r]) continue;
      basis_[r] = n_ + r;
      is_basic_[n_ + r] = 1;
      binv_[r * m_ + r] = 1.0;
      xb_[r] = b_[r];
    }
  }

  template <class CostFn>
  std::vector<double> multipliers(CostFn&& cost) const {
    std::vector<double> y(m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      const double cb = cost(basis_[i]);
      if (cb == 0.0) continue;
      const double* row = &binv_[i * m_];
      for (std::size_t k = 0; k < m_; ++k) y[k] += cb * row[k];
    }
    return y;
  }

  std::vector<double> ftran(std::size_t j) const {
    std::vector<double> alpha(m_, 0.0);
    for_each_entry(j, [&](std::size_t k, double v) {
      for (std::size_t i = 0; i < m_; ++i) alpha[i] += binv_[i * m_ + k] * v;
    });
    return alpha;
  }

  void pivot(std::size_t r, std::size_t q, const std::vector<double>& alpha) {
    const double piv = alpha[r];
    double* prow = &binv_[r * m_];
    for (std::size_t k = 0; k < m_; ++k) prow[k] /= piv;
    const double theta = xb_[r] / piv;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r || alpha[i] == 0.0) continue;
      double* row = &binv_[i * m_];
      const double f = alpha[i];
      for (std::size_t k = 0; k < m_; ++k) row[k] -= f * prow[k];
      xb_[i] -= theta * alpha[i];
    }
    xb_[r] = theta;
    is_basic_[basis_[r]] = 0;
    basis_[r] = q;
    is_basic_[q] = 1;
  }

  void refactor() {
    // Gauss-Jordan inversion of the current basis matrix with partial pivoting.
    std::vector<double> a(m_ * m_, 0.0);
    for (std::size_t c = 0; c < m_; ++c)
      for_each_entry(basis_[c], [&](std::size_t k, double v) { a[k * m_ + c] = v; });
    std::vector<double> inv(m_ * m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) inv[i * m_ + i] = 1.0;
    for (std::size_t c = 0; c < m_; ++c) {
      std::size_t best = c;
      for (std::size_t r = c + 1; r < m_; ++r)
        if (std::abs(a[r * m_ + c]) > std::abs(a[best * m_ + c])) best = r;
      if (std::abs(a[best * m_ + c]) < 1e-14) throw Error(ErrorCode::SolverFailure, "singular basis on refactor");
      if (best != c)
        for (std::size_t k = 0; k < m_; ++k) {
          std::swap(a[best * m_ + k], a[c * m_ + k]);
          std::swap(inv[best * m_ + k], inv[c * m_ + k]);
        }
      const double piv = a[c * m_ + c];
      for (std::size_t k = 0; k < m_; ++k) {
        a[c * m_ + k] /= piv;
        inv[c * m_ + k] /= piv;
      }
      for (std::size_t r = 0; r < m_; ++r) {
        if (r == c) continue;
        const double f = a[r * m_ + c];
        if (f == 0.0) continue;
        for (std::size_t k = 0; k < m_; ++k) {
          a[r * m_ + k] -= f * a[c * m_ + k];
          inv[r * m_ + k] -= f * inv[c * m_ + k];
        }
      }
    }
    binv_ = std::move(inv);
    for (std::size_t i = 0; i < m_; ++i) {
      double v = 0.0;
      for (std::size_t k = 0; k < m_; ++k) v += binv_[i * m_ + k] * b_[k];
      xb_[i] = v;
    }
  }

  template <class CostFn>
  Status iterate(CostFn&& cost) {
    bool bland = false;
    std::size_t streak = 0;
    std::size_t since_refactor = 0;
    for (;;) {
      if (++iterations_ > max_iter_) throw Error(ErrorCode::SolverFailure, "simplex iteration limit reached");
      if (since_refactor >= opt_.refactor_every) {
        refactor();
        since_refactor = 0;
      }
      const std::vector<double> y = multipliers(cost);

      std::size_t q = n_ + m_;
      double best = -opt_.optimality_tol;
      for (std::size_t j = 0; j < n_; ++j) {
        if (is_basic_[j]) continue;
        double d = cost(j);
        for (std::size_t k = start_[j]; k < start_[j + 1]; ++k) d -= y[rows_[k]] * vals_[k];
        if (d < best) {
          q = j;
          best = d;
          if (bland) break;
        }
      }
      if (q == n_ + m_) return Status::optimal;

      const std::vector<double> alpha = ftran(q);
      std::size_t r = m_;
      double min_ratio = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m_; ++i)
        if (alpha[i] > opt_.pivot_tol) min_ratio = std::min(min_ratio, std::max(0.0, xb_[i]) / alpha[i]);
      if (min_ratio == std::numeric_limits<double>::infinity()) return Status::unbounded;
      const double slack = 1e-12 * std::max(1.0, min_ratio);
      for (std::size_t i = 0; i < m_; ++i) {
        if (!(alpha[i] > opt_.pivot_tol)) continue;
        if (std::max(0.0, xb_[i]) / alpha[i] > min_ratio + slack) continue;
        if (r == m_) {
          r = i;
        } else if (bland ? basis_[i] < basis_[r] : alpha[i] > alpha[r]) {
          r = i;
        }
      }

      const double theta = std::max(0.0, xb_[r]) / alpha[r];
      if (theta <= opt_.feasibility_tol) {
        if (++streak >= opt_.degenerate_streak) bland = true;
      } else {
        streak = 0;
      }
      if (xb_[r] < 0.0) xb_[r] = 0.0;
      pivot(r, q, alpha);
      ++since_refactor;
    }
  }

  void drive_out_artificials() {
    for (std::size_t r = 0; r < m_; ++r) {
      if (basis_[r] < n_) continue;
      const double* row = &binv_[r * m_];
      std::size_t best_j = n_;
      double best_v = 1e-9;
      for (std::size_t j = 0; j < n_; ++j) {
        if (is_basic_[j]) continue;
        double v = 0.0;
        for_each_entry(j, [&](std::size_t k, double a) { v += row[k] * a; });
        if (std::abs(v) > best_v) {
          best_v = std::abs(v);
          best_j = j;
        }
      }
      if (best_j == n_) continue;  // redundant row: the artificial stays basic at zero
      xb_[r] = 0.0;
      pivot(r, best_j, ftran(best_j));
    }
  }

  const Problem& p_;
  Options opt_;
  std::size_t m_;
  std::size_t n_;
  std::vector<double> sign_;
  std::vector<double> b_;
  double scale_ = 1.0;
  std::size_t max_iter_ = 0;
  std::size_t iterations_ = 0;
  std::vector<std::size_t> basis_;
  std::vector<char> is_basic_;
  std::vector<double> binv_;
  std::vector<double> xb_;
  std::vector<std::size_t> start_;
  std::vector<std::size_t> rows_;
  std::vector<double> vals_;
};

}  // namespace detail

inline Solution solve(const Problem& problem, const Options& options = {}) {
  if (problem.rows() == 0) {
    Solution sol;
    sol.status = Status::optimal;
    sol.x.assign(problem.cols(), 0.0);
    for (std::size_t j = 0; j < problem.cols(); ++j)
      if (problem.cost(j) < 0.0) sol.status = Status::unbounded;
    return sol;
  }
  return detail::RevisedSimplex(problem, options).run();
}

}  // namespace lipfree::lp
