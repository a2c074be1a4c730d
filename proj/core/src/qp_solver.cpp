#include "zonalcap/qp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/SparseCholesky>
#include <fmt/format.h>

#include "zonalcap/errors.hpp"

namespace zonalcap {

namespace {

using Eigen::ArrayXd;
using Eigen::Index;
using Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

constexpr double kFeasTol = 1e-9;
constexpr double kAcceptTol = 1e-8;
constexpr Index kDenseLimit = 96;

double inf_norm(const VectorXd& v) { return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>(); }

double clamp_to(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

/// Minimizer of 0.5 h x^2 + c x on [lo, hi]; used for variables that appear in no remaining row.
double separable_minimizer(double h, double c, double lo, double hi) {
  if (h > 0.0) return clamp_to(-c / h, lo, hi);
  if (c > 0.0) return lo;
  if (c < 0.0) return hi;
  if (std::isfinite(lo)) return lo;
  if (std::isfinite(hi)) return hi;
  return 0.0;
}

/// Normal-equation factorization; dense for small systems, sparse LDL' otherwise.
class NormalSolver {
 public:
  bool factorize(const SparseMatrix& a, const ArrayXd& d_inv) {
    const Index m = a.rows();
    if (m == 0) return true;
    SparseMatrix ad = a * d_inv.matrix().asDiagonal();
    SparseMatrix normal = (ad * a.transpose()).pruned(0.0);
    double max_diag = 0.0;
    for (Index i = 0; i < m; ++i) max_diag = std::max(max_diag, normal.coeff(i, i));
    // Near-degenerate iterates can make the normal matrix numerically indefinite; retry with more shift.
    for (double reg = 1e-14 * std::max(1.0, max_diag); reg < 1e-6 * std::max(1.0, max_diag); reg *= 100.0) {
      if (try_factorize(normal, reg)) return true;
    }
    return false;
  }

  VectorXd solve(const VectorXd& rhs) const {
    if (rhs.size() == 0) return rhs;
    return sparse_mode_ ? VectorXd(sparse_.solve(rhs)) : VectorXd(dense_.solve(rhs));
  }

 private:
  bool try_factorize(const SparseMatrix& normal, double reg) {
    const Index m = normal.rows();
    if (m <= kDenseLimit) {
      Eigen::MatrixXd dense = Eigen::MatrixXd(normal);
      dense.diagonal().array() += reg;
      dense_.compute(dense);
      return dense_.info() == Eigen::Success;
    }
    SparseMatrix identity(m, m);
    identity.setIdentity();
    const SparseMatrix shifted = normal + reg * identity;
    if (!analyzed_ || shifted.nonZeros() != pattern_nnz_) {
      sparse_.analyzePattern(shifted);
      analyzed_ = true;
      pattern_nnz_ = shifted.nonZeros();
    }
    sparse_.factorize(shifted);
    sparse_mode_ = true;
    if (sparse_.info() != Eigen::Success) return false;
    return (sparse_.vectorD().array() > 0.0).all();
  }

  Eigen::LLT<Eigen::MatrixXd> dense_;
  Eigen::SimplicialLDLT<SparseMatrix> sparse_;
  bool sparse_mode_ = false;
  bool analyzed_ = false;
  Index pattern_nnz_ = 0;
};

struct Iterate {
  VectorXd x, y, zl, zu;
};

struct Reduced {
  VectorXd h, c, b, lo, hi;
  SparseMatrix a;
};

struct Residuals {
  VectorXd primal;  // A x - b
  VectorXd dual;    // h x + c - A' y - zl + zu
};

Residuals residuals(const Reduced& p, const Iterate& it) {
  return {p.a * it.x - p.b,
          (p.h.array() * it.x.array()).matrix() + p.c - p.a.transpose() * it.y - it.zl + it.zu};
}

/// Largest step in [0, 1] keeping v + alpha * dv >= 0 on the masked entries.
double max_step(const ArrayXd& v, const ArrayXd& dv, const Eigen::Array<bool, Eigen::Dynamic, 1>& mask) {
  double alpha = 1.0;
  for (Index j = 0; j < v.size(); ++j) {
    if (mask[j] && dv[j] < 0.0) alpha = std::min(alpha, -v[j] / dv[j]);
  }
  return alpha;
}

struct IpmOutcome {
  Iterate it;
  QpStatus status = QpStatus::NumericalError;
  int iterations = 0;
};

IpmOutcome interior_point(const Reduced& p, const QpOptions& options) {
  const Index n = p.c.size();
  const Eigen::Array<bool, Eigen::Dynamic, 1> has_lo = p.lo.array().isFinite();
  const Eigen::Array<bool, Eigen::Dynamic, 1> has_hi = p.hi.array().isFinite();
  const double bound_count = static_cast<double>(has_lo.count() + has_hi.count());
  const double b_scale = 1.0 + inf_norm(p.b);
  const double c_scale = 1.0 + inf_norm(p.c);

  Iterate it;
  it.x.resize(n);
  it.zl = VectorXd::Zero(n);
  it.zu = VectorXd::Zero(n);
  it.y = VectorXd::Zero(p.b.size());
  for (Index j = 0; j < n; ++j) {
    if (has_lo[j] && has_hi[j]) {
      it.x[j] = 0.5 * (p.lo[j] + p.hi[j]);
    } else if (has_lo[j]) {
      it.x[j] = p.lo[j] + 1.0;
    } else if (has_hi[j]) {
      it.x[j] = p.hi[j] - 1.0;
    } else {
      it.x[j] = 0.0;
    }
    if (has_lo[j]) it.zl[j] = 1.0;
    if (has_hi[j]) it.zu[j] = 1.0;
  }

  IpmOutcome out;
  NormalSolver normal;
  double best_merit = std::numeric_limits<double>::infinity();
  Iterate best = it;

  for (int k = 0; k < options.max_iterations; ++k) {
    out.iterations = k;
    const ArrayXd sl = has_lo.select(it.x.array() - p.lo.array(), 1.0);
    const ArrayXd su = has_hi.select(p.hi.array() - it.x.array(), 1.0);
    const ArrayXd zl = it.zl.array();
    const ArrayXd zu = it.zu.array();
    const Residuals r = residuals(p, it);
    const double comp_sum = (has_lo.select(sl * zl, 0.0)).sum() + (has_hi.select(su * zu, 0.0)).sum();
    const double mu = bound_count > 0.0 ? comp_sum / bound_count : 0.0;

    const double rp = inf_norm(r.primal) / b_scale;
    const double rd = inf_norm(r.dual) / c_scale;
    const double merit = std::max({rp, rd, mu});
    if (merit < best_merit) {
      best_merit = merit;
      best = it;
    }
    if (rp <= options.tolerance && rd <= options.tolerance && mu <= options.tolerance) {
      out.it = it;
      out.status = QpStatus::Optimal;
      return out;
    }

    ArrayXd diag = p.h.array() + has_lo.select(zl / sl, 0.0) + has_hi.select(zu / su, 0.0);
    diag = diag.max(1e-12);
    const ArrayXd d_inv = diag.inverse();
    if (!normal.factorize(p.a, d_inv)) break;

    // Newton step for complementarity targets sl*zl = tl, su*zu = tu.
    auto newton = [&](const ArrayXd& tl, const ArrayXd& tu, VectorXd& dx, VectorXd& dy, VectorXd& dzl,
                      VectorXd& dzu) {
      const ArrayXd rl = has_lo.select(tl - sl * zl, 0.0);
      const ArrayXd ru = has_hi.select(tu - su * zu, 0.0);
      const VectorXd g = (-r.dual.array() + rl / sl - ru / su).matrix();
      const VectorXd dinv_g = (d_inv * g.array()).matrix();
      dy = normal.solve(-r.primal - p.a * dinv_g);
      dx = (d_inv * (g + p.a.transpose() * dy).array()).matrix();
      dzl = has_lo.select((rl - zl * dx.array()) / sl, 0.0).matrix();
      dzu = has_hi.select((ru + zu * dx.array()) / su, 0.0).matrix();
    };

    VectorXd dx, dy, dzl, dzu;
    newton(ArrayXd::Zero(n), ArrayXd::Zero(n), dx, dy, dzl, dzu);
    auto step_length = [&](const VectorXd& sx, const VectorXd& szl, const VectorXd& szu) {
      double alpha = max_step(sl, sx.array(), has_lo);
      alpha = std::min(alpha, max_step(su, -sx.array(), has_hi));
      alpha = std::min(alpha, max_step(zl, szl.array(), has_lo));
      alpha = std::min(alpha, max_step(zu, szu.array(), has_hi));
      return alpha;
    };
    const double alpha_aff = step_length(dx, dzl, dzu);
    double sigma = 0.0;
    if (bound_count > 0.0) {
      const ArrayXd sl_a = sl + alpha_aff * dx.array();
      const ArrayXd su_a = su - alpha_aff * dx.array();
      const double mu_aff = (has_lo.select(sl_a * (zl + alpha_aff * dzl.array()), 0.0).sum() +
                             has_hi.select(su_a * (zu + alpha_aff * dzu.array()), 0.0).sum()) /
                            bound_count;
      sigma = std::pow(std::clamp(mu_aff / std::max(mu, 1e-300), 0.0, 1.0), 3);
    }
    const ArrayXd corr_l = dx.array() * dzl.array();
    const ArrayXd corr_u = -dx.array() * dzu.array();
    const ArrayXd target = ArrayXd::Constant(n, sigma * mu);
    newton(target - corr_l, target - corr_u, dx, dy, dzl, dzu);

    const double alpha = std::min(1.0, 0.995 * step_length(dx, dzl, dzu));
    if (!(alpha > 1e-14) || !dx.allFinite() || !dy.allFinite()) break;
    it.x += alpha * dx;
    it.y += alpha * dy;
    it.zl += alpha * dzl;
    it.zu += alpha * dzu;
  }

  out.it = best;
  out.status = std::isfinite(best_merit) && best_merit < 1e-3 ? QpStatus::MaxIterations : QpStatus::NumericalError;
  return out;
}

/// Equality-constrained solve with every non-free column fixed at its bound. Returns false when the
/// factorization breaks down; otherwise `trial` holds the point and stationarity-derived multipliers.
bool solve_active_set(const Reduced& p, const std::vector<int>& state, Iterate& trial) {
  const Index n = p.c.size();
  const Index m = p.b.size();
  std::vector<Index> free_cols;
  for (Index j = 0; j < n; ++j) {
    const int s = state[static_cast<std::size_t>(j)];
    if (s < 0) trial.x[j] = p.lo[j];
    if (s > 0) trial.x[j] = p.hi[j];
    if (s == 0) free_cols.push_back(j);
  }
  // Rows without free columns keep their current multipliers.
  std::vector<Index> row_map(static_cast<std::size_t>(m), -1);
  std::vector<Index> rows;
  for (Index j : free_cols) {
    for (SparseMatrix::InnerIterator e(p.a, j); e; ++e) {
      if (e.value() != 0.0 && row_map[static_cast<std::size_t>(e.row())] < 0) {
        row_map[static_cast<std::size_t>(e.row())] = static_cast<Index>(rows.size());
        rows.push_back(e.row());
      }
    }
  }
  // Row order must not depend on column order for determinism of the factorization pattern.
  std::sort(rows.begin(), rows.end());
  for (std::size_t r = 0; r < rows.size(); ++r) row_map[static_cast<std::size_t>(rows[r])] = static_cast<Index>(r);

  const Index nf = static_cast<Index>(free_cols.size());
  const Index mr = static_cast<Index>(rows.size());
  // Quasi-definite regularization; refinement below removes its effect on consistent systems.
  Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower> ldlt;
  bool factored = false;
  for (double delta = 1e-10; delta <= 1e-6 && !factored; delta *= 100.0) {
    std::vector<Eigen::Triplet<double>> triplets;
    for (Index k = 0; k < nf; ++k) {
      triplets.emplace_back(k, k, p.h[free_cols[static_cast<std::size_t>(k)]] + delta);
      for (SparseMatrix::InnerIterator e(p.a, free_cols[static_cast<std::size_t>(k)]); e; ++e) {
        const Index r = row_map[static_cast<std::size_t>(e.row())];
        if (r >= 0 && e.value() != 0.0) triplets.emplace_back(nf + r, k, e.value());
      }
    }
    for (Index r = 0; r < mr; ++r) triplets.emplace_back(nf + r, nf + r, -delta);
    SparseMatrix kkt(nf + mr, nf + mr);
    kkt.setFromTriplets(triplets.begin(), triplets.end());
    ldlt.compute(kkt);
    factored = ldlt.info() == Eigen::Success && ldlt.vectorD().allFinite();
  }
  if (!factored) return false;

  for (int refine = 0; refine < 8; ++refine) {
    const VectorXd stat = (p.h.array() * trial.x.array()).matrix() + p.c - p.a.transpose() * trial.y;
    const VectorXd prim = p.b - p.a * trial.x;
    VectorXd rhs(nf + mr);
    for (Index k = 0; k < nf; ++k) rhs[k] = -stat[free_cols[static_cast<std::size_t>(k)]];
    for (Index r = 0; r < mr; ++r) rhs[nf + r] = prim[rows[static_cast<std::size_t>(r)]];
    if (inf_norm(rhs) < 1e-15) break;
    const VectorXd step = ldlt.solve(rhs);
    if (!step.allFinite()) return false;
    for (Index k = 0; k < nf; ++k) trial.x[free_cols[static_cast<std::size_t>(k)]] += step[k];
    // Unknown for the row block is -y.
    for (Index r = 0; r < mr; ++r) trial.y[rows[static_cast<std::size_t>(r)]] -= step[nf + r];
  }
  return true;
}

/// Active-set polish: guesses the active bounds from the interior-point iterate, then runs a primal
/// active-set method from there. Each round solves the equality QP on the current free set; a step
/// that would leave the box is cut at the first blocking bound, which becomes active, and otherwise
/// the bound with the most wrongly signed multiplier is released. Degenerate columns (slack and
/// multiplier both near zero) and zero-curvature null directions are why the guess alone can fail.
bool polish(const Reduced& p, Iterate& it) {
  const Index n = p.c.size();
  std::vector<int> state(static_cast<std::size_t>(n), 0);  // -1 lower, +1 upper, 0 free
  for (Index j = 0; j < n; ++j) {
    const bool lo_ok = std::isfinite(p.lo[j]);
    const bool hi_ok = std::isfinite(p.hi[j]);
    const double sl = lo_ok ? it.x[j] - p.lo[j] : std::numeric_limits<double>::infinity();
    const double su = hi_ok ? p.hi[j] - it.x[j] : std::numeric_limits<double>::infinity();
    const bool at_lo = lo_ok && sl < it.zl[j];
    const bool at_hi = hi_ok && su < it.zu[j];
    if (at_lo && (!at_hi || sl <= su)) {
      state[static_cast<std::size_t>(j)] = -1;
    } else if (at_hi) {
      state[static_cast<std::size_t>(j)] = 1;
    }
  }

  const double dual_tol = kFeasTol * (1.0 + inf_norm(p.c));
  const Residuals before = residuals(p, it);
  Iterate cur = it;
  for (Index j = 0; j < n; ++j) cur.x[j] = clamp_to(cur.x[j], p.lo[j], p.hi[j]);

  const int max_rounds = 100 + static_cast<int>(n / 4);
  for (int round = 0; round < max_rounds; ++round) {
    Iterate trial = cur;
    if (!solve_active_set(p, state, trial)) return false;

    double alpha = 1.0;
    Index block = -1;
    int block_side = 0;
    for (Index j = 0; j < n; ++j) {
      if (state[static_cast<std::size_t>(j)] != 0) continue;
      const double dx = trial.x[j] - cur.x[j];
      if (dx < 0.0 && trial.x[j] < p.lo[j] - kFeasTol * (1.0 + std::abs(p.lo[j]))) {
        const double a = (p.lo[j] - cur.x[j]) / dx;
        if (a < alpha) {
          alpha = a;
          block = j;
          block_side = -1;
        }
      } else if (dx > 0.0 && trial.x[j] > p.hi[j] + kFeasTol * (1.0 + std::abs(p.hi[j]))) {
        const double a = (p.hi[j] - cur.x[j]) / dx;
        if (a < alpha) {
          alpha = a;
          block = j;
          block_side = 1;
        }
      }
    }
    if (block >= 0) {
      alpha = std::max(alpha, 0.0);
      for (Index j = 0; j < n; ++j) {
        if (state[static_cast<std::size_t>(j)] == 0) {
          cur.x[j] = clamp_to(cur.x[j] + alpha * (trial.x[j] - cur.x[j]), p.lo[j], p.hi[j]);
        }
      }
      cur.y = trial.y;
      state[static_cast<std::size_t>(block)] = block_side;
      continue;
    }

    // A crash guess can fix too many columns for some row to be met; free the fixed columns there.
    const VectorXd prim = p.b - p.a * trial.x;
    const VectorXd row_size = p.b.cwiseAbs() + p.a.cwiseAbs() * trial.x.cwiseAbs();
    const auto violated = [&](Index r) { return std::abs(prim[r]) > kFeasTol * (1.0 + row_size[r]); };
    bool inconsistent = false;
    for (Index r = 0; r < prim.size() && !inconsistent; ++r) inconsistent = violated(r);
    if (inconsistent) {
      bool released = false;
      for (Index j = 0; j < n; ++j) {
        if (state[static_cast<std::size_t>(j)] == 0) continue;
        for (SparseMatrix::InnerIterator e(p.a, j); e; ++e) {
          if (e.value() != 0.0 && violated(e.row())) {
            state[static_cast<std::size_t>(j)] = 0;
            released = true;
            break;
          }
        }
      }
      if (!released) return false;
      continue;
    }

    const VectorXd grad = (p.h.array() * trial.x.array()).matrix() + p.c - p.a.transpose() * trial.y;
    Index release = -1;
    double worst = dual_tol;
    for (Index j = 0; j < n; ++j) {
      const int s = state[static_cast<std::size_t>(j)];
      trial.zl[j] = 0.0;
      trial.zu[j] = 0.0;
      if (s < 0) {
        if (-grad[j] > worst) {
          worst = -grad[j];
          release = j;
        }
        trial.zl[j] = std::max(grad[j], 0.0);
      } else if (s > 0) {
        if (grad[j] > worst) {
          worst = grad[j];
          release = j;
        }
        trial.zu[j] = std::max(-grad[j], 0.0);
      } else {
        trial.x[j] = clamp_to(trial.x[j], p.lo[j], p.hi[j]);
      }
    }
    if (release >= 0) {
      state[static_cast<std::size_t>(release)] = 0;
      cur = std::move(trial);
      continue;
    }

    const Residuals after = residuals(p, trial);
    const double worse = std::max(inf_norm(after.primal) - inf_norm(before.primal) - 1e-12,
                                  inf_norm(after.dual) - inf_norm(before.dual) - 1e-12);
    if (worse > 0.0 && std::max(inf_norm(after.primal), inf_norm(after.dual)) > 1e-12) return false;
    it = std::move(trial);
    return true;
  }
  return false;
}

}  // namespace

std::string_view to_string(QpStatus status) {
  switch (status) {
    case QpStatus::Optimal: return "optimal";
    case QpStatus::MaxIterations: return "max_iterations";
    case QpStatus::Infeasible: return "infeasible";
    case QpStatus::NumericalError: return "numerical_error";
  }
  return "unknown";
}

double QpResult::kkt_residual() const { return std::max({primal_residual, dual_residual, complementarity}); }

void measure_residuals(const QpProblem& problem, QpResult& result) {
  const VectorXd primal = problem.constraints * result.x - problem.rhs;
  const VectorXd dual = (problem.hessian_diag.array() * result.x.array()).matrix() + problem.cost -
                        problem.constraints.transpose() * result.y - result.z_lower + result.z_upper;
  double comp = 0.0;
  for (Index j = 0; j < result.x.size(); ++j) {
    if (std::isfinite(problem.lower[j]))
      comp = std::max(comp, std::abs(std::min(result.x[j] - problem.lower[j], result.z_lower[j])));
    else
      comp = std::max(comp, std::abs(result.z_lower[j]));
    if (std::isfinite(problem.upper[j]))
      comp = std::max(comp, std::abs(std::min(problem.upper[j] - result.x[j], result.z_upper[j])));
    else
      comp = std::max(comp, std::abs(result.z_upper[j]));
  }
  const double scale = 1.0 + std::max(inf_norm(problem.rhs), inf_norm(problem.cost));
  result.primal_residual = inf_norm(primal) / (1.0 + inf_norm(problem.rhs));
  result.dual_residual = inf_norm(dual) / (1.0 + inf_norm(problem.cost));
  result.complementarity = comp / scale;
  result.objective =
      0.5 * (problem.hessian_diag.array() * result.x.array().square()).sum() + problem.cost.dot(result.x);
}

QpResult solve_qp(const QpProblem& problem, const QpOptions& options) {
  const Index n = problem.variable_count();
  const Index m = problem.constraint_count();
  if (problem.hessian_diag.size() != n || problem.lower.size() != n || problem.upper.size() != n ||
      problem.constraints.cols() != n || problem.constraints.rows() != m) {
    throw DimensionError(fmt::format("inconsistent QP dimensions (n={}, m={}, A={}x{})", n, m,
                                     problem.constraints.rows(), problem.constraints.cols()));
  }
  if ((problem.hessian_diag.array() < 0.0).any()) throw DimensionError("Hessian diagonal must be >= 0");

  QpResult result;
  result.x = VectorXd::Zero(n);
  result.y = VectorXd::Zero(m);
  result.z_lower = VectorXd::Zero(n);
  result.z_upper = VectorXd::Zero(n);

  // Presolve: fixed columns, then singleton rows until none remain.
  const Eigen::SparseMatrix<double, Eigen::RowMajor> rows_view = problem.constraints;
  std::vector<bool> fixed(static_cast<std::size_t>(n), false);
  std::vector<bool> row_done(static_cast<std::size_t>(m), false);
  std::vector<int> free_count(static_cast<std::size_t>(m), 0);
  for (Index j = 0; j < n; ++j) {
    if (problem.lower[j] > problem.upper[j]) {
      result.status = QpStatus::Infeasible;
      return result;
    }
    if (problem.lower[j] == problem.upper[j]) {
      fixed[static_cast<std::size_t>(j)] = true;
      result.x[j] = problem.lower[j];
    }
  }
  for (Index i = 0; i < m; ++i) {
    for (decltype(rows_view)::InnerIterator e(rows_view, i); e; ++e) {
      if (e.value() != 0.0 && !fixed[static_cast<std::size_t>(e.col())]) ++free_count[static_cast<std::size_t>(i)];
    }
  }
  std::vector<std::pair<Index, Index>> eliminated;  // (row, column) in elimination order
  std::vector<Index> queue;
  for (Index i = 0; i < m; ++i) {
    if (free_count[static_cast<std::size_t>(i)] == 1) queue.push_back(i);
  }
  while (!queue.empty()) {
    const Index i = queue.back();
    queue.pop_back();
    if (row_done[static_cast<std::size_t>(i)] || free_count[static_cast<std::size_t>(i)] != 1) continue;
    Index col = -1;
    double coef = 0.0;
    double rest = problem.rhs[i];
    for (decltype(rows_view)::InnerIterator e(rows_view, i); e; ++e) {
      if (e.value() == 0.0) continue;
      if (fixed[static_cast<std::size_t>(e.col())]) {
        rest -= e.value() * result.x[e.col()];
      } else {
        col = e.col();
        coef = e.value();
      }
    }
    double value = rest / coef;
    const double lo = problem.lower[col];
    const double hi = problem.upper[col];
    if (value < lo - kFeasTol * (1.0 + std::abs(lo)) || value > hi + kFeasTol * (1.0 + std::abs(hi))) {
      result.status = QpStatus::Infeasible;
      return result;
    }
    value = clamp_to(value, lo, hi);
    fixed[static_cast<std::size_t>(col)] = true;
    result.x[col] = value;
    row_done[static_cast<std::size_t>(i)] = true;
    eliminated.emplace_back(i, col);
    for (SparseMatrix::InnerIterator e(problem.constraints, col); e; ++e) {
      if (e.value() == 0.0) continue;
      auto& count = free_count[static_cast<std::size_t>(e.row())];
      --count;
      if (count == 1 && !row_done[static_cast<std::size_t>(e.row())]) queue.push_back(e.row());
    }
  }

  std::vector<Index> free_cols;
  std::vector<Index> col_map(static_cast<std::size_t>(n), -1);
  for (Index j = 0; j < n; ++j) {
    if (!fixed[static_cast<std::size_t>(j)]) {
      col_map[static_cast<std::size_t>(j)] = static_cast<Index>(free_cols.size());
      free_cols.push_back(j);
    }
  }
  std::vector<Index> kept_rows;
  std::vector<Index> row_map(static_cast<std::size_t>(m), -1);
  const VectorXd fixed_x = result.x;  // free entries are still zero here
  const VectorXd fixed_activity = problem.constraints * fixed_x;
  for (Index i = 0; i < m; ++i) {
    if (row_done[static_cast<std::size_t>(i)]) continue;
    if (free_count[static_cast<std::size_t>(i)] == 0) {
      const double gap = problem.rhs[i] - fixed_activity[i];
      if (std::abs(gap) > kFeasTol * (1.0 + std::abs(problem.rhs[i]))) {
        result.status = QpStatus::Infeasible;
        return result;
      }
      continue;
    }
    row_map[static_cast<std::size_t>(i)] = static_cast<Index>(kept_rows.size());
    kept_rows.push_back(i);
  }

  Reduced reduced;
  const Index nf = static_cast<Index>(free_cols.size());
  const Index mr = static_cast<Index>(kept_rows.size());
  reduced.h.resize(nf);
  reduced.c.resize(nf);
  reduced.lo.resize(nf);
  reduced.hi.resize(nf);
  reduced.b.resize(mr);
  std::vector<Eigen::Triplet<double>> triplets;
  for (Index k = 0; k < nf; ++k) {
    const Index j = free_cols[static_cast<std::size_t>(k)];
    reduced.h[k] = problem.hessian_diag[j];
    reduced.c[k] = problem.cost[j];
    reduced.lo[k] = problem.lower[j];
    reduced.hi[k] = problem.upper[j];
    for (SparseMatrix::InnerIterator e(problem.constraints, j); e; ++e) {
      const Index r = row_map[static_cast<std::size_t>(e.row())];
      if (r >= 0 && e.value() != 0.0) triplets.emplace_back(r, k, e.value());
    }
  }
  for (Index r = 0; r < mr; ++r) {
    const Index i = kept_rows[static_cast<std::size_t>(r)];
    reduced.b[r] = problem.rhs[i] - fixed_activity[i];
  }
  reduced.a.resize(mr, nf);
  reduced.a.setFromTriplets(triplets.begin(), triplets.end());

  // Columns that touch no kept row are separable.
  std::vector<bool> isolated(static_cast<std::size_t>(nf), false);
  for (Index k = 0; k < nf; ++k) {
    isolated[static_cast<std::size_t>(k)] = reduced.a.col(k).nonZeros() == 0;
  }

  IpmOutcome ipm = interior_point(reduced, options);
  result.iterations = ipm.iterations;
  result.status = ipm.status;
  if (ipm.status != QpStatus::NumericalError && options.polish) {
    result.polished = polish(reduced, ipm.it);
  }
  for (Index k = 0; k < nf; ++k) {
    const Index j = free_cols[static_cast<std::size_t>(k)];
    if (isolated[static_cast<std::size_t>(k)]) {
      result.x[j] = separable_minimizer(reduced.h[k], reduced.c[k], reduced.lo[k], reduced.hi[k]);
    } else {
      result.x[j] = ipm.it.x[k];
    }
  }
  for (Index r = 0; r < mr; ++r) result.y[kept_rows[static_cast<std::size_t>(r)]] = ipm.it.y[r];

  // Postsolve duals of eliminated rows in reverse order: the eliminated column gets zero bound
  // multipliers, which selects the smallest-magnitude admissible price at a degenerate bound.
  for (auto it = eliminated.rbegin(); it != eliminated.rend(); ++it) {
    const auto [row, col] = *it;
    double grad = problem.hessian_diag[col] * result.x[col] + problem.cost[col];
    double coef = 0.0;
    for (SparseMatrix::InnerIterator e(problem.constraints, col); e; ++e) {
      if (e.row() == row) {
        coef = e.value();
      } else {
        grad -= e.value() * result.y[e.row()];
      }
    }
    result.y[row] = grad / coef;
  }

  const VectorXd grad = (problem.hessian_diag.array() * result.x.array()).matrix() + problem.cost -
                        problem.constraints.transpose() * result.y;
  for (Index j = 0; j < n; ++j) {
    const Index k = col_map[static_cast<std::size_t>(j)];
    if (k >= 0 && !isolated[static_cast<std::size_t>(k)] && !result.polished) {
      result.z_lower[j] = ipm.it.zl[k];
      result.z_upper[j] = ipm.it.zu[k];
      continue;
    }
    // Fixed, presolved, isolated or polished columns: multipliers from stationarity.
    const bool at_lo = std::isfinite(problem.lower[j]) && result.x[j] <= problem.lower[j];
    const bool at_hi = std::isfinite(problem.upper[j]) && result.x[j] >= problem.upper[j];
    if (grad[j] > 0.0 && at_lo) {
      result.z_lower[j] = grad[j];
    } else if (grad[j] < 0.0 && at_hi) {
      result.z_upper[j] = -grad[j];
    }
  }
  measure_residuals(problem, result);
  // The certificate is the measured residual of the recovered point, not the path taken to it.
  const double accept = std::max(options.tolerance, kAcceptTol);
  if (result.kkt_residual() <= accept) {
    result.status = QpStatus::Optimal;
  } else if (result.status == QpStatus::Optimal) {
    result.status = QpStatus::MaxIterations;
  }
  return result;
}

}  // namespace zonalcap
