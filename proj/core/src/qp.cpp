#include "physmo/qp.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace physmo {

const char* to_string(QPStatus status) {
  switch (status) {
    case QPStatus::Optimal: return "optimal";
    case QPStatus::Infeasible: return "infeasible";
    case QPStatus::Unbounded: return "unbounded";
    case QPStatus::MaxIterations: return "max-iterations";
    case QPStatus::NumericalFailure: return "numerical-failure";
  }
  return "unknown";
}

QPDiagnostics evaluate_kkt(const QPProblem& problem, const VecX& x,
                           const VecX& eq_multipliers,
                           const VecX& ineq_multipliers) {
  QPDiagnostics diag;
  VecX stat = problem.hessian * x + problem.gradient;
  if (problem.eq_matrix.rows() > 0)
    stat -= problem.eq_matrix.transpose() * eq_multipliers;
  if (problem.ineq_matrix.rows() > 0)
    stat -= problem.ineq_matrix.transpose() * ineq_multipliers;
  diag.stationarity = stat.size() > 0 ? stat.cwiseAbs().maxCoeff() : 0.0;

  double primal = 0.0;
  if (problem.eq_matrix.rows() > 0)
    primal = (problem.eq_matrix * x - problem.eq_rhs).cwiseAbs().maxCoeff();
  if (problem.ineq_matrix.rows() > 0) {
    const VecX slack = problem.ineq_matrix * x - problem.ineq_rhs;
    primal = std::max(primal, std::max(0.0, -slack.minCoeff()));
    double comp = 0.0;
    for (int i = 0; i < slack.size(); ++i)
      comp = std::max(comp, std::abs(ineq_multipliers[i] * slack[i]));
    diag.complementarity = comp;
    diag.dual_feasibility = std::max(0.0, -ineq_multipliers.minCoeff());
  }
  diag.primal_feasibility = primal;
  diag.objective = 0.5 * x.dot(problem.hessian * x) + problem.gradient.dot(x);
  return diag;
}

namespace {

void check_shapes(const QPProblem& p) {
  const int n = p.variables();
  if (n <= 0) throw ValidationError("quadratic program has no variables");
  if (p.hessian.rows() != n || p.hessian.cols() != n)
    throw ValidationError("quadratic program Hessian shape mismatch");
  if (!((p.hessian - p.hessian.transpose()).cwiseAbs().maxCoeff() <=
        1e-8 * (1.0 + p.hessian.cwiseAbs().maxCoeff())))
    throw ValidationError("quadratic program Hessian is not symmetric");
  if (p.eq_matrix.rows() != p.eq_rhs.size() ||
      (p.eq_matrix.rows() > 0 && p.eq_matrix.cols() != n))
    throw ValidationError("equality constraint shape mismatch");
  if (p.ineq_matrix.rows() != p.ineq_rhs.size() ||
      (p.ineq_matrix.rows() > 0 && p.ineq_matrix.cols() != n))
    throw ValidationError("inequality constraint shape mismatch");
  if (!p.hessian.allFinite() || !p.gradient.allFinite() ||
      !p.eq_matrix.allFinite() || !p.eq_rhs.allFinite() ||
      !p.ineq_matrix.allFinite() || !p.ineq_rhs.allFinite())
    throw ValidationError("quadratic program contains non-finite entries");
}

MatX stack_working(const QPProblem& p, const std::vector<int>& active) {
  const int me = static_cast<int>(p.eq_matrix.rows());
  const int mw = me + static_cast<int>(active.size());
  MatX a(mw, p.variables());
  if (me > 0) a.topRows(me) = p.eq_matrix;
  for (size_t k = 0; k < active.size(); ++k)
    a.row(me + static_cast<int>(k)) = p.ineq_matrix.row(active[k]);
  return a;
}

}  // namespace

QPSolution QPSolver::solve(const QPProblem& problem) const {
  check_shapes(problem);
  VecX x0 = VecX::Zero(problem.variables());
  if (!find_feasible_start(problem, x0)) {
    QPSolution out;
    out.status = QPStatus::Infeasible;
    out.x = std::move(x0);
    out.eq_multipliers = VecX::Zero(problem.eq_matrix.rows());
    out.ineq_multipliers = VecX::Zero(problem.ineq_matrix.rows());
    out.diagnostics =
        evaluate_kkt(problem, out.x, out.eq_multipliers, out.ineq_multipliers);
    return out;
  }
  return solve_feasible(problem, std::move(x0));
}

QPSolution QPSolver::solve(const QPProblem& problem,
                           const VecX& start_hint) const {
  check_shapes(problem);
  if (start_hint.size() != problem.variables() || !start_hint.allFinite())
    return solve(problem);
  VecX x0 = start_hint;
  // Re-project onto the equality manifold, then check inequality slack.
  if (problem.eq_matrix.rows() > 0) {
    const VecX residual = problem.eq_rhs - problem.eq_matrix * x0;
    x0 += problem.eq_matrix.completeOrthogonalDecomposition().solve(residual);
  }
  double violation = 0.0;
  if (problem.eq_matrix.rows() > 0)
    violation = (problem.eq_matrix * x0 - problem.eq_rhs).cwiseAbs().maxCoeff();
  if (problem.ineq_matrix.rows() > 0)
    violation = std::max(
        violation,
        std::max(0.0, -(problem.ineq_matrix * x0 - problem.ineq_rhs)
                           .minCoeff()));
  if (violation > options_.constraint_tolerance) return solve(problem);
  return solve_feasible(problem, std::move(x0));
}

bool QPSolver::find_feasible_start(const QPProblem& problem, VecX& x0) const {
  const int n = problem.variables();
  if (problem.eq_matrix.rows() > 0) {
    x0 = problem.eq_matrix.completeOrthogonalDecomposition()
             .solve(problem.eq_rhs);
    const double eq_violation =
        (problem.eq_matrix * x0 - problem.eq_rhs).cwiseAbs().maxCoeff();
    if (eq_violation > 1e-6 * (1.0 + problem.eq_rhs.cwiseAbs().maxCoeff()))
      return false;  // inconsistent equalities
  }
  const int mi = static_cast<int>(problem.ineq_matrix.rows());
  if (mi == 0) return true;
  const double worst =
      -(problem.ineq_matrix * x0 - problem.ineq_rhs).minCoeff();
  if (worst <= options_.constraint_tolerance) return true;

  // Phase 1: one extra slack variable s lifted onto every inequality,
  //   minimize 0.5 s^2  s.t.  C x + s >= d,  s >= 0,  A x = b,
  // started from (x0, worst violation + 1), which is feasible by
  // construction. Feasibility of the original program means optimal s = 0.
  QPProblem lifted;
  lifted.hessian = MatX::Zero(n + 1, n + 1);
  lifted.hessian(n, n) = 1.0;
  lifted.gradient = VecX::Zero(n + 1);
  if (problem.eq_matrix.rows() > 0) {
    lifted.eq_matrix = MatX::Zero(problem.eq_matrix.rows(), n + 1);
    lifted.eq_matrix.leftCols(n) = problem.eq_matrix;
    lifted.eq_rhs = problem.eq_rhs;
  } else {
    lifted.eq_matrix.resize(0, n + 1);
    lifted.eq_rhs.resize(0);
  }
  lifted.ineq_matrix = MatX::Zero(mi + 1, n + 1);
  lifted.ineq_matrix.topLeftCorner(mi, n) = problem.ineq_matrix;
  lifted.ineq_matrix.col(n).head(mi).setOnes();
  lifted.ineq_matrix(mi, n) = 1.0;
  lifted.ineq_rhs = VecX::Zero(mi + 1);
  lifted.ineq_rhs.head(mi) = problem.ineq_rhs;

  VecX lifted_x0(n + 1);
  lifted_x0.head(n) = x0;
  lifted_x0[n] = worst + 1.0;
  const QPSolution phase1 = solve_feasible(lifted, std::move(lifted_x0));
  if (phase1.status != QPStatus::Optimal) return false;
  if (phase1.x[n] > 1e-7) return false;
  x0 = phase1.x.head(n);
  return true;
}

QPSolution QPSolver::solve_feasible(const QPProblem& problem, VecX x0) const {
  const int n = problem.variables();
  const int me = static_cast<int>(problem.eq_matrix.rows());
  const int mi = static_cast<int>(problem.ineq_matrix.rows());

  QPSolution out;
  out.x = std::move(x0);
  out.eq_multipliers = VecX::Zero(me);
  out.ineq_multipliers = VecX::Zero(mi);

  std::vector<int> active;
  if (mi > 0) {
    const VecX slack = problem.ineq_matrix * out.x - problem.ineq_rhs;
    for (int i = 0; i < mi; ++i)
      if (slack[i] <= options_.constraint_tolerance) active.push_back(i);
  }

  int iterations = 0;
  const auto fail = [&](QPStatus status) {
    out.status = status;
    out.active_set = active;
    out.diagnostics =
        evaluate_kkt(problem, out.x, out.eq_multipliers, out.ineq_multipliers);
    out.diagnostics.iterations = iterations;
    return out;
  };

  for (; iterations < options_.max_iterations; ++iterations) {
    const MatX working = stack_working(problem, active);
    const VecX grad_x = problem.hessian * out.x + problem.gradient;

    // Equality-constrained step in the nullspace of the working set. The
    // reduced solve is minimum-norm, so rank-deficient Hessians still give a
    // unique, repeatable direction.
    VecX p = VecX::Zero(n);
    bool ray = false;  // direction of unbounded descent
    MatX kernel;
    if (working.rows() == 0) {
      kernel = MatX::Identity(n, n);
    } else {
      Eigen::FullPivLU<MatX> lu(working);
      kernel = lu.kernel();
      if (lu.dimensionOfKernel() == 0) kernel.resize(n, 0);
    }
    if (kernel.cols() > 0) {
      const MatX reduced_h = kernel.transpose() * problem.hessian * kernel;
      const VecX reduced_g = kernel.transpose() * grad_x;
      const VecX y =
          reduced_h.completeOrthogonalDecomposition().solve(-reduced_g);
      const VecX residual = reduced_h * y + reduced_g;
      const double scale = 1.0 + reduced_g.cwiseAbs().maxCoeff();
      if (residual.cwiseAbs().maxCoeff() > 1e-7 * scale) {
        // The residual is the gradient component in the nullspace of the
        // reduced Hessian; following its negative decreases the objective
        // linearly forever (zero curvature), so the step is a ray.
        p = -kernel * residual;
        ray = true;
      } else {
        p = kernel * y;
      }
    }
    if (!p.allFinite()) return fail(QPStatus::NumericalFailure);

    const double step_norm = p.cwiseAbs().maxCoeff();
    if (!ray &&
        step_norm <= options_.step_tolerance *
                         (1.0 + out.x.cwiseAbs().maxCoeff())) {
      // Stationary on the working set: check multiplier signs.
      VecX multipliers = VecX::Zero(working.rows());
      if (working.rows() > 0)
        multipliers = working.transpose()
                          .completeOrthogonalDecomposition()
                          .solve(grad_x);
      int drop = -1;
      for (size_t k = 0; k < active.size(); ++k) {
        if (multipliers[me + static_cast<int>(k)] <
            -options_.multiplier_tolerance) {
          drop = static_cast<int>(k);
          break;  // lowest working-set index first
        }
      }
      if (drop < 0) {
        out.eq_multipliers = multipliers.head(me);
        out.ineq_multipliers.setZero();
        for (size_t k = 0; k < active.size(); ++k)
          out.ineq_multipliers[active[k]] =
              std::max(0.0, multipliers[me + static_cast<int>(k)]);
        out.status = QPStatus::Optimal;
        out.active_set = active;
        out.diagnostics = evaluate_kkt(problem, out.x, out.eq_multipliers,
                                       out.ineq_multipliers);
        out.diagnostics.iterations = iterations + 1;
        return out;
      }
      active.erase(active.begin() + drop);
      continue;
    }

    // Longest feasible step along p, blocked by the nearest inactive row.
    double alpha = ray ? std::numeric_limits<double>::infinity() : 1.0;
    int blocker = -1;
    for (int i = 0; i < mi; ++i) {
      if (std::find(active.begin(), active.end(), i) != active.end()) continue;
      const double directional = problem.ineq_matrix.row(i).dot(p);
      if (directional >= -1e-13) continue;
      const double slack =
          problem.ineq_matrix.row(i).dot(out.x) - problem.ineq_rhs[i];
      const double limit = std::max(0.0, slack) / (-directional);
      if (limit < alpha - 1e-15) {
        alpha = limit;
        blocker = i;
      }
    }
    if (ray && blocker < 0) return fail(QPStatus::Unbounded);
    if (!std::isfinite(alpha)) return fail(QPStatus::NumericalFailure);
    out.x += alpha * p;
    if (blocker >= 0) {
      active.insert(
          std::upper_bound(active.begin(), active.end(), blocker), blocker);
    }
  }
  return fail(QPStatus::MaxIterations);
}

}  // namespace physmo
