#pragma once

#include <vector>

#include "physmo/types.hpp"

namespace physmo {

// Convex quadratic program
//   minimize    0.5 x' H x + g' x
//   subject to  A x  = b        (eq_matrix, eq_rhs)
//               C x >= d        (ineq_matrix, ineq_rhs)
// H must be symmetric positive semidefinite. Two-sided bounds are expressed
// as paired rows of C.
struct QPProblem {
  MatX hessian;
  VecX gradient;
  MatX eq_matrix;   // may have zero rows
  VecX eq_rhs;
  MatX ineq_matrix;  // may have zero rows
  VecX ineq_rhs;

  int variables() const { return static_cast<int>(gradient.size()); }
};

enum class QPStatus {
  Optimal,
  Infeasible,
  Unbounded,
  MaxIterations,
  NumericalFailure,
};

const char* to_string(QPStatus status);

// Residuals of the first-order optimality system, all as max norms.
struct QPDiagnostics {
  double stationarity = 0.0;
  double primal_feasibility = 0.0;
  double dual_feasibility = 0.0;
  double complementarity = 0.0;
  double objective = 0.0;
  int iterations = 0;
};

struct QPSolution {
  QPStatus status = QPStatus::NumericalFailure;
  VecX x;
  VecX eq_multipliers;
  VecX ineq_multipliers;
  std::vector<int> active_set;  // final active inequality rows, ascending
  QPDiagnostics diagnostics;
};

QPDiagnostics evaluate_kkt(const QPProblem& problem, const VecX& x,
                           const VecX& eq_multipliers,
                           const VecX& ineq_multipliers);

// Deterministic primal active-set solver. Singular Hessians are handled by
// minimum-norm subproblem solves, so ties (e.g. symmetric force splits)
// resolve to the same answer on every run. Constraint add/drop uses
// lowest-index selection.
class QPSolver {
 public:
  struct Options {
    int max_iterations = 200;
    double constraint_tolerance = 1e-9;   // feasibility slack
    double multiplier_tolerance = 1e-9;   // dual sign slack
    double step_tolerance = 1e-11;        // "no move" threshold
  };

  QPSolver() = default;
  explicit QPSolver(Options options) : options_(options) {}

  // Finds a feasible start on its own (phase-1) when no hint is given or the
  // hint turns out infeasible.
  QPSolution solve(const QPProblem& problem) const;
  QPSolution solve(const QPProblem& problem, const VecX& start_hint) const;

  const Options& options() const { return options_; }

 private:
  QPSolution solve_feasible(const QPProblem& problem, VecX x0) const;
  bool find_feasible_start(const QPProblem& problem, VecX& x0) const;

  Options options_;
};

}  // namespace physmo
