#pragma once

#include <Eigen/Dense>

namespace hjbport {

// Minimize (1/2) pi' Q pi + c' pi over the no-short-selling / leverage
// simplex {pi >= 0, 1'pi <= cap}. Q must be positive semidefinite; the HJB
// assembly guarantees it by clamping negative curvature to zero and marking
// the problem (curvature_clamped) so the solution carries that status.
struct QpProblem {
    Eigen::MatrixXd quadratic;
    Eigen::VectorXd linear;
    double cap = 0.0;
    bool curvature_clamped = false;
};

enum class QpStatus { Optimal, ClampedCurvature };

struct QpSolution {
    Eigen::VectorXd weights;
    double objective = 0.0;
    QpStatus status = QpStatus::Optimal;
    // Largest violation among stationarity, primal feasibility and
    // complementary slackness for the reported multipliers.
    double kkt_residual = 0.0;
    int iterations = 0;
};

// Primal active-set solve. Deterministic (lowest-index tie-breaking), exact
// for this polytope, with a vertex fast path when the quadratic term is
// negligible. Ties between optima resolve to pi = 0 (risk-free roll-up).
// Throws InputError on non-finite input, ConvergenceError past 10 * 2^m
// working-set changes.
QpSolution solve_qp(const QpProblem& problem);

// Exhaustive lattice search over {pi_i in {0, step, 2 step, ...}, 1'pi <= cap}.
// Test oracle only; m <= 3.
QpSolution brute_force_qp(const QpProblem& problem, double grid_step);

}  // namespace hjbport
