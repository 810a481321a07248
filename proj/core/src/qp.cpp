#include "hjbport/qp.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "hjbport/errors.hpp"

namespace hjbport {

namespace {

double objective_of(const QpProblem& problem, const Eigen::VectorXd& pi) {
    return 0.5 * pi.dot(problem.quadratic * pi) + problem.linear.dot(pi);
}

QpStatus status_of(const QpProblem& problem) {
    return problem.curvature_clamped ? QpStatus::ClampedCurvature : QpStatus::Optimal;
}

// KKT residual: max of stationarity, primal feasibility and complementary
// slackness violations for multipliers lambda (cap) and mu (bounds).
double kkt_residual_of(const QpProblem& problem, const Eigen::VectorXd& pi, double lambda) {
    const Eigen::VectorXd gradient = problem.quadratic * pi + problem.linear;
    double residual = 0.0;
    residual = std::max(residual, -lambda);
    for (int i = 0; i < pi.size(); ++i) {
        const double mu = gradient(i) + lambda;
        residual = std::max(residual, -mu);                  // dual feasibility
        residual = std::max(residual, std::abs(pi(i) * mu)); // slack on bound i
        residual = std::max(residual, -pi(i));               // primal bound
    }
    residual = std::max(residual, pi.sum() - problem.cap);                     // primal cap
    residual = std::max(residual, std::abs(lambda * (problem.cap - pi.sum()))); // slack on cap
    return residual;
}

// Natural magnitude of the objective over the feasible set; keeps every
// tolerance invariant under positive rescaling of (Q, c).
double objective_scale(const QpProblem& problem) {
    return problem.linear.cwiseAbs().sum() * problem.cap +
           problem.quadratic.cwiseAbs().maxCoeff() * problem.cap * problem.cap;
}

QpSolution finish(const QpProblem& problem, Eigen::VectorXd pi, double lambda, int iterations) {
    QpSolution solution;
    // Exact zero wins ties: if the solution gains nothing over the origin,
    // report the origin (the risk-free roll-up convention).
    const double objective = objective_of(problem, pi);
    const double scale = objective_scale(problem);
    if (objective > -1e-14 * scale) {
        pi.setZero();
        lambda = 0.0;
        for (int i = 0; i < pi.size(); ++i) lambda = std::max(lambda, -problem.linear(i));
    }
    solution.weights = pi;
    solution.objective = objective_of(problem, solution.weights);
    solution.status = status_of(problem);
    solution.kkt_residual = kkt_residual_of(problem, solution.weights, lambda);
    solution.iterations = iterations;
    return solution;
}

// Vertex scan for the pure LP min c'pi: candidates are the origin and
// cap * e_i. Lowest index wins ties; all c >= 0 keeps the origin.
QpSolution solve_lp_vertices(const QpProblem& problem) {
    const int m = static_cast<int>(problem.linear.size());
    int best = -1;
    double best_value = 0.0;
    for (int i = 0; i < m; ++i) {
        const double value = problem.cap * problem.linear(i);
        if (value < best_value) {
            best_value = value;
            best = i;
        }
    }
    Eigen::VectorXd pi = Eigen::VectorXd::Zero(m);
    double lambda = 0.0;
    if (best >= 0) {
        pi(best) = problem.cap;
        lambda = -problem.linear(best);  // stationarity on the cap face
    } else {
        for (int i = 0; i < m; ++i) lambda = std::max(lambda, -problem.linear(i));
    }
    return finish(problem, pi, lambda, 1);
}

struct SubproblemResult {
    bool stationary = false;   // candidate solves the equality-constrained QP
    Eigen::VectorXd point;     // full-size candidate (zeros on active bounds)
    double lambda = 0.0;       // cap multiplier when the cap is active
    Eigen::VectorXd ray;       // descent ray when not stationary
};

// Solve the equality-constrained subproblem with bounds in `active` pinned to
// zero and the cap constraint optionally pinned. For singular reduced systems
// returns either a min-norm stationary point or an unbounded descent ray.
SubproblemResult solve_subproblem(const QpProblem& problem, const std::vector<bool>& active,
                                  bool cap_active) {
    const int m = static_cast<int>(problem.linear.size());
    std::vector<int> free_index;
    for (int i = 0; i < m; ++i)
        if (!active[i]) free_index.push_back(i);
    const int f = static_cast<int>(free_index.size());

    SubproblemResult result;
    result.point = Eigen::VectorXd::Zero(m);
    if (f == 0) {
        result.stationary = true;
        return result;
    }

    Eigen::MatrixXd qff(f, f);
    Eigen::VectorXd cf(f);
    for (int a = 0; a < f; ++a) {
        cf(a) = problem.linear(free_index[a]);
        for (int b = 0; b < f; ++b)
            qff(a, b) = problem.quadratic(free_index[a], free_index[b]);
    }

    const int dim = cap_active ? f + 1 : f;
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::VectorXd rhs(dim);
    kkt.topLeftCorner(f, f) = qff;
    rhs.head(f) = -cf;
    if (cap_active) {
        kkt.topRightCorner(f, 1).setOnes();
        kkt.bottomLeftCorner(1, f).setOnes();
        rhs(f) = problem.cap;
    }

    Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
    const double scale =
        std::max(1e-300, qff.cwiseAbs().maxCoeff() + cf.cwiseAbs().maxCoeff() +
                             (cap_active ? std::abs(problem.cap) : 0.0));
    Eigen::VectorXd solution;
    if (lu.isInvertible()) {
        solution = lu.solve(rhs);
    } else {
        // Semidefinite reduced Hessian. A consistent system still has a
        // stationary minimizer (take the min-norm one); an inconsistent one
        // means the subproblem is unbounded along a kernel direction.
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(kkt);
        solution = cod.solve(rhs);
        const double residual = (kkt * solution - rhs).cwiseAbs().maxCoeff();
        if (residual > 1e-10 * scale) {
            Eigen::MatrixXd kernel = lu.kernel();
            // Pick the kernel direction of steepest descent for c. For the
            // bordered (cap-active) system the head of each kernel vector
            // already satisfies 1'd = 0, so it stays on the cap face.
            Eigen::VectorXd best_ray;
            double best_slope = -1e-12 * scale;
            for (int k = 0; k < kernel.cols(); ++k) {
                Eigen::VectorXd dir = kernel.col(k).head(f);
                const double norm = dir.norm();
                if (norm < 1e-14) continue;
                dir /= norm;
                double slope = cf.dot(dir);
                if (slope > 0.0) {
                    dir = -dir;
                    slope = -slope;
                }
                if (slope < best_slope) {
                    best_slope = slope;
                    best_ray = dir;
                }
            }
            if (best_ray.size() > 0) {
                result.ray = Eigen::VectorXd::Zero(m);
                for (int a = 0; a < f; ++a) result.ray(free_index[a]) = best_ray(a);
                return result;
            }
            // No usable ray: fall through with the least-squares point.
        }
    }
    for (int a = 0; a < f; ++a) result.point(free_index[a]) = solution(a);
    if (cap_active) result.lambda = solution(f);
    result.stationary = true;
    return result;
}

}  // namespace

QpSolution solve_qp(const QpProblem& problem) {
    const int m = static_cast<int>(problem.linear.size());
    if (m < 1) throw InputError("qp: empty problem");
    if (problem.quadratic.rows() != m || problem.quadratic.cols() != m)
        throw InputError("qp: quadratic dimensions do not match linear term");
    if (!problem.quadratic.allFinite() || !problem.linear.allFinite() ||
        !std::isfinite(problem.cap))
        throw InputError("qp: non-finite input");
    if (problem.cap < 0.0) throw InputError("qp: negative cap");

    if (problem.cap == 0.0)
        return finish(problem, Eigen::VectorXd::Zero(m), 0.0, 0);

    // Vertex fast path when the quadratic term cannot move the objective at
    // the scale of the feasible set (true LP after a curvature clamp).
    const double quad_scale = problem.quadratic.cwiseAbs().maxCoeff() * problem.cap * problem.cap;
    const double linear_scale = problem.linear.cwiseAbs().maxCoeff() * problem.cap;
    if (quad_scale == 0.0 && linear_scale == 0.0)
        return finish(problem, Eigen::VectorXd::Zero(m), 0.0, 0);
    if (quad_scale <= 1e-12 * linear_scale) return solve_lp_vertices(problem);

    const double dual_scale = problem.linear.cwiseAbs().maxCoeff() +
                              problem.quadratic.cwiseAbs().maxCoeff() * problem.cap;
    const double feas_tol = 1e-9;
    const int max_iterations = 10 * (1 << std::min(m, 20));

    Eigen::VectorXd current = Eigen::VectorXd::Zero(m);
    std::vector<bool> active(m, true);
    bool cap_active = false;

    for (int iteration = 1; iteration <= max_iterations; ++iteration) {
        SubproblemResult sub = solve_subproblem(problem, active, cap_active);

        if (!sub.stationary) {
            // Walk the descent ray to the nearest blocking constraint; the
            // feasible set is bounded so one always exists.
            double step = std::numeric_limits<double>::infinity();
            int blocker = -1;  // -2 encodes the cap
            for (int i = 0; i < m; ++i) {
                if (sub.ray(i) < -1e-14) {
                    const double limit = current(i) / -sub.ray(i);
                    if (limit < step) {
                        step = limit;
                        blocker = i;
                    }
                }
            }
            const double ray_sum = sub.ray.sum();
            if (!cap_active && ray_sum > 1e-14) {
                const double limit = (problem.cap - current.sum()) / ray_sum;
                if (limit < step) {
                    step = limit;
                    blocker = -2;
                }
            }
            if (blocker == -1)
                throw ConvergenceError("qp: unbounded ray on a bounded feasible set");
            current += step * sub.ray;
            if (blocker == -2)
                cap_active = true;
            else {
                active[blocker] = true;
                current(blocker) = 0.0;
            }
            continue;
        }

        const Eigen::VectorXd& candidate = sub.point;
        bool feasible = true;
        for (int i = 0; i < m; ++i)
            if (!active[i] && candidate(i) < -feas_tol) feasible = false;
        if (!cap_active && candidate.sum() > problem.cap + feas_tol) feasible = false;

        if (feasible) {
            current = candidate.cwiseMax(0.0);
            const double lambda = cap_active ? sub.lambda : 0.0;
            const Eigen::VectorXd gradient = problem.quadratic * current + problem.linear;

            // Dual check: drop the most negative multiplier, lowest index on
            // ties; the cap is considered after the bounds.
            int drop = -1;
            double most_negative = -1e-9 * dual_scale;
            for (int i = 0; i < m; ++i) {
                if (!active[i]) continue;
                const double mu = gradient(i) + lambda;
                if (mu < most_negative) {
                    most_negative = mu;
                    drop = i;
                }
            }
            bool drop_cap = false;
            if (cap_active && lambda < most_negative) {
                drop = -1;
                drop_cap = true;
            }
            if (drop == -1 && !drop_cap)
                return finish(problem, current, std::max(lambda, 0.0), iteration);
            if (drop_cap)
                cap_active = false;
            else
                active[drop] = false;
            continue;
        }

        // Blocked: step from the current iterate toward the candidate until
        // the first violated constraint becomes active.
        const Eigen::VectorXd direction = candidate - current;
        double step = 1.0;
        int blocker = -1;
        for (int i = 0; i < m; ++i) {
            if (!active[i] && direction(i) < -1e-14) {
                const double limit = current(i) / -direction(i);
                if (limit < step) {
                    step = limit;
                    blocker = i;
                }
            }
        }
        const double direction_sum = direction.sum();
        if (!cap_active && direction_sum > 1e-14) {
            const double limit = (problem.cap - current.sum()) / direction_sum;
            if (limit < step) {
                step = limit;
                blocker = -2;
            }
        }
        current += std::max(step, 0.0) * direction;
        if (blocker == -2)
            cap_active = true;
        else if (blocker >= 0) {
            active[blocker] = true;
            current(blocker) = 0.0;
        }
        // blocker == -1 with step == 1 cannot happen here (candidate was
        // infeasible), but the loop cap guards against degenerate stalls.
    }
    throw ConvergenceError("qp: active-set iteration cap exceeded");
}

QpSolution brute_force_qp(const QpProblem& problem, double grid_step) {
    const int m = static_cast<int>(problem.linear.size());
    if (m > 3) throw InputError("qp: brute force supports at most 3 assets");
    if (!(grid_step > 0.0)) throw InputError("qp: grid step must be positive");

    Eigen::VectorXd best = Eigen::VectorXd::Zero(m);
    double best_objective = 0.0;
    Eigen::VectorXd pi = Eigen::VectorXd::Zero(m);
    const auto consider = [&] {
        const double objective = objective_of(problem, pi);
        if (objective < best_objective - 1e-15) {
            best_objective = objective;
            best = pi;
        }
    };
    const long n0 = static_cast<long>(std::floor(problem.cap / grid_step + 1e-12));
    for (long i = 0; i <= n0; ++i) {
        pi(0) = static_cast<double>(i) * grid_step;
        if (m == 1) {
            consider();
            continue;
        }
        const long n1 = static_cast<long>(std::floor((problem.cap - pi(0)) / grid_step + 1e-12));
        for (long j = 0; j <= n1; ++j) {
            pi(1) = static_cast<double>(j) * grid_step;
            if (m == 2) {
                consider();
                continue;
            }
            const long n2 =
                static_cast<long>(std::floor((problem.cap - pi(0) - pi(1)) / grid_step + 1e-12));
            for (long k = 0; k <= n2; ++k) {
                pi(2) = static_cast<double>(k) * grid_step;
                consider();
            }
            pi(2) = 0.0;
        }
        pi(1) = 0.0;
    }

    QpSolution solution;
    solution.weights = best;
    solution.objective = best_objective;
    solution.status = status_of(problem);
    solution.kkt_residual = std::numeric_limits<double>::quiet_NaN();  // lattice point, no certificate
    solution.iterations = 0;
    return solution;
}

}  // namespace hjbport
