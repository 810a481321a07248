#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <memory>

namespace hjbport {

// Multiquadric kernel phi(r) = sqrt(1 + r^2/eps^2) with the exact first and
// second derivatives of x -> phi(|x - c|) expressed in the signed
// displacement d = x - c:
//   d/dx   phi = d / (eps^2 phi)
//   d2/dx2 phi = 1 / (eps^2 phi^3)
struct Multiquadric {
    explicit Multiquadric(double shape_parameter);

    double phi(double r) const {
        const double u = r / shape;
        return std::sqrt(1.0 + u * u);
    }
    double d1(double displacement) const {
        return displacement / (shape * shape * phi(displacement));
    }
    double d2(double displacement) const {
        const double p = phi(displacement);
        return 1.0 / (shape * shape * p * p * p);
    }

    double shape;
};

// Node set with its Gram matrix factored once; every fit against the same
// centers reuses the factorization. The multiquadric Gram matrix is symmetric
// but not positive definite, so the solve is LU with partial pivoting.
class RbfBasis {
  public:
    RbfBasis(Eigen::VectorXd centers, double shape_parameter);

    const Eigen::VectorXd& centers() const { return centers_; }
    int size() const { return static_cast<int>(centers_.size()); }
    double shape() const { return kernel_.shape; }
    const Multiquadric& kernel() const { return kernel_; }
    const Eigen::MatrixXd& gram() const { return gram_; }

    // Reciprocal condition estimate of the factored Gram matrix.
    double condition_estimate() const { return condition_; }
    bool condition_warning() const { return condition_ > 1e12; }

    // Solves Gram * xi = values, polished by iterative refinement until the
    // node residual meets the exactness tolerance 1e-8 * (1 + ||values||_inf).
    // Throws IllConditionedError when refinement cannot reach it.
    Eigen::VectorXd fit_coefficients(const Eigen::VectorXd& values) const;

    // Dense maps from coefficients to interpolant derivatives at the nodes.
    Eigen::MatrixXd derivative_matrix_1() const;
    Eigen::MatrixXd derivative_matrix_2() const;

  private:
    Eigen::VectorXd centers_;
    Multiquadric kernel_;
    Eigen::MatrixXd gram_;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
    double condition_ = 0.0;
};

// Immutable fitted interpolant I(x) = sum_i xi_i phi(|x - x_i|).
class Interpolant {
  public:
    Interpolant(std::shared_ptr<const RbfBasis> basis, Eigen::VectorXd coefficients);

    double eval(double x) const;
    double eval_d1(double x) const;
    double eval_d2(double x) const;

    // Single pass computing value and both derivatives.
    void eval_all(double x, double& value, double& deriv1, double& deriv2) const;

    const Eigen::VectorXd& coefficients() const { return coefficients_; }
    const RbfBasis& basis() const { return *basis_; }

  private:
    std::shared_ptr<const RbfBasis> basis_;
    Eigen::VectorXd coefficients_;
};

// One-shot fit building a fresh basis; prefer RbfBasis + fit_coefficients
// when fitting repeatedly against the same centers.
Interpolant fit_interpolant(const Eigen::VectorXd& centers, const Eigen::VectorXd& values,
                            double shape_parameter);

}  // namespace hjbport
