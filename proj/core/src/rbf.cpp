#include "hjbport/rbf.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include "hjbport/errors.hpp"

namespace hjbport {

Multiquadric::Multiquadric(double shape_parameter) : shape(shape_parameter) {
    if (!(shape > 0.0) || !std::isfinite(shape))
        throw InputError("rbf: shape parameter must be positive");
}

RbfBasis::RbfBasis(Eigen::VectorXd centers, double shape_parameter)
    : centers_(std::move(centers)), kernel_(shape_parameter) {
    const int n = static_cast<int>(centers_.size());
    if (n < 1) throw InputError("rbf: at least one center required");
    for (int i = 0; i + 1 < n; ++i)
        if (!(centers_(i) < centers_(i + 1)))
            throw InputError("rbf: centers must be strictly increasing");

    gram_.resize(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j) {
            const double value = kernel_.phi(std::abs(centers_(i) - centers_(j)));
            gram_(i, j) = value;
            gram_(j, i) = value;
        }
    lu_.compute(gram_);
    const double rcond = lu_.rcond();
    condition_ = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
}

Eigen::VectorXd RbfBasis::fit_coefficients(const Eigen::VectorXd& values) const {
    if (values.size() != centers_.size())
        throw InputError("rbf: value count does not match centers");
    if (!values.allFinite()) throw InputError("rbf: non-finite sample values");

    const double tolerance = 1e-8 * (1.0 + values.cwiseAbs().maxCoeff());
    Eigen::VectorXd coeffs = lu_.solve(values);
    Eigen::VectorXd residual = values - gram_ * coeffs;
    // A couple of refinement sweeps recover node exactness lost to the
    // ill-conditioned Gram solve; each sweep is two O(N^2) passes.
    for (int sweep = 0; sweep < 4 && residual.cwiseAbs().maxCoeff() > 0.5 * tolerance; ++sweep) {
        coeffs += lu_.solve(residual);
        residual = values - gram_ * coeffs;
    }
    if (!(residual.cwiseAbs().maxCoeff() <= tolerance)) {
        std::ostringstream msg;
        msg << "rbf: interpolation residual " << residual.cwiseAbs().maxCoeff()
            << " exceeds tolerance " << tolerance << " (condition estimate " << condition_ << ")";
        throw IllConditionedError(msg.str(), condition_);
    }
    return coeffs;
}

Eigen::MatrixXd RbfBasis::derivative_matrix_1() const {
    const int n = size();
    Eigen::MatrixXd d(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) d(i, j) = kernel_.d1(centers_(i) - centers_(j));
    return d;
}

Eigen::MatrixXd RbfBasis::derivative_matrix_2() const {
    const int n = size();
    Eigen::MatrixXd d(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) d(i, j) = kernel_.d2(centers_(i) - centers_(j));
    return d;
}

Interpolant::Interpolant(std::shared_ptr<const RbfBasis> basis, Eigen::VectorXd coefficients)
    : basis_(std::move(basis)), coefficients_(std::move(coefficients)) {
    if (!basis_) throw InputError("rbf: null basis");
    if (coefficients_.size() != basis_->centers().size())
        throw InputError("rbf: coefficient count does not match basis");
}

double Interpolant::eval(double x) const {
    const auto& centers = basis_->centers();
    const auto& kernel = basis_->kernel();
    double sum = 0.0;
    for (int i = 0; i < centers.size(); ++i)
        sum += coefficients_(i) * kernel.phi(std::abs(x - centers(i)));
    return sum;
}

double Interpolant::eval_d1(double x) const {
    const auto& centers = basis_->centers();
    const auto& kernel = basis_->kernel();
    double sum = 0.0;
    for (int i = 0; i < centers.size(); ++i)
        sum += coefficients_(i) * kernel.d1(x - centers(i));
    return sum;
}

double Interpolant::eval_d2(double x) const {
    const auto& centers = basis_->centers();
    const auto& kernel = basis_->kernel();
    double sum = 0.0;
    for (int i = 0; i < centers.size(); ++i)
        sum += coefficients_(i) * kernel.d2(x - centers(i));
    return sum;
}

void Interpolant::eval_all(double x, double& value, double& deriv1, double& deriv2) const {
    const auto& centers = basis_->centers();
    const double eps2 = basis_->shape() * basis_->shape();
    value = deriv1 = deriv2 = 0.0;
    for (int i = 0; i < centers.size(); ++i) {
        const double d = x - centers(i);
        const double p = std::sqrt(1.0 + d * d / eps2);
        const double c = coefficients_(i);
        value += c * p;
        deriv1 += c * d / (eps2 * p);
        deriv2 += c / (eps2 * p * p * p);
    }
}

Interpolant fit_interpolant(const Eigen::VectorXd& centers, const Eigen::VectorXd& values,
                            double shape_parameter) {
    auto basis = std::make_shared<RbfBasis>(centers, shape_parameter);
    Eigen::VectorXd coeffs = basis->fit_coefficients(values);
    return Interpolant(std::move(basis), std::move(coeffs));
}

}  // namespace hjbport
