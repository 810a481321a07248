#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <hjbport/rbf.hpp>
#include <random>

using namespace hjbport;

namespace {

Eigen::VectorXd unit_grid(int n, double h) {
    Eigen::VectorXd x(n);
    for (int i = 0; i < n; ++i) x[i] = i * h;
    return x;
}

}  // namespace

TEST_SUITE("rbf") {
    TEST_CASE("kernel identities") {
        const Multiquadric k(0.25);
        CHECK(k.phi(0.0) == doctest::Approx(1.0));
        CHECK(k.d1(0.0) == doctest::Approx(0.0));
        CHECK(k.d2(0.0) == doctest::Approx(1.0 / (0.25 * 0.25)));
        // phi(|d|) differentiated numerically matches the closed forms. The
        // second difference needs a wider step or cancellation noise
        // (eps_mach * phi / h^2) dominates the tiny far-field curvature.
        for (double d : {-1.3, -0.2, 0.05, 0.7, 2.0}) {
            const double h1 = 1e-6, h2 = 1e-4;
            const double fd1 = (k.phi(std::abs(d + h1)) - k.phi(std::abs(d - h1))) / (2 * h1);
            const double fd2 =
                (k.phi(std::abs(d + h2)) - 2 * k.phi(std::abs(d)) + k.phi(std::abs(d - h2))) /
                (h2 * h2);
            CHECK(k.d1(d) == doctest::Approx(fd1).epsilon(1e-7));
            CHECK(k.d2(d) == doctest::Approx(fd2).epsilon(1e-4));
        }
        // Odd first derivative, even second derivative.
        CHECK(k.d1(0.8) == doctest::Approx(-k.d1(-0.8)));
        CHECK(k.d2(0.8) == doctest::Approx(k.d2(-0.8)));
    }

    TEST_CASE("fit reproduces node values to 1e-8") {
        const Eigen::VectorXd x = unit_grid(40, 0.5);
        std::mt19937_64 gen(42);
        std::uniform_real_distribution<double> u(-5.0, 5.0);
        Eigen::VectorXd y(x.size());
        for (int i = 0; i < y.size(); ++i) y[i] = u(gen);

        RbfBasis basis(x, 0.25);
        const Eigen::VectorXd xi = basis.fit_coefficients(y);
        const Interpolant f(std::make_shared<RbfBasis>(x, 0.25), xi);
        const double tol = 1e-8 * (1.0 + y.cwiseAbs().maxCoeff());
        for (int i = 0; i < x.size(); ++i) {
            CHECK(std::abs(f.eval(x[i]) - y[i]) <= tol);
        }
    }

    TEST_CASE("interpolant derivatives match finite differences") {
        const Eigen::VectorXd x = unit_grid(30, 0.5);
        Eigen::VectorXd y(x.size());
        for (int i = 0; i < y.size(); ++i) y[i] = std::sin(0.7 * x[i]) + 0.1 * x[i] * x[i];

        const Interpolant f = fit_interpolant(x, y, 0.25);
        for (double p : {1.1, 3.7, 6.25, 10.4, 13.9}) {
            const double h1 = 1e-6;
            const double fd1 = (f.eval(p + h1) - f.eval(p - h1)) / (2 * h1);
            CHECK(f.eval_d1(p) == doctest::Approx(fd1).epsilon(1e-5));
            const double h2 = 1e-4;
            const double fd2 = (f.eval(p + h2) - 2 * f.eval(p) + f.eval(p - h2)) / (h2 * h2);
            CHECK(f.eval_d2(p) == doctest::Approx(fd2).epsilon(1e-5));
        }
    }

    TEST_CASE("eval_all agrees with the single evaluators") {
        const Eigen::VectorXd x = unit_grid(25, 0.5);
        Eigen::VectorXd y(x.size());
        for (int i = 0; i < y.size(); ++i) y[i] = std::exp(-0.1 * x[i]);
        const Interpolant f = fit_interpolant(x, y, 0.25);
        for (double p : {0.3, 4.44, 11.8}) {
            double v, d1, d2;
            f.eval_all(p, v, d1, d2);
            CHECK(v == doctest::Approx(f.eval(p)).epsilon(1e-14));
            CHECK(d1 == doctest::Approx(f.eval_d1(p)).epsilon(1e-14));
            CHECK(d2 == doctest::Approx(f.eval_d2(p)).epsilon(1e-14));
        }
    }

    TEST_CASE("derivative matrices evaluate at the nodes") {
        const Eigen::VectorXd x = unit_grid(20, 0.5);
        Eigen::VectorXd y(x.size());
        for (int i = 0; i < y.size(); ++i) y[i] = std::cos(0.5 * x[i]);
        auto basis = std::make_shared<RbfBasis>(x, 0.25);
        const Eigen::VectorXd xi = basis->fit_coefficients(y);
        const Eigen::VectorXd d1 = basis->derivative_matrix_1() * xi;
        const Eigen::VectorXd d2 = basis->derivative_matrix_2() * xi;
        const Interpolant f(basis, xi);
        for (int i = 0; i < x.size(); ++i) {
            CHECK(d1[i] == doctest::Approx(f.eval_d1(x[i])).epsilon(1e-12));
            CHECK(d2[i] == doctest::Approx(f.eval_d2(x[i])).epsilon(1e-12));
        }
    }

    TEST_CASE("smooth function interpolates accurately between nodes") {
        // At shape = h/2 the kernel behaves like a softened linear spline, so
        // the midpoint error bound h^2 |f''| / 8 = 0.0078 is the right scale.
        const Eigen::VectorXd x = unit_grid(41, 0.25);
        Eigen::VectorXd y(x.size());
        for (int i = 0; i < y.size(); ++i) y[i] = std::sin(x[i]);
        const Interpolant f = fit_interpolant(x, y, 0.125);
        double worst = 0.0;
        for (double p = 1.0; p <= 9.0; p += 0.013) {
            worst = std::max(worst, std::abs(f.eval(p) - std::sin(p)));
        }
        CHECK(worst < 0.01);
    }

    TEST_CASE("condition estimate is sane for the working grid") {
        const Eigen::VectorXd x = unit_grid(226, 0.5);
        const RbfBasis basis(x, 0.25);
        CHECK(basis.condition_estimate() > 1.0);
        CHECK_FALSE(basis.condition_warning());
    }
}
