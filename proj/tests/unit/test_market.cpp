#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <hjbport/config.hpp>
#include <hjbport/errors.hpp>
#include <hjbport/market.hpp>

#include "helpers.hpp"

using namespace hjbport;

namespace {

// Trapezoid quadrature of f(s)^2 over [t, T], dense enough to pin the closed
// form to single-digit ulps of the value scale.
double quad_boundary(const TargetSpec& spec, double t) {
    const int n = 200000;
    const double h = (spec.horizon - t) / n;
    double acc = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double s = t + i * h;
        const double f = spec.target(s);
        acc += (i == 0 || i == n) ? 0.5 * f * f : f * f;
    }
    const double fT = spec.target(spec.horizon);
    return 0.5 * fT * fT + acc * h / (2.0 * spec.horizon);
}

}  // namespace

TEST_SUITE("market") {
    TEST_CASE("affine schedule and levels") {
        const TargetSpec t = testutil::small_target(10.0, 0.01, 0.002, 100.0);
        CHECK(t.target(0.0) == doctest::Approx(100.0));
        CHECK(t.target(10.0) == doctest::Approx(112.0));
        CHECK(t.required_level(10.0) == doctest::Approx(110.0));
        CHECK(t.start_wealth() == doctest::Approx(100.0));
        CHECK(t.x_star() == doctest::Approx(112.0));
        t.validate();
    }

    TEST_CASE("zero-wealth value, hand result") {
        // f(s) = 100 + s over 10 years: 1/2 * 110^2 + (1/20) * (110^3 - 100^3)/3.
        const TargetSpec t = testutil::small_target(10.0, 0.01, 0.0, 100.0);
        CHECK(t.boundary_left_value(0.0) ==
              doctest::Approx(11566.666666666666).epsilon(1e-12));
        CHECK(t.boundary_left_value(10.0) == doctest::Approx(6050.0).epsilon(1e-12));
    }

    TEST_CASE("zero-wealth value matches quadrature, affine") {
        const TargetSpec t = testutil::small_target(10.0, 0.01, 0.005, 100.0);
        for (double s : {0.0, 1.7, 5.0, 9.99, 10.0}) {
            CHECK(t.boundary_left_value(s) == doctest::Approx(quad_boundary(t, s)).epsilon(1e-9));
        }
    }

    TEST_CASE("zero-wealth value matches quadrature, tabulated") {
        const TargetSpec t = preset("pension-cap1").target;
        for (double s : {0.0, 2.5, 7.0, 14.3, 15.0}) {
            CHECK(t.boundary_left_value(s) == doctest::Approx(quad_boundary(t, s)).epsilon(1e-8));
        }
    }

    TEST_CASE("zero-wealth value decreases in time") {
        const TargetSpec t = testutil::small_target(10.0, 0.02, 0.002, 100.0);
        double prev = t.boundary_left_value(0.0);
        for (int i = 1; i <= 20; ++i) {
            const double cur = t.boundary_left_value(0.5 * i);
            CHECK(cur < prev);
            prev = cur;
        }
    }

    TEST_CASE("tabulated schedule interpolates its knots") {
        const TargetSpec t = preset("pension-cap3").target;
        REQUIRE(t.variant == TargetVariant::Tabulated);
        for (std::size_t i = 0; i < t.knot_times.size(); ++i) {
            CHECK(t.required_level(t.knot_times[i]) == doctest::Approx(t.knot_levels[i]));
            CHECK(t.target(t.knot_times[i]) ==
                  doctest::Approx(t.scale * t.knot_levels[i]));
        }
        // Midpoint of the first segment is the knot average.
        const double mid = 0.5 * (t.knot_times[0] + t.knot_times[1]);
        CHECK(t.required_level(mid) ==
              doctest::Approx(0.5 * (t.knot_levels[0] + t.knot_levels[1])));
        // x* dominates the schedule everywhere.
        for (double s = 0.0; s <= t.horizon; s += 0.01) {
            CHECK(t.target(s) <= t.x_star() + 1e-12);
        }
        CHECK(t.start_wealth() == doctest::Approx(t.knot_levels[0]));
    }

    TEST_CASE("excess drift positive and validated") {
        const MarketParams m = testutil::small_market(1.0);
        m.validate();
        const Eigen::VectorXd ex = m.excess_drift();
        REQUIRE(ex.size() == 2);
        CHECK(ex[0] == doctest::Approx(0.0099));
        CHECK(ex[1] == doctest::Approx(0.0499));
        CHECK(ex.minCoeff() > 0.0);
    }

    TEST_CASE("vols and correlation compose the covariance") {
        Eigen::VectorXd vols(2);
        vols << 0.2, 0.3;
        Eigen::MatrixXd corr(2, 2);
        corr << 1.0, -0.4, -0.4, 1.0;
        Eigen::VectorXd drift(2);
        drift << 0.05, 0.06;
        const MarketParams m = MarketParams::from_vols_corr(0.01, drift, vols, corr, 1.0);
        CHECK(m.covariance(0, 0) == doctest::Approx(0.04));
        CHECK(m.covariance(1, 1) == doctest::Approx(0.09));
        CHECK(m.covariance(0, 1) == doctest::Approx(-0.4 * 0.2 * 0.3));
        CHECK(m.covariance(1, 0) == doctest::Approx(m.covariance(0, 1)));
        m.validate();
    }

    TEST_CASE("validation rejects broken inputs") {
        MarketParams m = testutil::small_market(1.0);
        m.covariance(0, 1) = 0.5;  // asymmetric
        CHECK_THROWS_AS(m.validate(), InputError);

        m = testutil::small_market(1.0);
        m.covariance = Eigen::Matrix2d{{1.0, 2.0}, {2.0, 1.0}};  // indefinite
        CHECK_THROWS_AS(m.validate(), InputError);

        m = testutil::small_market(1.0);
        m.drift[0] = m.risk_free;  // no excess return
        CHECK_THROWS_AS(m.validate(), InputError);

        m = testutil::small_market(-1.0);
        CHECK_THROWS_AS(m.validate(), InputError);

        TargetSpec t = testutil::small_target(0.0, 0.01, 0.0, 100.0);
        CHECK_THROWS_AS(t.validate(), InputError);
        t = testutil::small_target(10.0, 0.01, -0.001, 100.0);
        CHECK_THROWS_AS(t.validate(), InputError);
        t = preset("pension-cap1").target;
        t.knot_times[1] = t.knot_times[0];  // not strictly increasing
        CHECK_THROWS_AS(t.validate(), InputError);
    }

    TEST_CASE("time arguments outside the horizon are rejected") {
        const TargetSpec t = testutil::small_target(10.0, 0.01, 0.0, 100.0);
        CHECK_THROWS_AS(t.target(-0.5), InputError);
        CHECK_THROWS_AS(t.required_level(10.5), InputError);
        CHECK_THROWS_AS(t.boundary_left_value(11.0), InputError);
    }
}
