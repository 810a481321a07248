#pragma once

#include <Eigen/Dense>
#include <vector>

namespace hjbport {

// Financial model inputs: risk-free rate, risky-asset drift vector and
// covariance, and the leverage cap defining the admissible weight set
// {pi >= 0, 1'pi <= cap}. All rates are per year.
//
// Accessors take a time argument so time-varying coefficients fit the
// interface; every shipped configuration uses constants.
struct MarketParams {
    double risk_free = 0.0;
    Eigen::VectorXd drift;
    Eigen::MatrixXd covariance;
    double leverage_cap = 1.0;

    int num_assets() const { return static_cast<int>(drift.size()); }

    double rate(double /*t*/) const { return risk_free; }
    const Eigen::VectorXd& drift_at(double /*t*/) const { return drift; }
    const Eigen::MatrixXd& covariance_at(double /*t*/) const { return covariance; }

    // b - r1, componentwise strictly positive by the standing assumption.
    Eigen::VectorXd excess_drift() const;

    // Throws InputError when an invariant fails: covariance symmetric PSD,
    // every drift component above the risk-free rate, non-negative cap.
    void validate() const;

    // Convenience constructor from volatilities and a correlation matrix.
    static MarketParams from_vols_corr(double risk_free, const Eigen::VectorXd& drift,
                                       const Eigen::VectorXd& vols,
                                       const Eigen::MatrixXd& corr, double leverage_cap);
};

enum class TargetVariant { Affine, Tabulated };

// Deterministic target-wealth schedule.
//
// Affine: f(t) = (1 + (required_return + margin_rate) t) x0. The margin rate
// deliberately lifts the schedule the solver tracks; reported statistics
// compare wealth against the unmargined required level (1 + required_return t) x0,
// which is what the results tables quote.
//
// Tabulated: knot_levels holds income-minus-expense values at knot_times;
// f(t) = scale * linear interpolation, while the required level for statistics
// is the unscaled interpolation. Initial wealth is the level at t=0.
struct TargetSpec {
    TargetVariant variant = TargetVariant::Affine;
    double horizon = 0.0;

    // Affine fields.
    double initial_wealth = 0.0;
    double required_return = 0.0;
    double margin_rate = 0.0;

    // Tabulated fields.
    std::vector<double> knot_times;
    std::vector<double> knot_levels;
    double scale = 1.0;

    // The schedule the solver and policy track (margin / scale applied).
    double target(double t) const;

    // The comparison level for achievement rate and tracking error
    // (margin / scale excluded).
    double required_level(double t) const;

    // Starting wealth of every simulated path: required_level(0).
    double start_wealth() const { return required_level(0.0); }

    // max over [0,T] of target(t); right boundary of the solve domain.
    double x_star() const;

    // V_t(0) = 1/2 f(T)^2 + 1/(2T) * integral_t^T f(s)^2 ds, evaluated in
    // closed form (f is affine or piecewise linear, so f^2 integrates exactly).
    double boundary_left_value(double t) const;

    void validate() const;
};

}  // namespace hjbport
