#include "hjbport/market.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hjbport/errors.hpp"

namespace hjbport {

Eigen::VectorXd MarketParams::excess_drift() const {
    return drift.array() - risk_free;
}

void MarketParams::validate() const {
    const int m = num_assets();
    if (m < 1) throw InputError("market: at least one risky asset required");
    if (covariance.rows() != m || covariance.cols() != m)
        throw InputError("market: covariance dimensions do not match drift");
    if (!drift.allFinite() || !covariance.allFinite() || !std::isfinite(risk_free))
        throw InputError("market: non-finite parameter");

    const double scale = std::max(1e-300, covariance.cwiseAbs().maxCoeff());
    const double asym = (covariance - covariance.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * scale) throw InputError("market: covariance not symmetric");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(covariance);
    const double floor = -1e-10 * std::max(covariance.trace(), 0.0) - 1e-300;
    if (eig.eigenvalues().minCoeff() < floor)
        throw InputError("market: covariance not positive semidefinite");

    for (int i = 0; i < m; ++i) {
        if (drift(i) - risk_free <= 0.0) {
            std::ostringstream msg;
            msg << "market: drift of asset " << i << " must exceed the risk-free rate";
            throw InputError(msg.str());
        }
    }
    if (leverage_cap < 0.0) throw InputError("market: leverage cap must be non-negative");
}

MarketParams MarketParams::from_vols_corr(double risk_free, const Eigen::VectorXd& drift,
                                          const Eigen::VectorXd& vols,
                                          const Eigen::MatrixXd& corr, double leverage_cap) {
    if (vols.size() != drift.size() || corr.rows() != drift.size() || corr.cols() != drift.size())
        throw InputError("market: vols/corr dimensions do not match drift");
    MarketParams params;
    params.risk_free = risk_free;
    params.drift = drift;
    params.covariance = vols.asDiagonal() * corr * vols.asDiagonal();
    // Symmetrize away the rounding left by the triple product.
    params.covariance = 0.5 * (params.covariance + params.covariance.transpose()).eval();
    params.leverage_cap = leverage_cap;
    params.validate();
    return params;
}

namespace {

double interp_knots(const std::vector<double>& ts, const std::vector<double>& ys, double t) {
    // ts is strictly increasing and brackets t (validated on construction).
    const auto upper = std::upper_bound(ts.begin(), ts.end(), t);
    if (upper == ts.begin()) return ys.front();
    if (upper == ts.end()) return ys.back();
    const std::size_t hi = static_cast<std::size_t>(upper - ts.begin());
    const std::size_t lo = hi - 1;
    const double w = (t - ts[lo]) / (ts[hi] - ts[lo]);
    return ys[lo] + w * (ys[hi] - ys[lo]);
}

// integral of (alpha + beta s)^2 ds from a to b.
double affine_square_integral(double alpha, double beta, double a, double b) {
    auto antiderivative = [&](double s) {
        return alpha * alpha * s + alpha * beta * s * s + beta * beta * s * s * s / 3.0;
    };
    return antiderivative(b) - antiderivative(a);
}

}  // namespace

double TargetSpec::target(double t) const {
    if (t < -1e-12 || t > horizon * (1.0 + 1e-12))
        throw InputError("target: time outside [0, T]");
    t = std::clamp(t, 0.0, horizon);
    if (variant == TargetVariant::Affine)
        return (1.0 + (required_return + margin_rate) * t) * initial_wealth;
    return scale * interp_knots(knot_times, knot_levels, t);
}

double TargetSpec::required_level(double t) const {
    if (t < -1e-12 || t > horizon * (1.0 + 1e-12))
        throw InputError("target: time outside [0, T]");
    t = std::clamp(t, 0.0, horizon);
    if (variant == TargetVariant::Affine)
        return (1.0 + required_return * t) * initial_wealth;
    return interp_knots(knot_times, knot_levels, t);
}

double TargetSpec::x_star() const {
    if (variant == TargetVariant::Affine)
        return std::max(target(0.0), target(horizon));
    // Piecewise linear attains its maximum at a knot (or the horizon cut).
    double best = std::max(target(0.0), target(horizon));
    for (std::size_t i = 0; i < knot_times.size(); ++i)
        if (knot_times[i] > 0.0 && knot_times[i] < horizon)
            best = std::max(best, scale * knot_levels[i]);
    return best;
}

double TargetSpec::boundary_left_value(double t) const {
    if (t < -1e-12 || t > horizon * (1.0 + 1e-12))
        throw InputError("boundary_left_value: time outside [0, T]");
    t = std::clamp(t, 0.0, horizon);
    const double terminal = target(horizon);
    double integral = 0.0;
    if (variant == TargetVariant::Affine) {
        const double rho = required_return + margin_rate;
        integral = initial_wealth * initial_wealth *
                   affine_square_integral(1.0, rho, t, horizon);
    } else {
        // f is linear on each knot interval; integrate f^2 in closed form
        // over [t, T] piece by piece.
        for (std::size_t i = 0; i + 1 < knot_times.size(); ++i) {
            const double a = std::max(knot_times[i], t);
            const double b = std::min(knot_times[i + 1], horizon);
            if (b <= a) continue;
            const double slope =
                (knot_levels[i + 1] - knot_levels[i]) / (knot_times[i + 1] - knot_times[i]);
            const double alpha = scale * (knot_levels[i] - slope * knot_times[i]);
            const double beta = scale * slope;
            integral += affine_square_integral(alpha, beta, a, b);
        }
    }
    return 0.5 * terminal * terminal + integral / (2.0 * horizon);
}

void TargetSpec::validate() const {
    if (horizon <= 0.0) throw InputError("target: horizon must be positive");
    if (variant == TargetVariant::Affine) {
        if (initial_wealth <= 0.0) throw InputError("target: initial wealth must be positive");
        if (margin_rate < 0.0) throw InputError("target: margin rate must be non-negative");
        if (target(0.0) <= 0.0 || target(horizon) <= 0.0)
            throw InputError("target: schedule must stay positive on [0, T]");
    } else {
        if (knot_times.size() != knot_levels.size() || knot_times.size() < 2)
            throw InputError("target: need at least two knots");
        for (std::size_t i = 0; i + 1 < knot_times.size(); ++i)
            if (knot_times[i + 1] <= knot_times[i])
                throw InputError("target: knot times must be strictly increasing");
        if (knot_times.front() > 0.0 || knot_times.back() < horizon)
            throw InputError("target: knots must cover [0, T]");
        if (scale <= 0.0) throw InputError("target: scale must be positive");
        // Piecewise-linear positivity holds iff it holds at the knots in
        // range and at both endpoint cuts.
        if (required_level(0.0) <= 0.0 || required_level(horizon) <= 0.0)
            throw InputError("target: schedule must stay positive on [0, T]");
        for (std::size_t i = 0; i < knot_times.size(); ++i)
            if (knot_times[i] > 0.0 && knot_times[i] < horizon && knot_levels[i] <= 0.0)
                throw InputError("target: schedule must stay positive on [0, T]");
    }
}

}  // namespace hjbport
