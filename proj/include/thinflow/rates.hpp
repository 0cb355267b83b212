// rates.hpp
//
// Least-squares convergence-rate fits on log-log data.  Given per-epsilon
// error values, fit ln(err) ~ slope * ln(eps) + intercept.  Values at or
// below the floating-point floor are excluded (they measure roundoff, not
// the rate); a fit needs at least three surviving points to be reported.
#pragma once

#include <cmath>
#include <vector>

#include "thinflow/common.hpp"

namespace thinflow {

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double max_residual = 0.0;  // worst |ln err - fit| over the used points
    int points_used = 0;
    bool ok = false;  // false when too few points survive the floor guard
};

inline RateFit fit_rate(const std::vector<double>& epsilons, const std::vector<double>& errors,
                        double floor = 1e-13) {
    if (epsilons.size() != errors.size())
        throw ConfigError("fit_rate: epsilon and error lists differ in length");
    std::vector<double> x, y;
    for (size_t i = 0; i < epsilons.size(); ++i) {
        if (!(epsilons[i] > 0.0)) throw ConfigError("fit_rate: epsilon must be positive");
        if (!std::isfinite(errors[i]) || errors[i] <= floor) continue;
        x.push_back(std::log(epsilons[i]));
        y.push_back(std::log(errors[i]));
    }
    RateFit fit;
    fit.points_used = static_cast<int>(x.size());
    if (x.size() < 3) return fit;

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    double n = static_cast<double>(x.size());
    double denom = n * sxx - sx * sx;
    if (std::abs(denom) < 1e-30) return fit;
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;
    for (size_t i = 0; i < x.size(); ++i)
        fit.max_residual =
            std::max(fit.max_residual, std::abs(y[i] - fit.slope * x[i] - fit.intercept));
    fit.ok = true;
    return fit;
}

}  // namespace thinflow
