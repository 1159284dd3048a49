#pragma once

#include <utility>
#include <vector>

#include "gammalink/rng.hpp"

namespace gammalink {

// Continuous piecewise-linear probability density on R, zero at both ends.
struct PLDensity1D {
    std::vector<double> x;  // strictly increasing breakpoints
    std::vector<double> f;  // values, f.front() == f.back() == 0

    static PLDensity1D from_knots(const std::vector<std::pair<double, double>>& knots);
    // two bumps with peaks 0.4 at x=0 and 0.2 at x=3, valley 0.1 at x=1.5
    static PLDensity1D two_bumps();

    void validate() const;
    double operator()(double t) const;
    double integral() const;
    double max_value() const;
    double sample(Rng& rng) const;
    PLDensity1D shifted(double dx) const;
};

} // namespace gammalink
