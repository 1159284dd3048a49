#pragma once

#include <string>
#include <vector>

#include "gammalink/space.hpp"

namespace gammalink {

enum class Shape { uniform, epanechnikov, triangular, gauss };

// Non-increasing, right-continuous profile with K(0) = 1.
struct Kernel {
    Shape shape = Shape::uniform;
    double cutoff = 0.0;  // gauss only

    static Kernel parse(const std::string& s);
    std::string name() const;

    double operator()(double r) const;
    // min{u : K(u) <= t}
    double inverse(double t) const;
    double support() const { return shape == Shape::gauss ? cutoff : 1.0; }
    // integral of K(|x|/s) over R^d
    double volume(int d, double s) const;
};

double unit_ball_volume(int d);

// sum_y w_y K(d(x,y)/s)
double density(const Space& X, const Kernel& K, std::size_t x, double s);

// points with density >= k at bandwidth s
std::vector<bool> filtration_membership(const Space& X, const Kernel& K, double s, double k);

} // namespace gammalink
