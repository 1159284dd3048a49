#include "gammalink/kernels.hpp"

#include <cmath>
#include <cstdio>

#include <boost/math/special_functions/gamma.hpp>

namespace gammalink {

Kernel Kernel::parse(const std::string& s) {
    Kernel K;
    if (s == "uniform") {
        K.shape = Shape::uniform;
    } else if (s == "epanechnikov") {
        K.shape = Shape::epanechnikov;
    } else if (s == "triangular") {
        K.shape = Shape::triangular;
    } else if (s.rfind("gauss:", 0) == 0) {
        K.shape = Shape::gauss;
        char* end = nullptr;
        const std::string v = s.substr(6);
        K.cutoff = std::strtod(v.c_str(), &end);
        if (v.empty() || end != v.c_str() + v.size() || !(K.cutoff > 0.0) || !std::isfinite(K.cutoff))
            throw validation_error("gauss cutoff must be a positive number");
    } else {
        throw validation_error("unknown kernel '" + s + "'");
    }
    return K;
}

std::string Kernel::name() const {
    switch (shape) {
    case Shape::uniform: return "uniform";
    case Shape::epanechnikov: return "epanechnikov";
    case Shape::triangular: return "triangular";
    case Shape::gauss: {
        char buf[64];
        std::snprintf(buf, sizeof buf, "gauss:%.17g", cutoff);
        return buf;
    }
    }
    return "";
}

double Kernel::operator()(double r) const {
    if (r < 0.0) throw validation_error("kernel argument must be >= 0");
    switch (shape) {
    case Shape::uniform: return r < 1.0 ? 1.0 : 0.0;
    case Shape::epanechnikov: return r < 1.0 ? 1.0 - r * r : 0.0;
    case Shape::triangular: return r < 1.0 ? 1.0 - r : 0.0;
    case Shape::gauss: return r < cutoff ? std::exp(-0.5 * r * r) : 0.0;
    }
    return 0.0;
}

double Kernel::inverse(double t) const {
    if (!(t > 0.0)) throw validation_error("kernel inverse needs t > 0");
    if (t >= 1.0) return 0.0;
    switch (shape) {
    case Shape::uniform: return 1.0;
    case Shape::epanechnikov: return std::sqrt(1.0 - t);
    case Shape::triangular: return 1.0 - t;
    case Shape::gauss: return std::min(std::sqrt(-2.0 * std::log(t)), cutoff);
    }
    return 0.0;
}

double unit_ball_volume(int d) { return std::pow(M_PI, 0.5 * d) / std::tgamma(0.5 * d + 1.0); }

double Kernel::volume(int d, double s) const {
    if (d < 1) throw validation_error("dimension must be >= 1");
    if (!(s > 0.0)) throw validation_error("scale must be > 0");
    const double w = unit_ball_volume(d);
    const double sd = std::pow(s, d);
    switch (shape) {
    case Shape::uniform: return w * sd;
    // d*w*int_0^1 (1-r^2) r^{d-1} dr = w*2/(d+2)
    case Shape::epanechnikov: return w * sd * 2.0 / (d + 2.0);
    // d*w*int_0^1 (1-r) r^{d-1} dr = w/(d+1)
    case Shape::triangular: return w * sd / (d + 1.0);
    case Shape::gauss: {
        // d*w*int_0^c e^{-r^2/2} r^{d-1} dr = d*w*2^{d/2-1} * lower_gamma(d/2, c^2/2)
        const double a = 0.5 * d;
        const double g = boost::math::tgamma_lower(a, 0.5 * cutoff * cutoff);
        return d * w * std::pow(2.0, a - 1.0) * g * sd;
    }
    }
    return 0.0;
}

double density(const Space& X, const Kernel& K, std::size_t x, double s) {
    if (!(s > 0.0)) throw validation_error("density scale must be > 0");
    if (x >= X.n) throw validation_error("point index out of range");
    double v = 0.0;
    for (std::size_t y = 0; y < X.n; ++y) v += X.weights[y] * K(X.d(x, y) / s);
    return v;
}

std::vector<bool> filtration_membership(const Space& X, const Kernel& K, double s, double k) {
    std::vector<bool> m(X.n);
    for (std::size_t x = 0; x < X.n; ++x) m[x] = density(X, K, x, s) >= k;
    return m;
}

} // namespace gammalink
