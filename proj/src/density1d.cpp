#include "gammalink/density1d.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gammalink/space.hpp"

namespace gammalink {

PLDensity1D PLDensity1D::from_knots(const std::vector<std::pair<double, double>>& knots) {
    PLDensity1D d;
    for (const auto& [a, b] : knots) {
        d.x.push_back(a);
        d.f.push_back(b);
    }
    d.validate();
    return d;
}

PLDensity1D PLDensity1D::two_bumps() {
    return from_knots({{-1.0, 0.0}, {0.0, 0.4}, {1.5, 0.1}, {3.0, 0.2}, {5.0, 0.0}});
}

void PLDensity1D::validate() const {
    if (x.size() < 3 || x.size() != f.size())
        throw validation_error("density needs at least 3 knots");
    for (std::size_t i = 0; i + 1 < x.size(); ++i)
        if (!(x[i] < x[i + 1])) throw validation_error("density breakpoints not increasing at " + std::to_string(i));
    for (std::size_t i = 0; i < f.size(); ++i)
        if (!(f[i] >= 0.0) || !std::isfinite(f[i])) throw validation_error("negative density value at " + std::to_string(i));
    if (f.front() != 0.0 || f.back() != 0.0) throw validation_error("density must vanish at both ends");
    if (std::abs(integral() - 1.0) > 1e-9) throw validation_error("density does not integrate to 1");
}

double PLDensity1D::operator()(double t) const {
    if (t <= x.front() || t >= x.back()) return 0.0;
    auto it = std::upper_bound(x.begin(), x.end(), t);
    std::size_t i = static_cast<std::size_t>(it - x.begin()) - 1;
    double a = (t - x[i]) / (x[i + 1] - x[i]);
    return f[i] + a * (f[i + 1] - f[i]);
}

double PLDensity1D::integral() const {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) s += 0.5 * (f[i] + f[i + 1]) * (x[i + 1] - x[i]);
    return s;
}

double PLDensity1D::max_value() const { return *std::max_element(f.begin(), f.end()); }

double PLDensity1D::sample(Rng& rng) const {
    // pick a segment by area, then invert the linear density on it
    const double total = integral();
    double u = rng.uniform() * total;
    std::size_t seg = x.size() - 2;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        double area = 0.5 * (f[i] + f[i + 1]) * (x[i + 1] - x[i]);
        if (u < area) {
            seg = i;
            break;
        }
        u -= area;
    }
    const double L = x[seg + 1] - x[seg];
    const double f0 = f[seg], f1 = f[seg + 1];
    const double area = 0.5 * (f0 + f1) * L;
    const double v = rng.uniform() * area;
    // solve f0*y + (f1-f0)/(2L) * y^2 = v for y in [0, L]
    const double a = (f1 - f0) / (2.0 * L);
    double y;
    if (std::abs(a) < 1e-300) {
        y = v / f0;
    } else {
        const double disc = f0 * f0 + 4.0 * a * v;
        y = (2.0 * v) / (f0 + std::sqrt(std::max(0.0, disc)));
    }
    return x[seg] + std::clamp(y, 0.0, L);
}

PLDensity1D PLDensity1D::shifted(double dx) const {
    PLDensity1D d = *this;
    for (auto& v : d.x) v += dx;
    return d;
}

} // namespace gammalink
