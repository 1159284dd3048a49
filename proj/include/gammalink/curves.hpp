#pragma once

#include <array>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "gammalink/kernels.hpp"
#include "gammalink/space.hpp"

namespace gammalink {

enum class Orientation { contra, co };

inline const char* orientation_name(Orientation o) { return o == Orientation::contra ? "contra" : "co"; }

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Knot {
    double r, s, t, k;
};

struct Point3 {
    double s, t, k;
};

// Piecewise-linear curve in (s, t, k) space. Contravariant curves have s, t
// non-increasing and k non-decreasing; covariant curves the opposite.
// An optional tail continues the last knot with a constant slope forever.
class Curve {
public:
    std::string spec;
    Orientation orientation = Orientation::contra;
    std::vector<Knot> knots;
    std::optional<std::array<double, 3>> tail;  // (ds, dt, dk) per unit r

    static Curve parse(const std::string& text);
    static Curve from_knots(std::vector<Knot> knots, Orientation o = Orientation::contra);

    void validate() const;
    double max_r() const { return tail ? kInf : knots.back().r; }
    // componentwise interpolation; nullopt past max_r or for r < 0
    std::optional<Point3> at(double r) const;
    // evaluation on the closed domain [0, max_r], following the tail
    Point3 eval(double r) const;
    // any flat component segment
    bool singular() const;

    // contravariant queries used by the linkage engine
    double s_le_from(double d) const;                // inf{r : s(r) <= d}, max_r if never
    std::optional<double> k_le_until(double c) const;  // sup{r : k(r) <= c}
    std::optional<double> t_ge_until(double d) const;  // sup{r : t(r) >= d}
};

// lambda^{x,y}: k-parametrized (contravariant) or s-parametrized (covariant).
// x or y may be infinite, not both.
Curve make_line(double x, double y, bool s_param);
Curve make_vertical(double s, double t);
Curve make_vertical_skew(double s, double t, double beta);

// covariant curve read backwards from R: u = R - r
Curve reflect(const Curve& co, double R);

// horizon used to reflect a covariant curve over a given space
double covariant_horizon(const Curve& co, const Space& X, const Kernel& K);

// a curve prepared for the engine: contravariant form plus the reflection horizon (0 when none)
struct Slice {
    Curve source;
    Curve contra;
    double horizon = 0.0;
};
Slice make_slice(const Curve& c, const Space& X, const Kernel& K);

bool curves_interleaved(const Curve& a, const Curve& b, double eps);

// intercepts of a finite skew line with s = t; nullopt for any other curve
struct LineIntercepts {
    double x, y;
    Orientation orientation;
    double slope() const { return -y / x; }
};
std::optional<LineIntercepts> line_intercepts(const Curve& c);

// interleaving bound between two skew lines of the same orientation:
// k-parametrized max(|dy|, |dx| min|mu|), s-parametrized max(|dx|, |dy| min|1/mu|)
double line_pair_bound(const Curve& a, const Curve& b);

// Lipschitz constant of lambda-linkage in the input space (uniform kernel)
double line_lipschitz(const Curve& c);

// gamma-bar = gamma o phi^{-1} with phi(r) = k(r) / v_{s(r)}
class RescaledCurve {
public:
    RescaledCurve(Curve base, Kernel K, int dim);
    double phi(double r) const;
    double phi_inv(double rho) const;
    std::optional<Point3> at(double rho) const;
    const Curve& base() const { return base_; }

private:
    Curve base_;
    Kernel K_;
    int dim_;
};

struct Family {
    std::string name;      // empty unless given by a named alias
    std::string tmpl;      // curve text with {theta} placeholders
    double lo = 0.0, hi = 0.0;
    std::size_t steps = 0;  // 0 when not given
    std::string kernel;    // suggested kernel for named families

    static Family parse(const std::string& text);
    Curve instantiate(double theta) const;
    std::vector<double> thetas(std::size_t n) const;
    std::string text() const;
};

std::vector<Curve> family_grid(const Family& f, std::size_t steps);

std::string format_double(double v);

} // namespace gammalink
