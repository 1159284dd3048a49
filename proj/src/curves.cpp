#include "gammalink/curves.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

namespace gammalink {

std::string format_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

// number, "inf", or a left-to-right chain of * and / on numbers
double parse_number(const std::string& text) {
    if (text.empty()) throw validation_error("empty number in curve");
    double acc = 0.0;
    char op = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nxt = text.find_first_of("*/", pos);
        std::string tok = text.substr(pos, nxt == std::string::npos ? std::string::npos : nxt - pos);
        double v;
        if (tok == "inf") {
            v = kInf;
        } else {
            char* end = nullptr;
            v = std::strtod(tok.c_str(), &end);
            if (tok.empty() || end != tok.c_str() + tok.size() || std::isnan(v))
                throw validation_error("bad number '" + tok + "' in curve");
        }
        if (op == 0)
            acc = v;
        else if (op == '*')
            acc *= v;
        else
            acc /= v;
        if (nxt == std::string::npos) break;
        op = text[nxt];
        pos = nxt + 1;
    }
    return acc;
}

std::map<std::string, std::string> parse_keys(const std::string& body) {
    std::map<std::string, std::string> kv;
    std::istringstream is(body);
    std::string item;
    while (std::getline(is, item, ',')) {
        auto eq = item.find('=');
        if (eq == std::string::npos) throw validation_error("expected key=value in curve, got '" + item + "'");
        auto key = item.substr(0, eq);
        if (kv.count(key)) throw validation_error("duplicate key '" + key + "' in curve");
        kv[key] = item.substr(eq + 1);
    }
    return kv;
}

double take(std::map<std::string, std::string>& kv, const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end()) throw validation_error("curve is missing '" + key + "'");
    double v = parse_number(it->second);
    kv.erase(it);
    return v;
}

void no_extra(const std::map<std::string, std::string>& kv) {
    if (!kv.empty()) throw validation_error("unknown curve key '" + kv.begin()->first + "'");
}

Point3 lerp(const Knot& a, const Knot& b, double r) {
    const double w = (r - a.r) / (b.r - a.r);
    return {a.s + w * (b.s - a.s), a.t + w * (b.t - a.t), a.k + w * (b.k - a.k)};
}

// evaluation on the closed domain, extrapolating along the tail
Point3 eval_closed(const Curve& c, double r) {
    const auto& K = c.knots;
    if (r <= K.front().r) return {K.front().s, K.front().t, K.front().k};
    if (r >= K.back().r) {
        const Knot& e = K.back();
        if (!c.tail || r == e.r) return {e.s, e.t, e.k};
        const auto& d = *c.tail;
        const double h = r - e.r;
        return {e.s + h * d[0], e.t + h * d[1], e.k + h * d[2]};
    }
    auto it = std::upper_bound(K.begin(), K.end(), r, [](double v, const Knot& k) { return v < k.r; });
    const Knot& b = *it;
    const Knot& a = *(it - 1);
    if (r == a.r) return {a.s, a.t, a.k};
    return lerp(a, b, r);
}

double comp(const Knot& k, int i) { return i == 0 ? k.s : i == 1 ? k.t : k.k; }

// sup{r : f(r) >= v} for a non-increasing component
std::optional<double> sup_ge(const Curve& c, int ci, double v) {
    const auto& K = c.knots;
    if (comp(K[0], ci) < v) return std::nullopt;
    for (std::size_t i = 0; i + 1 < K.size(); ++i) {
        const double fa = comp(K[i], ci), fb = comp(K[i + 1], ci);
        if (fb < v) {
            const double r = K[i].r + (fa - v) / (fa - fb) * (K[i + 1].r - K[i].r);
            if (r <= 0.0) return std::nullopt;  // only r = 0 qualifies, outside the domain
            return r;
        }
    }
    if (c.tail) {
        const double slope = (*c.tail)[ci];
        if (slope < 0.0) {
            const double r = K.back().r + (comp(K.back(), ci) - v) / -slope;
            if (r <= 0.0) return std::nullopt;
            return r;
        }
    }
    return c.max_r();
}

} // namespace

Curve Curve::from_knots(std::vector<Knot> knots, Orientation o) {
    Curve c;
    c.orientation = o;
    c.knots = std::move(knots);
    std::ostringstream os;
    os << "pl:";
    for (std::size_t i = 0; i < c.knots.size(); ++i) {
        if (i) os << ';';
        const auto& k = c.knots[i];
        os << format_double(k.r) << ',' << format_double(k.s) << ',' << format_double(k.t) << ','
           << format_double(k.k);
    }
    c.spec = os.str();
    c.validate();
    return c;
}

Curve make_line(double x, double y, bool s_param) {
    if (!(x > 0.0) || !(y > 0.0)) throw validation_error("line intercepts must be positive");
    if (std::isinf(x) && std::isinf(y)) throw validation_error("line intercepts cannot both be infinite");
    Curve c;
    c.spec = "line:x=" + format_double(x) + ",y=" + format_double(y) + ",param=" + (s_param ? "s" : "k");
    if (!s_param) {
        if (std::isinf(x)) throw validation_error("k-parametrized line needs a finite x intercept");
        c.orientation = Orientation::contra;
        c.knots.push_back({0.0, x, x, 0.0});
        if (std::isinf(y))
            c.tail = std::array<double, 3>{0.0, 0.0, 1.0};
        else
            c.knots.push_back({y, 0.0, 0.0, y});
    } else {
        if (std::isinf(y)) throw validation_error("s-parametrized line needs a finite y intercept");
        c.orientation = Orientation::co;
        c.knots.push_back({0.0, 0.0, 0.0, y});
        if (std::isinf(x))
            c.tail = std::array<double, 3>{1.0, 1.0, 0.0};
        else
            c.knots.push_back({x, x, x, 0.0});
    }
    c.validate();
    return c;
}

Curve make_vertical(double s, double t) {
    if (!(s > 0.0) || !(t > 0.0) || std::isinf(s) || std::isinf(t))
        throw validation_error("vertical curve needs finite positive s and t");
    Curve c;
    c.spec = "vline:s=" + format_double(s) + ",t=" + format_double(t);
    c.knots.push_back({0.0, s, t, 0.0});
    c.tail = std::array<double, 3>{0.0, 0.0, 1.0};
    c.validate();
    return c;
}

Curve make_vertical_skew(double s, double t, double beta) {
    if (!(s > 0.0) || !(t > 0.0) || !(beta > 0.0) || std::isinf(s) || std::isinf(t) || std::isinf(beta))
        throw validation_error("vertical skew curve needs finite positive s, t, beta");
    Curve c;
    c.spec = "vskew:s=" + format_double(s) + ",t=" + format_double(t) + ",beta=" + format_double(beta);
    c.knots.push_back({0.0, s, t, 0.0});
    c.knots.push_back({beta * t, s, 0.0, beta * t});
    c.validate();
    return c;
}

Curve Curve::parse(const std::string& text) {
    auto colon = text.find(':');
    if (colon == std::string::npos) throw validation_error("curve needs a kind prefix: '" + text + "'");
    const std::string kind = text.substr(0, colon);
    const std::string body = text.substr(colon + 1);
    Curve c;
    if (kind == "pl") {
        std::vector<Knot> knots;
        std::istringstream is(body);
        std::string item;
        while (std::getline(is, item, ';')) {
            std::vector<double> v;
            std::istringstream js(item);
            std::string num;
            while (std::getline(js, num, ',')) v.push_back(parse_number(num));
            if (v.size() != 4) throw validation_error("pl knot needs 4 numbers: '" + item + "'");
            knots.push_back({v[0], v[1], v[2], v[3]});
        }
        c = from_knots(std::move(knots));
    } else {
        auto kv = parse_keys(body);
        if (kind == "line") {
            double x = take(kv, "x"), y = take(kv, "y");
            bool s_param = false;
            if (auto it = kv.find("param"); it != kv.end()) {
                if (it->second == "s")
                    s_param = true;
                else if (it->second != "k")
                    throw validation_error("line param must be k or s");
                kv.erase(it);
            }
            no_extra(kv);
            c = make_line(x, y, s_param);
        } else if (kind == "hline") {
            double y = take(kv, "y");
            no_extra(kv);
            c = make_line(kInf, y, true);
        } else if (kind == "vline") {
            double s = take(kv, "s"), t = take(kv, "t");
            no_extra(kv);
            c = make_vertical(s, t);
        } else if (kind == "vskew") {
            double s = take(kv, "s"), t = take(kv, "t"), b = take(kv, "beta");
            no_extra(kv);
            c = make_vertical_skew(s, t, b);
        } else {
            throw validation_error("unknown curve kind '" + kind + "'");
        }
    }
    c.spec = text;
    return c;
}

void Curve::validate() const {
    if (knots.empty()) throw validation_error("curve has no knots");
    if (knots.size() < 2 && !tail) throw validation_error("curve needs two knots or a tail");
    if (knots.front().r != 0.0) throw validation_error("first knot must be at r = 0");
    const double sgn = orientation == Orientation::contra ? 1.0 : -1.0;
    for (std::size_t i = 0; i < knots.size(); ++i) {
        const Knot& k = knots[i];
        for (double v : {k.r, k.s, k.t, k.k})
            if (!std::isfinite(v) || v < 0.0) throw validation_error("knot " + std::to_string(i) + " has invalid value");
        if (i == 0) continue;
        const Knot& p = knots[i - 1];
        if (!(k.r > p.r)) throw validation_error("knot r values not increasing at " + std::to_string(i));
        // contravariant: s, t non-increasing, k non-decreasing
        if (sgn * (k.s - p.s) > 0.0 || sgn * (k.t - p.t) > 0.0 || sgn * (k.k - p.k) < 0.0)
            throw validation_error("curve not monotone between knots " + std::to_string(i - 1) + " and " +
                                   std::to_string(i));
    }
    if (tail) {
        const auto& d = *tail;
        for (double v : d)
            if (!std::isfinite(v)) throw validation_error("tail slope must be finite");
        if (sgn * d[0] > 0.0 || sgn * d[1] > 0.0 || sgn * d[2] < 0.0) throw validation_error("tail not monotone");
        if (orientation == Orientation::contra && !(d[2] > 0.0))
            throw validation_error("contravariant tail must increase k");
    }
    // strictly positive components on the open domain
    auto bad = [&](const std::string& what) { throw validation_error("curve " + what + " not positive on its domain"); };
    if (orientation == Orientation::contra) {
        // s, t decrease: only the final knot may touch 0
        for (std::size_t i = 0; i + 1 < knots.size(); ++i)
            if (!(knots[i].s > 0.0) || !(knots[i].t > 0.0)) bad("s/t");
        if (tail && (!(knots.back().s > 0.0) || !(knots.back().t > 0.0) || (*tail)[0] < 0.0 || (*tail)[1] < 0.0))
            bad("s/t");
        const double k1 = knots.size() > 1 ? knots[1].k : knots[0].k + (*tail)[2];
        if (!(k1 > 0.0)) bad("k");
    } else {
        for (std::size_t i = 0; i + 1 < knots.size(); ++i)
            if (!(knots[i].k > 0.0)) bad("k");
        if (tail && !(knots.back().k > 0.0)) bad("k");
        const double s1 = knots.size() > 1 ? knots[1].s : knots[0].s + (*tail)[0];
        const double t1 = knots.size() > 1 ? knots[1].t : knots[0].t + (*tail)[1];
        if (!(s1 > 0.0) || !(t1 > 0.0)) bad("s/t");
    }
}

std::optional<Point3> Curve::at(double r) const {
    if (!(r >= 0.0) || r >= max_r()) return std::nullopt;
    return eval_closed(*this, r);
}

Point3 Curve::eval(double r) const { return eval_closed(*this, r); }

bool Curve::singular() const {
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        const Knot &a = knots[i], &b = knots[i + 1];
        if (a.s == b.s || a.t == b.t || a.k == b.k) return true;
    }
    if (tail)
        for (double v : *tail)
            if (v == 0.0) return true;
    return false;
}

double Curve::s_le_from(double d) const {
    if (knots[0].s <= d) return 0.0;
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        const double fa = knots[i].s, fb = knots[i + 1].s;
        if (fb <= d) return knots[i].r + (fa - d) / (fa - fb) * (knots[i + 1].r - knots[i].r);
    }
    if (tail && (*tail)[0] < 0.0) return knots.back().r + (knots.back().s - d) / -(*tail)[0];
    return max_r();
}

std::optional<double> Curve::k_le_until(double c) const {
    if (knots[0].k > c) return std::nullopt;
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        const double fa = knots[i].k, fb = knots[i + 1].k;
        if (fb > c) return knots[i].r + (c - fa) / (fb - fa) * (knots[i + 1].r - knots[i].r);
    }
    if (tail && (*tail)[2] > 0.0) return knots.back().r + (c - knots.back().k) / (*tail)[2];
    return max_r();
}

std::optional<double> Curve::t_ge_until(double d) const { return sup_ge(*this, 1, d); }

Curve reflect(const Curve& co, double R) {
    if (co.orientation != Orientation::co) throw validation_error("reflect expects a covariant curve");
    std::vector<Knot> ks;
    for (const auto& k : co.knots)
        if (k.r < R) ks.push_back(k);
    if (!co.tail && R != co.knots.back().r) throw validation_error("finite covariant curve reflects at its max");
    const Point3 e = eval_closed(co, R);
    ks.push_back({R, e.s, e.t, e.k});
    Curve out;
    out.spec = co.spec;
    out.orientation = Orientation::contra;
    for (auto it = ks.rbegin(); it != ks.rend(); ++it) out.knots.push_back({R - it->r, it->s, it->t, it->k});
    out.knots.front().r = 0.0;
    out.validate();
    return out;
}

double covariant_horizon(const Curve& co, const Space& X, const Kernel& K) {
    if (!co.tail) return co.max_r();
    const double diam = X.diameter();
    double r = std::max(co.knots.back().r, diam);
    if (r <= 0.0) r = 1.0;
    // past r* every point is present and t covers the diameter, so nothing changes
    for (int it = 0; it < 200; ++it, r *= 2.0) {
        const Point3 p = eval_closed(co, r);
        const bool all_present = p.s > 0.0 && K(diam / p.s) >= p.k;
        if ((p.t >= diam && all_present) || p.k > 1.0) return 2.0 * r;
    }
    throw validation_error("covariant curve never covers the space");
}

Slice make_slice(const Curve& c, const Space& X, const Kernel& K) {
    Slice s;
    s.source = c;
    if (c.orientation == Orientation::contra) {
        s.contra = c;
        s.horizon = 0.0;
    } else {
        s.horizon = covariant_horizon(c, X, K);
        s.contra = reflect(c, s.horizon);
    }
    return s;
}

bool curves_interleaved(const Curve& a, const Curve& b, double eps) {
    if (a.orientation != b.orientation) throw validation_error("curves have different orientations");
    if (eps < 0.0) throw validation_error("eps must be >= 0");
    constexpr double tol = 1e-12;
    const double m1 = a.max_r(), m2 = b.max_r();
    if (std::isinf(m1) != std::isinf(m2)) return false;
    if (!std::isinf(m1) && std::abs(m1 - m2) > eps + tol) return false;

    auto leq = [&](const Point3& p, const Point3& q) {
        return p.s <= q.s + tol && p.t <= q.t + tol && p.k >= q.k - tol;
    };
    // gamma_1(r) <= gamma_2(r + shift) for r in [lo, hi]; both sides PL, so breakpoints suffice
    auto one_way = [&](const Curve& g1, const Curve& g2, double shift, double lo, double hi) {
        if (!(hi > lo)) return true;
        std::vector<double> rs{lo};
        for (const auto& k : g1.knots)
            if (k.r > lo && k.r < hi) rs.push_back(k.r);
        for (const auto& k : g2.knots)
            if (k.r - shift > lo && k.r - shift < hi) rs.push_back(k.r - shift);
        if (std::isinf(hi)) {
            double last = *std::max_element(rs.begin(), rs.end());
            rs.push_back(last + 1.0);
        } else {
            rs.push_back(hi);
        }
        for (double r : rs)
            if (!leq(eval_closed(g1, r), eval_closed(g2, r + shift))) return false;
        return true;
    };
    if (a.orientation == Orientation::contra) {
        return one_way(a, b, -eps, eps, m1) && one_way(b, a, -eps, eps, m2);
    }
    return one_way(a, b, eps, 0.0, std::min(m1, m2 - eps)) && one_way(b, a, eps, 0.0, std::min(m2, m1 - eps));
}

std::optional<LineIntercepts> line_intercepts(const Curve& c) {
    if (c.tail || c.knots.size() != 2) return std::nullopt;
    const Knot &a = c.knots[0], &b = c.knots[1];
    if (a.s != a.t || b.s != b.t) return std::nullopt;
    if (c.orientation == Orientation::contra) {
        if (a.k != 0.0 || b.s != 0.0 || b.r != b.k || !(a.s > 0.0) || !(b.k > 0.0)) return std::nullopt;
        return LineIntercepts{a.s, b.k, c.orientation};
    }
    if (a.s != 0.0 || b.k != 0.0 || b.r != b.s || !(b.s > 0.0) || !(a.k > 0.0)) return std::nullopt;
    return LineIntercepts{b.s, a.k, c.orientation};
}

double line_pair_bound(const Curve& a, const Curve& b) {
    const auto la = line_intercepts(a), lb = line_intercepts(b);
    if (!la || !lb) throw validation_error("bound needs two skew lines");
    if (la->orientation != lb->orientation) throw validation_error("lines have different orientations");
    const double dx = std::abs(la->x - lb->x), dy = std::abs(la->y - lb->y);
    const double ma = std::abs(la->slope()), mb = std::abs(lb->slope());
    if (la->orientation == Orientation::contra) return std::max(dy, dx * std::min(ma, mb));
    return std::max(dx, dy * std::min(1.0 / ma, 1.0 / mb));
}

double line_lipschitz(const Curve& c) {
    const auto l = line_intercepts(c);
    if (!l) throw validation_error("Lipschitz constant needs a skew line");
    const double mu = std::abs(l->slope());
    if (l->orientation == Orientation::contra) return std::max(2.0 * mu, 1.0);
    return std::max(1.0 / mu, 2.0);
}

RescaledCurve::RescaledCurve(Curve base, Kernel K, int dim) : base_(std::move(base)), K_(K), dim_(dim) {
    if (base_.orientation != Orientation::contra) throw validation_error("rescaling needs a contravariant curve");
    if (base_.tail) throw validation_error("non-covering curve: s must decrease to 0");
    const auto& ks = base_.knots;
    if (ks.front().k != 0.0 || ks.back().s != 0.0) throw validation_error("non-covering curve: k must start at 0 and s end at 0");
    for (std::size_t i = 0; i + 1 < ks.size(); ++i)
        if (!(ks[i + 1].s < ks[i].s) || !(ks[i + 1].k > ks[i].k))
            throw validation_error("non-covering curve: s must strictly decrease and k strictly increase");
    if (dim < 1) throw validation_error("dimension must be >= 1");
}

double RescaledCurve::phi(double r) const {
    if (r <= 0.0) return 0.0;
    if (r >= base_.max_r()) return kInf;
    const Point3 p = eval_closed(base_, r);
    return p.k / K_.volume(dim_, p.s);
}

double RescaledCurve::phi_inv(double rho) const {
    if (rho <= 0.0) return 0.0;
    if (std::isinf(rho)) return base_.max_r();
    double lo = 0.0, hi = base_.max_r();
    for (int it = 0; it < 200 && hi - lo > 1e-16 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (phi(mid) < rho)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

std::optional<Point3> RescaledCurve::at(double rho) const {
    if (!(rho >= 0.0) || std::isinf(rho)) return std::nullopt;
    return base_.at(phi_inv(rho));
}

namespace {

struct Named {
    const char* tmpl;
    double lo, hi;
    const char* kernel;
};

const std::map<std::string, Named>& named_families() {
    static const std::map<std::string, Named> m = {
        {"F1", {"hline:y={theta}", 0.05, 0.5, "uniform"}},
        {"F2", {"line:x=20*{theta},y={theta},param=s", 0.05, 0.5, "uniform"}},
        {"F3", {"vline:s=0.25,t={theta}", 0.5, 1.7, "epanechnikov"}},
        {"F4", {"vskew:s=0.25,t={theta},beta=10", 0.5, 1.7, "epanechnikov"}},
        {"F5", {"line:x={theta},y={theta},param=s", 0.5, 1.5, "uniform"}},
        {"G1", {"hline:y={theta}", 0.01, 0.1, "uniform"}},
        {"G2", {"vline:s={theta}/2,t={theta}", 0.01, 0.2, "uniform"}},
        {"G3", {"line:x=0.1,y={theta},param=s", 0.01, 0.1, "uniform"}},
    };
    return m;
}

} // namespace

Family Family::parse(const std::string& text) {
    Family f;
    if (auto it = named_families().find(text); it != named_families().end()) {
        f.name = text;
        f.tmpl = it->second.tmpl;
        f.lo = it->second.lo;
        f.hi = it->second.hi;
        f.kernel = it->second.kernel;
        return f;
    }
    auto at = text.rfind("@theta=");
    if (at == std::string::npos) throw validation_error("family needs '@theta=<min>:<max>[:<steps>]'");
    f.tmpl = text.substr(0, at);
    std::string range = text.substr(at + 7);
    std::vector<std::string> parts;
    std::istringstream is(range);
    std::string p;
    while (std::getline(is, p, ':')) parts.push_back(p);
    if (parts.size() < 2 || parts.size() > 3) throw validation_error("family range must be <min>:<max>[:<steps>]");
    f.lo = parse_number(parts[0]);
    f.hi = parse_number(parts[1]);
    if (parts.size() == 3) {
        long long s = std::stoll(parts[2]);
        if (s < 2) throw validation_error("family steps must be >= 2");
        f.steps = static_cast<std::size_t>(s);
    }
    std::size_t n = 0;
    for (auto pos = f.tmpl.find("{theta}"); pos != std::string::npos; pos = f.tmpl.find("{theta}", pos + 1)) ++n;
    if (n == 0) throw validation_error("family template needs {theta}");
    if (!(f.lo <= f.hi) || !std::isfinite(f.lo) || !std::isfinite(f.hi)) throw validation_error("empty family range");
    // fail early on templates that do not instantiate
    f.instantiate(f.lo);
    f.instantiate(f.hi);
    return f;
}

Curve Family::instantiate(double theta) const {
    std::string s = tmpl;
    const std::string v = format_double(theta);
    for (auto pos = s.find("{theta}"); pos != std::string::npos; pos = s.find("{theta}", pos + v.size()))
        s.replace(pos, 7, v);
    return Curve::parse(s);
}

std::vector<double> Family::thetas(std::size_t n) const {
    if (n < 2) throw validation_error("steps must be >= 2");
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = i + 1 == n ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return out;
}

std::string Family::text() const {
    if (!name.empty()) return name;
    std::string t = tmpl + "@theta=" + format_double(lo) + ":" + format_double(hi);
    if (steps) t += ":" + std::to_string(steps);
    return t;
}

std::vector<Curve> family_grid(const Family& f, std::size_t steps) {
    std::vector<Curve> out;
    for (double th : f.thetas(steps)) out.push_back(f.instantiate(th));
    return out;
}

} // namespace gammalink
