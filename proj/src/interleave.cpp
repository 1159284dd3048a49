#include "gammalink/interleave.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace gammalink {

void Correspondence::validate() const {
    std::vector<char> hx(nx, 0), hy(ny, 0);
    for (const auto& [x, y] : pairs) {
        if (x >= nx || y >= ny) throw validation_error("correspondence index out of range");
        hx[x] = hy[y] = 1;
    }
    for (std::size_t i = 0; i < nx; ++i)
        if (!hx[i]) throw validation_error("correspondence misses left point " + std::to_string(i));
    for (std::size_t j = 0; j < ny; ++j)
        if (!hy[j]) throw validation_error("correspondence misses right point " + std::to_string(j));
}

Correspondence Correspondence::identity(std::size_t n) {
    Correspondence R;
    R.nx = R.ny = n;
    for (std::size_t i = 0; i < n; ++i) R.pairs.push_back({i, i});
    return R;
}

Correspondence closest_point_correspondence(const AmbientPair& p) {
    Correspondence R;
    R.nx = p.maskA.size();
    R.ny = p.maskB.size();
    const Space& Z = p.ambient;
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t i = 0; i < R.nx; ++i) {
        double best = kInf;
        for (auto b : p.maskB) best = std::min(best, Z.d(p.maskA[i], b));
        for (std::size_t j = 0; j < R.ny; ++j)
            if (Z.d(p.maskA[i], p.maskB[j]) == best) out.push_back({i, j});
    }
    for (std::size_t j = 0; j < R.ny; ++j) {
        double best = kInf;
        for (auto a : p.maskA) best = std::min(best, Z.d(a, p.maskB[j]));
        for (std::size_t i = 0; i < R.nx; ++i)
            if (Z.d(p.maskA[i], p.maskB[j]) == best) out.push_back({i, j});
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    R.pairs = std::move(out);
    return R;
}

std::vector<double> critical_values(const MergeForest& F) {
    std::vector<double> c;
    for (const auto& nd : F.nodes) {
        c.push_back(nd.birth);
        c.push_back(nd.death);
        for (const auto& m : nd.members) c.push_back(m.entry);
    }
    std::sort(c.begin(), c.end(), std::greater<>());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    while (!c.empty() && c.back() <= 0.0) c.pop_back();
    return c;
}

InterleaveResult check_pullback(const std::vector<int>& la, const std::vector<double>& wa,
                                const std::vector<int>& lb, const std::vector<double>& wb,
                                const std::vector<std::pair<std::size_t, std::size_t>>& pairs, bool forward,
                                double m) {
    const auto& src = forward ? la : lb;
    const auto& dst = forward ? lb : la;
    const auto& ws = forward ? wa : wb;
    const auto& wd = forward ? wb : wa;
    auto fail = [&](int a, std::string why) {
        InterleaveWitness w;
        w.left_to_right = forward;
        for (std::size_t p = 0; p < src.size(); ++p)
            if (src[p] == a) w.cluster.push_back(p);
        w.reason = std::move(why);
        return InterleaveResult{false, w};
    };
    std::map<int, int> target;
    for (const auto& pr : pairs) {
        const std::size_t s = forward ? pr.first : pr.second;
        const std::size_t d = forward ? pr.second : pr.first;
        const int a = src[s];
        if (a < 0) continue;
        const int b = dst[d];
        if (b < 0) return fail(a, "partner absent");
        auto [it, fresh] = target.emplace(a, b);
        if (!fresh && it->second != b) return fail(a, "partners split");
    }
    if (m < 0.0) return {};
    // Clusters are disjoint, so a union of source clusters has the summed
    // mass while its image only counts each target once. The worst finite
    // collection therefore takes every group (source clusters sharing a
    // target) whose summed mass exceeds the target's, and nothing else.
    std::map<int, double> src_mass, dst_mass;
    for (std::size_t p = 0; p < src.size(); ++p)
        if (src[p] >= 0) src_mass[src[p]] += ws[p];
    for (std::size_t p = 0; p < dst.size(); ++p)
        if (dst[p] >= 0) dst_mass[dst[p]] += wd[p];
    std::map<int, double> group;
    for (const auto& [a, b] : target) group[b] += src_mass[a];
    double excess = 0.0;
    int worst = -1;
    double worst_ex = 0.0;
    for (const auto& [b, mass] : group) {
        const double ex = mass - dst_mass[b];
        if (ex > 0.0) excess += ex;
        if (ex > worst_ex) worst_ex = ex, worst = b;
    }
    if (excess > m + 1e-12) {
        for (const auto& [a, b] : target)
            if (b == worst) return fail(a, "mass excess");
    }
    return {};
}

namespace {

struct Piece {
    double lo, hi;  // native parameter interval
    std::vector<int> labels;
};

struct Prepared {
    Orientation orientation;
    std::vector<Piece> pieces;
    std::vector<double> weights;
    double scale = 1.0;
};

Prepared prepare(const MergeForest& F) {
    Prepared P;
    P.orientation = F.orientation;
    P.weights = F.weights;
    const auto c = critical_values(F);
    const std::vector<int> none(F.n_points(), -1);
    // contravariant pieces (c[i+1], c[i]] with c[end] = 0
    std::vector<Piece> contra;
    if (c.empty()) {
        contra.push_back({0.0, kInf, none});
    } else {
        contra.push_back({c[0], kInf, none});
        // sampled inside the piece: the top value may equal max_r, where labels_at is empty
        for (std::size_t i = 0; i < c.size(); ++i) {
            const double lo = i + 1 < c.size() ? c[i + 1] : 0.0;
            contra.push_back({lo, c[i], F.labels_at(0.5 * (lo + c[i]))});
        }
        P.scale = std::max(1.0, c[0]);
    }
    if (F.orientation == Orientation::contra) {
        P.pieces = std::move(contra);
    } else {
        const double R = F.horizon;
        P.scale = std::max(P.scale, R);
        for (auto& pc : contra) {
            Piece q{pc.hi == kInf ? 0.0 : R - pc.hi, pc.lo == 0.0 ? kInf : R - pc.lo, std::move(pc.labels)};
            q.lo = std::max(q.lo, 0.0);
            if (q.hi > q.lo) P.pieces.push_back(std::move(q));
        }
    }
    return P;
}

InterleaveResult check_direction(const Prepared& A, const Prepared& B,
                                 const std::vector<std::pair<std::size_t, std::size_t>>& pairs, bool forward,
                                 double eps, double m) {
    const double s = A.orientation == Orientation::contra ? -eps : eps;
    const double tol = 1e-12 * std::max(A.scale, B.scale);
    for (const auto& I : A.pieces) {
        bool occupied = false;
        for (int l : I.labels) occupied |= l >= 0;
        if (!occupied) continue;
        for (const auto& J : B.pieces) {
            const double lo = std::max({I.lo, J.lo - s, 0.0, -s});
            const double hi = std::min(I.hi, J.hi - s);
            if (!(hi - lo > tol)) continue;
            auto res = forward ? check_pullback(I.labels, A.weights, J.labels, B.weights, pairs, true, m)
                               : check_pullback(J.labels, B.weights, I.labels, A.weights, pairs, false, m);
            if (!res.ok) {
                res.witness->r = hi == kInf ? lo + 1.0 : 0.5 * (lo + hi);
                return res;
            }
        }
    }
    return {};
}

InterleaveResult check_prepared(const Prepared& H, const Prepared& E, const Correspondence& R, double eps,
                                double m) {
    if (H.orientation != E.orientation) throw validation_error("clusterings have different orientations");
    if (!(eps >= 0.0)) throw validation_error("eps must be >= 0");
    auto res = check_direction(H, E, R.pairs, true, eps, m);
    if (!res.ok) return res;
    return check_direction(E, H, R.pairs, false, eps, m);
}

void check_sizes(const MergeForest& H, const MergeForest& E, const Correspondence& R) {
    if (R.nx != H.n_points() || R.ny != E.n_points())
        throw validation_error("correspondence does not match the forests");
    R.validate();
}

std::vector<double> candidates(const Prepared& H, const Prepared& E) {
    auto ends = [](const Prepared& P) {
        std::vector<double> v;
        for (const auto& pc : P.pieces) {
            if (pc.lo > 0.0) v.push_back(pc.lo);
            if (pc.hi < kInf) v.push_back(pc.hi);
        }
        return v;
    };
    const auto a = ends(H), b = ends(E);
    std::vector<double> c{0.0};
    c.insert(c.end(), a.begin(), a.end());
    c.insert(c.end(), b.begin(), b.end());
    for (double x : a)
        for (double y : b) c.push_back(std::abs(x - y));
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    return c;
}

// feasibility is monotone in eps, so binary search the sorted candidates
double smallest_feasible(const std::vector<double>& c, const std::function<bool(double)>& ok) {
    if (!ok(c.back())) return kInf;
    std::size_t lo = 0, hi = c.size() - 1;
    while (lo < hi) {
        const std::size_t mid = (lo + hi) / 2;
        if (ok(c[mid]))
            hi = mid;
        else
            lo = mid + 1;
    }
    return c[lo];
}

} // namespace

InterleaveResult check_interleaving(const MergeForest& H, const MergeForest& E, const Correspondence& R,
                                    double eps) {
    check_sizes(H, E, R);
    return check_prepared(prepare(H), prepare(E), R, eps, -1.0);
}

InterleaveResult check_measured_interleaving(const MergeForest& H, const MergeForest& E,
                                             const Correspondence& R, double eps, double m) {
    check_sizes(H, E, R);
    if (!(m >= 0.0)) throw validation_error("mass slack must be >= 0");
    return check_prepared(prepare(H), prepare(E), R, eps, m);
}

double dci_upper(const MergeForest& H, const MergeForest& E, const Correspondence& R) {
    check_sizes(H, E, R);
    const auto PH = prepare(H), PE = prepare(E);
    return smallest_feasible(candidates(PH, PE),
                             [&](double e) { return check_prepared(PH, PE, R, e, -1.0).ok; });
}

double dmi_upper(const MergeForest& H, const MergeForest& E, const Correspondence& R) {
    check_sizes(H, E, R);
    const auto PH = prepare(H), PE = prepare(E);
    auto ok = [&](double e) { return check_prepared(PH, PE, R, e, e).ok; };
    const auto c = candidates(PH, PE);
    double hi = std::max(c.back(), 1.0);
    if (!ok(hi)) return kInf;
    // mass slack adds thresholds outside the candidate set: bisect
    double lo = 0.0;
    if (ok(lo)) return 0.0;
    while (hi - lo > 1e-9 * std::max(1.0, hi)) {
        const double mid = 0.5 * (lo + hi);
        if (ok(mid))
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

double dci_exact_tiny(const MergeForest& H, const MergeForest& E) {
    const std::size_t nx = H.n_points(), ny = E.n_points();
    if (nx == 0 || ny == 0 || nx * ny > kTinyLimit) throw validation_error("instance too large for exhaustive search");
    const auto PH = prepare(H), PE = prepare(E);
    const auto c = candidates(PH, PE);
    const std::size_t cells = nx * ny;
    double best = kInf;
    for (std::uint32_t mask = 1; mask < (1u << cells); ++mask) {
        Correspondence R;
        R.nx = nx;
        R.ny = ny;
        std::vector<char> hx(nx, 0), hy(ny, 0);
        for (std::size_t b = 0; b < cells; ++b)
            if (mask >> b & 1u) {
                R.pairs.push_back({b / ny, b % ny});
                hx[b / ny] = hy[b % ny] = 1;
            }
        if (std::count(hx.begin(), hx.end(), 0) || std::count(hy.begin(), hy.end(), 0)) continue;
        best = std::min(best, smallest_feasible(c, [&](double e) { return check_prepared(PH, PE, R, e, -1.0).ok; }));
    }
    return best;
}

bool check_multiparam_interleaving(const KernelLinkageGrid& X, const std::vector<double>& wx,
                                   const KernelLinkageGrid& Y, const std::vector<double>& wy,
                                   const Correspondence& R, std::array<double, 3> eps, double m) {
    if (X.s != Y.s || X.t != Y.t || X.k != Y.k) throw validation_error("grids differ");
    R.validate();
    // index offset d with axis[i] + sign*e == axis[i + sign*d]
    auto offset = [](const std::vector<double>& axis, double e) -> std::size_t {
        if (e == 0.0) return 0;
        for (std::size_t d = 1; d < axis.size(); ++d) {
            bool all = true;
            for (std::size_t i = 0; i + d < axis.size(); ++i)
                all &= std::abs(axis[i] + e - axis[i + d]) <= 1e-9 * std::max(1.0, std::abs(axis[i + d]));
            if (all) return d;
        }
        throw validation_error("grid not aligned to shift");
    };
    const std::size_t ds = offset(X.s, eps[0]), dt = offset(X.t, eps[1]), dk = offset(X.k, eps[2]);
    for (std::size_t i = 0; i + ds < X.s.size(); ++i)
        for (std::size_t j = 0; j + dt < X.t.size(); ++j)
            for (std::size_t l = dk; l < X.k.size(); ++l) {
                if (!check_pullback(X.at(i, j, l), wx, Y.at(i + ds, j + dt, l - dk), wy, R.pairs, true, m).ok)
                    return false;
                if (!check_pullback(X.at(i + ds, j + dt, l - dk), wx, Y.at(i, j, l), wy, R.pairs, false, m).ok)
                    return false;
            }
    return true;
}

} // namespace gammalink
