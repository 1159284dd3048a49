#pragma once

// Independent reference implementations used only by tests. Nothing here
// calls into the engine beyond building a Space for comparison.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <queue>
#include <set>
#include <utility>
#include <vector>

#include "gammalink/curves.hpp"
#include "gammalink/linkage.hpp"
#include "gammalink/rng.hpp"
#include "gammalink/space.hpp"

namespace oracle {

using gammalink::Points;
using gammalink::Rng;
using Clusters = std::vector<std::vector<std::size_t>>;
using PD = std::vector<std::pair<double, double>>;

// Random instance on a dyadic grid with dyadic weights and power-of-two line
// intercepts, so that every critical value is computed without rounding by
// any reasonable formula.
struct Instance {
    Points pts;
    std::vector<double> w;
    double x = 1.0, y = 1.0;  // lambda^{x,y}, k-parametrized
};

inline std::vector<double> dyadic_weights(Rng& rng, std::size_t n) {
    // composition of 1024 into n positive parts
    std::vector<int> cuts{0, 1024};
    std::set<int> used;
    while (used.size() + 1 < n) used.insert(1 + static_cast<int>(rng.below(1023)));
    cuts.insert(cuts.end(), used.begin(), used.end());
    std::sort(cuts.begin(), cuts.end());
    std::vector<double> w;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) w.push_back((cuts[i + 1] - cuts[i]) / 1024.0);
    return w;
}

inline Instance random_instance(Rng& rng, std::size_t max_n = 12) {
    Instance in;
    const std::size_t n = 1 + rng.below(max_n);
    in.pts.dim = 1 + rng.below(2);
    for (std::size_t i = 0; i < n * in.pts.dim; ++i) in.pts.coords.push_back(static_cast<double>(rng.below(129)) / 64.0);
    in.w = dyadic_weights(rng, n);
    const double xs[] = {0.5, 1.0, 2.0, 4.0};
    const double ys[] = {0.25, 0.5, 1.0};
    in.x = xs[rng.below(4)];
    in.y = ys[rng.below(3)];
    return in;
}

inline double dist(const Points& p, std::size_t i, std::size_t j) {
    double s = 0.0;
    for (std::size_t c = 0; c < p.dim; ++c) {
        const double d = p.row(i)[c] - p.row(j)[c];
        s += d * d;
    }
    return std::sqrt(s);
}

// uniform kernel: mass of the open ball of radius s
inline double ball_mass(const Points& p, const std::vector<double>& w, std::size_t i, double s) {
    double m = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j)
        if (dist(p, i, j) < s) m += w[j];
    return m;
}

inline Clusters canonical(Clusters c) {
    for (auto& v : c) std::sort(v.begin(), v.end());
    std::sort(c.begin(), c.end());
    return c;
}

// vertices with density >= k at scale s, edges d <= t, components by BFS
inline Clusters graph_components(const Points& p, const std::vector<double>& w, double s, double t, double k) {
    const std::size_t n = w.size();
    std::vector<bool> in(n);
    for (std::size_t i = 0; i < n; ++i) in[i] = ball_mass(p, w, i, s) >= k;
    std::vector<bool> seen(n, false);
    Clusters out;
    for (std::size_t i = 0; i < n; ++i) {
        if (!in[i] || seen[i]) continue;
        std::vector<std::size_t> comp;
        std::queue<std::size_t> q;
        q.push(i);
        seen[i] = true;
        while (!q.empty()) {
            auto u = q.front();
            q.pop();
            comp.push_back(u);
            for (std::size_t v = 0; v < n; ++v)
                if (in[v] && !seen[v] && dist(p, u, v) <= t) {
                    seen[v] = true;
                    q.push(v);
                }
        }
        out.push_back(comp);
    }
    return canonical(out);
}

inline Clusters line_components(const Instance& in, double r) {
    const double s = in.x * (1.0 - r / in.y);
    return graph_components(in.pts, in.w, s, s, r);
}

// every r in (0, y) where the graph along the line can change
inline std::vector<double> line_candidates(const Instance& in) {
    std::set<double> c{0.0, in.y};
    const std::size_t n = in.w.size();
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::pair<double, double>> byd;
        for (std::size_t j = 0; j < n; ++j) {
            const double d = dist(in.pts, i, j);
            const double r = in.y * (1.0 - d / in.x);
            if (r > 0.0 && r < in.y) c.insert(r);
            byd.push_back({d, in.w[j]});
        }
        std::sort(byd.begin(), byd.end());
        double m = 0.0;
        for (auto& [d, wj] : byd) {
            m += wj;
            if (m > 0.0 && m < in.y) c.insert(m);
        }
    }
    return {c.begin(), c.end()};
}

// Elder rule by tracking components between consecutive critical values,
// from the top down. Events are stamped with the upper end of the interval.
inline PD elder_by_tracking(const Instance& in) {
    const auto cand = line_candidates(in);
    const std::size_t n = in.w.size();
    std::vector<int> comp_of(n, -1);         // previous component id per point
    std::vector<double> comp_birth;          // births of previous components
    PD out;
    for (std::size_t i = cand.size() - 1; i-- > 0;) {
        const double upper = cand[i + 1];
        const double r = 0.5 * (cand[i] + cand[i + 1]);
        const Clusters cur = line_components(in, r);
        std::vector<int> next_comp(n, -1);
        std::vector<double> next_birth;
        for (const auto& C : cur) {
            std::set<int> prev;
            for (auto p : C)
                if (comp_of[p] >= 0) prev.insert(comp_of[p]);
            double b = upper;
            if (!prev.empty()) {
                std::vector<double> bs;
                for (int q : prev) bs.push_back(comp_birth[q]);
                std::sort(bs.begin(), bs.end(), std::greater<>());
                b = bs[0];
                for (std::size_t k = 1; k < bs.size(); ++k) out.push_back({upper, bs[k]});
            }
            for (auto p : C) next_comp[p] = static_cast<int>(next_birth.size());
            next_birth.push_back(b);
        }
        comp_of = next_comp;
        comp_birth = next_birth;
    }
    for (double b : comp_birth) out.push_back({0.0, b});
    std::sort(out.begin(), out.end());
    return out;
}

inline gammalink::Curve line_curve(const Instance& in) { return gammalink::make_line(in.x, in.y, false); }

// bottleneck by exhausting all matchings of the diagonal-augmented diagrams
inline double bottleneck_brute(const PD& a, const PD& b) {
    const std::size_t na = a.size(), nb = b.size(), n = na + nb;
    auto half = [](const std::pair<double, double>& p) { return std::abs(p.second - p.first) / 2.0; };
    // slot i < na is a[i], slot na + j is the diagonal copy for b[j]; likewise on the right
    auto cost = [&](std::size_t i, std::size_t j) -> double {
        const bool ra = i < na, rb = j < nb;
        if (ra && rb) return std::max(std::abs(a[i].first - b[j].first), std::abs(a[i].second - b[j].second));
        if (ra) return half(a[i]);
        if (rb) return half(b[j]);
        return 0.0;
    };
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double best = n ? std::numeric_limits<double>::infinity() : 0.0;
    do {
        double c = 0.0;
        for (std::size_t i = 0; i < n; ++i) c = std::max(c, cost(i, perm[i]));
        best = std::min(best, c);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

// finite-collection mass clause by enumerating every subset of source clusters;
// target of a source cluster is the label of any partner (the relation is assumed)
inline bool measured_clause_brute(const std::vector<int>& la, const std::vector<double>& wa,
                                  const std::vector<int>& lb, const std::vector<double>& wb,
                                  const std::vector<std::pair<std::size_t, std::size_t>>& pairs, double m) {
    std::map<int, double> src_mass, tgt_mass;
    std::map<int, int> target;
    for (std::size_t i = 0; i < la.size(); ++i)
        if (la[i] >= 0) src_mass[la[i]] += wa[i];
    for (std::size_t j = 0; j < lb.size(); ++j)
        if (lb[j] >= 0) tgt_mass[lb[j]] += wb[j];
    for (auto [x, y] : pairs)
        if (la[x] >= 0) target[la[x]] = lb[y];
    std::vector<int> ids;
    for (auto& [id, _] : src_mass) ids.push_back(id);
    for (std::size_t mask = 1; mask < (std::size_t{1} << ids.size()); ++mask) {
        double lhs = 0.0;
        std::set<int> tg;
        for (std::size_t i = 0; i < ids.size(); ++i)
            if (mask >> i & 1) {
                lhs += src_mass[ids[i]];
                tg.insert(target[ids[i]]);
            }
        double rhs = 0.0;
        for (int t : tg) rhs += tgt_mass[t];
        if (lhs > rhs + m + 1e-12) return false;
    }
    return true;
}

} // namespace oracle
