#include "gammalink/persistence.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "gammalink/matching.hpp"
#include "gammalink/parallel.hpp"

namespace gammalink {

void Diagram::canonicalize() {
    std::sort(points.begin(), points.end(), [](const auto& a, const auto& b) {
        const double pa = a.second - a.first, pb = b.second - b.first;
        if (pa != pb) return pa > pb;
        if (a.first != b.first) return a.first < b.first;
        return a.second < b.second;
    });
}

std::vector<double> Diagram::persistences() const {
    std::vector<double> p;
    for (const auto& [d, b] : points) p.push_back(b - d);
    std::sort(p.begin(), p.end(), std::greater<>());
    return p;
}

namespace {

// children before parents
std::vector<std::size_t> post_order(const MergeForest& F) {
    std::vector<std::size_t> out;
    std::vector<std::pair<std::size_t, std::size_t>> st;
    for (auto r : F.roots()) {
        st.push_back({r, 0});
        while (!st.empty()) {
            auto& [v, i] = st.back();
            if (i < F.nodes[v].children.size()) {
                auto c = F.nodes[v].children[i++];
                st.push_back({c, 0});
            } else {
                out.push_back(v);
                st.pop_back();
            }
        }
    }
    return out;
}

} // namespace

std::vector<double> max_births(const MergeForest& F) {
    std::vector<double> M(F.nodes.size());
    for (auto v : post_order(F)) {
        M[v] = F.nodes[v].birth;
        for (auto c : F.nodes[v].children) M[v] = std::max(M[v], M[c]);
    }
    return M;
}

Diagram diagram(const MergeForest& F) {
    Diagram D;
    D.orientation = F.orientation;
    D.horizon = F.horizon;
    const auto M = max_births(F);
    std::vector<std::size_t> minidx(F.nodes.size(), kNone);
    for (auto v : post_order(F)) {
        for (const auto& m : F.nodes[v].members) minidx[v] = std::min(minidx[v], m.point);
        for (auto c : F.nodes[v].children) minidx[v] = std::min(minidx[v], minidx[c]);
    }
    for (std::size_t v = 0; v < F.nodes.size(); ++v) {
        const Node& nd = F.nodes[v];
        if (nd.parent == kNone && M[v] > nd.death) D.points.push_back({nd.death, M[v]});
        if (nd.children.empty()) continue;
        // elder child carries the class on; the others die here
        auto kids = nd.children;
        std::sort(kids.begin(), kids.end(), [&](std::size_t a, std::size_t b) {
            if (M[a] != M[b]) return M[a] > M[b];
            return minidx[a] < minidx[b];
        });
        for (std::size_t i = 1; i < kids.size(); ++i)
            if (M[kids[i]] > nd.birth) D.points.push_back({nd.birth, M[kids[i]]});
    }
    D.canonicalize();
    return D;
}

MergeForest trim_forest(const MergeForest& F, const std::vector<std::optional<double>>& top) {
    const std::size_t N = F.nodes.size();
    // nearest kept ancestor, self included
    std::vector<std::size_t> anc(N, kNone);
    std::vector<char> done(N, 0);
    for (std::size_t v = 0; v < N; ++v) {
        std::vector<std::size_t> path;
        std::size_t u = v;
        while (u != kNone && !done[u] && !top[u]) {
            path.push_back(u);
            u = F.nodes[u].parent;
        }
        std::size_t a = kNone;
        if (u != kNone) a = done[u] ? anc[u] : u;
        if (u != kNone && !done[u]) {
            anc[u] = u;
            done[u] = 1;
        }
        for (auto p : path) {
            anc[p] = a;
            done[p] = 1;
        }
    }

    std::vector<double> birth(N), death(N);
    std::vector<std::size_t> par(N, kNone);
    std::vector<std::vector<std::size_t>> kids(N);
    std::vector<std::vector<Member>> mem(N);
    std::vector<std::size_t> unborn = F.unborn;
    for (std::size_t v = 0; v < N; ++v) {
        const Node& nd = F.nodes[v];
        if (top[v]) {
            birth[v] = *top[v];
            if (!(birth[v] > nd.death) || birth[v] > nd.birth) throw std::logic_error("trim outside node life");
            if (nd.parent != kNone) {
                if (!top[nd.parent] || *top[nd.parent] != F.nodes[nd.parent].birth)
                    throw std::logic_error("kept node under a removed or trimmed parent");
                par[v] = nd.parent;
                kids[nd.parent].push_back(v);
            }
            death[v] = nd.parent == kNone ? 0.0 : nd.death;
        }
        for (const auto& m : nd.members) {
            if (anc[v] == kNone)
                unborn.push_back(m.point);
            else
                mem[anc[v]].push_back({m.point, std::min(m.entry, *top[anc[v]])});
        }
    }

    // merge unary chains bottom-up
    std::vector<char> dead(N, 0);
    for (auto v : post_order(F)) {
        if (!top[v]) continue;
        while (kids[v].size() == 1) {
            const std::size_t c = kids[v][0];
            birth[v] = birth[c];
            mem[v].insert(mem[v].end(), mem[c].begin(), mem[c].end());
            kids[v] = kids[c];
            for (auto k : kids[v]) par[k] = v;
            dead[c] = 1;
        }
    }

    MergeForest G;
    G.curve = F.curve;
    G.kernel = F.kernel;
    G.orientation = F.orientation;
    G.max_r = F.max_r;
    G.horizon = F.horizon;
    G.weights = F.weights;
    std::vector<std::size_t> id(N, kNone);
    for (std::size_t v = 0; v < N; ++v)
        if (top[v] && !dead[v]) id[v] = G.nodes.size(), G.nodes.emplace_back();
    for (std::size_t v = 0; v < N; ++v) {
        if (id[v] == kNone) continue;
        Node& nd = G.nodes[id[v]];
        nd.birth = birth[v];
        nd.death = death[v];
        nd.parent = par[v] == kNone ? kNone : id[par[v]];
        for (auto k : kids[v]) nd.children.push_back(id[k]);
        std::sort(nd.children.begin(), nd.children.end());
        nd.members = mem[v];
        std::sort(nd.members.begin(), nd.members.end(),
                  [](const Member& a, const Member& b) { return a.point < b.point; });
    }
    std::sort(unborn.begin(), unborn.end());
    G.unborn = unborn;
    return G;
}

MergeForest prune_persistence(const MergeForest& F, double tau) {
    if (!(tau >= 0.0)) throw validation_error("tau must be >= 0");
    const auto M = max_births(F);
    std::vector<std::optional<double>> top(F.nodes.size());
    for (std::size_t v = 0; v < F.nodes.size(); ++v) {
        const double t = M[v] - tau;
        if (t > F.nodes[v].death) top[v] = std::min(F.nodes[v].birth, t);
    }
    return trim_forest(F, top);
}

FlatClustering leaves_clustering(const MergeForest& F) {
    FlatClustering out;
    out.labels.assign(F.n_points(), -1);
    for (const auto& nd : F.nodes) {
        if (!nd.children.empty()) continue;
        std::vector<std::size_t> c;
        for (const auto& m : nd.members) c.push_back(m.point);
        std::sort(c.begin(), c.end());
        if (!c.empty()) out.clusters.push_back(std::move(c));
    }
    std::sort(out.clusters.begin(), out.clusters.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    for (std::size_t i = 0; i < out.clusters.size(); ++i)
        for (auto p : out.clusters[i]) out.labels[p] = static_cast<int>(i);
    for (std::size_t p = 0; p < F.n_points(); ++p)
        if (out.labels[p] < 0) out.noise.push_back(p);
    return out;
}

FlatClustering flatten_pf(const MergeForest& F, double tau) {
    if (!(tau > 0.0)) throw validation_error("tau must be > 0");
    return leaves_clustering(prune_persistence(F, tau));
}

bool separated(const Diagram& D, double a, double b) {
    if (!(a < b)) throw validation_error("separation needs a < b");
    for (double p : D.persistences())
        if (p > a && p <= b) return false;
    return true;
}

double bottleneck_points(const std::vector<std::pair<double, double>>& A,
                         const std::vector<std::pair<double, double>>& B) {
    const std::size_t n1 = A.size(), n2 = B.size();
    if (n1 + n2 == 0) return 0.0;
    auto linf = [](const auto& p, const auto& q) {
        return std::max(std::abs(p.first - q.first), std::abs(p.second - q.second));
    };
    auto half = [](const auto& p) { return 0.5 * (p.second - p.first); };
    std::vector<double> cand{0.0};
    for (const auto& p : A) cand.push_back(half(p));
    for (const auto& q : B) cand.push_back(half(q));
    for (const auto& p : A)
        for (const auto& q : B) cand.push_back(linf(p, q));
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());

    // left: A points then diagonal copies of B; right: B points then diagonal copies of A
    auto feasible = [&](double delta) {
        std::vector<std::vector<std::size_t>> adj(n1 + n2);
        for (std::size_t i = 0; i < n1; ++i) {
            for (std::size_t j = 0; j < n2; ++j)
                if (linf(A[i], B[j]) <= delta) adj[i].push_back(j);
            if (half(A[i]) <= delta) adj[i].push_back(n2 + i);
        }
        for (std::size_t j = 0; j < n2; ++j) {
            if (half(B[j]) <= delta) adj[n1 + j].push_back(j);
            for (std::size_t i = 0; i < n1; ++i) adj[n1 + j].push_back(n2 + i);
        }
        return max_matching(adj, n1 + n2) == n1 + n2;
    };
    std::size_t lo = 0, hi = cand.size() - 1;
    while (lo < hi) {
        const std::size_t mid = (lo + hi) / 2;
        if (feasible(cand[mid]))
            hi = mid;
        else
            lo = mid + 1;
    }
    return cand[lo];
}

namespace {

// covariant diagrams compared in their own parameter: r = horizon - u
std::vector<std::pair<double, double>> native(const Diagram& D) {
    if (D.orientation == Orientation::contra) return D.points;
    std::vector<std::pair<double, double>> out;
    for (const auto& [d, b] : D.points) out.push_back({D.horizon - b, D.horizon - d});
    return out;
}

} // namespace

double bottleneck(const Diagram& a, const Diagram& b) {
    if (a.orientation != b.orientation) throw validation_error("diagrams have different orientations");
    return bottleneck_points(native(a), native(b));
}

Vineyard vineyard(const Space& X, const Kernel& K, const Family& fam, std::size_t steps, bool drop_top) {
    if (steps == 0) steps = fam.steps;
    Vineyard V;
    V.family = fam;
    V.kernel = K.name();
    V.drop_top = drop_top;
    V.theta = fam.thetas(steps);
    const std::size_t n = V.theta.size();
    V.diagrams.resize(n);
    V.persistences.resize(n);
    std::vector<std::string> errors(n);
    parallel_for(n, [&](std::size_t i) {
        std::optional<Curve> c;
        try {
            c = fam.instantiate(V.theta[i]);
            V.diagrams[i] = diagram(build_forest(X, K, *c));
        } catch (const validation_error& e) {
            errors[i] = e.what();
            if (c) V.diagrams[i].orientation = c->orientation;
        }
        auto p = V.diagrams[i].persistences();
        if (drop_top && !p.empty()) p.erase(p.begin());
        V.persistences[i] = std::move(p);
    });
    for (std::size_t i = 0; i < n; ++i)
        if (!errors[i].empty()) V.failures.push_back({V.theta[i], errors[i]});
    return V;
}

Band confidence_band(const Vineyard& v, const CurveBound& bound) {
    Band B;
    B.theta = v.theta;
    const std::size_t n = v.theta.size();
    const double lo = v.theta.front(), hi = v.theta.back();
    for (std::size_t i = 0; i < n; ++i) {
        const double th = v.theta[i];
        const double left = i > 0 ? 0.5 * (v.theta[i - 1] + th) : lo;
        const double right = i + 1 < n ? 0.5 * (th + v.theta[i + 1]) : hi;
        const double r = std::max(bound(th, left), bound(th, right));
        B.radius.push_back(r);
        std::vector<std::pair<double, double>> iv{{0.0, 2.0 * r}};
        for (double p : v.diagrams[i].persistences()) iv.push_back({std::max(0.0, p - 2.0 * r), p + 2.0 * r});
        B.intervals.push_back(std::move(iv));
    }
    return B;
}

CurveBound line_family_bound(const Family& f) {
    if (!line_intercepts(f.instantiate(f.lo)) || !line_intercepts(f.instantiate(f.hi)))
        throw validation_error("confidence band needs a skew line family");
    return [f](double a, double b) { return line_pair_bound(f.instantiate(a), f.instantiate(b)); };
}

bool band_contains(const Band& band, const Vineyard& fine) {
    for (std::size_t k = 0; k < fine.theta.size(); ++k) {
        const double th = fine.theta[k];
        std::size_t best = 0;
        for (std::size_t i = 1; i < band.theta.size(); ++i)
            if (std::abs(band.theta[i] - th) < std::abs(band.theta[best] - th)) best = i;
        for (double p : fine.diagrams[k].persistences()) {
            bool in = false;
            for (const auto& [a, b] : band.intervals[best])
                if (p >= a - 1e-9 && p <= b + 1e-9) in = true;
            if (!in) return false;
        }
    }
    return true;
}

} // namespace gammalink
