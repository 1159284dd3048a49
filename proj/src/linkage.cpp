#include "gammalink/linkage.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "gammalink/union_find.hpp"

namespace gammalink {

namespace {

// sorted distances from x with prefix sums of w, w*d, w*d^2
struct Row {
    std::vector<double> d, cw, cwd, cwd2;
};

Row sorted_row(const Space& X, std::size_t x) {
    std::vector<std::pair<double, double>> dw(X.n);
    for (std::size_t y = 0; y < X.n; ++y) dw[y] = {X.d(x, y), X.weights[y]};
    std::sort(dw.begin(), dw.end());
    Row r;
    double a = 0.0, b = 0.0, c = 0.0;
    for (const auto& [d, w] : dw) {
        a += w;
        b += w * d;
        c += w * d * d;
        if (!r.d.empty() && r.d.back() == d) {
            r.cw.back() = a;
            r.cwd.back() = b;
            r.cwd2.back() = c;
        } else {
            r.d.push_back(d);
            r.cw.push_back(a);
            r.cwd.push_back(b);
            r.cwd2.push_back(c);
        }
    }
    return r;
}

// density at scale s from a sorted row; s = 0 is the limit from above
double row_density(const Row& row, const Kernel& K, double s) {
    if (s <= 0.0) return row.d.front() == 0.0 ? row.cw.front() : 0.0;
    const double reach = s * K.support();
    // number of distinct distances strictly inside the support
    const std::size_t m = static_cast<std::size_t>(std::lower_bound(row.d.begin(), row.d.end(), reach) - row.d.begin());
    if (m == 0) return 0.0;
    const double W = row.cw[m - 1];
    switch (K.shape) {
    case Shape::uniform: return W;
    case Shape::epanechnikov: return W - row.cwd2[m - 1] / (s * s);
    case Shape::triangular: return W - row.cwd[m - 1] / s;
    case Shape::gauss: {
        double v = 0.0, prev = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            v += (row.cw[i] - prev) * std::exp(-0.5 * (row.d[i] / s) * (row.d[i] / s));
            prev = row.cw[i];
        }
        return v;
    }
    }
    return 0.0;
}

std::optional<double> birth_from_row(const Row& row, const Kernel& K, const Curve& c) {
    const double maxr = c.max_r();
    if (K.shape == Shape::uniform) {
        // density at r is cw_j for the largest d_j < s(r); the point is present on
        // [0, rho_j) meet [0, kappa_j] for some j
        double best = 0.0;
        for (std::size_t j = 0; j < row.d.size(); ++j) {
            const double rho = c.s_le_from(row.d[j]);
            if (!(rho > 0.0)) break;
            const auto kap = c.k_le_until(row.cw[j]);
            if (!kap) continue;
            best = std::max(best, std::min({rho, *kap, maxr}));
        }
        if (best > 0.0) return best;
        return std::nullopt;
    }
    // density(s(r)) - k(r) is non-increasing in r; K(0) = 1 bounds the density
    const auto k1 = c.k_le_until(1.0 + 1e-12);
    if (!k1) return std::nullopt;
    const double top = std::min(maxr, *k1);
    auto f = [&](double r) {
        const Point3 p = c.eval(r);
        return row_density(row, K, p.s) - p.k;
    };
    if (f(top) >= 0.0) return top;
    if (f(0.0) < 0.0) return std::nullopt;
    double lo = 0.0, hi = top;
    for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (f(mid) >= 0.0)
            lo = mid;
        else
            hi = mid;
    }
    if (lo > 0.0) return lo;
    return std::nullopt;
}

} // namespace

std::vector<std::optional<double>> vertex_births(const Space& X, const Kernel& K, const Curve& contra) {
    if (contra.orientation != Orientation::contra) throw validation_error("vertex births need a contravariant curve");
    std::vector<std::optional<double>> b(X.n);
    for (std::size_t x = 0; x < X.n; ++x) b[x] = birth_from_row(sorted_row(X, x), K, contra);
    return b;
}

std::optional<double> vertex_birth(const Space& X, const Kernel& K, const Curve& contra, std::size_t x) {
    if (x >= X.n) throw validation_error("point index out of range");
    if (contra.orientation != Orientation::contra) throw validation_error("vertex births need a contravariant curve");
    return birth_from_row(sorted_row(X, x), K, contra);
}

std::optional<double> edge_value(const Space& X, const Curve& contra, std::size_t x, std::size_t y) {
    if (x == y) throw validation_error("edge needs two distinct points");
    const double d = X.d(x, y);
    if (d == 0.0) return contra.max_r();
    return contra.t_ge_until(d);
}

std::vector<std::size_t> MergeForest::roots() const {
    std::vector<std::size_t> r;
    for (std::size_t i = 0; i < nodes.size(); ++i)
        if (nodes[i].parent == kNone) r.push_back(i);
    return r;
}

std::vector<std::size_t> MergeForest::home() const {
    std::vector<std::size_t> h(n_points(), kNone);
    for (std::size_t i = 0; i < nodes.size(); ++i)
        for (const auto& m : nodes[i].members) h[m.point] = i;
    return h;
}

std::vector<double> MergeForest::entries() const {
    std::vector<double> e(n_points(), std::nan(""));
    for (const auto& nd : nodes)
        for (const auto& m : nd.members) e[m.point] = m.entry;
    return e;
}

std::vector<int> MergeForest::labels_at(double r) const {
    if (!(r > 0.0)) throw validation_error("clusters_at needs r > 0");
    std::vector<int> lab(n_points(), -1);
    if (r >= max_r) return lab;
    std::vector<int> node_label(nodes.size(), -1);
    std::vector<std::size_t> top(n_points(), kNone);
    for (std::size_t i = 0; i < nodes.size(); ++i)
        for (const auto& m : nodes[i].members) {
            if (m.entry < r) continue;
            std::size_t v = i;
            while (nodes[v].death >= r) v = nodes[v].parent;
            top[m.point] = v;
        }
    // ids are smallest member index
    for (std::size_t p = 0; p < n_points(); ++p) {
        if (top[p] == kNone) continue;
        if (node_label[top[p]] < 0) node_label[top[p]] = static_cast<int>(p);
        lab[p] = node_label[top[p]];
    }
    return lab;
}

Clustering MergeForest::clusters_at(double r) const { return labels_to_clustering(labels_at(r)); }

Clustering labels_to_clustering(const std::vector<int>& labels) {
    std::map<int, std::vector<std::size_t>> g;
    for (std::size_t p = 0; p < labels.size(); ++p)
        if (labels[p] >= 0) g[labels[p]].push_back(p);
    Clustering out;
    for (auto& [id, pts] : g) out.push_back(std::move(pts));
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
    return out;
}

void MergeForest::check() const {
    auto fail = [](const std::string& m) { throw std::logic_error("forest invariant: " + m); };
    std::vector<int> seen(n_points(), 0);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const Node& nd = nodes[i];
        if (!(nd.death < nd.birth)) fail("node " + std::to_string(i) + " has empty life");
        if (nd.parent == kNone) {
            if (nd.death != 0.0) fail("root " + std::to_string(i) + " does not die at 0");
        } else {
            const Node& p = nodes[nd.parent];
            if (nd.death != p.birth) fail("node " + std::to_string(i) + " death != parent birth");
            if (std::find(p.children.begin(), p.children.end(), i) == p.children.end())
                fail("parent of " + std::to_string(i) + " does not list it");
        }
        for (auto c : nd.children)
            if (c >= nodes.size() || nodes[c].parent != i) fail("child link broken at " + std::to_string(i));
        for (const auto& m : nd.members) {
            if (m.point >= n_points()) fail("member out of range");
            if (!(m.entry > nd.death) || m.entry > nd.birth) fail("entry outside life at node " + std::to_string(i));
            ++seen[m.point];
        }
    }
    for (auto u : unborn) {
        if (u >= n_points()) fail("unborn out of range");
        ++seen[u];
    }
    for (std::size_t p = 0; p < seen.size(); ++p)
        if (seen[p] != 1) fail("point " + std::to_string(p) + " listed " + std::to_string(seen[p]) + " times");
}

MergeForest assemble_forest(const std::vector<std::optional<double>>& births, std::vector<Edge> edges,
                            const std::vector<double>& weights) {
    const std::size_t n = births.size();
    struct Work {
        double birth;
        double death = 0.0;
        std::size_t parent = kNone;
        std::vector<std::size_t> children;
        std::vector<Member> members;
        bool alive = true;
    };
    std::vector<Work> W;

    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < n; ++i)
        if (births[i]) order.push_back(i);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (*births[a] != *births[b]) return *births[a] > *births[b];
        return a < b;
    });
    std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
        if (a.v != b.v) return a.v > b.v;
        if (a.i != b.i) return a.i < b.i;
        return a.j < b.j;
    });

    UnionFind uf(n);
    std::vector<std::size_t> comp(n, kNone);  // union-find root -> work node
    std::size_t vi = 0, ei = 0;
    while (vi < order.size() || ei < edges.size()) {
        // vertices before edges at equal value
        if (vi < order.size() && (ei >= edges.size() || *births[order[vi]] >= edges[ei].v)) {
            const std::size_t x = order[vi++];
            Work w;
            w.birth = *births[x];
            w.members.push_back({x, w.birth});
            W.push_back(std::move(w));
            comp[x] = W.size() - 1;
            continue;
        }
        const Edge e = edges[ei++];
        const std::size_t ri = uf.find(e.i), rj = uf.find(e.j);
        if (ri == rj) continue;
        std::size_t A = comp[ri], B = comp[rj];
        const double v = e.v;
        const bool fa = W[A].birth == v, fb = W[B].birth == v;
        std::size_t result;
        if (!fa && !fb) {
            Work p;
            p.birth = v;
            p.children = {A, B};
            W.push_back(std::move(p));
            result = W.size() - 1;
            W[A].death = v;
            W[B].death = v;
            W[A].parent = result;
            W[B].parent = result;
        } else if (fa != fb) {
            const std::size_t F = fa ? A : B, O = fa ? B : A;
            if (W[F].children.empty()) {
                // zero-length singleton class: its points join the older cluster
                for (auto& m : W[F].members) W[O].members.push_back(m);
                W[F].members.clear();
                W[F].alive = false;
                result = O;
            } else {
                W[O].death = v;
                W[O].parent = F;
                W[F].children.push_back(O);
                result = F;
            }
        } else {
            // both opened at v: fold one into the other, preferring a merge node as survivor
            std::size_t S = A, G = B;
            if (W[A].children.empty() && !W[B].children.empty()) std::swap(S, G);
            for (auto& m : W[G].members) W[S].members.push_back(m);
            for (auto c : W[G].children) {
                W[c].parent = S;
                W[S].children.push_back(c);
            }
            W[G].members.clear();
            W[G].children.clear();
            W[G].alive = false;
            result = S;
        }
        const std::size_t r = uf.unite(e.i, e.j);
        comp[r] = result;
    }

    // a point entering at the value where its node merges belongs to the merged node
    for (bool moved = true; moved;) {
        moved = false;
        for (auto& w : W) {
            if (!w.alive || w.parent == kNone) continue;
            auto it = std::stable_partition(w.members.begin(), w.members.end(),
                                            [&](const Member& m) { return m.entry > w.death; });
            if (it == w.members.end()) continue;
            auto& up = W[w.parent].members;
            up.insert(up.end(), it, w.members.end());
            w.members.erase(it, w.members.end());
            moved = true;
        }
    }

    MergeForest F;
    F.weights = weights;
    std::vector<std::size_t> remap(W.size(), kNone);
    for (std::size_t i = 0; i < W.size(); ++i)
        if (W[i].alive) {
            remap[i] = F.nodes.size();
            F.nodes.emplace_back();
        }
    for (std::size_t i = 0; i < W.size(); ++i) {
        if (!W[i].alive) continue;
        Node& nd = F.nodes[remap[i]];
        nd.birth = W[i].birth;
        nd.death = W[i].parent == kNone ? 0.0 : W[i].death;
        nd.parent = W[i].parent == kNone ? kNone : remap[W[i].parent];
        for (auto c : W[i].children) nd.children.push_back(remap[c]);
        std::sort(nd.children.begin(), nd.children.end());
        nd.members = W[i].members;
        std::sort(nd.members.begin(), nd.members.end(),
                  [](const Member& a, const Member& b) { return a.point < b.point; });
    }
    for (std::size_t i = 0; i < n; ++i)
        if (!births[i]) F.unborn.push_back(i);
    return F;
}

MergeForest build_forest(const Space& X, const Kernel& K, const Slice& slice) {
    const Curve& c = slice.contra;
    auto births = vertex_births(X, K, c);
    std::vector<Edge> edges;
    const double t0 = c.knots.front().t;
    for (std::size_t i = 0; i < X.n; ++i) {
        if (!births[i]) continue;
        for (std::size_t j = i + 1; j < X.n; ++j) {
            if (!births[j]) continue;
            const double d = X.d(i, j);
            if (d > t0) continue;
            const auto e = d == 0.0 ? std::optional<double>(c.max_r()) : c.t_ge_until(d);
            if (!e) continue;
            const double v = std::min({*births[i], *births[j], *e});
            if (v > 0.0) edges.push_back({v, i, j});
        }
    }
    MergeForest F = assemble_forest(births, std::move(edges), X.weights);
    F.curve = slice.source.spec;
    F.kernel = K.name();
    F.orientation = slice.source.orientation;
    F.max_r = c.max_r();
    F.horizon = slice.horizon;
    return F;
}

MergeForest build_forest(const Space& X, const Kernel& K, const Curve& curve) {
    return build_forest(X, K, make_slice(curve, X, K));
}

MergeForest map_values(const MergeForest& F, const std::function<double(double)>& f) {
    MergeForest G = F;
    G.max_r = f(F.max_r);
    for (auto& nd : G.nodes) {
        nd.birth = f(nd.birth);
        nd.death = nd.parent == kNone ? 0.0 : f(nd.death);
        for (auto& m : nd.members) m.entry = f(m.entry);
    }
    return G;
}

std::vector<int> single_linkage_labels(const Space& X, const std::vector<bool>& mask, double t) {
    UnionFind uf(X.n);
    for (std::size_t i = 0; i < X.n; ++i) {
        if (!mask[i]) continue;
        for (std::size_t j = i + 1; j < X.n; ++j)
            if (mask[j] && X.d(i, j) <= t) uf.unite(i, j);
    }
    std::vector<int> lab(X.n, -1);
    std::vector<int> first(X.n, -1);
    for (std::size_t i = 0; i < X.n; ++i) {
        if (!mask[i]) continue;
        const std::size_t r = uf.find(i);
        if (first[r] < 0) first[r] = static_cast<int>(i);
        lab[i] = first[r];
    }
    return lab;
}

KernelLinkageGrid sample_kernel_linkage(const Space& X, const Kernel& K, const std::vector<double>& s,
                                        const std::vector<double>& t, const std::vector<double>& k) {
    if (s.size() * t.size() * k.size() > 100000) throw validation_error("grid too large");
    for (const auto* g : {&s, &t, &k}) {
        if (g->empty()) throw validation_error("empty grid");
        for (std::size_t i = 1; i < g->size(); ++i)
            if (!((*g)[i] > (*g)[i - 1])) throw validation_error("grid not strictly increasing");
    }
    KernelLinkageGrid G{s, t, k, {}};
    G.cells.resize(s.size() * t.size() * k.size());
    for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t l = 0; l < k.size(); ++l) {
            const auto mask = filtration_membership(X, K, s[i], k[l]);
            for (std::size_t j = 0; j < t.size(); ++j)
                G.cells[(i * t.size() + j) * k.size() + l] = single_linkage_labels(X, mask, t[j]);
        }
    return G;
}

} // namespace gammalink
