#include "gammalink/measure_prune.hpp"

#include <algorithm>
#include <cmath>

namespace gammalink {

namespace {

bool reaches(double mass, double m) { return mass >= m - 1e-12 * std::max(1.0, m); }

} // namespace

// Descendant members all entered above the node's birth, so they count in
// full anywhere in its life; only the node's own members need a profile.
MassProfile::MassProfile(const MergeForest& F) {
    const std::size_t N = F.nodes.size();
    entries.resize(N);
    cumulative.resize(N);
    std::vector<double> sub(N, 0.0);
    std::vector<char> seen(N, 0);
    std::vector<std::size_t> order;
    for (auto r : F.roots()) {
        std::vector<std::size_t> st{r};
        while (!st.empty()) {
            auto v = st.back();
            st.pop_back();
            order.push_back(v);
            for (auto c : F.nodes[v].children) st.push_back(c);
        }
    }
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        const auto v = *it;
        double below = 0.0;
        for (auto c : F.nodes[v].children) below += sub[c];
        auto mem = F.nodes[v].members;
        std::sort(mem.begin(), mem.end(), [](const Member& a, const Member& b) { return a.entry > b.entry; });
        double acc = below;
        entries[v].push_back(kInf);
        cumulative[v].push_back(below);
        for (const auto& m : mem) {
            acc += F.weights[m.point];
            entries[v].push_back(m.entry);
            cumulative[v].push_back(acc);
        }
        sub[v] = acc;
    }
}

double MassProfile::mass(std::size_t v, double r) const {
    const auto& e = entries[v];
    // last index with entry >= r
    auto it = std::partition_point(e.begin(), e.end(), [r](double x) { return x >= r; });
    return cumulative[v][static_cast<std::size_t>(it - e.begin()) - 1];
}

MergeForest prune_measure(const MergeForest& F, double m) {
    if (!(m > 0.0 && m <= 1.0)) throw validation_error("min mass must be in (0, 1]");
    const MassProfile P(F);
    std::vector<std::optional<double>> top(F.nodes.size());
    for (std::size_t v = 0; v < F.nodes.size(); ++v) {
        if (!reaches(P.total(v), m)) continue;
        const auto& c = P.cumulative[v];
        std::size_t i = 0;
        while (!reaches(c[i], m)) ++i;
        top[v] = std::min(F.nodes[v].birth, P.entries[v][i]);
    }
    return trim_forest(F, top);
}

NonCompressingResult non_compressing_check(const MergeForest& F, double m, double kappa, double rho) {
    if (!(m > 0.0 && kappa > 0.0 && rho > 0.0)) throw validation_error("m, kappa and rho must be > 0");
    const MassProfile P(F);
    NonCompressingResult out;
    // any nested pair lies on some leaf-to-root path, where the cluster mass
    // is a step function non-increasing in r
    for (std::size_t leaf = 0; leaf < F.nodes.size(); ++leaf) {
        if (!F.nodes[leaf].children.empty()) continue;
        std::vector<std::size_t> path;
        for (auto v = leaf; v != kNone; v = F.nodes[v].parent) path.push_back(v);
        std::vector<double> cv;
        for (auto v : path) {
            cv.push_back(F.nodes[v].birth);
            for (const auto& mm : F.nodes[v].members) cv.push_back(mm.entry);
        }
        std::sort(cv.begin(), cv.end(), std::greater<>());
        cv.erase(std::unique(cv.begin(), cv.end()), cv.end());
        while (!cv.empty() && cv.back() <= 0.0) cv.pop_back();
        auto node_at = [&](double r) {
            std::size_t k = 0;
            while (k + 1 < path.size() && F.nodes[path[k]].death >= r) ++k;
            return path[k];
        };
        // interval i is (cv[i+1], cv[i]] with cv[size] = 0
        std::size_t i = 0;
        while (i < cv.size()) {
            auto in_window = [&](std::size_t k) { return std::abs(P.mass(node_at(cv[k]), cv[k]) - m) < kappa; };
            if (!in_window(i)) {
                ++i;
                continue;
            }
            std::size_t j = i;
            while (j + 1 < cv.size() && in_window(j + 1)) ++j;
            const double lower = j + 1 < cv.size() ? cv[j + 1] : 0.0;
            const double span = cv[i] - lower;
            out.max_span = std::max(out.max_span, span);
            if (span > rho && out.ok) {
                out.ok = false;
                out.witness = CompressionWitness{node_at(cv[i]), node_at(cv[i] - rho), cv[i], cv[i] - rho};
            }
            i = j + 1;
        }
    }
    return out;
}

PruneOrder parse_prune_order(const std::string& s) {
    if (s == "pm") return PruneOrder::persistence_first;
    if (s == "mp") return PruneOrder::measure_first;
    throw validation_error("order must be pm or mp");
}

FlatClustering flatten(const MergeForest& F, double tau, double m, PruneOrder order) {
    if (!(tau >= 0.0)) throw validation_error("tau must be >= 0");
    if (!(m >= 0.0 && m <= 1.0)) throw validation_error("min mass must be in [0, 1]");
    MergeForest G = F;
    auto pers = [&] {
        if (tau > 0.0) G = prune_persistence(G, tau);
    };
    auto meas = [&] {
        if (m > 0.0) G = prune_measure(G, m);
    };
    if (order == PruneOrder::persistence_first) {
        pers();
        meas();
    } else {
        meas();
        pers();
    }
    return leaves_clustering(G);
}

} // namespace gammalink
