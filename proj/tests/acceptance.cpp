// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "gammalink/experiments.hpp"
#include "gammalink/interleave.hpp"
#include "gammalink/json_io.hpp"
#include "gammalink/linkage.hpp"
#include "gammalink/measure_prune.hpp"
#include "gammalink/persistence.hpp"
#include "oracles.hpp"

using namespace gammalink;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

Space space_of(const oracle::Instance& in) { return build_space(in.pts, in.w); }

MergeForest forest_of(const oracle::Instance& in) {
    return build_forest(space_of(in), Kernel::parse("uniform"), oracle::line_curve(in));
}

oracle::PD engine_pd(const MergeForest& F) {
    auto pts = diagram(F).points;
    std::sort(pts.begin(), pts.end());
    return pts;
}

Outcome hand_fixture() {
    Points p{1, {0.0, 7.0}};
    const Space X = build_space(p, std::vector<double>{0.75, 0.25});
    const MergeForest F = build_forest(X, Kernel::parse("uniform"), make_line(8, 1, false));
    const auto pd = engine_pd(F);
    const oracle::PD want{{0.0, 0.75}, {0.125, 0.25}};
    const auto one = flatten_pf(F, 0.2), two = flatten_pf(F, 0.05);
    const bool ok = pd == want && one.clusters == Clustering{{0, 1}} && two.clusters == Clustering{{0}, {1}};
    std::string s = canonical_dump(diagram_to_json(diagram(F)));
    s.pop_back();
    return {ok, s};
}

Outcome table_oracle() {
    Rng rng(101);
    std::size_t checked = 0, bad = 0;
    for (int i = 0; i < 200; ++i) {
        const auto in = oracle::random_instance(rng);
        const MergeForest F = forest_of(in);
        for (int j = 0; j < 25; ++j) {
            const double r = rng.uniform(0.0, in.y);
            if (!(r > 0.0)) continue;
            ++checked;
            if (oracle::canonical(F.clusters_at(r)) != oracle::line_components(in, r)) ++bad;
        }
    }
    return {bad == 0, std::to_string(checked) + " queries, " + std::to_string(bad) + " mismatches"};
}

Outcome elder_oracle() {
    Rng rng(101);
    int bad = 0;
    for (int i = 0; i < 200; ++i) {
        const auto in = oracle::random_instance(rng);
        if (engine_pd(forest_of(in)) != oracle::elder_by_tracking(in)) ++bad;
        for (int j = 0; j < 25; ++j) rng.uniform();
    }
    return {bad == 0, "200 instances, " + std::to_string(bad) + " mismatches"};
}

Outcome from_report(const ExperimentReport& rep) {
    std::string s = canonical_dump(rep.summary);
    s.pop_back();
    return {rep.pass, s};
}

Outcome tiny_lower_bound() {
    Rng rng(606);
    int bad = 0;
    double worst = -kInf;
    const std::pair<std::size_t, std::size_t> shapes[] = {{1, 4}, {2, 2}, {2, 3}, {3, 3}, {3, 4}, {2, 6}, {4, 3}};
    for (int i = 0; i < 50; ++i) {
        const auto [nx, ny] = shapes[rng.below(7)];
        auto a = oracle::random_instance(rng, nx), b = oracle::random_instance(rng, ny);
        // force the drawn sizes
        while (a.w.size() != nx) a = oracle::random_instance(rng, nx);
        while (b.w.size() != ny) b = oracle::random_instance(rng, ny);
        const MergeForest H = forest_of(a), E = forest_of(b);
        const double lhs = bottleneck(diagram(H), diagram(E));
        const double rhs = dci_exact_tiny(H, E);
        worst = std::max(worst, lhs - rhs);
        if (lhs > rhs + 1e-9) ++bad;
    }
    return {bad == 0, "worst d_B - d_CI = " + format_double(worst)};
}

// node of F alive at r holding point p (kNone if p absent)
std::size_t alive_node(const MergeForest& F, const std::vector<std::size_t>& home, std::size_t p, double r) {
    std::size_t v = home[p];
    if (v == kNone) return kNone;
    while (v != kNone && F.nodes[v].death >= r) v = F.nodes[v].parent;
    return v;
}

std::vector<std::size_t> leaves(const MergeForest& F) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < F.nodes.size(); ++i)
        if (F.nodes[i].children.empty()) out.push_back(i);
    return out;
}

// leaf -> leaf of the other forest holding the image of the leaf's cluster at its birth, shifted by eps
std::map<std::size_t, std::size_t> leaf_matching(const MergeForest& A, const MergeForest& B,
                                                 const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
                                                 double eps, bool& ok) {
    std::map<std::size_t, std::size_t> m;
    const auto hb = B.home();
    for (auto leaf : leaves(A)) {
        const double r = std::min(A.nodes[leaf].birth, std::nextafter(A.max_r, 0.0));
        const auto la = A.labels_at(r);
        int lab = -1;
        for (const auto& mem : A.nodes[leaf].members)
            if (la[mem.point] >= 0) lab = la[mem.point];
        std::set<std::size_t> targets;
        for (auto [x, y] : pairs)
            if (lab >= 0 && la[x] == lab) targets.insert(alive_node(B, hb, y, r - eps));
        if (targets.size() != 1 || *targets.begin() == kNone || !B.nodes[*targets.begin()].children.empty()) {
            ok = false;
            continue;
        }
        m[leaf] = *targets.begin();
    }
    return m;
}

std::vector<std::pair<std::size_t, std::size_t>> flipped(const Correspondence& R) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (auto [x, y] : R.pairs) out.push_back({y, x});
    return out;
}

// clustered 1-D points with uniform weights
Points blob_points(Rng& rng, std::size_t& n) {
    n = 6 + rng.below(5);
    const std::size_t groups = 2 + rng.below(2);
    std::vector<double> centers;
    for (std::size_t g = 0; g < groups; ++g) centers.push_back(rng.uniform(0.0, 10.0));
    Points p{1, {}};
    for (std::size_t i = 0; i < n; ++i) p.coords.push_back(centers[rng.below(groups)] + 0.4 * rng.normal());
    return p;
}

Outcome pruning_suite() {
    const Kernel K = Kernel::parse("uniform");
    std::string detail;
    bool all = true;

    // tau-interleaving of the pruned forest with the original
    {
        Rng rng(707);
        int bad = 0;
        for (int i = 0; i < 50; ++i) {
            const MergeForest F = forest_of(oracle::random_instance(rng));
            for (double tau : {0.05, 0.1, 0.3}) {
                const MergeForest P = prune_persistence(F, tau);
                if (!check_interleaving(P, F, Correspondence::identity(F.n_points()), tau).ok) ++bad;
            }
        }
        all &= bad == 0;
        detail += "tau-interleaving fails=" + std::to_string(bad);
    }
    // leaf count identity
    {
        Rng rng(708);
        int bad = 0;
        for (int i = 0; i < 200; ++i) {
            const MergeForest F = forest_of(oracle::random_instance(rng));
            const double tau = rng.uniform(0.0, 0.5);
            std::size_t above = 0;
            for (double p : diagram(F).persistences()) above += p > tau;
            if (flatten_pf(F, tau).clusters.size() != above) ++bad;
        }
        all &= bad == 0;
        detail += "; count fails=" + std::to_string(bad);
    }
    // separated pairs: equal counts and a leaf bijection
    {
        Rng rng(709);
        int done = 0, bad = 0, attempts = 0;
        const Curve line = make_line(2, 1, false);
        while (done < 30 && attempts < 2000) {
            ++attempts;
            std::size_t n;
            const Points pts = blob_points(rng, n);
            const std::vector<double> w(n, 1.0 / static_cast<double>(n));
            const MergeForest F = build_forest(build_space(pts, w), K, line);
            auto pers = diagram(F).persistences();
            pers.push_back(0.0);
            std::size_t g = 0;
            for (std::size_t i = 0; i + 1 < pers.size(); ++i)
                if (pers[i] - pers[i + 1] > pers[g] - pers[g + 1]) g = i;
            const double a = pers[g + 1], b = a + 0.999 * (pers[g] - pers[g + 1]);
            if (!separated(diagram(F), a, b) || b - a < 0.05) continue;
            double delta = 0.05, eps = kInf;
            Jittered J;
            Correspondence R;
            MergeForest E;
            for (int tries = 0; tries < 8 && !(eps < (b - a) / 3.0); ++tries, delta /= 2.0) {
                J = jitter(pts, w, delta, rng.next());
                R = closest_point_correspondence(J.pair);
                E = build_forest(J.pair.side_b(), K, line);
                eps = dci_upper(F, E, R);
            }
            if (!(eps < (b - a) / 3.0)) continue;
            ++done;
            const double tau = 0.5 * ((a + eps) + (b - 2.0 * eps));
            const MergeForest HP = prune_persistence(F, tau), EP = prune_persistence(E, tau);
            bool ok = flatten_pf(F, tau).clusters.size() == flatten_pf(E, tau).clusters.size();
            const auto mx = leaf_matching(HP, EP, R.pairs, eps, ok);
            const auto my = leaf_matching(EP, HP, flipped(R), eps, ok);
            ok &= mx.size() == leaves(HP).size() && my.size() == leaves(EP).size();
            for (auto [c, d] : mx) ok &= my.count(d) && my.at(d) == c;
            if (!ok) ++bad;
        }
        all &= done == 30 && bad == 0;
        detail += "; bijection instances=" + std::to_string(done) + " fails=" + std::to_string(bad);
    }
    // measure pruning of non-compressing forests
    {
        Rng rng(710);
        int done = 0, bad = 0, attempts = 0;
        const Curve line = make_line(2, 1, false);
        while (done < 30 && attempts < 2000) {
            ++attempts;
            std::size_t n;
            const Points pts = blob_points(rng, n);
            const std::vector<double> w(n, 1.0 / static_cast<double>(n));
            const MergeForest F = build_forest(build_space(pts, w), K, line);
            const Jittered J = jitter(pts, w, 0.02, rng.next());
            const Correspondence R = closest_point_correspondence(J.pair);
            const MergeForest E = build_forest(J.pair.side_b(), K, line);
            const double eps = dmi_upper(F, E, R);
            if (!std::isfinite(eps)) continue;
            const double m = rng.uniform(0.15, 0.6), kappa = 2.0 * eps + 0.02;
            const double rho = non_compressing_check(F, m, kappa, kInf).max_span;
            if (!(rho > 0.0) || !non_compressing_check(F, m, kappa, rho).ok) continue;
            ++done;
            if (!check_measured_interleaving(prune_measure(F, m), prune_measure(E, m), R, 3.0 * eps + rho, eps).ok)
                ++bad;
        }
        all &= done == 30 && bad == 0;
        detail += "; measured instances=" + std::to_string(done) + " fails=" + std::to_string(bad);
    }
    return {all, detail};
}

Outcome multiparam() {
    const Kernel K = Kernel::parse("uniform");
    std::vector<double> axis;
    for (int i = 1; i <= 20; ++i) axis.push_back(0.05 * i);
    Rng rng(808);
    int bad = 0;
    for (int i = 0; i < 20; ++i) {
        const std::size_t n = 3 + rng.below(8);
        Points p{2, {}};
        for (std::size_t j = 0; j < 2 * n; ++j) p.coords.push_back(rng.uniform(0.0, 1.0));
        std::vector<double> w(n);
        double tot = 0.0;
        for (auto& x : w) tot += x = rng.uniform(0.5, 1.5);
        for (auto& x : w) x /= tot;
        const Jittered J = jitter(p, w, 0.05, rng.next());
        const Correspondence R = closest_point_correspondence(J.pair);
        const Space X = J.pair.side_a(), Y = J.pair.side_b();
        const auto gx = sample_kernel_linkage(X, K, axis, axis, axis);
        const auto gy = sample_kernel_linkage(Y, K, axis, axis, axis);
        if (!check_multiparam_interleaving(gx, X.weights, gy, Y.weights, R, {0.1, 0.1, 0.05}, 0.05)) ++bad;
    }
    return {bad == 0, "20 instances, " + std::to_string(bad) + " failures"};
}

} // namespace

int main() {
    using clock = std::chrono::steady_clock;
    struct Criterion {
        int id;
        double budget;  // seconds
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> list{
        {1, 1, hand_fixture},
        {2, 30, table_oracle},
        {3, 30, elder_oracle},
        {4, 120, [] { return from_report(run_experiment("stability", 1, "")); }},
        {5, 180, [] { return from_report(run_experiment("curve-stability", 1, "")); }},
        {6, 60, tiny_lower_bound},
        {7, 120, pruning_suite},
        {8, 120, multiparam},
        {9, 300, [] { return from_report(run_experiment("consistency", 1, "")); }},
        {10, 600, [] { return from_report(run_experiment("figure7", 1, "")); }},
    };
    int failed = 0;
    for (const auto& c : list) {
        const auto t0 = clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(clock::now() - t0).count();
        const bool pass = o.pass && secs < c.budget;
        failed += !pass;
        std::printf("criterion %d: %s (%.2fs / %.0fs) %s\n", c.id, pass ? "PASS" : "FAIL", secs, c.budget,
                    o.detail.c_str());
        std::fflush(stdout);
    }
    return failed ? 1 : 0;
}
