#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "gammalink/measure_prune.hpp"
#include "gammalink/persistence.hpp"
#include "oracles.hpp"

using namespace gammalink;

namespace {

const Kernel U = Kernel::parse("uniform");
using PD = std::vector<std::pair<double, double>>;

MergeForest fixture() {
    return build_forest(build_space(Points{1, {0.0, 7.0}}, std::vector<double>{0.75, 0.25}), U, make_line(8, 1, false));
}

MergeForest random_forest(Rng& rng) {
    const auto in = oracle::random_instance(rng);
    return build_forest(build_space(in.pts, in.w), U, oracle::line_curve(in));
}

Diagram contra(PD pts) {
    Diagram d;
    d.points = std::move(pts);
    return d;
}

PD random_pd(Rng& rng, std::size_t max_n) {
    PD out;
    const std::size_t n = rng.below(max_n + 1);
    for (std::size_t i = 0; i < n; ++i) {
        const double a = static_cast<double>(rng.below(16)) / 16.0, b = static_cast<double>(rng.below(16)) / 16.0;
        if (a != b) out.push_back({std::min(a, b), std::max(a, b)});
    }
    return out;
}

double cluster_mass(const std::vector<std::size_t>& c, const std::vector<double>& w) {
    double m = 0.0;
    for (auto p : c) m += w[p];
    return m;
}

} // namespace

TEST_CASE("fixture diagram and pruning") {
    const MergeForest F = fixture();
    F.check();
    auto pts = diagram(F).points;
    std::sort(pts.begin(), pts.end());
    CHECK(pts == PD{{0.0, 0.75}, {0.125, 0.25}});
    const MergeForest P = prune_persistence(F, 0.2);
    P.check();
    CHECK(leaves_clustering(P).clusters == Clustering{{0, 1}});
    CHECK(flatten_pf(F, 0.2).clusters == Clustering{{0, 1}});
    CHECK(flatten_pf(F, 0.05).clusters == Clustering{{0}, {1}});
    CHECK(flatten_pf(F, 0.05).noise.empty());
    const auto none = flatten_pf(F, 5.0);
    CHECK(none.clusters.empty());
    CHECK(none.noise == std::vector<std::size_t>{0, 1});
    CHECK(prune_persistence(F, 5.0).nodes.empty());
    const MergeForest same = prune_persistence(F, 0.0);
    CHECK(diagram(same).points == diagram(F).points);
}

TEST_CASE("separation examples") {
    const Diagram D = contra({{0.0, 0.75}, {0.125, 0.25}});
    CHECK(separated(D, 0.2, 0.7));
    CHECK_FALSE(separated(D, 0.1, 0.2));
    CHECK(separated(contra({}), 0.1, 0.2));
    CHECK_THROWS_AS(separated(D, 0.3, 0.3), validation_error);
}

TEST_CASE("bottleneck examples") {
    CHECK(bottleneck(contra({{0, 1}}), contra({})) == 0.5);
    CHECK(bottleneck(contra({{0, 1}, {0.2, 0.6}}), contra({{0, 0.9}})) == doctest::Approx(0.2).epsilon(1e-15));
    const Diagram D = contra({{0.0, 0.75}, {0.125, 0.25}});
    CHECK(bottleneck(D, D) == 0.0);
}

TEST_CASE("bottleneck agrees with exhaustive matching") {
    Rng rng(5);
    for (int i = 0; i < 300; ++i) {
        const PD a = random_pd(rng, 4), b = random_pd(rng, 4);
        CHECK(bottleneck_points(a, b) == oracle::bottleneck_brute(a, b));
    }
}

TEST_CASE("bottleneck is a pseudometric") {
    Rng rng(6);
    for (int i = 0; i < 100; ++i) {
        const Diagram a = contra(random_pd(rng, 6)), b = contra(random_pd(rng, 6)), c = contra(random_pd(rng, 6));
        CHECK(bottleneck(a, b) == bottleneck(b, a));
        CHECK(bottleneck(a, a) == 0.0);
        CHECK(bottleneck(a, c) <= bottleneck(a, b) + bottleneck(b, c) + 1e-12);
    }
}

TEST_CASE("persistence pruning keeps the clusters that last tau longer") {
    Rng rng(8);
    for (int i = 0; i < 100; ++i) {
        const MergeForest F = random_forest(rng);
        const double tau = rng.uniform(0.0, 0.4);
        const MergeForest P = prune_persistence(F, tau);
        P.check();
        for (int j = 0; j < 10; ++j) {
            const double r = rng.uniform(1e-6, F.max_r);
            Clustering want;
            if (r + tau < F.max_r) {
                const auto later = F.clusters_at(r + tau);
                for (const auto& C : F.clusters_at(r)) {
                    const bool lasts = std::any_of(later.begin(), later.end(), [&](const auto& D) {
                        return std::includes(C.begin(), C.end(), D.begin(), D.end());
                    });
                    if (lasts) want.push_back(C);
                }
            }
            CHECK(P.clusters_at(r) == want);
        }
    }
}

TEST_CASE("flat cluster count equals points above tau") {
    Rng rng(9);
    for (int i = 0; i < 200; ++i) {
        const MergeForest F = random_forest(rng);
        const double tau = rng.uniform(0.0, 0.5);
        std::size_t above = 0;
        for (double p : diagram(F).persistences()) above += p > tau;
        CHECK(flatten_pf(F, tau).clusters.size() == above);
    }
}

TEST_CASE("measure pruning fixture") {
    const MergeForest F = fixture();
    const MergeForest half = prune_measure(F, 0.5);
    half.check();
    CHECK(half.clusters_at(0.7) == Clustering{{0}});
    CHECK(half.clusters_at(0.2) == Clustering{{0}});
    CHECK(half.clusters_at(0.1) == Clustering{{0, 1}});
    const MergeForest all = prune_measure(F, 1.0);
    all.check();
    REQUIRE(all.nodes.size() == 1);
    CHECK(all.nodes[0].birth == 0.125);
    CHECK(all.clusters_at(0.2).empty());
    const MergeForest tiny = prune_measure(F, 0.25);
    CHECK(diagram(tiny).points == diagram(F).points);
    CHECK_THROWS_AS(prune_measure(F, 0.0), validation_error);
    CHECK_THROWS_AS(prune_measure(F, 1.5), validation_error);
}

TEST_CASE("measure pruning matches its definition and is monotone") {
    Rng rng(10);
    for (int i = 0; i < 100; ++i) {
        const MergeForest F = random_forest(rng);
        const double m1 = rng.uniform(0.01, 0.6), m2 = m1 + rng.uniform(0.0, 0.4);
        const MergeForest P1 = prune_measure(F, m1), P2 = prune_measure(F, m2);
        P1.check();
        P2.check();
        for (int j = 0; j < 10; ++j) {
            const double r = rng.uniform(1e-6, F.max_r);
            Clustering want;
            for (const auto& C : F.clusters_at(r))
                if (cluster_mass(C, F.weights) >= m1) want.push_back(C);
            const auto c1 = P1.clusters_at(r), c2 = P2.clusters_at(r);
            CHECK(c1 == want);
            for (const auto& C : c2) CHECK(std::find(c1.begin(), c1.end(), C) != c1.end());
        }
    }
}

TEST_CASE("mass is non-increasing along a node life") {
    Rng rng(12);
    for (int i = 0; i < 50; ++i) {
        const MergeForest F = random_forest(rng);
        const MassProfile P(F);
        for (std::size_t v = 0; v < F.nodes.size(); ++v) {
            double prev = -1.0;
            const double lo = F.nodes[v].death, hi = F.nodes[v].birth;
            for (int k = 20; k >= 1; --k) {
                const double r = lo + (hi - lo) * k / 20.0;
                const double m = P.mass(v, r);
                CHECK(m >= prev);
                prev = m;
            }
        }
    }
}

TEST_CASE("non-compressing diagnostic") {
    const MergeForest F = fixture();
    // masses along the lives are 1/4, 3/4 and 1; none within 0.2 of 0.5
    CHECK(non_compressing_check(F, 0.5, 0.2, 0.05).ok);
    // around 0.75 the cluster {0} keeps mass 3/4 over (1/8, 3/4]
    const auto r = non_compressing_check(F, 0.75, 0.1, 0.05);
    CHECK_FALSE(r.ok);
    REQUIRE(r.witness.has_value());
    CHECK(r.witness->r - r.witness->r_prime >= 0.05);
    CHECK(r.max_span == doctest::Approx(0.625));
    CHECK(non_compressing_check(F, 0.75, 0.1, 0.7).ok);
    CHECK_THROWS_AS(non_compressing_check(F, 0.5, 0.0, 0.1), validation_error);
}

TEST_CASE("combined flattening") {
    const MergeForest F = fixture();
    // the surviving leaf absorbs its pruned sibling's points
    CHECK(flatten(F, 0.0, 0.5, PruneOrder::persistence_first).clusters == Clustering{{0, 1}});
    CHECK(flatten(F, 0.05, 0.0, PruneOrder::measure_first).clusters == Clustering{{0}, {1}});
    CHECK(flatten(F, 0.2, 0.0, PruneOrder::persistence_first).clusters == Clustering{{0, 1}});
    CHECK_THROWS_AS(parse_prune_order("xy"), validation_error);
    CHECK_THROWS_AS(flatten(F, -1.0, 0.0, PruneOrder::persistence_first), validation_error);
}

TEST_CASE("vineyard") {
    const auto data = generate(parse_dataset_spec({{"preset", "three-gaussians"}, {"n", 120}, {"seed", 3}}));
    const Family f = Family::parse("line:x={theta},y={theta},param=s@theta=0.5:1.5");
    const Vineyard v = vineyard(data.space, U, f, 2, false);
    REQUIRE(v.diagrams.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
        const Diagram d = diagram(build_forest(data.space, U, f.instantiate(v.theta[i])));
        CHECK(d.points == v.diagrams[i].points);
    }
    const Vineyard flat = vineyard(data.space, U, Family::parse("line:x=1,y={theta},param=k@theta=0.5:0.5"), 5, true);
    for (const auto& p : flat.persistences) CHECK(p == flat.persistences.front());
}

TEST_CASE("confidence band contains a finer sweep") {
    const auto data = generate(parse_dataset_spec({{"preset", "three-gaussians"}, {"n", 150}, {"seed", 4}}));
    const Family g3 = Family::parse("G3");
    const Vineyard coarse = vineyard(data.space, U, g3, 20, false);
    const Vineyard fine = vineyard(data.space, U, g3, 100, false);
    const Band band = confidence_band(coarse, line_family_bound(g3));
    CHECK(band_contains(band, fine));
    CHECK_THROWS_AS(line_family_bound(Family::parse("F3")), validation_error);
}
