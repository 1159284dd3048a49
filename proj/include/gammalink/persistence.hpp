#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gammalink/curves.hpp"
#include "gammalink/linkage.hpp"

namespace gammalink {

// (death, birth) pairs in the contravariant parametrization of the forest.
struct Diagram {
    Orientation orientation = Orientation::contra;
    double horizon = 0.0;
    std::vector<std::pair<double, double>> points;

    // sorted by (-persistence, death, birth)
    void canonicalize();
    std::vector<double> persistences() const;  // descending
};

Diagram diagram(const MergeForest& F);

// M(N): largest birth in the subtree of each node
std::vector<double> max_births(const MergeForest& F);

// Keeps node i on (death, top[i]]; nullopt removes it. Members of removed
// subtrees move to the nearest kept ancestor, then unary chains are merged.
MergeForest trim_forest(const MergeForest& F, const std::vector<std::optional<double>>& top);

MergeForest prune_persistence(const MergeForest& F, double tau);

struct FlatClustering {
    std::vector<std::vector<std::size_t>> clusters;  // ordered by smallest index
    std::vector<std::size_t> noise;
    std::vector<int> labels;  // -1 for noise
};

FlatClustering leaves_clustering(const MergeForest& F);
FlatClustering flatten_pf(const MergeForest& F, double tau);

bool separated(const Diagram& D, double a, double b);

double bottleneck(const Diagram& a, const Diagram& b);
// plain point lists, no orientation handling
double bottleneck_points(const std::vector<std::pair<double, double>>& a,
                         const std::vector<std::pair<double, double>>& b);

struct Vineyard {
    Family family;
    std::string kernel;
    bool drop_top = false;
    std::vector<double> theta;
    std::vector<Diagram> diagrams;
    std::vector<std::vector<double>> persistences;  // after drop_top
    std::vector<std::pair<double, std::string>> failures;  // degenerate members
};

Vineyard vineyard(const Space& X, const Kernel& K, const Family& fam, std::size_t steps, bool drop_top);

// per theta: [lo, hi] intervals around each persistence plus the diagonal band [0, 2B]
struct Band {
    std::vector<double> theta;
    std::vector<double> radius;  // B_i
    std::vector<std::vector<std::pair<double, double>>> intervals;
};

using CurveBound = std::function<double(double, double)>;

Band confidence_band(const Vineyard& v, const CurveBound& bound);
// bound between two members of a line family, from the intercepts
CurveBound line_family_bound(const Family& f);
// every persistence of `fine` lies in the band at the nearest coarse theta
bool band_contains(const Band& band, const Vineyard& fine);

} // namespace gammalink
