#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "gammalink/curves.hpp"
#include "gammalink/kernels.hpp"
#include "gammalink/space.hpp"

namespace gammalink {

using Clustering = std::vector<std::vector<std::size_t>>;

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

struct Member {
    std::size_t point;
    double entry;
};

// A persistent cluster with life (death, birth].
struct Node {
    double birth = 0.0;
    double death = 0.0;
    std::size_t parent = kNone;
    std::vector<std::size_t> children;
    std::vector<Member> members;  // points first appearing in this node
};

struct MergeForest {
    std::string curve;  // source spec
    std::string kernel;
    Orientation orientation = Orientation::contra;
    double max_r = 0.0;    // of the contravariant form, may be inf
    double horizon = 0.0;  // reflection horizon for covariant curves
    std::vector<double> weights;
    std::vector<Node> nodes;
    std::vector<std::size_t> unborn;

    std::size_t n_points() const { return weights.size(); }
    std::vector<std::size_t> roots() const;
    // point -> (node listing it, entry); kNone for unborn points
    std::vector<std::size_t> home() const;
    std::vector<double> entries() const;

    Clustering clusters_at(double r) const;
    // per point cluster id (-1 absent), ids = smallest point index of the cluster
    std::vector<int> labels_at(double r) const;
    // throws std::logic_error on a broken invariant
    void check() const;
};

// b(x) for every point along a contravariant curve
std::vector<std::optional<double>> vertex_births(const Space& X, const Kernel& K, const Curve& contra);
std::optional<double> vertex_birth(const Space& X, const Kernel& K, const Curve& contra, std::size_t x);
std::optional<double> edge_value(const Space& X, const Curve& contra, std::size_t x, std::size_t y);

struct Edge {
    double v;
    std::size_t i, j;
};

// union-find construction from vertex and edge filtration values
MergeForest assemble_forest(const std::vector<std::optional<double>>& births, std::vector<Edge> edges,
                            const std::vector<double>& weights);

MergeForest build_forest(const Space& X, const Kernel& K, const Slice& slice);
MergeForest build_forest(const Space& X, const Kernel& K, const Curve& curve);

// relabel every parameter value through an increasing map (used for gamma-bar)
MergeForest map_values(const MergeForest& F, const std::function<double(double)>& f);

// direct three-parameter sampling: labels per (s, t, k) cell
struct KernelLinkageGrid {
    std::vector<double> s, t, k;
    std::vector<std::vector<int>> cells;  // index (i*|t| + j)*|k| + l

    const std::vector<int>& at(std::size_t i, std::size_t j, std::size_t l) const {
        return cells[(i * t.size() + j) * k.size() + l];
    }
};

KernelLinkageGrid sample_kernel_linkage(const Space& X, const Kernel& K, const std::vector<double>& s,
                                        const std::vector<double>& t, const std::vector<double>& k);

// single linkage at scale t (d <= t) of the points in mask, as labels
std::vector<int> single_linkage_labels(const Space& X, const std::vector<bool>& mask, double t);

Clustering labels_to_clustering(const std::vector<int>& labels);

} // namespace gammalink
