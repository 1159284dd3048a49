#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gammalink/linkage.hpp"
#include "gammalink/persistence.hpp"

namespace gammalink {

// per node: member entries sorted descending with cumulative subtree mass
struct MassProfile {
    std::vector<std::vector<double>> entries;
    std::vector<std::vector<double>> cumulative;

    explicit MassProfile(const MergeForest& F);
    // mu(C(r)) of node v for r in its life
    double mass(std::size_t v, double r) const;
    double total(std::size_t v) const { return cumulative[v].empty() ? 0.0 : cumulative[v].back(); }
};

MergeForest prune_measure(const MergeForest& F, double m);

struct CompressionWitness {
    std::size_t inner, outer;  // nodes holding C and C'
    double r, r_prime;
};

struct NonCompressingResult {
    bool ok = true;
    std::optional<CompressionWitness> witness;
    // largest r - r' span (supremum) of a nested pair inside the mass window
    double max_span = 0.0;
};

NonCompressingResult non_compressing_check(const MergeForest& F, double m, double kappa, double rho);

enum class PruneOrder { persistence_first, measure_first };
PruneOrder parse_prune_order(const std::string& s);

// tau > 0 and/or m > 0 (zero disables that step), then the leaves
FlatClustering flatten(const MergeForest& F, double tau, double m, PruneOrder order);

} // namespace gammalink
