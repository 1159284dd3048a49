#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gammalink/linkage.hpp"
#include "gammalink/space.hpp"

namespace gammalink {

struct Correspondence {
    std::size_t nx = 0, ny = 0;
    std::vector<std::pair<std::size_t, std::size_t>> pairs;

    // throws unless both projections are surjective
    void validate() const;
    static Correspondence identity(std::size_t n);
};

Correspondence closest_point_correspondence(const AmbientPair& p);

struct InterleaveWitness {
    bool left_to_right = true;  // H(r) into E(r -/+ eps) failed, else the reverse
    double r = 0.0;             // in the clusterings' own parameter
    std::vector<std::size_t> cluster;  // points of the offending source cluster
    std::string reason;
};

struct InterleaveResult {
    bool ok = true;
    std::optional<InterleaveWitness> witness;
};

// one-parameter forests; m < 0 skips the mass clause
InterleaveResult check_interleaving(const MergeForest& H, const MergeForest& E, const Correspondence& R,
                                    double eps);
InterleaveResult check_measured_interleaving(const MergeForest& H, const MergeForest& E,
                                             const Correspondence& R, double eps, double m);

// clustering relation A <= B pulled back along R, with mass excess bound m (m < 0: none).
// labels are per point, -1 for absent.
InterleaveResult check_pullback(const std::vector<int>& la, const std::vector<double>& wa,
                                const std::vector<int>& lb, const std::vector<double>& wb,
                                const std::vector<std::pair<std::size_t, std::size_t>>& pairs, bool forward,
                                double m);

// 3-parameter arrays from sample_kernel_linkage; shifts must land on grid values
bool check_multiparam_interleaving(const KernelLinkageGrid& X, const std::vector<double>& wx,
                                   const KernelLinkageGrid& Y, const std::vector<double>& wy,
                                   const Correspondence& R, std::array<double, 3> eps, double m);

// smallest candidate eps passing check_interleaving (inf if none)
double dci_upper(const MergeForest& H, const MergeForest& E, const Correspondence& R);
// same for the measured version with m = eps
double dmi_upper(const MergeForest& H, const MergeForest& E, const Correspondence& R);

constexpr std::size_t kTinyLimit = 12;
// minimum of dci_upper over every correspondence; n_x * n_y <= kTinyLimit
double dci_exact_tiny(const MergeForest& H, const MergeForest& E);

// parameter values where the clustering can change
std::vector<double> critical_values(const MergeForest& F);

} // namespace gammalink
