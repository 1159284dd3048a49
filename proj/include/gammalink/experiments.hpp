#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gammalink/curves.hpp"
#include "gammalink/density1d.hpp"
#include "gammalink/kernels.hpp"
#include "gammalink/persistence.hpp"
#include "gammalink/space.hpp"

namespace gammalink {

constexpr int kReportVersion = 1;

struct ExperimentReport {
    std::string name;
    std::uint64_t seed = 0;
    nlohmann::json params = nlohmann::json::object();
    nlohmann::json rows = nlohmann::json::array();  // each row carries its seed
    nlohmann::json summary = nlohmann::json::object();
    bool pass = false;

    nlohmann::json to_json() const;
};

struct ContourDiagram {
    Diagram diagram;
    bool ties = false;  // equal critical values met; leftmost maximum survives
};

// merge tree of the superlevel sets of f
ContourDiagram analytic_contour_pd(const PLDensity1D& f);

// jitter the preset, compare diagrams against max(2|mu|,1) * ghp bound (uniform kernel)
ExperimentReport stability_sweep(const DatasetSpec& spec, const Curve& curve, const Kernel& K,
                                 const std::vector<double>& eps, std::size_t trials, std::uint64_t seed);

// adjacent-theta bottleneck against the line-pair bound (null bound for other families)
ExperimentReport curve_stability_sweep(const Space& X, const Kernel& K, const Family& fam, std::size_t steps);

// sample f, run the rescaled line, compare with the analytic diagram
ExperimentReport consistency_run(const PLDensity1D& f, const Curve& line, const Kernel& K,
                                 const std::vector<std::size_t>& ns, std::size_t seeds, std::uint64_t seed);

// the five families on the three-gaussian preset; plots written when plot_dir is set
ExperimentReport figure7_reproduction(std::uint64_t seed, std::size_t steps, const std::string& plot_dir = "");

ExperimentReport six_blobs_demo(std::uint64_t seed);

// named entry points used by the CLI
std::vector<std::string> experiment_names();
ExperimentReport run_experiment(const std::string& name, std::uint64_t seed, const std::string& plot_dir);

// consistency-run defaults
Curve consistency_line();
Kernel consistency_kernel();

} // namespace gammalink
