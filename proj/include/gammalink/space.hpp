#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace gammalink {

// Bad input: maps to exit code 2 in the CLI and 400 in the service.
struct validation_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Row-major point coordinates.
struct Points {
    std::size_t dim = 0;
    std::vector<double> coords;

    std::size_t size() const { return dim ? coords.size() / dim : 0; }
    const double* row(std::size_t i) const { return coords.data() + i * dim; }
    double* row(std::size_t i) { return coords.data() + i * dim; }
};

// Finite metric probability space with a dense distance matrix.
struct Space {
    std::size_t n = 0;
    std::vector<double> dist;  // n*n
    std::vector<double> weights;
    std::vector<std::string> labels;

    double d(std::size_t i, std::size_t j) const { return dist[i * n + j]; }
    double diameter() const;
    double mass(const std::vector<std::size_t>& idx) const;
};

Space build_space(const Points& pts, std::optional<std::vector<double>> weights = std::nullopt);
Space build_space_from_matrix(const std::vector<std::vector<double>>& m,
                              std::optional<std::vector<double>> weights = std::nullopt);
// throws validation_error naming the offending indices
void validate_space(const Space& X);

// Two finite spaces embedded in a common ambient space.
struct AmbientPair {
    Space ambient;
    std::vector<std::size_t> maskA, maskB;

    Space side_a() const;
    Space side_b() const;
};

// ambient = A disjoint-union B, ambient weights are halves of the original weights
AmbientPair make_pair_from_points(const Points& a, const std::vector<double>& wa,
                                  const Points& b, const std::vector<double>& wb);

double hausdorff_distance(const AmbientPair& p);
double prokhorov_distance(const AmbientPair& p);
// exhaustive subset definition; limited to small supports
double prokhorov_exhaustive(const AmbientPair& p);
double ghp_upper_bound(const AmbientPair& p);

struct DatasetSpec {
    std::string preset;
    std::size_t n = 0;
    std::uint64_t seed = 0;
    nlohmann::json params = nlohmann::json::object();
};

DatasetSpec parse_dataset_spec(const nlohmann::json& j);

struct Dataset {
    Points points;
    Space space;
};

Dataset generate(const DatasetSpec& spec);

struct Jittered {
    Points moved;
    AmbientPair pair;
};

// moves every point by a uniform random vector in the closed eps ball
Jittered jitter(const Points& pts, const std::vector<double>& weights, double eps, std::uint64_t seed);

// CSV points: d numeric columns, optional header whose last column is "weight"
struct CsvPoints {
    Points points;
    std::optional<std::vector<double>> weights;
};
CsvPoints read_points_csv(const std::string& path);
std::vector<std::vector<double>> read_matrix_csv(const std::string& path);
std::string points_to_csv(const Points& pts, const std::vector<double>* weights = nullptr);

} // namespace gammalink
