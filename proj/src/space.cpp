#include "gammalink/space.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "gammalink/density1d.hpp"
#include "gammalink/flow.hpp"
#include "gammalink/rng.hpp"

namespace gammalink {

namespace {

std::string pair_str(std::size_t i, std::size_t j) {
    return "(" + std::to_string(i) + "," + std::to_string(j) + ")";
}

double euclid(const double* a, const double* b, std::size_t d) {
    double s = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
        const double t = a[k] - b[k];
        s += t * t;
    }
    return std::sqrt(s);
}

std::vector<double> resolve_weights(std::size_t n, std::optional<std::vector<double>> w) {
    if (!w) return std::vector<double>(n, 1.0 / static_cast<double>(n));
    if (w->size() != n) throw validation_error("weights length " + std::to_string(w->size()) + " != n " + std::to_string(n));
    return std::move(*w);
}

Space restrict(const Space& X, const std::vector<std::size_t>& idx) {
    Space S;
    S.n = idx.size();
    S.dist.resize(S.n * S.n);
    double total = 0.0;
    for (auto i : idx) total += X.weights[i];
    for (std::size_t a = 0; a < S.n; ++a) {
        S.weights.push_back(X.weights[idx[a]] / total);
        if (!X.labels.empty()) S.labels.push_back(X.labels[idx[a]]);
        for (std::size_t b = 0; b < S.n; ++b) S.dist[a * S.n + b] = X.d(idx[a], idx[b]);
    }
    return S;
}

// normalized restricted measures of the two sides
std::vector<double> side_measure(const Space& X, const std::vector<std::size_t>& idx) {
    std::vector<double> w;
    double total = 0.0;
    for (auto i : idx) total += X.weights[i];
    for (auto i : idx) w.push_back(X.weights[i] / total);
    return w;
}

} // namespace

double Space::diameter() const {
    double m = 0.0;
    for (double v : dist) m = std::max(m, v);
    return m;
}

double Space::mass(const std::vector<std::size_t>& idx) const {
    double s = 0.0;
    for (auto i : idx) s += weights[i];
    return s;
}

void validate_space(const Space& X) {
    const std::size_t n = X.n;
    if (n == 0) throw validation_error("empty space");
    if (X.dist.size() != n * n) throw validation_error("distance matrix is not n x n");
    if (X.weights.size() != n) throw validation_error("weights length mismatch");
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (X.d(i, i) != 0.0) throw validation_error("non-zero diagonal at " + pair_str(i, i));
        for (std::size_t j = 0; j < n; ++j) {
            const double a = X.d(i, j);
            if (!std::isfinite(a) || a < 0.0) throw validation_error("invalid distance at " + pair_str(i, j));
            if (a != X.d(j, i)) throw validation_error("asymmetric at " + pair_str(std::min(i, j), std::max(i, j)));
            scale = std::max(scale, a);
        }
    }
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(X.weights[i] > 0.0) || !std::isfinite(X.weights[i]))
            throw validation_error("non-positive weight at " + std::to_string(i));
        total += X.weights[i];
    }
    if (std::abs(total - 1.0) > 1e-12) {
        std::ostringstream os;
        os.precision(17);
        os << "weights sum to " << total;
        throw validation_error(os.str());
    }
    const double tol = 1e-9 * std::max(1.0, scale);
    auto tri = [&](std::size_t i, std::size_t j, std::size_t k) {
        if (X.d(i, k) > X.d(i, j) + X.d(j, k) + tol)
            throw validation_error("triangle inequality violated at (" + std::to_string(i) + "," + std::to_string(j) +
                                   "," + std::to_string(k) + ")");
    };
    if (n <= 64) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                for (std::size_t k = 0; k < n; ++k) tri(i, j, k);
    } else {
        Rng rng(0x7a1);
        for (int t = 0; t < 1000; ++t) tri(rng.below(n), rng.below(n), rng.below(n));
    }
}

Space build_space(const Points& pts, std::optional<std::vector<double>> weights) {
    Space X;
    X.n = pts.size();
    if (X.n == 0) throw validation_error("no points");
    for (double c : pts.coords)
        if (!std::isfinite(c)) throw validation_error("non-finite coordinate");
    X.dist.assign(X.n * X.n, 0.0);
    for (std::size_t i = 0; i < X.n; ++i)
        for (std::size_t j = i + 1; j < X.n; ++j) {
            const double v = euclid(pts.row(i), pts.row(j), pts.dim);
            X.dist[i * X.n + j] = v;
            X.dist[j * X.n + i] = v;
        }
    X.weights = resolve_weights(X.n, std::move(weights));
    // Euclidean distances satisfy the metric axioms; only weights need checking.
    double total = 0.0;
    for (std::size_t i = 0; i < X.n; ++i) {
        if (!(X.weights[i] > 0.0)) throw validation_error("non-positive weight at " + std::to_string(i));
        total += X.weights[i];
    }
    if (std::abs(total - 1.0) > 1e-12) throw validation_error("weights do not sum to 1");
    return X;
}

Space build_space_from_matrix(const std::vector<std::vector<double>>& m, std::optional<std::vector<double>> weights) {
    Space X;
    X.n = m.size();
    for (std::size_t i = 0; i < X.n; ++i) {
        if (m[i].size() != X.n) throw validation_error("matrix row " + std::to_string(i) + " has wrong length");
        X.dist.insert(X.dist.end(), m[i].begin(), m[i].end());
    }
    X.weights = resolve_weights(X.n, std::move(weights));
    validate_space(X);
    return X;
}

Space AmbientPair::side_a() const { return restrict(ambient, maskA); }
Space AmbientPair::side_b() const { return restrict(ambient, maskB); }

AmbientPair make_pair_from_points(const Points& a, const std::vector<double>& wa, const Points& b,
                                  const std::vector<double>& wb) {
    if (a.dim != b.dim) throw validation_error("dimension mismatch");
    Points all;
    all.dim = a.dim;
    all.coords = a.coords;
    all.coords.insert(all.coords.end(), b.coords.begin(), b.coords.end());
    std::vector<double> w;
    for (double v : wa) w.push_back(0.5 * v);
    for (double v : wb) w.push_back(0.5 * v);
    AmbientPair p;
    p.ambient = build_space(all, w);
    for (std::size_t i = 0; i < a.size(); ++i) p.maskA.push_back(i);
    for (std::size_t i = 0; i < b.size(); ++i) p.maskB.push_back(a.size() + i);
    return p;
}

double hausdorff_distance(const AmbientPair& p) {
    const Space& Z = p.ambient;
    auto directed = [&](const std::vector<std::size_t>& A, const std::vector<std::size_t>& B) {
        double worst = 0.0;
        for (auto a : A) {
            double best = std::numeric_limits<double>::infinity();
            for (auto b : B) best = std::min(best, Z.d(a, b));
            worst = std::max(worst, best);
        }
        return worst;
    };
    return std::max(directed(p.maskA, p.maskB), directed(p.maskB, p.maskA));
}

double prokhorov_distance(const AmbientPair& p) {
    const Space& Z = p.ambient;
    const auto mu = side_measure(Z, p.maskA);
    const auto nu = side_measure(Z, p.maskB);
    const std::size_t na = p.maskA.size(), nb = p.maskB.size();

    std::vector<double> D{0.0};
    for (auto a : p.maskA)
        for (auto b : p.maskB) D.push_back(Z.d(a, b));
    std::sort(D.begin(), D.end());
    D.erase(std::unique(D.begin(), D.end()), D.end());

    // g(j): mass that cannot be transported within distance D[j]
    auto g = [&](std::size_t j) {
        MaxFlow f(na + nb + 2);
        const std::size_t s = na + nb, t = s + 1;
        for (std::size_t i = 0; i < na; ++i) f.add_edge(s, i, mu[i]);
        for (std::size_t k = 0; k < nb; ++k) f.add_edge(na + k, t, nu[k]);
        for (std::size_t i = 0; i < na; ++i)
            for (std::size_t k = 0; k < nb; ++k)
                if (Z.d(p.maskA[i], p.maskB[k]) <= D[j]) f.add_edge(i, na + k, 2.0);
        const double deficit = 1.0 - f.run(s, t);
        return deficit <= 1e-12 ? 0.0 : deficit;  // rounding in the weight sums
    };

    // h(j) = max(D[j], g(j)) is quasi-convex: find the first j with D[j] >= g(j)
    std::size_t lo = 0, hi = D.size() - 1;
    std::vector<double> gcache(D.size(), -1.0);
    auto G = [&](std::size_t j) {
        if (gcache[j] < 0.0) gcache[j] = g(j);
        return gcache[j];
    };
    while (lo < hi) {
        const std::size_t mid = (lo + hi) / 2;
        if (D[mid] >= G(mid))
            hi = mid;
        else
            lo = mid + 1;
    }
    double best = std::max(D[lo], G(lo));
    if (lo > 0) best = std::min(best, G(lo - 1));
    return best;
}

double prokhorov_exhaustive(const AmbientPair& p) {
    const Space& Z = p.ambient;
    const std::size_t na = p.maskA.size(), nb = p.maskB.size();
    if (na > 20 || nb > 20) throw validation_error("exhaustive Prokhorov limited to 20 points per side");
    const auto mu = side_measure(Z, p.maskA);
    const auto nu = side_measure(Z, p.maskB);

    // smallest eps with mu(S) <= nu(S^eps) + eps, S^eps the open eps-neighbourhood
    auto directed = [&](const std::vector<std::size_t>& A, const std::vector<double>& wA,
                        const std::vector<std::size_t>& B, const std::vector<double>& wB) {
        double worst = 0.0;
        const std::size_t m = A.size();
        std::vector<double> dy(B.size());
        for (std::uint64_t S = 1; S < (std::uint64_t{1} << m); ++S) {
            double mS = 0.0;
            for (std::size_t i = 0; i < m; ++i)
                if (S >> i & 1) mS += wA[i];
            for (std::size_t k = 0; k < B.size(); ++k) {
                dy[k] = std::numeric_limits<double>::infinity();
                for (std::size_t i = 0; i < m; ++i)
                    if (S >> i & 1) dy[k] = std::min(dy[k], Z.d(A[i], B[k]));
            }
            std::vector<double> L{0.0};
            L.insert(L.end(), dy.begin(), dy.end());
            std::sort(L.begin(), L.end());
            L.erase(std::unique(L.begin(), L.end()), L.end());
            // on [L_i, L_{i+1}) nu(S^eps) counts points with d < eps, so for eps > L_i it is N_i
            double inf_S = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < L.size(); ++i) {
                double Ni = 0.0;
                for (std::size_t k = 0; k < B.size(); ++k)
                    if (dy[k] <= L[i]) Ni += wB[k];
                inf_S = std::min(inf_S, std::max(L[i], mS - Ni));
            }
            worst = std::max(worst, inf_S);
        }
        return worst;
    };
    return std::max(directed(p.maskA, mu, p.maskB, nu), directed(p.maskB, nu, p.maskA, mu));
}

double ghp_upper_bound(const AmbientPair& p) { return std::max(hausdorff_distance(p), prokhorov_distance(p)); }

DatasetSpec parse_dataset_spec(const nlohmann::json& j) {
    DatasetSpec s;
    if (!j.is_object()) throw validation_error("dataset spec must be an object");
    if (!j.contains("preset") || !j["preset"].is_string()) throw validation_error("dataset spec needs a preset");
    s.preset = j["preset"].get<std::string>();
    if (!j.contains("n") || !j["n"].is_number_integer() || j["n"].get<long long>() < 1)
        throw validation_error("dataset spec needs n >= 1");
    s.n = j["n"].get<std::size_t>();
    if (j.contains("seed")) s.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("params")) s.params = j["params"];
    return s;
}

namespace {

struct Mixture {
    std::vector<std::vector<double>> means;
    std::vector<double> sigma;  // isotropic std per component
    std::vector<double> weights;
};

Mixture three_gaussians(const nlohmann::json& params) {
    Mixture m;
    m.means = {{-1.0, 0.0}, {0.6, 0.8}, {0.8, -0.4}};
    m.weights = {10.0 / 16.0, 5.0 / 16.0, 1.0 / 16.0};
    double var = 0.01;
    if (params.contains("means")) m.means = params["means"].get<std::vector<std::vector<double>>>();
    if (params.contains("weights")) m.weights = params["weights"].get<std::vector<double>>();
    if (params.contains("variance")) var = params["variance"].get<double>();
    m.sigma.assign(m.means.size(), std::sqrt(var));
    return m;
}

// six structures of different density and spread plus uniform background
Mixture six_blobs() {
    Mixture m;
    m.means = {{0.15, 0.2}, {0.5, 0.15}, {0.85, 0.25}, {0.2, 0.75}, {0.55, 0.6}, {0.8, 0.85}};
    m.sigma = {0.03, 0.05, 0.02, 0.06, 0.035, 0.045};
    m.weights = {0.18, 0.2, 0.11, 0.22, 0.16, 0.13};
    return m;
}

void check_mixture(const Mixture& m) {
    if (m.means.empty() || m.means.size() != m.weights.size())
        throw validation_error("mixture means and weights differ in length");
    double total = 0.0;
    for (std::size_t i = 0; i < m.weights.size(); ++i) {
        if (!(m.weights[i] > 0.0)) throw validation_error("mixture weight " + std::to_string(i) + " not positive");
        total += m.weights[i];
        if (m.means[i].size() != m.means[0].size()) throw validation_error("mixture means differ in dimension");
    }
    if (std::abs(total - 1.0) > 1e-9) throw validation_error("mixture weights do not sum to 1");
}

std::size_t pick(Rng& rng, const std::vector<double>& w) {
    double u = rng.uniform();
    for (std::size_t i = 0; i + 1 < w.size(); ++i) {
        if (u < w[i]) return i;
        u -= w[i];
    }
    return w.size() - 1;
}

} // namespace

Dataset generate(const DatasetSpec& spec) {
    if (spec.n < 1) throw validation_error("n must be >= 1");
    Rng rng(spec.seed);
    Dataset out;
    Points& P = out.points;
    if (spec.preset == "three-gaussians" || spec.preset == "six-blobs") {
        Mixture m = spec.preset == "three-gaussians" ? three_gaussians(spec.params) : six_blobs();
        double noise = 0.0;
        if (spec.preset == "six-blobs") noise = spec.params.value("noise", 0.1);
        if (spec.preset == "six-blobs" && (noise < 0.0 || noise >= 1.0)) throw validation_error("noise must be in [0,1)");
        check_mixture(m);
        P.dim = m.means[0].size();
        for (std::size_t i = 0; i < spec.n; ++i) {
            if (noise > 0.0 && rng.uniform() < noise) {
                for (std::size_t k = 0; k < P.dim; ++k) P.coords.push_back(rng.uniform());
                continue;
            }
            const std::size_t c = pick(rng, m.weights);
            for (std::size_t k = 0; k < P.dim; ++k) P.coords.push_back(m.means[c][k] + m.sigma[c] * rng.normal());
        }
    } else if (spec.preset == "tri-bumps-1d") {
        PLDensity1D f = PLDensity1D::two_bumps();
        if (spec.params.contains("knots"))
            f = PLDensity1D::from_knots(spec.params["knots"].get<std::vector<std::pair<double, double>>>());
        P.dim = 1;
        for (std::size_t i = 0; i < spec.n; ++i) P.coords.push_back(f.sample(rng));
    } else {
        throw validation_error("unknown preset '" + spec.preset + "'");
    }
    out.space = build_space(P);
    return out;
}

Jittered jitter(const Points& pts, const std::vector<double>& weights, double eps, std::uint64_t seed) {
    if (!(eps >= 0.0)) throw validation_error("jitter eps must be >= 0");
    Rng rng(seed);
    Jittered J;
    J.moved = pts;
    const std::size_t d = pts.dim;
    std::vector<double> v(d);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        // uniform in the closed ball: gaussian direction, radius eps * U^{1/d}
        double norm;
        do {
            norm = 0.0;
            for (auto& c : v) {
                c = rng.normal();
                norm += c * c;
            }
            norm = std::sqrt(norm);
        } while (norm == 0.0);
        const double rad = eps * std::pow(rng.uniform(), 1.0 / static_cast<double>(d));
        for (std::size_t k = 0; k < d; ++k) J.moved.row(i)[k] += rad * v[k] / norm;
    }
    J.pair = make_pair_from_points(pts, weights, J.moved, weights);
    return J;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ',')) {
        auto b = cell.find_first_not_of(" \t\r");
        auto e = cell.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
    }
    return out;
}

bool parse_double(const std::string& s, double& v) {
    if (s.empty()) return false;
    char* end = nullptr;
    v = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size();
}

std::vector<std::vector<std::string>> read_rows(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw validation_error("cannot open " + path);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        rows.push_back(split_csv(line));
    }
    if (rows.empty()) throw validation_error(path + " is empty");
    return rows;
}

} // namespace

CsvPoints read_points_csv(const std::string& path) {
    auto rows = read_rows(path);
    CsvPoints out;
    double probe;
    bool header = !parse_double(rows[0][0], probe);
    bool has_w = header && rows[0].back() == "weight";
    std::size_t first = header ? 1 : 0;
    if (first >= rows.size()) throw validation_error(path + " has no data rows");
    const std::size_t cols = rows[first].size();
    out.points.dim = has_w ? cols - 1 : cols;
    if (out.points.dim == 0) throw validation_error(path + " has no coordinate columns");
    std::vector<double> w;
    for (std::size_t r = first; r < rows.size(); ++r) {
        if (rows[r].size() != cols) throw validation_error("row " + std::to_string(r) + " has wrong column count");
        for (std::size_t c = 0; c < cols; ++c) {
            double v;
            if (!parse_double(rows[r][c], v)) throw validation_error("bad number at row " + std::to_string(r));
            if (has_w && c + 1 == cols)
                w.push_back(v);
            else
                out.points.coords.push_back(v);
        }
    }
    if (has_w) out.weights = std::move(w);
    return out;
}

std::vector<std::vector<double>> read_matrix_csv(const std::string& path) {
    auto rows = read_rows(path);
    std::vector<std::vector<double>> m;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        std::vector<double> row;
        for (auto& c : rows[r]) {
            double v;
            if (!parse_double(c, v)) throw validation_error("bad number at row " + std::to_string(r));
            row.push_back(v);
        }
        m.push_back(std::move(row));
    }
    return m;
}

std::string points_to_csv(const Points& pts, const std::vector<double>* weights) {
    std::string out;
    char buf[64];
    if (weights) {
        for (std::size_t k = 0; k < pts.dim; ++k) out += "x" + std::to_string(k) + ",";
        out += "weight\n";
    }
    for (std::size_t i = 0; i < pts.size(); ++i) {
        for (std::size_t k = 0; k < pts.dim; ++k) {
            std::snprintf(buf, sizeof buf, "%.17g", pts.row(i)[k]);
            if (k) out += ',';
            out += buf;
        }
        if (weights) {
            std::snprintf(buf, sizeof buf, ",%.17g", (*weights)[i]);
            out += buf;
        }
        out += '\n';
    }
    return out;
}

} // namespace gammalink
