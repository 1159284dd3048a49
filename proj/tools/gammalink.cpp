#include <chrono>
#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "gammalink/experiments.hpp"
#include "gammalink/interleave.hpp"
#include "gammalink/json_io.hpp"
#include "gammalink/measure_prune.hpp"
#include "gammalink/plots.hpp"
#include "gammalink/service.hpp"

using namespace gammalink;

namespace {

void emit(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-")
        std::cout << text;
    else
        write_text_file(path, text);
}

struct Input {
    std::optional<Points> points;
    Space space;
};

Input load_input(const std::string& path, bool matrix) {
    Input in;
    if (matrix) {
        in.space = build_space_from_matrix(read_matrix_csv(path));
    } else {
        CsvPoints c = read_points_csv(path);
        in.space = build_space(c.points, c.weights);
        in.points = std::move(c.points);
    }
    validate_space(in.space);
    return in;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"gamma-linkage hierarchical clustering"};
    app.require_subcommand(1);

    auto* gen = app.add_subcommand("gen", "sample a preset dataset to CSV");
    std::string preset, params, out;
    std::size_t n = 0;
    std::uint64_t seed = 0;
    gen->add_option("--preset", preset)->required();
    gen->add_option("--n", n)->required();
    gen->add_option("--seed", seed);
    gen->add_option("--params", params, "preset parameters as JSON");
    gen->add_option("-o,--out", out);

    auto* link = app.add_subcommand("linkage", "build the merge forest of one curve");
    std::string input, kernel = "uniform", curve;
    bool matrix = false;
    link->add_option("--input", input)->required();
    link->add_flag("--matrix", matrix, "input is a distance matrix");
    link->add_option("--kernel", kernel);
    link->add_option("--curve", curve)->required();
    link->add_option("-o,--out", out);

    auto* dia = app.add_subcommand("diagram", "persistence diagram of a forest");
    std::string forest_path, plot;
    dia->add_option("forest", forest_path)->required();
    dia->add_option("-o,--out", out);
    dia->add_option("--plot", plot);

    auto* flat = app.add_subcommand("flatten", "flat clustering from a forest");
    std::string tau_s, mass_s = "0", order = "pm";
    flat->add_option("forest", forest_path)->required();
    flat->add_option("--tau", tau_s)->required();
    flat->add_option("--min-mass", mass_s);
    flat->add_option("--order", order);
    flat->add_option("-o,--out", out);

    auto* vine = app.add_subcommand("vineyard", "total persistences along a curve family");
    std::string family, session;
    std::size_t steps = 0;
    bool drop_top = false;
    std::string vine_kernel;
    vine->add_option("--input", input)->required();
    vine->add_flag("--matrix", matrix, "input is a distance matrix");
    vine->add_option("--kernel", vine_kernel);
    vine->add_option("--family", family)->required();
    vine->add_option("--steps", steps);
    vine->add_flag("--drop-top", drop_top);
    vine->add_option("-o,--out", out);
    vine->add_option("--plot", plot);
    vine->add_option("--session", session, "also write a session file for serve");

    auto* inter = app.add_subcommand("interleave", "check an interleaving of two forests");
    std::string left, right, corr, eps_s, imass_s;
    inter->add_option("--left", left)->required();
    inter->add_option("--right", right)->required();
    inter->add_option("--corr", corr)->required();
    inter->add_option("--eps", eps_s)->required();
    inter->add_option("--mass", imass_s);
    inter->add_option("-o,--out", out);

    auto* exp = app.add_subcommand("experiment", "run a named experiment");
    std::string name, plots;
    exp->add_option("name", name)->required()->check(CLI::IsMember(experiment_names()));
    exp->add_option("--seed", seed);
    exp->add_option("--out", out);
    exp->add_option("--plots", plots);

    auto* srv = app.add_subcommand("serve", "serve a session over HTTP");
    int port = 8080;
    std::string host = "127.0.0.1";
    srv->add_option("--session", session)->required();
    srv->add_option("--port", port)->check(CLI::Range(0, 65535));
    srv->add_option("--host", host);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*gen) {
            DatasetSpec spec;
            spec.preset = preset;
            spec.n = n;
            spec.seed = seed;
            if (!params.empty()) spec.params = parse_json(params);
            const Dataset d = generate(spec);
            emit(out, points_to_csv(d.points));
        } else if (*link) {
            const Input in = load_input(input, matrix);
            const MergeForest F = build_forest(in.space, Kernel::parse(kernel), Curve::parse(curve));
            emit(out, canonical_dump(forest_to_json(F)));
        } else if (*dia) {
            const Diagram D = diagram(forest_from_json(read_json_file(forest_path)));
            emit(out, canonical_dump(diagram_to_json(D)));
            if (!plot.empty()) write_text_file(plot, svg_diagram(D, forest_path));
        } else if (*flat) {
            const double tau = parse_real(tau_s, "tau");
            const double m = parse_real(mass_s, "min mass");
            if (!(tau > 0.0)) throw validation_error("tau must be > 0");
            const MergeForest F = forest_from_json(read_json_file(forest_path));
            const FlatClustering c = flatten(F, tau, m, parse_prune_order(order));
            emit(out, canonical_dump(flat_to_json(c, tau, m, order)));
        } else if (*vine) {
            const Input in = load_input(input, matrix);
            Family fam = Family::parse(family);
            if (steps == 0) steps = fam.steps;
            if (steps < 2) throw validation_error("steps must be >= 2");
            const Kernel K = Kernel::parse(!vine_kernel.empty() ? vine_kernel : !fam.kernel.empty() ? fam.kernel : "uniform");
            const Vineyard V = vineyard(in.space, K, fam, steps, drop_top);
            emit(out, canonical_dump(vineyard_to_json(V)));
            if (!plot.empty()) write_text_file(plot, svg_vineyard(V, nullptr, fam.text()));
            if (!session.empty()) {
                SessionInput si;
                si.points = in.points ? &*in.points : nullptr;
                si.space = &in.space;
                si.kernel = K;
                si.family = fam;
                si.steps = steps;
                si.drop_top = drop_top;
                write_text_file(session, canonical_dump(seal_session(build_session(si))));
            }
        } else if (*inter) {
            const MergeForest H = forest_from_json(read_json_file(left));
            const MergeForest E = forest_from_json(read_json_file(right));
            const Correspondence R = correspondence_from_json(read_json_file(corr));
            const double eps = parse_real(eps_s, "eps");
            const double m = imass_s.empty() ? -1.0 : parse_real(imass_s, "mass");
            const InterleaveResult r =
                m < 0.0 ? check_interleaving(H, E, R, eps) : check_measured_interleaving(H, E, R, eps, m);
            emit(out, canonical_dump(interleave_result_to_json(r, eps, m)));
        } else if (*exp) {
            const auto t0 = std::chrono::steady_clock::now();
            const ExperimentReport rep = run_experiment(name, seed, plots);
            const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            emit(out, canonical_dump(rep.to_json()));
            std::fprintf(stderr, "%s: %s in %.2fs\n", name.c_str(), rep.pass ? "PASS" : "FAIL", secs);
        } else if (*srv) {
            const SessionService svc = SessionService::load(session);
            std::fprintf(stderr, "serving %zu slices on http://%s:%d\n", svc.size(), host.c_str(), port);
            serve(svc, host, port);
        }
    } catch (const validation_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 3;
    }
    return 0;
}
