#include "gammalink/service.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

#include <httplib.h>

#include "gammalink/json_io.hpp"
#include "gammalink/measure_prune.hpp"
#include "gammalink/parallel.hpp"

namespace gammalink {

using nlohmann::json;

double parse_real(const std::string& s, const std::string& what) {
    if (s.empty()) throw validation_error(what);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || !std::isfinite(v)) throw validation_error(what);
    return v;
}

json build_session(const SessionInput& in) {
    const Space& X = *in.space;
    const auto theta = in.family.thetas(in.steps);
    const std::size_t n = theta.size();
    std::vector<std::optional<MergeForest>> forests(n);
    std::vector<std::string> errors(n);
    Vineyard V;
    V.family = in.family;
    V.kernel = in.kernel.name();
    V.drop_top = in.drop_top;
    V.theta = theta;
    V.diagrams.resize(n);
    V.persistences.resize(n);
    parallel_for(n, [&](std::size_t i) {
        std::optional<Curve> c;
        try {
            c = in.family.instantiate(theta[i]);
            forests[i] = build_forest(X, in.kernel, *c);
            V.diagrams[i] = diagram(*forests[i]);
        } catch (const validation_error& e) {
            errors[i] = e.what();
            if (c) V.diagrams[i].orientation = c->orientation;
        }
        auto p = V.diagrams[i].persistences();
        if (in.drop_top && !p.empty()) p.erase(p.begin());
        V.persistences[i] = std::move(p);
    });
    for (std::size_t i = 0; i < n; ++i)
        if (!errors[i].empty()) V.failures.push_back({theta[i], errors[i]});

    json fj = json::array(), dj = json::array();
    for (std::size_t i = 0; i < n; ++i) {
        fj.push_back(forests[i] ? forest_to_json(*forests[i]) : json(nullptr));
        dj.push_back(diagram_to_json(V.diagrams[i]));
    }
    json band = nullptr;
    if (V.failures.empty() && line_intercepts(in.family.instantiate(in.family.lo)) &&
        line_intercepts(in.family.instantiate(in.family.hi))) {
        const Band B = confidence_band(V, line_family_bound(in.family));
        band = json::array();
        for (std::size_t i = 0; i < n; ++i) band.push_back(band_entry_to_json(B, i));
    }
    json pts = nullptr;
    std::size_t dim = 0;
    if (in.points) {
        dim = in.points->dim;
        pts = json::array();
        for (std::size_t i = 0; i < in.points->size(); ++i)
            pts.push_back(std::vector<double>(in.points->row(i), in.points->row(i) + dim));
    }
    return {{"version", 1},
            {"dataset", {{"n", X.n}, {"dim", dim}, {"points", pts}, {"weights", X.weights}}},
            {"kernel", in.kernel.name()},
            {"family", family_to_json(in.family)},
            {"drop_top", in.drop_top},
            {"theta", theta},
            {"forests", fj},
            {"diagrams", dj},
            {"vineyard", vineyard_to_json(V)},
            {"band", band}};
}

namespace {

std::string session_hash(json s) {
    s.erase("hash");
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(canonical_dump(s))));
    return buf;
}

std::string error_body(const std::string& msg) { return canonical_dump(json{{"error", msg}}); }

std::string key_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

json seal_session(json s) {
    s["hash"] = session_hash(s);
    return s;
}

void verify_session(const json& s) {
    if (!s.is_object() || !s.contains("hash") || !s["hash"].is_string()) throw validation_error("session has no hash");
    if (s["hash"].get<std::string>() != session_hash(s)) throw validation_error("session hash mismatch");
}

SessionService::SessionService(json session) : session_(std::move(session)) {
    verify_session(session_);
    try {
        const auto& theta = session_.at("theta");
        const auto& fj = session_.at("forests");
        if (fj.size() != theta.size()) throw validation_error("session forests do not match theta grid");
        const json& band = session_.at("band");
        for (std::size_t i = 0; i < fj.size(); ++i) {
            json slice = {{"index", i}, {"theta", theta[i]}};
            if (fj[i].is_null()) {
                forests_.emplace_back();
                slice["diagram"] = session_.at("diagrams")[i];
                slice["forest"] = nullptr;
            } else {
                forests_.push_back(forest_from_json(fj[i]));
                const MergeForest& F = forests_.back();
                slice["diagram"] = diagram_to_json(diagram(F));
                json nodes = json::array();
                for (std::size_t v = 0; v < F.nodes.size(); ++v)
                    nodes.push_back({{"id", v},
                                     {"parent", F.nodes[v].parent == kNone ? json(nullptr) : json(F.nodes[v].parent)},
                                     {"birth", F.nodes[v].birth},
                                     {"death", F.nodes[v].death},
                                     {"members", F.nodes[v].members.size()}});
                slice["forest"] = {{"nodes", nodes}, {"roots", F.roots().size()}, {"unborn", F.unborn.size()}};
            }
            slices_.push_back(canonical_dump(slice));
            bands_.push_back(band.is_null() ? std::string() : canonical_dump(band.at(i)));
        }
        const json& ds = session_.at("dataset");
        points_ = canonical_dump({{"dim", ds.at("dim")}, {"points", ds.at("points")}, {"weights", ds.at("weights")}});
        vineyard_ = canonical_dump(session_.at("vineyard"));
        meta_ = canonical_dump({{"version", session_.at("version")},
                                {"n", ds.at("n")},
                                {"dim", ds.at("dim")},
                                {"kernel", session_.at("kernel")},
                                {"family", session_.at("family")},
                                {"steps", theta.size()},
                                {"drop_top", session_.at("drop_top")},
                                {"has_band", !band.is_null()},
                                {"hash", session_.at("hash")}});
    } catch (const json::exception& e) {
        throw validation_error(std::string("malformed session: ") + e.what());
    }
}

SessionService SessionService::load(const std::string& path) { return SessionService(read_json_file(path)); }

Response SessionService::flatten(const std::multimap<std::string, std::string>& q) const {
    auto get = [&](const char* k) -> std::optional<std::string> {
        auto it = q.find(k);
        if (it == q.end()) return std::nullopt;
        return it->second;
    };
    std::size_t i = 0;
    try {
        const auto si = get("i");
        if (!si) throw validation_error("theta index");
        const double di = parse_real(*si, "theta index");
        if (di < 0 || di != std::floor(di) || di >= static_cast<double>(forests_.size()))
            throw validation_error("theta index");
        i = static_cast<std::size_t>(di);
    } catch (const validation_error&) {
        return {400, error_body("theta index")};
    }
    double tau = 0.0, m = 0.0;
    std::string order = get("order").value_or("pm");
    try {
        const auto st = get("tau");
        if (!st) throw validation_error("tau");
        tau = parse_real(*st, "tau");
        if (!(tau > 0.0)) throw validation_error("tau");
    } catch (const validation_error&) {
        return {400, error_body("tau")};
    }
    try {
        if (auto sm = get("m")) m = parse_real(*sm, "min mass");
        if (!(m >= 0.0 && m <= 1.0)) throw validation_error("min mass");
    } catch (const validation_error&) {
        return {400, error_body("min mass")};
    }
    if (order != "pm" && order != "mp") return {400, error_body("order")};
    if (session_.at("forests")[i].is_null()) return {400, error_body("theta index")};

    const auto key = std::make_tuple(i, key_real(tau), key_real(m), order);
    {
        std::lock_guard<std::mutex> lock(cache_mutex_);
        if (auto it = cache_.find(key); it != cache_.end()) return {200, it->second};
    }
    const FlatClustering c = gammalink::flatten(forests_[i], tau, m, parse_prune_order(order));
    std::string body = canonical_dump(flat_to_json(c, tau, m, order));
    std::lock_guard<std::mutex> lock(cache_mutex_);
    cache_.emplace(key, body);
    return {200, body};
}

Response SessionService::handle(const std::string& path, const std::multimap<std::string, std::string>& q) const {
    if (path == "/api/meta") return {200, meta_};
    if (path == "/api/points") return {200, points_};
    if (path == "/api/vineyard") return {200, vineyard_};
    if (path == "/api/flatten") return flatten(q);
    auto index = [&](const std::string& s) -> std::optional<std::size_t> {
        if (s.empty() || s.size() > 9 || s.find_first_not_of("0123456789") != std::string::npos) return std::nullopt;
        const std::size_t i = std::stoul(s);
        if (i >= slices_.size()) return std::nullopt;
        return i;
    };
    const std::string slice = "/api/slice/";
    if (path.rfind(slice, 0) == 0) {
        auto i = index(path.substr(slice.size()));
        if (!i) return {400, error_body("theta index")};
        return {200, slices_[*i]};
    }
    if (path == "/api/band") {
        auto it = q.find("i");
        auto i = it == q.end() ? std::nullopt : index(it->second);
        if (!i) return {400, error_body("theta index")};
        if (bands_[*i].empty()) return {400, error_body("no confidence band for this family")};
        return {200, bands_[*i]};
    }
    return {404, error_body("not found")};
}

namespace {

void cors(const httplib::Request& req, httplib::Response& res) {
    const std::string origin = req.get_header_value("Origin");
    for (const char* ok : {"http://localhost", "http://127.0.0.1"}) {
        const std::string p = ok;
        if (origin == p || origin.rfind(p + ":", 0) == 0) {
            res.set_header("Access-Control-Allow-Origin", origin);
            res.set_header("Vary", "Origin");
        }
    }
}

} // namespace

std::unique_ptr<httplib::Server> make_server(const SessionService& svc) {
    auto server = std::make_unique<httplib::Server>();
    server->Get(".*", [&svc](const httplib::Request& req, httplib::Response& res) {
        std::multimap<std::string, std::string> q(req.params.begin(), req.params.end());
        Response r = svc.handle(req.path, q);
        res.status = r.status;
        cors(req, res);
        res.set_content(r.body, "application/json");
    });
    server->Options(".*", [](const httplib::Request& req, httplib::Response& res) {
        cors(req, res);
        res.set_header("Access-Control-Allow-Methods", "GET, OPTIONS");
        res.status = 204;
    });
    return server;
}

void serve(const SessionService& svc, const std::string& host, int port) {
    auto server = make_server(svc);
    if (!server->listen(host, port)) throw std::runtime_error("cannot listen on " + host + ":" + std::to_string(port));
}

} // namespace gammalink
