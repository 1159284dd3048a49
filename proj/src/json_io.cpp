#include "gammalink/json_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace gammalink {

namespace {

void dump_to(const json& j, std::string& out) {
    switch (j.type()) {
    case json::value_t::object: {
        out += '{';
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!first) out += ',';
            first = false;
            out += json(it.key()).dump();
            out += ':';
            dump_to(it.value(), out);
        }
        out += '}';
        break;
    }
    case json::value_t::array: {
        out += '[';
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (i) out += ',';
            dump_to(j[i], out);
        }
        out += ']';
        break;
    }
    case json::value_t::number_float: {
        const double v = j.get<double>();
        if (!std::isfinite(v)) throw std::logic_error("non-finite number in json output");
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        std::string s = buf;
        // keep floats recognisable as floats after a round trip
        if (s.find_first_of(".eE") == std::string::npos) s += ".0";
        out += s;
        break;
    }
    default:
        out += j.dump(-1, ' ', false, json::error_handler_t::strict);
    }
}

} // namespace

std::string canonical_dump(const json& j) {
    std::string out;
    dump_to(j, out);
    out += '\n';
    return out;
}

json parse_json(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw validation_error(std::string("bad json: ") + e.what());
    }
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw validation_error("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_json(ss.str());
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw validation_error("cannot write " + path);
    out << text;
}

json forest_to_json(const MergeForest& F) {
    json nodes = json::array();
    for (std::size_t i = 0; i < F.nodes.size(); ++i) {
        const Node& nd = F.nodes[i];
        json mem = json::array();
        for (const auto& m : nd.members) mem.push_back({m.point, m.entry});
        nodes.push_back({{"id", i},
                         {"birth", nd.birth},
                         {"death", nd.death},
                         {"parent", nd.parent == kNone ? json(nullptr) : json(nd.parent)},
                         {"members", mem}});
    }
    return {{"curve", {{"spec", F.curve}, {"kernel", F.kernel}, {"horizon", F.horizon}}},
            {"orientation", orientation_name(F.orientation)},
            {"weights", F.weights},
            {"nodes", nodes},
            {"unborn", F.unborn}};
}

namespace {

template <class T>
T field(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw validation_error(std::string("missing field ") + key);
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw validation_error(std::string("bad field ") + key);
    }
}

Orientation parse_orientation(const std::string& s) {
    if (s == "contra") return Orientation::contra;
    if (s == "co") return Orientation::co;
    throw validation_error("orientation must be contra or co");
}

} // namespace

MergeForest forest_from_json(const json& j) {
    MergeForest F;
    const json curve = field<json>(j, "curve");
    F.curve = field<std::string>(curve, "spec");
    F.kernel = field<std::string>(curve, "kernel");
    F.horizon = field<double>(curve, "horizon");
    F.orientation = parse_orientation(field<std::string>(j, "orientation"));
    if (!F.curve.empty()) {
        const Curve c = Curve::parse(F.curve);
        F.max_r = c.orientation == Orientation::co ? F.horizon : c.max_r();
    }
    F.weights = field<std::vector<double>>(j, "weights");
    F.unborn = field<std::vector<std::size_t>>(j, "unborn");
    for (const auto& nj : field<json>(j, "nodes")) {
        Node nd;
        if (field<std::size_t>(nj, "id") != F.nodes.size()) throw validation_error("node ids must be 0..n-1 in order");
        nd.birth = field<double>(nj, "birth");
        nd.death = field<double>(nj, "death");
        const json p = field<json>(nj, "parent");
        nd.parent = p.is_null() ? kNone : field<std::size_t>(nj, "parent");
        for (const auto& m : field<json>(nj, "members")) {
            if (!m.is_array() || m.size() != 2) throw validation_error("member must be [index, entry]");
            nd.members.push_back({m[0].get<std::size_t>(), m[1].get<double>()});
        }
        F.nodes.push_back(std::move(nd));
    }
    for (std::size_t i = 0; i < F.nodes.size(); ++i) {
        const auto p = F.nodes[i].parent;
        if (p == kNone) continue;
        if (p >= F.nodes.size()) throw validation_error("parent out of range");
        F.nodes[p].children.push_back(i);
    }
    try {
        F.check();
    } catch (const std::logic_error& e) {
        throw validation_error(e.what());
    }
    return F;
}

json diagram_to_json(const Diagram& D) {
    json pts = json::array();
    for (const auto& [d, b] : D.points) pts.push_back({d, b});
    json j = {{"orientation", orientation_name(D.orientation)}, {"points", pts}};
    if (D.orientation == Orientation::co) j["horizon"] = D.horizon;
    return j;
}

Diagram diagram_from_json(const json& j) {
    Diagram D;
    D.orientation = parse_orientation(field<std::string>(j, "orientation"));
    if (D.orientation == Orientation::co) D.horizon = field<double>(j, "horizon");
    for (const auto& p : field<json>(j, "points")) {
        if (!p.is_array() || p.size() != 2) throw validation_error("diagram point must be [death, birth]");
        const double d = p[0].get<double>(), b = p[1].get<double>();
        if (!(b > d && d >= 0.0)) throw validation_error("diagram point needs birth > death >= 0");
        D.points.push_back({d, b});
    }
    D.canonicalize();
    return D;
}

json family_to_json(const Family& f) {
    return {{"name", f.name}, {"template", f.tmpl}, {"lo", f.lo},     {"hi", f.hi},
            {"steps", f.steps}, {"kernel", f.kernel}, {"text", f.text()}};
}

json vineyard_to_json(const Vineyard& v) {
    json fails = json::array();
    for (const auto& [th, msg] : v.failures) fails.push_back({{"theta", th}, {"error", msg}});
    return {{"family", family_to_json(v.family)},
            {"kernel", v.kernel},
            {"drop_top", v.drop_top},
            {"theta", v.theta},
            {"persistences", v.persistences},
            {"failures", fails}};
}

json flat_to_json(const FlatClustering& c, double tau, double m, const std::string& order) {
    return {{"labels", c.labels}, {"clusters", c.clusters}, {"noise", c.noise}, {"count", c.clusters.size()},
            {"tau", tau},         {"min_mass", m},          {"order", order}};
}

json correspondence_to_json(const Correspondence& R) {
    json pairs = json::array();
    for (const auto& [x, y] : R.pairs) pairs.push_back({x, y});
    return {{"nx", R.nx}, {"ny", R.ny}, {"pairs", pairs}};
}

Correspondence correspondence_from_json(const json& j) {
    Correspondence R;
    R.nx = field<std::size_t>(j, "nx");
    R.ny = field<std::size_t>(j, "ny");
    for (const auto& p : field<json>(j, "pairs")) {
        if (!p.is_array() || p.size() != 2) throw validation_error("pair must be [x, y]");
        R.pairs.push_back({p[0].get<std::size_t>(), p[1].get<std::size_t>()});
    }
    R.validate();
    return R;
}

json band_entry_to_json(const Band& b, std::size_t i) {
    json iv = json::array();
    for (const auto& [lo, hi] : b.intervals[i]) iv.push_back({lo, hi});
    return {{"index", i}, {"theta", b.theta[i]}, {"radius", b.radius[i]}, {"intervals", iv}};
}

json interleave_result_to_json(const InterleaveResult& r, double eps, double m) {
    json j = {{"interleaved", r.ok}, {"eps", eps}};
    if (m >= 0.0) j["mass"] = m;
    if (r.witness) {
        j["witness"] = {{"direction", r.witness->left_to_right ? "left-to-right" : "right-to-left"},
                        {"r", r.witness->r},
                        {"cluster", r.witness->cluster},
                        {"reason", r.witness->reason}};
    } else {
        j["witness"] = nullptr;
    }
    return j;
}

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace gammalink
