#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "gammalink/linkage.hpp"
#include "gammalink/persistence.hpp"

namespace httplib {
class Server;
}

namespace gammalink {

// shared by the CLI and the service so both read numbers identically
double parse_real(const std::string& s, const std::string& what);

struct SessionInput {
    const Points* points = nullptr;  // null for distance-matrix input
    const Space* space = nullptr;
    Kernel kernel;
    Family family;
    std::size_t steps = 0;
    bool drop_top = false;
};

// precomputes forests, diagrams, vineyard and (for line families) the band
nlohmann::json build_session(const SessionInput& in);
// adds or checks the "hash" field
nlohmann::json seal_session(nlohmann::json s);
void verify_session(const nlohmann::json& s);

struct Response {
    int status = 200;
    std::string body;
};

class SessionService {
public:
    explicit SessionService(nlohmann::json session);
    static SessionService load(const std::string& path);

    // path without query; query as decoded key/value pairs
    Response handle(const std::string& path, const std::multimap<std::string, std::string>& query) const;
    std::size_t size() const { return forests_.size(); }

private:
    Response flatten(const std::multimap<std::string, std::string>& q) const;

    nlohmann::json session_;
    std::vector<MergeForest> forests_;
    std::string meta_, points_, vineyard_;
    std::vector<std::string> slices_, bands_;
    mutable std::mutex cache_mutex_;
    mutable std::map<std::tuple<std::size_t, std::string, std::string, std::string>, std::string> cache_;
};

// GET routes plus CORS for localhost origins; the caller binds and listens
std::unique_ptr<httplib::Server> make_server(const SessionService& svc);
// blocks; returns when the server stops
void serve(const SessionService& svc, const std::string& host, int port);

} // namespace gammalink
