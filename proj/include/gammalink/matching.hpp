#pragma once

#include <cstddef>
#include <limits>
#include <queue>
#include <vector>

namespace gammalink {

// Hopcroft-Karp maximum bipartite matching; adj[u] lists right vertices.
inline std::size_t max_matching(const std::vector<std::vector<std::size_t>>& adj, std::size_t n_right) {
    constexpr std::size_t NIL = std::numeric_limits<std::size_t>::max();
    const std::size_t nl = adj.size();
    std::vector<std::size_t> ml(nl, NIL), mr(n_right, NIL), dist(nl);
    auto bfs = [&] {
        std::queue<std::size_t> q;
        bool found = false;
        for (std::size_t u = 0; u < nl; ++u) {
            if (ml[u] == NIL) {
                dist[u] = 0;
                q.push(u);
            } else {
                dist[u] = NIL;
            }
        }
        while (!q.empty()) {
            auto u = q.front();
            q.pop();
            for (auto v : adj[u]) {
                auto w = mr[v];
                if (w == NIL)
                    found = true;
                else if (dist[w] == NIL) {
                    dist[w] = dist[u] + 1;
                    q.push(w);
                }
            }
        }
        return found;
    };
    std::vector<std::size_t> it(nl);
    // iterative augmenting search along the layered graph
    auto dfs = [&](std::size_t root) {
        std::vector<std::size_t> stack{root};
        while (!stack.empty()) {
            auto u = stack.back();
            if (it[u] == adj[u].size()) {
                dist[u] = NIL;
                stack.pop_back();
                continue;
            }
            auto v = adj[u][it[u]];
            auto w = mr[v];
            if (w == NIL) {
                // augment along the stack
                for (std::size_t k = stack.size(); k-- > 0;) {
                    auto a = stack[k];
                    auto b = adj[a][it[a]];
                    ml[a] = b;
                    mr[b] = a;
                }
                return true;
            }
            if (dist[w] == dist[u] + 1) {
                stack.push_back(w);
            } else {
                ++it[u];
            }
        }
        return false;
    };
    std::size_t matched = 0;
    while (bfs()) {
        std::fill(it.begin(), it.end(), 0);
        for (std::size_t u = 0; u < nl; ++u)
            if (ml[u] == NIL && dfs(u)) ++matched;
    }
    return matched;
}

} // namespace gammalink
