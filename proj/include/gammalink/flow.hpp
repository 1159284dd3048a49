#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <queue>
#include <vector>

namespace gammalink {

// Dinic max-flow on real capacities.
class MaxFlow {
public:
    explicit MaxFlow(std::size_t n) : g_(n), level_(n), it_(n) {}

    void add_edge(std::size_t u, std::size_t v, double cap) {
        g_[u].push_back({v, g_[v].size(), cap});
        g_[v].push_back({u, g_[u].size() - 1, 0.0});
    }

    double run(std::size_t s, std::size_t t) {
        double flow = 0.0;
        while (bfs(s, t)) {
            std::fill(it_.begin(), it_.end(), 0);
            double f;
            while ((f = dfs(s, t, std::numeric_limits<double>::infinity())) > kEps) flow += f;
        }
        return flow;
    }

private:
    static constexpr double kEps = 1e-15;
    struct Edge {
        std::size_t to, rev;
        double cap;
    };

    bool bfs(std::size_t s, std::size_t t) {
        std::fill(level_.begin(), level_.end(), -1);
        std::queue<std::size_t> q;
        level_[s] = 0;
        q.push(s);
        while (!q.empty()) {
            auto u = q.front();
            q.pop();
            for (auto& e : g_[u])
                if (e.cap > kEps && level_[e.to] < 0) {
                    level_[e.to] = level_[u] + 1;
                    q.push(e.to);
                }
        }
        return level_[t] >= 0;
    }

    double dfs(std::size_t u, std::size_t t, double f) {
        if (u == t) return f;
        for (auto& i = it_[u]; i < g_[u].size(); ++i) {
            Edge& e = g_[u][i];
            if (e.cap > kEps && level_[e.to] == level_[u] + 1) {
                double d = dfs(e.to, t, std::min(f, e.cap));
                if (d > kEps) {
                    e.cap -= d;
                    g_[e.to][e.rev].cap += d;
                    return d;
                }
            }
        }
        return 0.0;
    }

    std::vector<std::vector<Edge>> g_;
    std::vector<int> level_;
    std::vector<std::size_t> it_;
};

} // namespace gammalink
