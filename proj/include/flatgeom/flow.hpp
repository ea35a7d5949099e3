#pragma once

#include <limits>
#include <queue>
#include <vector>

namespace flatgeom {
namespace detail {

// Dinic max-flow on small integer-capacity networks, with residual reachability
// queries used to read off the minimal and maximal min-cut.
class MaxFlowNetwork {
public:
    explicit MaxFlowNetwork(int node_count) : graph_(node_count) {}

    static constexpr long long kInf = std::numeric_limits<long long>::max() / 4;

    void add_arc(int from, int to, long long cap) {
        graph_[from].push_back({to, cap, static_cast<int>(graph_[to].size())});
        graph_[to].push_back({from, 0, static_cast<int>(graph_[from].size()) - 1});
    }

    long long max_flow(int source, int sink) {
        long long flow = 0;
        while (bfs_levels(source, sink)) {
            iter_.assign(graph_.size(), 0);
            while (long long pushed = dfs(source, sink, kInf)) flow += pushed;
        }
        return flow;
    }

    // Nodes reachable from the source through positive residual arcs.
    std::vector<bool> source_side() const {
        std::vector<bool> seen(graph_.size(), false);
        std::queue<int> q;
        q.push(source_used_);
        seen[source_used_] = true;
        while (!q.empty()) {
            int v = q.front();
            q.pop();
            for (const Arc& a : graph_[v])
                if (a.cap > 0 && !seen[a.to]) {
                    seen[a.to] = true;
                    q.push(a.to);
                }
        }
        return seen;
    }

    // Nodes from which the sink is reachable through positive residual arcs.
    std::vector<bool> sink_side() const {
        std::vector<bool> seen(graph_.size(), false);
        std::queue<int> q;
        q.push(sink_used_);
        seen[sink_used_] = true;
        while (!q.empty()) {
            int v = q.front();
            q.pop();
            // incoming residual arc u->v has positive capacity iff the reverse
            // record stored at u does
            for (const Arc& a : graph_[v]) {
                int u = a.to;
                if (graph_[u][a.rev].cap > 0 && !seen[u]) {
                    seen[u] = true;
                    q.push(u);
                }
            }
        }
        return seen;
    }

private:
    struct Arc {
        int to;
        long long cap;
        int rev;
    };

    bool bfs_levels(int source, int sink) {
        source_used_ = source;
        sink_used_ = sink;
        level_.assign(graph_.size(), -1);
        std::queue<int> q;
        q.push(source);
        level_[source] = 0;
        while (!q.empty()) {
            int v = q.front();
            q.pop();
            for (const Arc& a : graph_[v])
                if (a.cap > 0 && level_[a.to] < 0) {
                    level_[a.to] = level_[v] + 1;
                    q.push(a.to);
                }
        }
        return level_[sink] >= 0;
    }

    long long dfs(int v, int sink, long long limit) {
        if (v == sink) return limit;
        for (std::size_t& i = iter_[v]; i < graph_[v].size(); ++i) {
            Arc& a = graph_[v][i];
            if (a.cap <= 0 || level_[a.to] != level_[v] + 1) continue;
            long long pushed = dfs(a.to, sink, std::min(limit, a.cap));
            if (pushed > 0) {
                a.cap -= pushed;
                graph_[a.to][a.rev].cap += pushed;
                return pushed;
            }
        }
        return 0;
    }

    std::vector<std::vector<Arc>> graph_;
    std::vector<int> level_;
    std::vector<std::size_t> iter_;
    int source_used_ = 0;
    int sink_used_ = 0;
};

} // namespace detail
} // namespace flatgeom
