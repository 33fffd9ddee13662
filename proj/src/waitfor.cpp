#include "latchproof/waitfor.hpp"

#include <algorithm>
#include <map>

namespace latchproof {

WaitGraph add_arc(const WaitGraph& g, const std::string& from, const std::string& to) {
    WaitGraph r = g;
    r.arcs.insert({from, to});
    return r;
}

namespace {

enum class Color { White, Grey, Black };

struct Dfs {
    std::map<std::string, std::vector<std::string>> succ;
    std::map<std::string, Color> color;
    std::vector<std::string> stack;
    std::vector<Arc> cycle;

    bool visit(const std::string& u) {
        color[u] = Color::Grey;
        stack.push_back(u);
        for (auto& v : succ[u]) {
            Color c = color[v];
            if (c == Color::Grey) {
                auto it = std::find(stack.begin(), stack.end(), v);
                for (; it + 1 != stack.end(); ++it) cycle.push_back({*it, *(it + 1)});
                cycle.push_back({u, v});
                return true;
            }
            if (c == Color::White && visit(v)) return true;
        }
        stack.pop_back();
        color[u] = Color::Black;
        return false;
    }
};

}  // namespace

std::vector<Arc> find_cycle(const std::set<Arc>& arcs) {
    Dfs d;
    for (auto& [a, b] : arcs) {
        d.succ[a].push_back(b);
        d.color[a] = Color::White;
        d.color[b] = Color::White;
    }
    std::vector<std::string> nodes;
    for (auto& kv : d.color) nodes.push_back(kv.first);
    for (auto& n : nodes)
        if (d.color[n] == Color::White && d.visit(n)) return d.cycle;
    return {};
}

bool is_cyclic(const std::set<Arc>& arcs) { return !find_cycle(arcs).empty(); }

WaitGraph combine(const WaitGraph& a, const WaitGraph& b) {
    Frac p = a.perm + b.perm;
    if (Frac(1) < p) throw PermissionOverflow("WAIT permissions sum to " + p.str());
    WaitGraph r;
    r.arcs = a.arcs;
    r.arcs.insert(b.arcs.begin(), b.arcs.end());
    r.perm = p;
    return r;
}

std::vector<WaitGraph> split(const WaitGraph& g, int k) {
    if (k <= 0) return {};
    WaitGraph part{g.arcs, g.perm / k};
    return std::vector<WaitGraph>(static_cast<size_t>(k), part);
}

WaitGraph try_reset(const WaitGraph& g) {
    if (g.perm.is_one() && !is_cyclic(g.arcs)) return WaitGraph{{}, g.perm};
    return g;
}

}  // namespace latchproof
