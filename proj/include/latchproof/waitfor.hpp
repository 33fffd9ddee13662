#pragma once

#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "latchproof/ast.hpp"

namespace latchproof {

// Completion-order arcs between latches, held at a fractional permission.
struct WaitGraph {
    std::set<Arc> arcs;
    Frac perm{1};

    bool operator==(const WaitGraph& o) const { return arcs == o.arcs && perm == o.perm; }
};

class PermissionOverflow : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

WaitGraph add_arc(const WaitGraph& g, const std::string& from, const std::string& to);
bool is_cyclic(const std::set<Arc>& arcs);
inline bool is_cyclic(const WaitGraph& g) { return is_cyclic(g.arcs); }
// Throws PermissionOverflow when the permissions sum past 1.
WaitGraph combine(const WaitGraph& a, const WaitGraph& b);
// k equal shares, each carrying every arc.
std::vector<WaitGraph> split(const WaitGraph& g, int k);
WaitGraph try_reset(const WaitGraph& g);

// Arcs of a cycle when one exists, in path order.
std::vector<Arc> find_cycle(const std::set<Arc>& arcs);

}  // namespace latchproof
