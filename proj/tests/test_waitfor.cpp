#include <doctest.h>

#include "brute.hpp"
#include "latchproof/waitfor.hpp"

using namespace latchproof;

TEST_CASE("add_arc") {
    WaitGraph g{{}, Frac(1, 2)};
    WaitGraph h = add_arc(g, "c2", "c1");
    CHECK(h.arcs == std::set<Arc>{{"c2", "c1"}});
    CHECK(h.perm == Frac(1, 2));
    CHECK(add_arc(h, "c2", "c1") == h);
    WaitGraph self = add_arc(g, "c", "c");
    CHECK(is_cyclic(self));
}

TEST_CASE("cycles") {
    CHECK(is_cyclic(std::set<Arc>{{"c2", "c1"}, {"c1", "c2"}}));
    CHECK_FALSE(is_cyclic(std::set<Arc>{}));
    CHECK_FALSE(is_cyclic(std::set<Arc>{{"a", "b"}, {"b", "c"}, {"a", "c"}}));
    auto cyc = find_cycle({{"a", "b"}, {"b", "c"}, {"c", "a"}, {"c", "d"}});
    CHECK(cyc.size() == 3);
}

TEST_CASE("combine and split") {
    WaitGraph a{{{"c2", "c1"}}, Frac(1, 2)};
    WaitGraph b{{{"c1", "c2"}}, Frac(1, 2)};
    WaitGraph c = combine(a, b);
    CHECK(c.arcs == std::set<Arc>{{"c2", "c1"}, {"c1", "c2"}});
    CHECK(c.perm == Frac(1));
    CHECK(combine(b, a) == c);
    WaitGraph x{{{"p", "q"}}, Frac(1, 4)};
    CHECK(combine(combine(a, x), WaitGraph{{}, Frac(1, 4)}) == combine(a, combine(x, WaitGraph{{}, Frac(1, 4)})));

    auto parts = split(WaitGraph{{}, Frac(1)}, 2);
    REQUIRE(parts.size() == 2);
    CHECK(parts[0] == WaitGraph{{}, Frac(1, 2)});
    CHECK(parts[1] == WaitGraph{{}, Frac(1, 2)});
    auto arcs = split(WaitGraph{{{"a", "b"}}, Frac(1, 2)}, 3);
    for (auto& p : arcs) CHECK(p.arcs.size() == 1);

    CHECK_THROWS_AS(combine(WaitGraph{{}, Frac(1)}, WaitGraph{{}, Frac(1, 2)}), PermissionOverflow);
}

TEST_CASE("reset") {
    CHECK(try_reset(WaitGraph{{{"a", "b"}}, Frac(1)}) == WaitGraph{{}, Frac(1)});
    WaitGraph half{{{"a", "b"}}, Frac(1, 2)};
    CHECK(try_reset(half) == half);
    WaitGraph cyc{{{"a", "b"}, {"b", "a"}}, Frac(1)};
    CHECK(try_reset(cyc) == cyc);
    CHECK(try_reset(try_reset(half)) == try_reset(half));
}

TEST_CASE("is_cyclic matches transitive closure on all graphs with 4 nodes") {
    std::vector<std::string> nodes{"a", "b", "c", "d"};
    std::vector<Arc> all;
    for (auto& x : nodes)
        for (auto& y : nodes) all.push_back({x, y});
    int disagreements = 0;
    for (uint32_t mask = 0; mask < (1u << all.size()); ++mask) {
        std::set<Arc> g;
        for (size_t i = 0; i < all.size(); ++i)
            if (mask & (1u << i)) g.insert(all[i]);
        if (is_cyclic(g) != brute::closure_cyclic(g)) ++disagreements;
    }
    CHECK(disagreements == 0);
}
