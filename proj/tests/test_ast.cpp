#include <doctest.h>

#include "latchproof/ast.hpp"
#include "latchproof/parser.hpp"

using namespace latchproof;

namespace {
std::set<std::string> S(std::initializer_list<const char*> xs) {
    std::set<std::string> r;
    for (auto x : xs) r.insert(x);
    return r;
}
}  // namespace

TEST_CASE("free variables") {
    CHECK(free_vars(parse_formula("emp & true")).empty());
    CHECK(free_vars(parse_formula("ex v. x::cell(v) & v>0")) == S({"x"}));
    CHECK(free_vars(parse_formula("CNT(c,n)@1 * WAIT{c2->c1}@f & n>0")) == S({"c", "n", "c2", "c1"}));
}

TEST_CASE("substitution") {
    std::map<std::string, LinExpr> five{{"v", LinExpr(5)}};
    CHECK(print(substitute(parse_formula("x::cell(v)"), five)) == "x::cell(5)@1");

    Formula bound = substitute(parse_formula("ex v. x::cell(v)"), five);
    REQUIRE(bound.ds.size() == 1);
    REQUIRE(bound.ds[0].exists.size() == 1);
    std::string w = bound.ds[0].exists[0];
    CHECK(bound.ds[0].heap[0].args[0] == LinExpr::var(w));

    std::map<std::string, LinExpr> sum{{"n", LinExpr::var("n1") + LinExpr::var("n2")}};
    CHECK(print(substitute(parse_formula("CNT(c,n)@1"), sum)) == "CNT(c,n1+n2)@1");
}

TEST_CASE("substitution is idempotent when the range avoids the domain") {
    std::map<std::string, LinExpr> m{{"n", LinExpr::var("k") + LinExpr(1)}, {"x", LinExpr::var("y")}};
    Formula f = parse_formula("x::cell(n) * CNT(c,n)@1/2 & n>0 | LatchIn(c, x::cell(n)) & n=2");
    Formula once = substitute(f, m);
    CHECK(print(substitute(once, m)) == print(once));
}

TEST_CASE("fresh names use separate counters") {
    reset_fresh();
    CHECK(fresh("w") == "w#1");
    CHECK(fresh("w") == "w#2");
    CHECK(fresh("V") == "V#1");
    CHECK(fresh("w#2") == "w#3");
    CHECK(base_name("w#3") == "w");
    CHECK(is_res_var_name("V"));
    CHECK_FALSE(is_res_var_name("v"));
}

TEST_CASE("frac arithmetic is exact") {
    CHECK(Frac(2, 4).str() == "1/2");
    CHECK(Frac(1, 3) + Frac(1, 6) == Frac(1, 2));
    CHECK(Frac::parse("0.6") == Frac(3, 5));
    CHECK((Frac(1, 2) + Frac(2, 3)).valid_perm() == false);
    CHECK(Frac(1, 2) < Frac(2, 3));
}

TEST_CASE("wellformedness diagnostics") {
    auto codes = [](const std::string& src) {
        std::vector<std::string> r;
        for (auto& d : check_wellformed(parse_program(src))) r.push_back(d.code);
        return r;
    };
    CHECK(codes("void f() requires emp ensures emp; { skip; }\n"
                "void f() requires emp ensures emp; { skip; }\n"
                "void main() requires emp ensures emp; { skip; }") == std::vector<std::string>{"DuplicateProc"});
    CHECK(codes("void f() requires emp ensures emp; { skip; }") == std::vector<std::string>{"NoMain"});
    CHECK(codes("void main() requires emp ensures emp; { g(); }") == std::vector<std::string>{"UndeclaredProc"});
    CHECK(codes("void f(int a) requires emp ensures emp; { skip; }\n"
                "void main() requires emp ensures emp; { f(1, 2); }") == std::vector<std::string>{"ArityMismatch"});
    CHECK(codes("void main() requires emp ensures emp;\n{\n  CountDownLatch c = create_latch(2);\n"
                "  ( countDown(c); await(c) || countDown(c); await(c) );\n}")
              .empty());
}

TEST_CASE("star distributes over disjunction") {
    Formula a = parse_formula("x::cell(1) | y::cell(2)");
    Formula b = parse_formula("z::cell(3) & z>0");
    Formula s = star(a, b);
    REQUIRE(s.ds.size() == 2);
    CHECK(print(s) == "x::cell(1)@1 * z::cell(3)@1 & z>0 | y::cell(2)@1 * z::cell(3)@1 & z>0");
}
