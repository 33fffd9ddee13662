#include <doctest.h>

#include "brute.hpp"
#include "latchproof/entail.hpp"
#include "latchproof/parser.hpp"

using namespace latchproof;

namespace {

EntailmentOutcome run(const std::set<std::string>& E, const char* a, const char* c, bool variance = false) {
    return entail(E, parse_formula(a), parse_formula(c), EntailOptions{variance});
}

std::string canon(const char* f) { return print(parse_formula(f)); }

}  // namespace

TEST_CASE("fractional frame") {
    auto r = run({}, "x::cell(1)@3/5 * y::cell(2)@3/5", "x::cell(1)@3/5");
    REQUIRE(r.success);
    CHECK(r.bindings.empty());
    CHECK(print(r.residue) == canon("y::cell(2)@3/5"));
}

TEST_CASE("resource variable instantiation") {
    auto r = run({"V"}, "LatchIn(c, x::cell(v1))", "LatchIn(c, V)");
    REQUIRE(r.success);
    REQUIRE(r.bindings.size() == 1);
    CHECK(print(r.bindings.at("V")) == canon("x::cell(v1)"));
    CHECK(print(r.residue) == canon("emp"));
}

TEST_CASE("LatchOut split leaves a payload predicate") {
    auto r = run({}, "LatchOut(c, x::cell(v1) * y::cell(v2))", "LatchOut(c, x::cell(v3))");
    REQUIRE(r.success);
    CHECK(r.bindings.empty());
    CHECK(print(r.residue) == canon("LatchOut(c, y::cell(v2)) & v1=v3"));
}

TEST_CASE("emp entails emp") {
    auto r = run({}, "emp", "emp");
    REQUIRE(r.success);
    CHECK(r.bindings.empty());
    CHECK(print(r.residue) == canon("emp"));
}

TEST_CASE("points-to matching") {
    auto inst = run({"v1"}, "x::cell(v)@1", "x::cell(v1)@1");
    REQUIRE(inst.success);
    CHECK(print(inst.residue) == canon("emp"));

    auto partial = run({"v1"}, "x::cell(v)@1", "x::cell(v1)@1/2");
    REQUIRE(partial.success);
    CHECK(print(partial.residue) == canon("x::cell(v)@1/2"));

    auto over = run({}, "x::cell(v)@1/2", "x::cell(v)@1");
    REQUIRE_FALSE(over.success);
    CHECK(over.failure_reason->code == "PermissionExceeded");

    auto miss = run({}, "x::cell(1)", "y::cell(1)");
    REQUIRE_FALSE(miss.success);
    CHECK(miss.failure_reason->code == "MatchFailure");

    auto value = run({}, "x::cell(1)", "x::cell(2)");
    REQUIRE_FALSE(value.success);
    CHECK(value.failure_reason->code == "PureFailure");
}

TEST_CASE("latch predicate matching") {
    auto same = run({}, "LatchIn(c, P)", "LatchIn(c, P)");
    REQUIRE(same.success);
    CHECK(print(same.residue) == canon("emp"));

    auto other = run({}, "LatchIn(c, x::cell(5)) & c!=d", "LatchIn(d, x::cell(5))");
    REQUIRE_FALSE(other.success);
    CHECK(other.failure_reason->code == "MatchFailure");
}

TEST_CASE("counters") {
    auto half = run({}, "CNT(c,2)", "CNT(c,1)@1/2");
    REQUIRE(half.success);
    CHECK(print(half.residue) == canon("CNT(c,1)@1/2"));
    CHECK(run({"n"}, "CNT(c,2)", "CNT(c,n) & n>0").success);
}

TEST_CASE("countDown precondition with a ghost payload") {
    auto r = run({"P", "f", "n"}, "LatchIn(c, x::cell(1)) * CNT(c,1) * x::cell(1)", "LatchIn(c,P) * P * CNT(c,n)@f & n>0");
    REQUIRE(r.success);
    CHECK(print(r.bindings.at("P")) == canon("x::cell(1)"));
    CHECK(print(r.residue) == canon("emp"));
}

TEST_CASE("free equations") {
    std::map<std::string, LinExpr> rho{{"v", LinExpr::var("u")}};
    CHECK(is_true(free_eqn(rho, {"v"})));
    CHECK(print_pure(free_eqn(rho, {})) == print_pure(parse_pure("v=u")));
    CHECK(is_true(free_eqn({}, {})));
}

TEST_CASE("add_var") {
    HeapAtom var_pred = parse_formula("LatchOut(c, V)").ds[0].heap[0];
    AddVarResult a = add_var(var_pred);
    CHECK(a.var == "V");
    CHECK_FALSE(a.fresh);
    CHECK_FALSE(a.leftover.has_value());

    HeapAtom conc = parse_formula("LatchOut(c, x::cell(5))").ds[0].heap[0];
    AddVarResult b = add_var(conc);
    CHECK(b.fresh);
    REQUIRE(b.leftover.has_value());
    CHECK(b.leftover->kind == AK::LatchOut);
    std::string printed = print(b.payload);
    CHECK(printed.find("x::cell(5)") != std::string::npos);
    CHECK(printed.find(b.var) != std::string::npos);

    HeapAtom empty = parse_formula("LatchIn(c, emp)").ds[0].heap[0];
    AddVarResult e = add_var(empty);
    CHECK(e.fresh);
    CHECK(print(e.payload) == print(Formula::of_atom(HeapAtom::res_var(e.var))));
}

TEST_CASE("apply and subst") {
    Formula f = parse_formula("x::cell(1) * V");
    CHECK(print(subst({}, f)) == print(f));
    CHECK(print(apply(f, "V", parse_formula("y::cell(2)"))) == canon("x::cell(1) * y::cell(2)"));
    CHECK(print(apply(parse_formula("LatchOut(c, V)"), "V", parse_formula("x::cell(5)"))) ==
          canon("LatchOut(c, x::cell(5))"));
    Bindings D{{"V", parse_formula("y::cell(2)")}};
    CHECK(print(subst(D, parse_formula("V | x::cell(1)"))) == canon("y::cell(2) | x::cell(1)"));
}

TEST_CASE("existentials") {
    CHECK_FALSE(run({}, "ex v. x::cell(v)", "x::cell(5)").success);
    auto r = run({}, "x::cell(5)", "ex v. x::cell(v)");
    REQUIRE(r.success);
    CHECK(print(r.residue) == canon("emp"));
    CHECK(run({}, "x::cell(5)", "ex v. x::cell(v) & v>2").success);
    CHECK_FALSE(run({}, "x::cell(1)", "ex v. x::cell(v) & v>2").success);
}

TEST_CASE("variance") {
    // LatchIn is contravariant: the consequent payload must entail the held one.
    CHECK(run({}, "LatchIn(c, ex v. x::cell(v) & v>2)", "LatchIn(c, x::cell(5))", true).success);
    CHECK_FALSE(run({}, "LatchIn(c, ex v. x::cell(v) & v>2)", "LatchIn(c, x::cell(1))", true).success);
    CHECK_FALSE(run({}, "LatchIn(c, ex v. x::cell(v) & v>2)", "LatchIn(c, x::cell(5))", false).success);
    CHECK(run({}, "LatchOut(c, x::cell(v) & v>2)", "LatchOut(c, x::cell(w) & w>1)", true).success);
    CHECK_FALSE(run({}, "LatchOut(c, x::cell(v) & v>2)", "LatchOut(c, x::cell(w) & w>1)", false).success);
    CHECK_FALSE(run({}, "LatchOut(c, x::cell(v) & v>1)", "LatchOut(c, x::cell(w) & w>2)", true).success);

    auto in = resource_entail({}, parse_formula("ex v. x::cell(v) & v>2"), parse_formula("x::cell(5)"), Polarity::In, true);
    CHECK(in.success);
    auto inst = resource_entail({"V"}, parse_formula("x::cell(v1)"), Formula::of_atom(HeapAtom::res_var("V")),
                                Polarity::Neutral, false);
    REQUIRE(inst.success);
    CHECK(print(inst.bindings.at("V")) == canon("x::cell(v1)"));
}

TEST_CASE("antecedent disjunction") {
    CHECK(run({}, "x::cell(1) | x::cell(2)", "ex v. x::cell(v) & v>0").success);
    CHECK_FALSE(run({}, "x::cell(1) | x::cell(0)", "ex v. x::cell(v) & v>0").success);
}

TEST_CASE("entailment is deterministic") {
    auto a = run({"V"}, "LatchOut(c, x::cell(v1) * y::cell(v2)) * CNT(c,0)", "LatchOut(c, V) * CNT(c,0)");
    auto b = run({"V"}, "LatchOut(c, x::cell(v1) * y::cell(v2)) * CNT(c,0)", "LatchOut(c, V) * CNT(c,0)");
    REQUIRE(a.success);
    CHECK(print(a.residue) == print(b.residue));
    CHECK(print(a.bindings.at("V")) == print(b.bindings.at("V")));
}

TEST_CASE("small-model soundness on two cells") {
    // Antecedent cells hold constants, consequent cells hold constants or an
    // existential; every success must describe a real split of the heap.
    const char* roots[] = {"x", "y"};
    int checked = 0;
    for (int ax = 0; ax <= 2; ++ax)
        for (int ay = 0; ay <= 2; ++ay)
            for (int cv = -1; cv <= 2; ++cv)
                for (int which = 0; which < 2; ++which) {
                    std::string A = "x::cell(" + std::to_string(ax) + ") * y::cell(" + std::to_string(ay) + ")";
                    std::string C = cv < 0 ? std::string("ex v. ") + roots[which] + "::cell(v)"
                                           : std::string(roots[which]) + "::cell(" + std::to_string(cv) + ")";
                    auto r = run({}, A.c_str(), C.c_str());
                    brute::Heap h{{"x", ax}, {"y", ay}};
                    brute::Heap consumed{{roots[which], h.at(roots[which])}};
                    brute::Heap rest = h;
                    rest.erase(roots[which]);
                    bool expected = brute::formula_holds(parse_formula(C.c_str()), consumed, {}, 0, 2);
                    CHECK(r.success == expected);
                    if (r.success) {
                        CHECK(brute::formula_holds(r.residue, rest, {}, 0, 2));
                        ++checked;
                    }
                }
    CHECK(checked > 0);
}
