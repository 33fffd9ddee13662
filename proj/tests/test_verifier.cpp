#include <doctest.h>

#include "brute.hpp"
#include "latchproof/entail.hpp"
#include "latchproof/lemmas.hpp"
#include "latchproof/parser.hpp"
#include "latchproof/verifier.hpp"

using namespace latchproof;

namespace {

// Program whose main body is `stmt`, used to obtain a statement AST.
struct Snippet {
    Program prog;
    ExprPtr stmt;
};

Snippet snippet(const std::string& stmt) {
    Snippet s;
    s.prog = parse_program("data cell { int val; }\nvoid main() requires emp ensures emp; { " + stmt + " }");
    s.stmt = s.prog.find_proc("main")->body;
    return s;
}

ExecOutcome run(const char* delta, const std::string& stmt) {
    Snippet s = snippet(stmt);
    VerifyOptions o;
    o.parallel = false;
    return exec(s.prog, parse_formula(delta), s.stmt, o);
}

std::string canon(const char* f) { return print(parse_formula(f)); }

bool equivalent(const Formula& a, const Formula& b) {
    auto l = entail({}, a, b), r = entail({}, b, a);
    return l.success && r.success && print(l.residue) == print(Formula::emp()) &&
           print(r.residue) == print(Formula::emp());
}

std::vector<Verdict> verify_file(const char* name, bool variance = false) {
    VerifyOptions o;
    o.variance = variance;
    return verify_program(parse_program(brute::read_corpus(name)), o);
}

Verdict main_verdict(const std::vector<Verdict>& vs) {
    for (auto& v : vs)
        if (v.proc == "main") return v;
    FAIL("no verdict for main");
    return {};
}

}  // namespace

TEST_CASE("latch primitives") {
    auto cd = run("LatchIn(c, x::cell(1)) * x::cell(1) * CNT(c,1)@1/2", "countDown(c);");
    REQUIRE(cd.ok);
    CHECK(print(cd.state) == canon("CNT(c,0)@1/2"));

    auto aw = run("LatchOut(c, x::cell(1)) * CNT(c,0)@1/2", "await(c);");
    REQUIRE(aw.ok);
    CHECK(print(aw.state) == canon("x::cell(1) * CNT(c,-1)@1/2"));

    auto released = run("CNT(c,-1)@1/2", "countDown(c);");
    REQUIRE(released.ok);
    CHECK(print(released.state) == canon("CNT(c,-1)@1/2"));

    auto stuck = run("LatchIn(c, x::cell(1)) * CNT(c,1)@1", "countDown(c);");
    CHECK_FALSE(stuck.ok);
}

TEST_CASE("joining a dead thread") {
    auto j = run("dead(t)", "join(t);");
    REQUIRE(j.ok);
    CHECK(print(j.state) == canon("dead(t)"));
}

TEST_CASE("heap statements") {
    auto a = run("emp", "x = new cell(3); int v = x.val; x.val = v + 1;");
    REQUIRE(a.ok);
    CHECK(entail({}, a.state, parse_formula("ex w. x::cell(w) & w=4")).success);
    auto bad = run("x::cell(1)@1/2", "x.val = 2;");
    CHECK_FALSE(bad.ok);
}

TEST_CASE("core latch scenario verdicts") {
    Verdict ok = main_verdict(verify_file("two_threads.lp"));
    CHECK(ok.kind == VerdictKind::Verified);
    bool final_state = false;
    for (auto& t : ok.trace) {
        std::string s = print(t.state);
        if (s.find("x::cell(1)") != std::string::npos && s.find("y::cell(2)") != std::string::npos &&
            s.find("CNT(c,-1)") != std::string::npos)
            final_state = true;
    }
    CHECK(final_state);

    Verdict race = main_verdict(verify_file("race.lp"));
    CHECK(race.kind == VerdictKind::RaceError);
    CHECK(race.lemma == "E1");

    Verdict intra = main_verdict(verify_file("deadlock_intra.lp"));
    CHECK(intra.kind == VerdictKind::DeadlockError);
    CHECK(intra.lemma == "E2");

    Verdict inter = main_verdict(verify_file("deadlock_inter.lp"));
    CHECK(inter.kind == VerdictKind::DeadlockError);
    CHECK(inter.lemma == "E3");
    CHECK(std::set<Arc>(inter.cycle.begin(), inter.cycle.end()) == std::set<Arc>{{"c1", "c2"}, {"c2", "c1"}});
}

TEST_CASE("latch pattern programs") {
    for (const char* f : {"cone.lp", "multicast.lp", "barrier.lp", "sender_receiver_concrete.lp"}) {
        CAPTURE(f);
        for (auto& v : verify_file(f)) CHECK(v.kind == VerdictKind::Verified);
    }
    for (auto& v : verify_file("sender_receiver.lp", true)) CHECK(v.kind == VerdictKind::Verified);
    bool failed = false;
    for (auto& v : verify_file("sender_receiver.lp", false))
        if (v.kind != VerdictKind::Verified) failed = true;
    CHECK(failed);
}

TEST_CASE("leak check") {
    CHECK_FALSE(check_leak(Formula::emp()).has_value());
    CHECK_FALSE(check_leak(parse_formula("CNT(c,-1)@1")).has_value());
    auto t = check_leak(parse_formula("thread(t, x::cell(1)) * dead(t)"));
    REQUIRE(t.has_value());
    CHECK(t->kind == VerdictKind::LeakError);
    CHECK(check_leak(parse_formula("LatchIn(c, x::cell(1))")).has_value());
    CHECK_FALSE(check_leak(parse_formula("x::cell(1)")).has_value());
    CHECK(check_leak(parse_formula("x::cell(1)"), true).has_value());

    auto leaky = verify_program(parse_program(
        "data cell { int val; }\nvoid main() requires emp ensures emp; { x = new cell(1); }"));
    CHECK(main_verdict(leaky).kind == VerdictKind::LeakError);
}

TEST_CASE("frame property") {
    std::mt19937 rng(5);
    std::uniform_int_distribution<int> val(0, 9);
    struct Case {
        const char* delta;
        const char* stmt;
    } cases[] = {
        {"LatchIn(c, x::cell(1)) * x::cell(1) * CNT(c,1)@1/2", "countDown(c);"},
        {"LatchOut(c, x::cell(1)) * CNT(c,0)@1/2", "await(c);"},
        {"emp", "x = new cell(3);"},
        {"x::cell(2)", "x.val = 7;"},
        {"emp", "CountDownLatch d = create_latch(1) with x::cell(4);"},
    };
    for (auto& c : cases) {
        auto base = run(c.delta, c.stmt);
        REQUIRE(base.ok);
        for (int i = 0; i < 5; ++i) {
            Formula frame = parse_formula(("z" + std::to_string(i) + "::cell(" + std::to_string(val(rng)) + ")").c_str());
            Formula framed = star(parse_formula(c.delta), frame);
            Snippet s = snippet(c.stmt);
            VerifyOptions o;
            o.parallel = false;
            auto out = exec(s.prog, framed, s.stmt, o);
            CAPTURE(c.stmt);
            REQUIRE(out.ok);
            CHECK(entail({}, out.state, frame).success);
        }
    }
}

TEST_CASE("counter permissions are conserved") {
    auto total = [](const Formula& f, const char* l) {
        Frac t(0);
        for (auto& d : f.ds) {
            auto m = cnt_permissions(d);
            if (m.count(l)) t = t + m.at(l);
        }
        return t;
    };
    auto cd = run("LatchIn(c, x::cell(1)) * x::cell(1) * CNT(c,2)@1/3", "countDown(c);");
    REQUIRE(cd.ok);
    CHECK(total(cd.state, "c") == Frac(1, 3));
    auto par = run("LatchIn(c, emp) * LatchOut(c, emp) * CNT(c,1)@1 * WAIT{}@1", "( countDown(c) || await(c) );");
    REQUIRE(par.ok);
    CHECK(total(par.state, "c") == Frac(1));
}

TEST_CASE("verification is deterministic") {
    auto a = verify_file("two_threads.lp"), b = verify_file("two_threads.lp");
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
        REQUIRE(a[i].trace.size() == b[i].trace.size());
        for (size_t k = 0; k < a[i].trace.size(); ++k) CHECK(print(a[i].trace[k].state) == print(b[i].trace[k].state));
    }
}

TEST_CASE("prelude") {
    const Program& p = prelude();
    for (const char* n : {"create_latch", "countDown", "await"}) {
        REQUIRE(p.find_proc(n) != nullptr);
        CHECK(p.find_proc(n)->specs.size() == 2);
    }
}
