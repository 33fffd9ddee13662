#include <doctest.h>

#include "brute.hpp"
#include "latchproof/oracle.hpp"
#include "latchproof/parser.hpp"

using namespace latchproof;

namespace {

Program program(const std::string& body) {
    return parse_program("data cell { int val; }\nvoid main() requires emp ensures emp; { " + body + " }");
}

OracleReport corpus(const char* name) { return explore(parse_program(brute::read_corpus(name))); }

}  // namespace

TEST_CASE("core latch scenarios") {
    auto ok = corpus("two_threads.lp");
    CHECK(ok.exhaustive);
    CHECK(ok.clean());
    CHECK(ok.explored <= 200);

    auto intra = corpus("deadlock_intra.lp");
    CHECK(intra.exhaustive);
    CHECK(intra.has(OutcomeKind::Deadlock));
    CHECK(intra.explored <= 20);

    auto inter = corpus("deadlock_inter.lp");
    CHECK(inter.has(OutcomeKind::Deadlock));

    auto race = corpus("race.lp");
    CHECK(race.exhaustive);
    CHECK((race.has(OutcomeKind::Race) || race.has(OutcomeKind::Leak)));
}

TEST_CASE("minimal races") {
    auto ww = explore(program("x = new cell(0); ( x.val = 1 || x.val = 2 ); destroy(x);"));
    CHECK(ww.has(OutcomeKind::Race));
    auto rw = explore(program("x = new cell(0); ( int a = x.val || x.val = 2 ); destroy(x);"));
    CHECK(rw.has(OutcomeKind::Race));
    auto rr = explore(program("x = new cell(0); ( int a = x.val || int b = x.val ); destroy(x);"));
    CHECK_FALSE(rr.has(OutcomeKind::Race));
    auto disjoint = explore(program("x = new cell(0); y = new cell(0); ( x.val = 1 || y.val = 2 ); destroy(x); destroy(y);"));
    CHECK(disjoint.clean());
}

TEST_CASE("leaks and asserts") {
    auto leak = explore(program("x = new cell(0);"));
    CHECK(leak.has(OutcomeKind::Leak));
    auto clean = explore(program("x = new cell(0); destroy(x);"));
    CHECK(clean.clean());
    auto bad = explore(program("x = new cell(1); assert x::cell(2); destroy(x);"));
    CHECK(bad.has(OutcomeKind::AssertFailure));
}

TEST_CASE("latch semantics") {
    auto done = explore(program("CountDownLatch c = create_latch(1); ( countDown(c) || await(c) );"));
    CHECK(done.clean());
    auto blocked = explore(program("CountDownLatch c = create_latch(1); await(c);"));
    CHECK(blocked.has(OutcomeKind::Deadlock));
    auto extra = explore(program("CountDownLatch c = create_latch(1); countDown(c); countDown(c); await(c);"));
    CHECK(extra.clean());
}

TEST_CASE("footprints") {
    Program alloc = program("x = new cell(5); destroy(x);");
    ConcreteState s = initial_state(alloc);
    Footprint fa = footprint(alloc, s, 0);
    CHECK(fa.reads.empty());
    CHECK(fa.fresh.size() == 1);

    Program cd = program("CountDownLatch c = create_latch(2); countDown(c);");
    StepResult r = step(cd, initial_state(cd), 0);
    REQUIRE(r.status == StepStatus::Ok);
    Footprint fc = footprint(cd, r.next, 0);
    bool latch_written = false;
    for (auto& w : fc.writes)
        if (w.rfind("latch:", 0) == 0) latch_written = true;
    CHECK(latch_written);

    Program rd = program("x = new cell(5); int y = x.val; destroy(x);");
    StepResult a = step(rd, initial_state(rd), 0);
    REQUIRE(a.status == StepStatus::Ok);
    Footprint fr = footprint(rd, a.next, 0);
    bool loc_read = false;
    for (auto& k : fr.reads)
        if (k.rfind("loc:", 0) == 0) loc_read = true;
    CHECK(loc_read);
}

TEST_CASE("outcomes are deterministic") {
    auto a = corpus("deadlock_intra.lp"), b = corpus("deadlock_intra.lp");
    CHECK(a.outcomes == b.outcomes);
    CHECK(a.explored == b.explored);
}

TEST_CASE("an independent no-op thread adds no outcome kinds") {
    auto base = explore(program("CountDownLatch c = create_latch(2); ( countDown(c) || await(c) );"));
    auto more = explore(program("CountDownLatch c = create_latch(2); ( countDown(c) || await(c) || skip );"));
    CHECK(base.kinds() == more.kinds());
    CHECK(more.explored >= base.explored);
}

TEST_CASE("bounds clear the exhaustive flag") {
    OracleBounds tiny;
    tiny.max_states = 3;
    auto r = explore(parse_program(brute::read_corpus("two_threads.lp")), tiny);
    CHECK_FALSE(r.exhaustive);
}

TEST_CASE("symbolic payloads are reported") {
    CHECK_FALSE(symbolic_payloads(parse_program(brute::read_corpus("sender_receiver.lp"))).empty());
    CHECK(symbolic_payloads(parse_program(brute::read_corpus("sender_receiver_concrete.lp"))).empty());
}
