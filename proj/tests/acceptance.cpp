// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <sstream>

#include "brute.hpp"
#include "latchproof/entail.hpp"
#include "latchproof/lemmas.hpp"
#include "latchproof/oracle.hpp"
#include "latchproof/parser.hpp"
#include "latchproof/solver.hpp"
#include "latchproof/verifier.hpp"
#include "latchproof/waitfor.hpp"

using namespace latchproof;

namespace {

struct Result {
    bool pass = true;
    std::vector<std::string> notes;

    void expect(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            notes.push_back(what);
        }
    }
};

Verdict main_of(const std::vector<Verdict>& vs) {
    for (auto& v : vs)
        if (v.proc == "main") return v;
    return {};
}

bool trace_has(const Verdict& v, const std::vector<std::string>& parts) {
    for (auto& t : v.trace) {
        std::string s = print(t.state);
        bool all = true;
        for (auto& p : parts) all = all && s.find(p) != std::string::npos;
        if (all) return true;
    }
    return false;
}

std::pair<Verdict, double> timed_verify(const char* file, bool variance = false) {
    Program p = parse_program(brute::read_corpus(file));
    VerifyOptions o;
    o.variance = variance;
    auto t0 = std::chrono::steady_clock::now();
    auto vs = verify_program(p, o);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {main_of(vs), secs};
}

Result scenarios() {
    Result r;
    auto [ok, t1] = timed_verify("two_threads.lp");
    r.expect(ok.kind == VerdictKind::Verified, "two_threads not Verified");
    r.expect(trace_has(ok, {"x::cell(1)", "y::cell(2)", "CNT(c,-1)"}), "two_threads trace lacks P*Q*CNT(c,-1)");
    auto [race, t2] = timed_verify("race.lp");
    r.expect(race.kind == VerdictKind::RaceError && race.lemma == "E1", "race not RaceError(E1)");
    auto [intra, t3] = timed_verify("deadlock_intra.lp");
    r.expect(intra.kind == VerdictKind::DeadlockError && intra.lemma == "E2", "intra not DeadlockError(E2)");
    r.expect(trace_has(intra, {"CNT(c,1)", "CNT(c,-1)"}), "intra trace lacks CNT(c,1)*CNT(c,-1)");
    auto [inter, t4] = timed_verify("deadlock_inter.lp");
    r.expect(inter.kind == VerdictKind::DeadlockError && inter.lemma == "E3", "inter not DeadlockError(E3)");
    r.expect(std::set<Arc>(inter.cycle.begin(), inter.cycle.end()) == std::set<Arc>{{"c1", "c2"}, {"c2", "c1"}},
             "inter cycle is not {c2->c1, c1->c2}");
    for (double t : {t1, t2, t3, t4}) r.expect(t < 1.0, "scenario took " + std::to_string(t) + " s");
    std::ostringstream os;
    os << "times " << t1 << "/" << t2 << "/" << t3 << "/" << t4 << " s";
    r.notes.push_back(os.str());
    return r;
}

Result corpus_programs() {
    Result r;
    for (const char* f : {"cone.lp", "multicast.lp", "barrier.lp"}) {
        VerifyOptions o;
        for (auto& v : verify_program(parse_program(brute::read_corpus(f)), o))
            r.expect(v.kind == VerdictKind::Verified, std::string(f) + " " + v.proc + ": " + to_string(v.kind));
    }
    VerifyOptions var;
    var.variance = true;
    for (auto& v : verify_program(parse_program(brute::read_corpus("sender_receiver.lp")), var))
        r.expect(v.kind == VerdictKind::Verified, "sender_receiver " + v.proc + ": " + to_string(v.kind));
    return r;
}

Result reference_entailments() {
    Result r;
    auto same = [](const Formula& a, const char* b) { return print(a) == print(parse_formula(b)); };
    auto e1 = entail({}, parse_formula("x::cell(1)@3/5 * y::cell(2)@3/5"), parse_formula("x::cell(1)@3/5"));
    r.expect(e1.success && e1.bindings.empty() && same(e1.residue, "y::cell(2)@3/5"), "fractional frame");
    auto e2 = entail({"V"}, parse_formula("LatchIn(c, x::cell(v1))"), parse_formula("LatchIn(c, V)"));
    r.expect(e2.success && e2.bindings.size() == 1 && e2.bindings.count("V") &&
                 same(e2.bindings.at("V"), "x::cell(v1)") && same(e2.residue, "emp"),
             "resource variable binding");
    auto e3 = entail({}, parse_formula("LatchOut(c, x::cell(v1) * y::cell(v2))"), parse_formula("LatchOut(c, x::cell(v3))"));
    r.expect(e3.success && e3.bindings.empty() && same(e3.residue, "LatchOut(c, y::cell(v2)) & v1=v3"),
             "LatchOut split residue");
    return r;
}

Result lemma_properties() {
    Result r;
    auto bad = rs_violations();
    for (auto& b : bad) r.expect(false, "lemma " + b + " is not resource-preserving");
    std::mt19937 rng(99);
    int errors = 0;
    for (int i = 0; i < 1000; ++i) {
        std::string src = brute::random_latch_state(rng);
        Formula f = parse_formula(src);
        NormalizeResult n;
        try {
            n = normalize(f);
        } catch (const std::exception& e) {
            r.expect(false, "normalize threw on " + src + ": " + e.what());
            continue;
        }
        if (n.error) {
            ++errors;
            continue;
        }
        for (const char* l : {"a", "b"}) {
            Frac before(0), after(0);
            for (auto& d : f.ds)
                if (cnt_permissions(d).count(l)) before = before + cnt_permissions(d).at(l);
            for (auto& d : n.state.ds)
                if (cnt_permissions(d).count(l)) after = after + cnt_permissions(d).at(l);
            r.expect(before == after, "permission changed on " + src);
        }
        NormalizeResult again = normalize(n.state);
        r.expect(!again.error && print(again.state) == print(n.state), "not idempotent on " + src);
    }
    r.notes.push_back(std::to_string(lemma_table().size()) + " lemmas RS-checked, " + std::to_string(1000 - errors) +
                      "/1000 inputs consistent");
    return r;
}

Result oracle_cross_check() {
    Result r;
    struct Case {
        const char* file;
        std::optional<OutcomeKind> expected;  // empty: verifier must say Verified and oracle Clean
    } cases[] = {
        {"two_threads.lp", std::nullopt},  {"cone.lp", std::nullopt},
        {"multicast.lp", std::nullopt},    {"barrier.lp", std::nullopt},
        {"sender_receiver_concrete.lp", std::nullopt},
        {"race.lp", OutcomeKind::Race},     {"deadlock_intra.lp", OutcomeKind::Deadlock},
        {"deadlock_inter.lp", OutcomeKind::Deadlock},
    };
    for (auto& c : cases) {
        Program p = parse_program(brute::read_corpus(c.file));
        bool verified = true;
        for (auto& v : verify_program(p)) verified = verified && v.kind == VerdictKind::Verified;
        OracleReport o = explore(p);
        std::string f = c.file;
        r.expect(o.exhaustive, f + " not exhaustive");
        r.expect(o.explored <= 200, f + " explored " + std::to_string(o.explored) + " states");
        r.expect(verified == o.clean(), f + ": verifier and oracle disagree");
        if (c.expected == OutcomeKind::Race)
            r.expect(o.has(OutcomeKind::Race) || o.has(OutcomeKind::Leak), f + " lacks Race/Leak");
        else if (c.expected)
            r.expect(o.has(*c.expected), f + " lacks " + to_string(*c.expected));
    }
    return r;
}

// All formulas of at most three cells over x, y, z. Antecedent values are
// 0..2 or the variable a; consequent values are 0..2 or an existential.
std::vector<std::string> cell_formulas(bool consequent) {
    const char* roots[] = {"x", "y", "z"};
    std::vector<std::string> out;
    for (int mask = 0; mask < 8; ++mask) {
        std::vector<int> rs;
        for (int i = 0; i < 3; ++i)
            if (mask & (1 << i)) rs.push_back(i);
        int combos = 1;
        for (size_t i = 0; i < rs.size(); ++i) combos *= 4;
        for (int k = 0; k < combos; ++k) {
            std::string heap, ex;
            int code = k;
            for (int ri : rs) {
                int v = code % 4;
                code /= 4;
                std::string val;
                if (v < 3)
                    val = std::to_string(v);
                else if (consequent) {
                    val = std::string("v") + roots[ri];
                    ex += (ex.empty() ? "" : ", ") + val;
                } else
                    val = "a";
                heap += (heap.empty() ? "" : " * ") + std::string(roots[ri]) + "::cell(" + val + ")";
            }
            if (heap.empty()) heap = "emp";
            out.push_back(ex.empty() ? heap : "ex " + ex + ". " + heap);
        }
    }
    return out;
}

Result small_model() {
    Result r;
    auto lhs = cell_formulas(false), rhs = cell_formulas(true);
    size_t successes = 0, heaps = 0;
    for (auto& a : lhs) {
        Formula A = parse_formula(a);
        for (auto& c : rhs) {
            Formula C = parse_formula(c);
            EntailmentOutcome e = entail({}, A, C);
            if (!e.success) continue;
            ++successes;
            Formula split = star(subst(e.bindings, C), e.residue);
            for (int64_t av = 0; av <= 2; ++av) {
                std::map<std::string, int64_t> env{{"a", av}};
                const Disjunct& d = A.ds[0];
                brute::Heap h;
                for (auto& atom : d.heap) h[atom.root] = brute::eval_term(atom.args[0], env);
                ++heaps;
                if (!brute::formula_holds(split, h, env, 0, 2)) {
                    r.expect(false, a + " |- " + c + " residue " + print(e.residue) + " fails at a=" + std::to_string(av));
                    if (r.notes.size() > 5) return r;
                }
            }
        }
    }
    r.notes.push_back(std::to_string(lhs.size() * rhs.size()) + " pairs, " + std::to_string(successes) +
                      " successes, " + std::to_string(heaps) + " heaps checked");
    r.expect(successes > 0, "no successful entailments");
    return r;
}

Result solver_grid() {
    Result r;
    std::mt19937 rng(20261016);
    std::vector<std::string> vars{"x", "y", "z"};
    int sat = 0;
    for (int i = 0; i < 10000; ++i) {
        std::uniform_int_distribution<int> nv(1, 3);
        std::vector<std::string> vs(vars.begin(), vars.begin() + nv(rng));
        Pure p = brute::random_pure(rng, vs);
        auto grid = brute::grid_model(p, vs, -10, 10);
        SolverResult s = is_sat(p, true);
        std::string where = print_pure(p);
        if (s.status == SatStatus::Unknown) {
            r.expect(false, "Unknown on " + where);
        } else if (grid && s.status != SatStatus::Sat) {
            r.expect(false, "solver Unsat, grid model exists: " + where);
        } else if (s.status == SatStatus::Sat) {
            ++sat;
            std::map<std::string, int64_t> m = s.model ? *s.model : std::map<std::string, int64_t>{};
            for (auto& v : vs) m.emplace(v, 0);
            r.expect(s.model.has_value() && brute::eval_pure(p, m), "solver model invalid: " + where);
        }
        if (r.notes.size() > 5) break;
    }
    r.notes.push_back(std::to_string(sat) + "/10000 satisfiable");
    return r;
}

// Reachability closure over adjacency bitmasks.
bool bitmask_cyclic(uint32_t arcs, int n) {
    uint32_t reach[5] = {};
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (arcs & (1u << (i * n + j))) reach[i] |= 1u << j;
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            if (reach[i] & (1u << k)) reach[i] |= reach[k];
    for (int i = 0; i < n; ++i)
        if (reach[i] & (1u << i)) return true;
    return false;
}

Result graphs() {
    Result r;
    const char* names[] = {"n0", "n1", "n2", "n3", "n4"};
    size_t total = 0;
    for (int n = 1; n <= 5; ++n) {
        std::vector<Arc> all;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) all.push_back({names[i], names[j]});
        uint64_t limit = 1ull << all.size();
        for (uint64_t mask = 0; mask < limit; ++mask) {
            std::set<Arc> g;
            for (size_t i = 0; i < all.size(); ++i)
                if (mask & (1ull << i)) g.insert(all[i]);
            bool expected = bitmask_cyclic(static_cast<uint32_t>(mask), n);
            if (n <= 3) r.expect(expected == brute::closure_cyclic(g), "bitmask and set closure disagree");
            if (is_cyclic(g) != expected) {
                r.expect(false, "disagreement on a graph with " + std::to_string(g.size()) + " arcs");
                if (r.notes.size() > 5) return r;
            }
            ++total;
        }
    }
    r.notes.push_back(std::to_string(total) + " graphs");
    return r;
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        Result (*run)();
    } criteria[] = {
        {1, "core latch scenarios", scenarios},
        {2, "latch pattern corpus", corpus_programs},
        {3, "reference entailments", reference_entailments},
        {4, "lemma properties", lemma_properties},
        {5, "oracle cross-check", oracle_cross_check},
        {6, "small-model entailment soundness", small_model},
        {7, "pure solver vs grid", solver_grid},
        {8, "cycle detection vs closure", graphs},
    };
    int failures = 0;
    for (auto& c : criteria) {
        Result res;
        try {
            res = c.run();
        } catch (const std::exception& e) {
            res.pass = false;
            res.notes.push_back(std::string("exception: ") + e.what());
        }
        if (!res.pass) ++failures;
        std::cout << "criterion " << c.id << ": " << (res.pass ? "PASS" : "FAIL") << " " << c.name;
        for (auto& n : res.notes) std::cout << " | " << n;
        std::cout << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
