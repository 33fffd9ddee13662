#include "latchproof/lemmas.hpp"

#include <algorithm>
#include <stdexcept>

#include "latchproof/parser.hpp"
#include "latchproof/solver.hpp"
#include "latchproof/waitfor.hpp"

namespace latchproof {

const char* to_string(VerdictKind k) {
    switch (k) {
        case VerdictKind::Verified: return "Verified";
        case VerdictKind::RaceError: return "RaceError";
        case VerdictKind::DeadlockError: return "DeadlockError";
        case VerdictKind::LeakError: return "LeakError";
        case VerdictKind::SpecFailure: return "SpecFailure";
    }
    return "?";
}

namespace {

// Decides t == -1 (or t > 0) under pi, avoiding the solver for constants.
bool provably_minus_one(const LinExpr& t, const Pure& pi) {
    if (t.is_const()) return t.c == -1;
    return implies(pi, p_eq(t, LinExpr(-1)));
}

bool provably_positive(const LinExpr& t, const Pure& pi) {
    if (t.is_const()) return t.c > 0;
    return implies(pi, p_cmp(CmpOp::GT, t, LinExpr(0)));
}

bool provably_nonneg(const LinExpr& t, const Pure& pi) {
    if (t.is_const()) return t.c >= 0;
    return implies(pi, p_cmp(CmpOp::GE, t, LinExpr(0)));
}

bool provably_nonpos(const LinExpr& t, const Pure& pi) {
    if (t.is_const()) return t.c <= 0;
    return implies(pi, p_cmp(CmpOp::LE, t, LinExpr(0)));
}

bool concrete(const Perm& p) { return !p.is_var(); }

void erase2(std::vector<HeapAtom>& h, size_t i, size_t j) {
    if (i < j) std::swap(i, j);
    h.erase(h.begin() + i);
    h.erase(h.begin() + j);
}

// One rewrite step; returns the lemma name or empty when none applies.
std::string step(Disjunct& d) {
    auto& h = d.heap;
    const Pure& pi = d.pure;
    // N2
    for (size_t i = 0; i < h.size(); ++i) {
        if (h[i].kind != AK::Cnt || !concrete(h[i].perm)) continue;
        for (size_t j = i + 1; j < h.size(); ++j) {
            if (h[j].kind != AK::Cnt || h[j].root != h[i].root || !concrete(h[j].perm)) continue;
            Frac f = h[i].perm.val + h[j].perm.val;
            if (Frac(1) < f) continue;
            if (!provably_nonneg(h[i].count, pi) || !provably_nonneg(h[j].count, pi)) continue;
            HeapAtom n = HeapAtom::cnt(h[i].root, h[i].count + h[j].count, Perm(f));
            erase2(h, i, j);
            h.insert(h.begin() + static_cast<long>(i), n);
            return "N2";
        }
    }
    // N1
    for (size_t i = 0; i < h.size(); ++i) {
        if (h[i].kind != AK::Cnt || !concrete(h[i].perm) || !provably_minus_one(h[i].count, pi)) continue;
        for (size_t j = 0; j < h.size(); ++j) {
            if (j == i || h[j].kind != AK::Cnt || h[j].root != h[i].root || !concrete(h[j].perm)) continue;
            Frac f = h[i].perm.val + h[j].perm.val;
            if (Frac(1) < f) continue;
            if (!provably_nonpos(h[j].count, pi)) continue;
            HeapAtom n = HeapAtom::cnt(h[i].root, LinExpr(-1), Perm(f));
            size_t at = std::min(i, j);
            erase2(h, i, j);
            h.insert(h.begin() + static_cast<long>(at), n);
            return "N1";
        }
    }
    // N3
    for (size_t i = 0; i < h.size(); ++i) {
        if (h[i].kind != AK::LatchOut) continue;
        bool released = false;
        for (auto& a : h)
            if (a.kind == AK::Cnt && a.root == h[i].root && provably_minus_one(a.count, pi)) released = true;
        if (!released) continue;
        Formula payload =
            h[i].payload.is_var() ? Formula::of_atom(HeapAtom::res_var(h[i].payload.var)) : *h[i].payload.f;
        if (payload.ds.size() != 1) continue;
        Disjunct p = open_exists(payload.ds[0]);
        h.erase(h.begin() + static_cast<long>(i));
        h.insert(h.end(), p.heap.begin(), p.heap.end());
        d.pure = p_and(d.pure, p.pure);
        return "N3";
    }
    // DeadIdem
    for (size_t i = 0; i < h.size(); ++i) {
        if (h[i].kind != AK::Dead) continue;
        for (size_t j = i + 1; j < h.size(); ++j)
            if (h[j].kind == AK::Dead && h[j].root == h[i].root) {
                h.erase(h.begin() + static_cast<long>(j));
                return "DeadIdem";
            }
    }
    // DeadRelease
    for (size_t i = 0; i < h.size(); ++i) {
        if (h[i].kind != AK::Thread) continue;
        bool dead = false;
        for (auto& a : h)
            if (a.kind == AK::Dead && a.root == h[i].root) dead = true;
        if (!dead) continue;
        Formula q = h[i].payload.is_var() ? Formula::of_atom(HeapAtom::res_var(h[i].payload.var)) : *h[i].payload.f;
        if (q.ds.size() != 1) continue;
        Disjunct p = open_exists(q.ds[0]);
        h.erase(h.begin() + static_cast<long>(i));
        h.insert(h.end(), p.heap.begin(), p.heap.end());
        d.pure = p_and(d.pure, p.pure);
        return "DeadRelease";
    }
    // W3
    for (size_t i = 0; i < h.size(); ++i) {
        if (h[i].kind != AK::Wait || !concrete(h[i].perm)) continue;
        for (size_t j = i + 1; j < h.size(); ++j) {
            if (h[j].kind != AK::Wait || !concrete(h[j].perm)) continue;
            try {
                WaitGraph g = combine({h[i].arcs, h[i].perm.val}, {h[j].arcs, h[j].perm.val});
                erase2(h, i, j);
                h.insert(h.begin() + static_cast<long>(i), HeapAtom::wait(g.arcs, Perm(g.perm)));
                return "W3";
            } catch (const PermissionOverflow&) {
            }
        }
    }
    // W1
    for (auto& a : h) {
        if (a.kind != AK::Wait || !concrete(a.perm) || a.arcs.empty()) continue;
        WaitGraph g = try_reset({a.arcs, a.perm.val});
        if (g.arcs != a.arcs) {
            a.arcs = g.arcs;
            return "W1";
        }
    }
    return {};
}

// Projects away '#'-named variables that no longer occur in the heap.
void drop_stale(Disjunct& d) {
    std::set<std::string> live;
    for (auto& a : d.heap)
        for (auto& v : free_vars(a)) live.insert(v);
    std::set<std::string> stale;
    for (auto& v : free_vars(d.pure))
        if (v.find('#') != std::string::npos && !live.count(v)) stale.insert(v);
    if (!stale.empty()) d.pure = eliminate(d.pure, stale);
    std::vector<std::string> ex;
    std::set<std::string> fv = free_vars(d.pure);
    for (auto& v : d.exists)
        if (live.count(v) || fv.count(v)) ex.push_back(v);
    d.exists = ex;
}

size_t atom_count(const Disjunct& d) { return d.heap.size(); }

}  // namespace

std::optional<LemmaError> check_consistency(const Disjunct& d) {
    const auto& h = d.heap;
    for (auto& a : h) {
        if (a.kind != AK::LatchIn) continue;
        for (auto& b : h)
            if (b.kind == AK::Cnt && b.root == a.root && provably_minus_one(b.count, d.pure))
                return LemmaError{VerdictKind::RaceError, "E1",
                                  "latch " + a.root + " released while LatchIn(" + a.root + ", ...) is still owed", {}};
    }
    for (size_t i = 0; i < h.size(); ++i) {
        if (h[i].kind != AK::Cnt || !provably_minus_one(h[i].count, d.pure)) continue;
        for (size_t j = 0; j < h.size(); ++j)
            if (j != i && h[j].kind == AK::Cnt && h[j].root == h[i].root && provably_positive(h[j].count, d.pure))
                return LemmaError{VerdictKind::DeadlockError, "E2",
                                  "latch " + h[i].root + " awaited while count " + h[j].count.str() + " is outstanding",
                                  {}};
    }
    for (auto& a : h)
        if (a.kind == AK::Wait && is_cyclic(a.arcs)) {
            auto cyc = find_cycle(a.arcs);
            std::string s;
            for (auto& [x, y] : cyc) s += (s.empty() ? "" : ", ") + x + "->" + y;
            return LemmaError{VerdictKind::DeadlockError, "E3", "cyclic wait-for graph {" + s + "}", cyc};
        }
    for (auto& a : h) {
        if (a.kind != AK::ThreadSpec) continue;
        for (auto& b : h)
            if (b.kind == AK::Dead && b.root == a.root)
                return LemmaError{VerdictKind::SpecFailure, "",
                                  "thread " + a.root + " is both unstarted and dead", {}};
    }
    return std::nullopt;
}

std::optional<LemmaError> check_consistency(const Formula& f) {
    for (auto& d : f.ds)
        if (auto e = check_consistency(d)) return e;
    return std::nullopt;
}

NormalizeResult normalize(const Formula& f) {
    NormalizeResult r;
    r.state = Formula::false_();
    for (auto& d0 : f.ds) {
        SolverResult sat = is_sat(d0.pure);
        if (sat.status == SatStatus::Unsat) continue;
        Disjunct d = d0;
        if (auto e = check_consistency(d)) {
            r.error = e;
            r.state.ds.push_back(d);
            return r;
        }
        size_t cap = 10 * std::max<size_t>(atom_count(d), 1) + 10;
        size_t rounds = 0;
        while (true) {
            std::string fired = step(d);
            if (fired.empty()) break;
            r.fired.push_back(fired);
            if (++rounds > cap) throw std::logic_error("normalize exceeded its round cap");
            if (auto e = check_consistency(d)) {
                r.error = e;
                r.state.ds.push_back(d);
                return r;
            }
        }
        drop_stale(d);
        std::sort(d.heap.begin(), d.heap.end(), [](const HeapAtom& a, const HeapAtom& b) {
            return std::make_pair(static_cast<int>(a.kind), a.root) < std::make_pair(static_cast<int>(b.kind), b.root);
        });
        r.state.ds.push_back(d);
    }
    return r;
}

Formula apply_w2(const Formula& f, bool* changed) {
    Formula out = f;
    bool any = false;
    for (auto& d : out.ds) {
        std::set<Arc> arcs;
        for (auto& a : d.heap) {
            if (a.kind != AK::Cnt || !provably_positive(a.count, d.pure)) continue;
            for (auto& b : d.heap)
                if (b.kind == AK::Cnt && b.root != a.root && provably_minus_one(b.count, d.pure))
                    arcs.insert({b.root, a.root});
        }
        if (arcs.empty()) continue;
        for (auto& a : d.heap) {
            if (a.kind != AK::Wait) continue;
            WaitGraph g{a.arcs, a.perm.is_var() ? Frac(1) : a.perm.val};
            for (auto& [x, y] : arcs) g = add_arc(g, x, y);
            if (g.arcs != a.arcs) {
                a.arcs = g.arcs;
                any = true;
            }
        }
    }
    if (changed) *changed = any;
    return out;
}

std::map<std::string, Frac> cnt_permissions(const Disjunct& d) {
    std::map<std::string, Frac> m;
    for (auto& a : d.heap) {
        if (a.kind != AK::Cnt || a.perm.is_var()) continue;
        auto it = m.find(a.root);
        if (it == m.end()) m.emplace(a.root, a.perm.val);
        else it->second = it->second + a.perm.val;
    }
    return m;
}

// ---------------------------------------------------------------- split_for

namespace {

Formula name_anon_perms(const Formula& f) {
    Formula r = f;
    for (auto& d : r.ds)
        for (auto& a : d.heap)
            if (a.perm.is_anon()) a.perm = Perm::variable(fresh("%f"));
    return r;
}

std::set<std::string> target_locals(const Formula& target, const Disjunct& delta) {
    Formula df(delta);
    std::set<std::string> dv = free_vars(delta);
    for (auto& v : res_vars(df)) dv.insert(v);
    for (auto& v : perm_vars(df)) dv.insert(v);
    std::set<std::string> E;
    for (auto& v : free_vars(target)) E.insert(v);
    for (auto& v : res_vars(target)) E.insert(v);
    for (auto& v : perm_vars(target)) E.insert(v);
    for (auto& v : dv) E.erase(v);
    return E;
}

struct Demand {
    int branch;
    LinExpr count;
    Perm perm;
};

}  // namespace

SplitOutcome split_for(const Formula& delta, const std::vector<Formula>& targets0, const EntailOptions& opts) {
    SplitOutcome out;
    const int k = static_cast<int>(targets0.size());
    std::vector<Formula> targets;
    for (auto& t : targets0) targets.push_back(name_anon_perms(t));
    out.branches.assign(k, Formula::false_());
    out.frame = Formula::false_();
    auto failure = [&](int i, const std::string& msg) {
        out.ok = false;
        out.failed_target = i;
        out.failure = Diagnostic{"SpecFailure", msg, {}};
        return out;
    };
    for (auto& dd : delta.ds) {
        Disjunct d = open_exists(dd);
        if (is_sat(d.pure).status == SatStatus::Unsat) continue;
        std::vector<std::vector<HeapAtom>> assigned(k);
        std::vector<HeapAtom> frame, pool;
        std::set<std::string> handled;
        for (auto& a : d.heap) {
            if (a.kind == AK::Wait && !a.perm.is_var()) {
                auto parts = split(WaitGraph{a.arcs, a.perm.val}, k + 1);
                for (int i = 0; i < k; ++i) assigned[i].push_back(HeapAtom::wait(parts[i].arcs, Perm(parts[i].perm)));
                frame.push_back(HeapAtom::wait(parts[k].arcs, Perm(parts[k].perm)));
                continue;
            }
            if (a.kind != AK::Cnt || a.perm.is_var() || handled.count(a.root)) {
                pool.push_back(a);
                continue;
            }
            std::vector<Demand> demands;
            for (int i = 0; i < k; ++i) {
                if (targets[i].ds.empty()) continue;
                for (auto& t : targets[i].ds[0].heap)
                    if (t.kind == AK::Cnt && t.root == a.root) {
                        demands.push_back({i, t.count, t.perm});
                        break;
                    }
            }
            if (demands.empty()) {
                pool.push_back(a);
                continue;
            }
            handled.insert(a.root);
            Frac fixed(0);
            int shares = 1;
            for (auto& dm : demands) {
                if (dm.perm.is_var()) ++shares;
                else fixed = fixed + dm.perm.val;
            }
            Frac rest = a.perm.val - fixed;
            if (!(Frac(0) < rest)) return failure(demands.back().branch, "branches demand more permission on " + a.root + " than held");
            Frac share = rest / shares;
            auto perm_for = [&](const Demand& dm) { return dm.perm.is_var() ? Perm(share) : dm.perm; };
            if (provably_minus_one(a.count, d.pure)) {
                for (auto& dm : demands) assigned[dm.branch].push_back(HeapAtom::cnt(a.root, LinExpr(-1), perm_for(dm)));
                frame.push_back(HeapAtom::cnt(a.root, LinExpr(-1), Perm(share)));
                continue;
            }
            LinExpr concrete_sum(0);
            std::vector<const Demand*> symbolic;
            for (auto& dm : demands) {
                bool sym = false;
                for (auto& v : dm.count.vars())
                    if (target_locals(targets[dm.branch], d).count(v)) sym = true;
                if (sym) symbolic.push_back(&dm);
                else concrete_sum = concrete_sum + dm.count;
            }
            LinExpr remainder = a.count - concrete_sum;
            if (!provably_nonneg(remainder, d.pure))
                return failure(demands.back().branch, "branches demand more count on " + a.root + " than " + a.count.str());
            for (auto& dm : demands) {
                LinExpr cnt = dm.count;
                bool sym = std::find(symbolic.begin(), symbolic.end(), &dm) != symbolic.end();
                if (sym) cnt = (&dm == symbolic.front()) ? remainder : LinExpr(0);
                assigned[dm.branch].push_back(HeapAtom::cnt(a.root, cnt, perm_for(dm)));
            }
            frame.push_back(HeapAtom::cnt(a.root, symbolic.empty() ? remainder : LinExpr(0), Perm(share)));
        }
        Pure pi = d.pure;
        std::vector<Formula> pieces(k);
        for (int i = 0; i < k; ++i) {
            Disjunct ante;
            ante.heap = pool;
            ante.heap.insert(ante.heap.end(), assigned[i].begin(), assigned[i].end());
            ante.pure = pi;
            std::set<std::string> E = target_locals(targets[i], ante);
            EntailmentOutcome r = entail(E, Formula(ante), targets[i], opts);
            if (!r.success || r.parts.empty())
                return failure(i, "branch " + std::to_string(i + 1) + " precondition " + print(targets0[i]) +
                                      " not available: " + (r.failure_reason ? r.failure_reason->message : "no state"));
            const DisjunctOutcome& part = r.parts[0];
            std::vector<HeapAtom> extra, next_pool;
            for (auto& a : part.residue.heap) {
                if (a.kind == AK::Wait || (a.kind == AK::Cnt && handled.count(a.root))) extra.push_back(a);
                else next_pool.push_back(a);
            }
            Formula inst = subst(part.bindings, Formula(targets[i].ds[part.matched_disjunct]));
            inst = substitute_perms(substitute(inst, part.inst), part.perm_inst);
            Disjunct ex;
            ex.heap = extra;
            pieces[i] = star(inst, Formula(ex));
            pool = next_pool;
            pi = part.residue.pure;
        }
        for (int i = 0; i < k; ++i) {
            Formula p = add_pure(pieces[i], pi);
            out.branches[i].ds.insert(out.branches[i].ds.end(), p.ds.begin(), p.ds.end());
        }
        Disjunct fr;
        fr.heap = pool;
        fr.heap.insert(fr.heap.end(), frame.begin(), frame.end());
        fr.pure = pi;
        out.frame.ds.push_back(fr);
    }
    out.ok = true;
    return out;
}

// ---------------------------------------------------------------- RS

namespace {

void rs_into(const Formula& f, bool plus, std::vector<RSItem>& out) {
    for (auto& d : f.ds)
        for (auto& a : d.heap) {
            switch (a.kind) {
                case AK::Cnt:
                case AK::Wait:
                case AK::Dead: break;
                case AK::LatchIn:
                case AK::LatchOut:
                case AK::Thread: {
                    bool p = a.kind == AK::LatchIn ? !plus : plus;
                    if (a.payload.is_var()) out.push_back({p, a.payload.var});
                    else rs_into(*a.payload.f, p, out);
                    break;
                }
                case AK::ResVar: out.push_back({plus, a.root}); break;
                default: out.push_back({plus, print(a)}); break;
            }
        }
}

std::vector<RSItem> cancel(std::vector<RSItem> items) {
    std::vector<RSItem> out;
    for (auto& it : items) {
        auto opp = std::find(out.begin(), out.end(), RSItem{!it.plus, it.payload});
        if (opp != out.end()) out.erase(opp);
        else out.push_back(it);
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

std::vector<RSItem> rs(const Formula& f) {
    std::vector<RSItem> items;
    rs_into(f, true, items);
    return cancel(items);
}

std::vector<RSItem> rs_net(const Formula& pre, const Formula& post) {
    std::vector<RSItem> items = rs(post);
    for (auto& it : rs(pre)) items.push_back({!it.plus, it.payload});
    return cancel(items);
}

const std::vector<LemmaSpec>& lemma_table() {
    static const std::vector<LemmaSpec> table = [] {
        auto F = [](const char* s) { return parse_formula(s); };
        std::vector<LemmaSpec> t;
        t.push_back({"N1", F("CNT(c,n)@1/2 * CNT(c,-1)@1/2 & n<=0"), F("CNT(c,-1)@1"), false});
        t.push_back({"N2", F("CNT(c,n1)@1/2 * CNT(c,n2)@1/2 & n1>=0 & n2>=0"), F("CNT(c,n1+n2)@1"), false});
        t.push_back({"N3", F("LatchOut(c,P) * CNT(c,-1)@1/2"), F("CNT(c,-1)@1/2 * P"), false});
        t.push_back({"S1", F("LatchIn(c,P*Q)"), F("LatchIn(c,P) * LatchIn(c,Q)"), false});
        t.push_back({"S2", F("LatchOut(c,P*Q)"), F("LatchOut(c,P) * LatchOut(c,Q)"), false});
        t.push_back({"S3", F("CNT(c,n)@1 & n=n1+n2 & n1>=0 & n2>=0"), F("CNT(c,n1)@1/2 * CNT(c,n2)@1/2"), false});
        t.push_back({"W1", F("WAIT{a->b}@1"), F("WAIT{}@1"), false});
        t.push_back({"W2", F("CNT(c1,a)@1/2 * CNT(c2,-1)@1/2 * WAIT{}@1/2 & a>0"),
                     F("CNT(c1,a)@1/2 * CNT(c2,-1)@1/2 * WAIT{c2->c1}@1/2 & a>0"), false});
        t.push_back({"W3", F("WAIT{a->b}@1/2 * WAIT{b->c}@1/2"), F("WAIT{a->b, b->c}@1"), false});
        t.push_back({"DeadIdem", F("dead(t) * dead(t)"), F("dead(t)"), false});
        t.push_back({"DeadRelease", F("thread(t, Q) * dead(t)"), F("dead(t) * Q"), false});
        t.push_back({"ThrdSplit", F("thread(t, P*Q)"), F("thread(t, P) * thread(t, Q)"), false});
        t.push_back({"E1", F("LatchIn(c,P) * CNT(c,-1)@1/2"), Formula::false_(), true});
        t.push_back({"E2", F("CNT(c,a)@1/2 * CNT(c,-1)@1/2 & a>0"), Formula::false_(), true});
        t.push_back({"E3", F("WAIT{a->b, b->a}@1/2"), Formula::false_(), true});
        return t;
    }();
    return table;
}

std::vector<std::string> rs_violations() {
    std::vector<std::string> bad;
    for (auto& l : lemma_table())
        if (!l.error && !rs_net(l.lhs, l.rhs).empty()) bad.push_back(l.name);
    return bad;
}

}  // namespace latchproof
