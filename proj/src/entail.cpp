#include "latchproof/entail.hpp"

#include <deque>

#include "latchproof/parser.hpp"
#include "latchproof/solver.hpp"

namespace latchproof {

namespace {

struct Fail {
    Diagnostic d;
};

[[noreturn]] void fail(const std::string& code, const std::string& msg) { throw Fail{Diagnostic{code, msg, {}}}; }

void collect_perm_vars(const Formula& f, std::set<std::string>& s) {
    for (auto& d : f.ds)
        for (auto& a : d.heap) {
            if (a.perm.is_var() && !a.perm.is_anon()) s.insert(a.perm.var);
            if (a.payload.f) collect_perm_vars(*a.payload.f, s);
            if (a.payload2.f) collect_perm_vars(*a.payload2.f, s);
        }
}

std::set<std::string> all_names(const Disjunct& d) {
    Formula f(d);
    std::set<std::string> s = free_vars(d);
    collect_perm_vars(f, s);
    for (auto& v : res_vars(f)) s.insert(v);
    return s;
}

Formula payload_formula(const ResArg& r) {
    if (r.is_var()) return Formula::of_atom(HeapAtom::res_var(r.var));
    return *r.f;
}

std::set<std::string> heap_vars(const std::vector<HeapAtom>& h) {
    std::set<std::string> s;
    for (auto& a : h)
        for (auto& v : free_vars(a)) s.insert(v);
    return s;
}

enum class Mode { Unify, Covariant, Contravariant };

struct State {
    std::map<std::string, LinExpr> inst;
    std::map<std::string, Perm> pinst;
    Bindings D;
    std::vector<Pure> eqns;
    std::vector<Pure> oblig;
    std::vector<HeapAtom> A;
    std::vector<std::string> notes;
};

class Matcher {
public:
    EntailOptions opts;
    std::set<std::string> inst_ok;
    std::set<std::string> exE;
    std::set<std::string> fresh_res;
    std::set<std::string> local;
    Pure hyp = p_true();
    Pure Apure = p_true();
    State st;

    bool can_inst(const std::string& v) const { return inst_ok.count(v) && !st.inst.count(v); }

    LinExpr resolve(const LinExpr& t) const {
        LinExpr r = t;
        for (int i = 0; i < 8; ++i) {
            bool hit = false;
            for (auto& kv : r.coef)
                if (st.inst.count(kv.first)) hit = true;
            if (!hit) break;
            r = r.subst(st.inst);
        }
        return r;
    }

    Pure resolve(const Pure& p) const {
        Pure r = p;
        for (int i = 0; i < 8; ++i) {
            bool hit = false;
            for (auto& v : free_vars(r))
                if (st.inst.count(v)) hit = true;
            if (!hit) break;
            r = substitute(r, st.inst);
        }
        return r;
    }

    Formula resolve(const Formula& f) const {
        Formula r = f;
        for (int i = 0; i < 8; ++i) {
            bool hit = false;
            for (auto& v : free_vars(r))
                if (st.inst.count(v)) hit = true;
            if (!hit) break;
            r = substitute(r, st.inst);
        }
        return substitute_perms(r, st.pinst);
    }

    std::string resolve_root(const std::string& r) const {
        auto it = st.inst.find(r);
        if (it != st.inst.end()) {
            LinExpr e = resolve(it->second);
            if (e.is_var()) return e.as_var();
        }
        return r;
    }

    void bind(const std::string& v, const LinExpr& t) {
        st.inst[v] = t;
        if (!exE.count(v)) st.eqns.push_back(p_eq(LinExpr::var(v), t));
    }

    void unify(const LinExpr& tA, const LinExpr& tC) {
        LinExpr a = resolve(tA), c = resolve(tC);
        if (a == c) return;
        std::string u;
        int n = 0;
        for (auto& [v, k] : c.coef)
            if (can_inst(v)) {
                ++n;
                if (k == 1 || k == -1) u = v;
            }
        if (n == 1 && !u.empty()) {
            int64_t k = c.coef.at(u);
            LinExpr rest = c;
            rest.coef.erase(u);
            bind(u, (a - rest).scale(k));
            return;
        }
        st.oblig.push_back(p_eq(a, c));
    }

    bool root_match(const std::string& rA, const std::string& rC) {
        std::string rc = resolve_root(rC);
        if (rA == rc) return true;
        if (exE.count(rc) && can_inst(rc)) {
            bind(rc, LinExpr::var(rA));
            return true;
        }
        if (rc.empty() || rA.empty()) return false;
        return implies(p_and(Apure, hyp), p_eq(LinExpr::var(rA), LinExpr::var(rc)));
    }

    // nullopt: consume whole; otherwise the remaining antecedent permission.
    std::optional<Frac> match_perm(const Perm& pA, const Perm& pC) {
        Perm c = pC;
        if (c.is_var() && !c.is_anon()) {
            auto it = st.pinst.find(c.var);
            if (it != st.pinst.end()) c = it->second;
        }
        if (c.is_anon()) return std::nullopt;
        if (c.is_var()) {
            if (pA.is_var() && pA.var == c.var) return std::nullopt;
            if (inst_ok.count(c.var)) {
                st.pinst[c.var] = pA;
                return std::nullopt;
            }
            fail("MatchFailure", "permission " + c.var + " does not match " + pA.str());
        }
        if (pA.is_var()) fail("MatchFailure", "symbolic permission " + pA.str() + " cannot supply " + c.str());
        if (pA.val < c.val) fail("PermissionExceeded", "need " + c.val.str() + " but only " + pA.val.str() + " held");
        if (pA.val == c.val) return std::nullopt;
        return pA.val - c.val;
    }

    void try_points_to(size_t i, const HeapAtom& c) {
        HeapAtom& a = st.A[i];
        if (a.ctor != c.ctor || a.args.size() != c.args.size()) fail("MatchFailure", "constructor mismatch");
        if (!root_match(a.root, c.root)) fail("MatchFailure", "root mismatch");
        for (size_t k = 0; k < a.args.size(); ++k) unify(a.args[k], c.args[k]);
        auto rest = match_perm(a.perm, c.perm);
        if (rest) a.perm = Perm(*rest);
        else st.A.erase(st.A.begin() + i);
    }

    void try_cnt(size_t i, const HeapAtom& c) {
        HeapAtom& a = st.A[i];
        if (!root_match(a.root, c.root)) fail("MatchFailure", "latch mismatch");
        auto rest = match_perm(a.perm, c.perm);
        if (!rest) {
            unify(a.count, c.count);
            st.A.erase(st.A.begin() + i);
            return;
        }
        LinExpr cc = resolve(c.count);
        bool open = false;
        for (auto& kv : cc.coef)
            if (can_inst(kv.first)) open = true;
        Pure facts = p_and(Apure, hyp);
        if (implies(facts, p_eq(a.count, LinExpr(-1)))) {
            unify(LinExpr(-1), c.count);
        } else if (open) {
            st.oblig.push_back(p_cmp(CmpOp::GE, a.count, LinExpr(0)));
            unify(a.count, c.count);
            a.count = LinExpr(0);
        } else {
            st.oblig.push_back(p_cmp(CmpOp::GE, cc, LinExpr(0)));
            st.oblig.push_back(p_cmp(CmpOp::GE, a.count - cc, LinExpr(0)));
            a.count = a.count - cc;
        }
        a.perm = Perm(*rest);
    }

    void try_wait(size_t i, const HeapAtom& c) {
        HeapAtom& a = st.A[i];
        for (auto& [x, y] : c.arcs)
            if (!a.arcs.count({resolve_root(x), resolve_root(y)})) fail("MatchFailure", "missing wait arc");
        auto rest = match_perm(a.perm, c.perm);
        if (rest) a.perm = Perm(*rest);
        else st.A.erase(st.A.begin() + i);
    }

    void try_dead(size_t i, const HeapAtom& c) {
        if (!root_match(st.A[i].root, c.root)) fail("MatchFailure", "thread mismatch");
    }

    bool bind_res(const std::string& v, const Formula& f) {
        if (!can_inst(v)) return false;
        auto it = st.D.find(v);
        if (it != st.D.end()) {
            if (print(it->second) != print(f)) fail("ResourceVarRebind", v + " is already bound");
            return true;
        }
        st.D[v] = f;
        return true;
    }

    void try_thread(size_t i, const HeapAtom& c) {
        HeapAtom a = st.A[i];
        if (!root_match(a.root, c.root)) fail("MatchFailure", "thread mismatch");
        Formula qa = payload_formula(a.payload);
        if (c.payload.is_var() && !st.D.count(c.payload.var) && bind_res(c.payload.var, qa)) {
            st.A.erase(st.A.begin() + i);
            return;
        }
        Formula qc = c.payload.is_var() ? st.D.count(c.payload.var) ? st.D.at(c.payload.var)
                                                                      : payload_formula(c.payload)
                                        : *c.payload.f;
        Formula left = sub_entail(qa, resolve(qc), Mode::Covariant);
        if (left.ds.size() == 1 && left.ds[0].heap.empty()) {
            st.A.erase(st.A.begin() + i);
        } else {
            st.A[i] = HeapAtom::thread(a.root, ResArg::of(left));
        }
    }

    void match_spec_payload(const ResArg& pa, const ResArg& pc) {
        Formula fa = payload_formula(pa);
        if (pc.is_var() && !st.D.count(pc.var) && bind_res(pc.var, fa)) return;
        Formula fc = pc.is_var() ? (st.D.count(pc.var) ? st.D.at(pc.var) : payload_formula(pc)) : *pc.f;
        if (print(resolve(fc)) != print(fa)) fail("MatchFailure", "thread specification mismatch");
    }

    void try_thread_spec(size_t i, const HeapAtom& c) {
        HeapAtom a = st.A[i];
        if (!root_match(a.root, c.root)) fail("MatchFailure", "thread mismatch");
        match_spec_payload(a.payload, c.payload);
        match_spec_payload(a.payload2, c.payload2);
        st.A.erase(st.A.begin() + i);
    }

    void try_latch(size_t i, const HeapAtom& c) {
        HeapAtom a = st.A[i];
        if (!root_match(a.root, c.root)) fail("MatchFailure", "latch mismatch");
        Formula phi1 = payload_formula(a.payload);
        Formula phi2;
        std::optional<std::string> pv;
        if (c.payload.is_var()) {
            pv = c.payload.var;
        } else if (c.payload.f->ds.size() == 1) {
            const Disjunct& only = c.payload.f->ds[0];
            if (only.exists.empty() && only.heap.size() == 1 && only.heap[0].kind == AK::ResVar &&
                conjuncts(only.pure).empty())
                pv = only.heap[0].root;
        }
        if (pv) {
            const std::string& V = *pv;
            auto it = st.D.find(V);
            if (it != st.D.end()) {
                phi2 = it->second;
            } else if (can_inst(V)) {
                st.D[V] = phi1;
                st.A.erase(st.A.begin() + i);
                return;
            } else {
                phi2 = Formula::of_atom(HeapAtom::res_var(V));
            }
        } else {
            phi2 = resolve(*c.payload.f);
        }
        Mode m = !opts.variance ? Mode::Unify : (a.kind == AK::LatchIn ? Mode::Contravariant : Mode::Covariant);
        Formula left = sub_entail(phi1, phi2, m);
        bool empty = left.ds.size() == 1 && left.ds[0].heap.empty();
        if (empty) {
            st.A.erase(st.A.begin() + i);
        } else {
            HeapAtom n = a;
            n.payload = ResArg::of(left);
            st.A[i] = n;
        }
    }

    void try_atom(size_t i, const HeapAtom& c) {
        switch (c.kind) {
            case AK::PointsTo: try_points_to(i, c); break;
            case AK::Cnt: try_cnt(i, c); break;
            case AK::Wait: try_wait(i, c); break;
            case AK::Dead: try_dead(i, c); break;
            case AK::Thread: try_thread(i, c); break;
            case AK::ThreadSpec: try_thread_spec(i, c); break;
            case AK::LatchIn:
            case AK::LatchOut: try_latch(i, c); break;
            case AK::ResVar: break;
        }
    }

    void match_atom(const HeapAtom& c) {
        std::optional<Fail> last;
        int tried = 0;
        for (size_t i = 0; i < st.A.size(); ++i) {
            if (st.A[i].kind != c.kind) continue;
            State snap = st;
            try {
                ++tried;
                try_atom(i, c);
                if (tried == 1) {
                    for (size_t j = i + 1; j < snap.A.size(); ++j)
                        if (snap.A[j].kind == c.kind && snap.A[j].root == snap.A[i].root && c.kind != AK::Wait) {
                            st.notes.push_back("alternative candidate existed for " + print(c));
                            break;
                        }
                }
                return;
            } catch (const Fail& f) {
                st = snap;
                last = f;
            }
        }
        if (last) throw *last;
        fail("MatchFailure", "no antecedent atom matches " + print(c));
    }

    Disjunct binding_for_remainder() {
        Disjunct d;
        d.heap = st.A;
        std::set<std::string> hv = heap_vars(d.heap);
        std::set<std::string> drop;
        for (auto& v : free_vars(Apure))
            if (local.count(v) && !hv.count(v)) drop.insert(v);
        Pure p = drop.empty() ? Apure : eliminate(Apure, drop);
        std::vector<Pure> keep;
        for (auto& k : conjuncts(p)) {
            bool ok = true;
            for (auto& v : free_vars(k))
                if (!hv.count(v)) ok = false;
            if (ok) keep.push_back(k);
        }
        d.pure = p_and(keep);
        for (auto& v : hv)
            if (local.count(v)) d.exists.push_back(v);
        st.A.clear();
        return d;
    }

    void run(const std::vector<HeapAtom>& C, Pure Cpure) {
        std::deque<HeapAtom> work;
        std::deque<std::string> deferred;
        for (auto& a : C) {
            if (a.kind == AK::ResVar) deferred.push_back(a.root);
            else work.push_back(a);
        }
        int expansions = 0;
        while (true) {
            while (!work.empty()) {
                HeapAtom c = work.front();
                work.pop_front();
                match_atom(c);
            }
            if (deferred.empty()) break;
            std::string V = deferred.front();
            deferred.pop_front();
            auto it = st.D.find(V);
            if (it != st.D.end() && !fresh_res.count(V)) {
                if (++expansions > 64) fail("MatchFailure", "cyclic resource bindings");
                if (it->second.ds.size() != 1) fail("MatchFailure", "disjunctive binding for " + V);
                Disjunct d = open_exists(it->second.ds[0]);
                for (auto& a : d.heap) {
                    if (a.kind == AK::ResVar) deferred.push_back(a.root);
                    else work.push_back(a);
                }
                Cpure = p_and(Cpure, d.pure);
                continue;
            }
            bool found = false;
            for (size_t i = 0; i < st.A.size(); ++i)
                if (st.A[i].kind == AK::ResVar && st.A[i].root == V) {
                    st.A.erase(st.A.begin() + i);
                    found = true;
                    break;
                }
            if (found) continue;
            if (can_inst(V) && !st.D.count(V)) {
                st.D[V] = Formula(binding_for_remainder());
                continue;
            }
            fail("MatchFailure", "resource " + V + " not available");
        }
        std::vector<Pure> goals{resolve(Cpure)};
        for (auto& o : st.oblig) goals.push_back(resolve(o));
        Pure goal = p_and(goals);
        std::vector<std::string> U;
        for (auto& v : free_vars(goal))
            if (can_inst(v)) U.push_back(v);
        if (!U.empty()) goal = p_exists(U, goal);
        SatStatus s = implies_status(p_and(Apure, hyp), goal);
        if (s == SatStatus::Unknown) fail("SolverUnknown", "pure obligation undecided: " + print_pure(goal));
        if (s != SatStatus::Sat) fail("PureFailure", "cannot prove " + print_pure(goal));
    }

    Matcher child() const {
        Matcher m;
        m.opts = opts;
        m.inst_ok = inst_ok;
        m.exE = exE;
        m.fresh_res = fresh_res;
        m.hyp = p_and(hyp, Apure);
        m.st.inst = st.inst;
        m.st.pinst = st.pinst;
        m.st.D = st.D;
        return m;
    }

    void adopt(const Matcher& m, const std::set<std::string>& hide) {
        for (auto& [k, v] : m.st.inst)
            if (!hide.count(k)) st.inst[k] = v;
        st.pinst = m.st.pinst;
        for (auto& [k, v] : m.st.D)
            if (!hide.count(k) && !m.fresh_res.count(k)) st.D[k] = v;
        for (auto& e : m.st.eqns) {
            bool hidden = false;
            for (auto& v : free_vars(e))
                if (hide.count(v)) hidden = true;
            if (!hidden) st.eqns.push_back(e);
        }
        st.notes.insert(st.notes.end(), m.st.notes.begin(), m.st.notes.end());
    }

    // Payload sub-entailment. Returns the unconsumed part of phi1.
    Formula sub_entail(const Formula& phi1, const Formula& phi2, Mode mode) {
        if (phi1.ds.size() != 1) fail("MatchFailure", "disjunctive latch payload");
        std::vector<std::string> localA_v;
        Disjunct a = open_exists(phi1.ds[0], &localA_v);
        std::set<std::string> localA(localA_v.begin(), localA_v.end());
        std::optional<Fail> last;
        for (auto& cd0 : phi2.ds) {
            std::vector<std::string> localC_v;
            Disjunct cd = open_exists(cd0, &localC_v);
            std::set<std::string> localC(localC_v.begin(), localC_v.end());
            try {
                if (mode == Mode::Contravariant) return contravariant(a, localA, cd);
                Matcher m = child();
                for (auto& v : localC) {
                    m.inst_ok.insert(v);
                    m.exE.insert(v);
                }
                for (auto& v : free_vars(cd))
                    if (!free_vars(a).count(v) && !free_vars(Apure).count(v) && !heap_vars(st.A).count(v))
                        m.inst_ok.insert(v);
                std::string Vp = fresh("V");
                m.inst_ok.insert(Vp);
                m.exE.insert(Vp);
                m.fresh_res.insert(Vp);
                m.local = localA;
                m.st.A = a.heap;
                m.Apure = a.pure;
                std::vector<HeapAtom> C = cd.heap;
                C.push_back(HeapAtom::res_var(Vp));
                m.run(C, cd.pure);
                Formula left = m.st.D.count(Vp) ? m.st.D.at(Vp) : Formula::emp();
                if (mode == Mode::Unify) {
                    std::set<std::string> matched = heap_vars(a.heap);
                    for (auto& v : free_vars(left)) matched.erase(v);
                    std::set<std::string> drop;
                    for (auto& v : free_vars(a.pure))
                        if (localA.count(v) && !matched.count(v)) drop.insert(v);
                    Pure proj = drop.empty() ? a.pure : eliminate(a.pure, drop);
                    Pure back = m.resolve(cd.pure);
                    if (!implies(p_and({hyp, Apure, back}), proj))
                        fail("UnifyFailure", "payload constraints differ: " + print_pure(proj) + " vs " +
                                                 print_pure(back));
                }
                std::set<std::string> hide = localC;
                adopt(m, hide);
                return left;
            } catch (const Fail& f) {
                last = f;
            }
        }
        if (last) throw *last;
        fail("MatchFailure", "empty payload disjunction");
    }

    Formula contravariant(const Disjunct& a, const std::set<std::string>& localA, const Disjunct& c2) {
        std::vector<HeapAtom> M, L;
        std::vector<bool> used(a.heap.size(), false);
        for (auto& want : c2.heap) {
            for (size_t i = 0; i < a.heap.size(); ++i) {
                if (used[i] || a.heap[i].kind != want.kind) continue;
                if (a.heap[i].root != resolve_root(want.root)) continue;
                used[i] = true;
                break;
            }
        }
        for (size_t i = 0; i < a.heap.size(); ++i) (used[i] ? M : L).push_back(a.heap[i]);
        auto project = [&](const std::vector<HeapAtom>& h) {
            std::set<std::string> hv = heap_vars(h);
            std::set<std::string> drop;
            for (auto& v : free_vars(a.pure))
                if (localA.count(v) && !hv.count(v)) drop.insert(v);
            return drop.empty() ? a.pure : eliminate(a.pure, drop);
        };
        Matcher m;
        m.opts = opts;
        m.inst_ok = localA;
        m.exE = localA;
        m.hyp = p_and(hyp, Apure);
        m.st.inst = st.inst;
        m.st.pinst = st.pinst;
        m.st.D = st.D;
        m.st.A = c2.heap;
        m.Apure = c2.pure;
        m.run(M, project(M));
        if (!m.st.A.empty())
            fail("VarianceFailure", "contravariant payload check leaves " + print(Disjunct{{}, m.st.A, p_true()}));
        Disjunct left;
        left.heap = L;
        left.pure = project(L);
        std::set<std::string> lv = heap_vars(L);
        for (auto& v : localA)
            if (lv.count(v)) left.exists.push_back(v);
        return Formula(left);
    }
};

}  // namespace

std::set<std::string> perm_vars(const Formula& f) {
    std::set<std::string> s;
    collect_perm_vars(f, s);
    return s;
}

Pure free_eqn(const std::map<std::string, LinExpr>& rho, const std::set<std::string>& E) {
    std::vector<Pure> ps;
    for (auto& [v, u] : rho)
        if (!E.count(v)) ps.push_back(p_eq(LinExpr::var(v), u));
    return p_and(ps);
}

AddVarResult add_var(const HeapAtom& pred) {
    AddVarResult r;
    if (pred.payload.is_var()) {
        r.var = pred.payload.var;
        r.payload = Formula::of_atom(HeapAtom::res_var(r.var));
        return r;
    }
    r.var = fresh("V");
    r.fresh = true;
    r.payload = star(*pred.payload.f, Formula::of_atom(HeapAtom::res_var(r.var)));
    HeapAtom left = pred;
    left.payload = ResArg::of_var(r.var);
    r.leftover = left;
    return r;
}

static ResArg apply_payload(const ResArg& r, const std::string& var, const Formula& def) {
    if (r.is_var()) return r.var == var ? ResArg::of(def) : r;
    return ResArg::of(apply(*r.f, var, def));
}

Formula apply(const Formula& f, const std::string& var, const Formula& def) {
    Formula out = Formula::false_();
    for (auto& d : f.ds) {
        Disjunct base;
        base.exists = d.exists;
        base.pure = d.pure;
        int hits = 0;
        for (auto& a : d.heap) {
            if (a.kind == AK::ResVar && a.root == var) {
                ++hits;
                continue;
            }
            HeapAtom b = a;
            if (a.is_latch_pred() || a.kind == AK::Thread || a.kind == AK::ThreadSpec)
                b.payload = apply_payload(a.payload, var, def);
            if (a.kind == AK::ThreadSpec) b.payload2 = apply_payload(a.payload2, var, def);
            base.heap.push_back(b);
        }
        Formula r(base);
        if (!base.exists.empty()) {
            std::vector<std::string> names;
            Disjunct o = open_exists(base, &names);
            o.exists = names;
            r = Formula(o);
        }
        for (int k = 0; k < hits; ++k) r = star(r, def);
        out.ds.insert(out.ds.end(), r.ds.begin(), r.ds.end());
    }
    return out;
}

Formula subst(const Bindings& D, const Formula& f) {
    Formula r = f;
    for (auto& [v, def] : D) r = apply(r, v, def);
    return r;
}

ResourceOutcome resource_entail(const std::set<std::string>& E, const Formula& phi1, const Formula& phi2,
                                Polarity pol, bool variance) {
    ResourceOutcome out;
    Matcher m;
    m.opts.variance = variance;
    m.inst_ok = E;
    m.exE = E;
    Formula rhs = phi2;
    try {
        // A bare resource variable on the right is instantiated directly.
        if (phi2.ds.size() == 1 && phi2.ds[0].heap.size() == 1 && phi2.ds[0].heap[0].kind == AK::ResVar &&
            is_true(phi2.ds[0].pure) && E.count(phi2.ds[0].heap[0].root)) {
            out.bindings[phi2.ds[0].heap[0].root] = phi1;
            out.success = true;
            return out;
        }
        Mode mode = !variance ? Mode::Unify : (pol == Polarity::In ? Mode::Contravariant : Mode::Covariant);
        out.leftover = m.sub_entail(phi1, rhs, mode);
        out.bindings = m.st.D;
        out.rho = m.st.inst;
        out.success = true;
    } catch (const Fail& f) {
        out.failure = f.d;
        if (variance && out.failure->code == "PureFailure") out.failure->code = "VarianceFailure";
        out.failure->message += pol == Polarity::In ? " (contravariant)" : " (covariant)";
    }
    return out;
}

EntailmentOutcome entail(const std::set<std::string>& E, const Formula& A, const Formula& C,
                         const EntailOptions& opts) {
    EntailmentOutcome out;
    std::optional<Diagnostic> last;
    for (auto& ad : A.ds) {
        Disjunct a = open_exists(ad);
        // An omitted permission on the antecedent side denotes the whole resource.
        for (auto& at : a.heap)
            if (at.perm.is_anon()) at.perm = Perm(Frac(1));
        if (is_sat(a.pure).status == SatStatus::Unsat) continue;
        std::set<std::string> aNames = all_names(a);
        std::optional<DisjunctOutcome> best;
        for (size_t ci = 0; ci < C.ds.size(); ++ci) {
            std::vector<std::string> names;
            Disjunct c = open_exists(C.ds[ci], &names);
            Matcher m;
            m.opts = opts;
            m.exE = E;
            m.exE.insert(names.begin(), names.end());
            m.inst_ok = m.exE;
            for (auto& v : all_names(c))
                if (!aNames.count(v)) m.inst_ok.insert(v);
            m.st.A = a.heap;
            m.Apure = a.pure;
            try {
                m.run(c.heap, c.pure);
            } catch (const Fail& f) {
                last = f.d;
                continue;
            }
            DisjunctOutcome part;
            part.inst = m.st.inst;
            part.perm_inst = m.st.pinst;
            for (auto& [k, v] : m.st.D)
                if (!m.fresh_res.count(k)) part.bindings[k] = v;
            part.residue.heap = m.st.A;
            std::vector<Pure> ps{a.pure};
            ps.insert(ps.end(), m.st.eqns.begin(), m.st.eqns.end());
            part.residue.pure = p_and(ps);
            std::set<std::string> rv = free_vars(part.residue);
            for (auto& n : names)
                if (rv.count(n)) part.residue.exists.push_back(n);
            part.matched_disjunct = static_cast<int>(ci);
            out.notes.insert(out.notes.end(), m.st.notes.begin(), m.st.notes.end());
            if (best) {
                if (print(best->residue) != print(part.residue)) {
                    out.success = false;
                    out.failure_reason = Diagnostic{"AmbiguousDisjunct",
                                                    "consequent disjuncts " + std::to_string(best->matched_disjunct) +
                                                        " and " + std::to_string(ci) + " both match",
                                                    {}};
                    return out;
                }
                continue;
            }
            best = part;
        }
        if (!best) {
            out.success = false;
            out.failure_reason = last ? *last : Diagnostic{"MatchFailure", "no consequent disjunct", {}};
            return out;
        }
        out.parts.push_back(*best);
    }
    Formula res = Formula::false_();
    for (auto& p : out.parts) {
        for (auto& [k, v] : p.bindings) {
            auto it = out.bindings.find(k);
            if (it != out.bindings.end() && print(it->second) != print(v) && out.parts.size() == 1) {
                out.failure_reason = Diagnostic{"ResourceVarRebind", k + " bound twice", {}};
                return out;
            }
            out.bindings.emplace(k, v);
        }
        res.ds.push_back(p.residue);
    }
    out.residue = res;
    out.success = true;
    return out;
}

}  // namespace latchproof
