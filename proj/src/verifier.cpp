#include "latchproof/verifier.hpp"

#include <functional>
#include <future>

#include "latchproof/entail.hpp"
#include "latchproof/parser.hpp"
#include "latchproof/solver.hpp"

namespace latchproof {

namespace {

const char* const kPrelude = R"(
CountDownLatch create_latch(int n) with P
  requires n>0 ensures LatchIn(res,P) * LatchOut(res,P) * CNT(res,n)@1;
  requires n=0 ensures CNT(res,-1)@1;

void countDown(CountDownLatch i)
  requires LatchIn(i,P) * P * CNT(i,n)@f & n>0 ensures CNT(i,n-1)@f;
  requires CNT(i,-1)@f ensures CNT(i,-1)@f;

void await(CountDownLatch i)
  requires LatchOut(i,P) * CNT(i,0)@f ensures P * CNT(i,-1)@f;
  requires CNT(i,-1)@f ensures CNT(i,-1)@f;
)";

struct VerifyFail {
    VerdictKind kind = VerdictKind::SpecFailure;
    std::string lemma;
    std::string message;
    Span at;
    std::vector<Arc> cycle;
};

[[noreturn]] void spec_fail(const std::string& msg, Span at) {
    throw VerifyFail{VerdictKind::SpecFailure, "", msg, at, {}};
}

struct Instance {
    Formula pre;
    Formula post;
    std::set<std::string> E;
};

Formula emp_payload() { return Formula::emp(); }

// Renames program variable x to `old` everywhere except inside resource
// payloads, which keep referring to the variable rather than its value.
Formula rename_var(const Formula& f, const std::string& x, const std::string& old) {
    std::map<std::string, LinExpr> m{{x, LinExpr::var(old)}};
    Formula r = f;
    for (auto& d : r.ds) {
        bool bound = false;
        for (auto& v : d.exists)
            if (v == x) bound = true;
        if (bound) continue;
        for (auto& a : d.heap) {
            if (a.kind == AK::ResVar) continue;
            ResArg p1 = a.payload, p2 = a.payload2;
            a.payload = ResArg::of_var("_");
            a.payload2 = ResArg::of_var("_");
            a = substitute(a, m);
            a.payload = p1;
            a.payload2 = p2;
        }
        d.pure = substitute(d.pure, m);
    }
    return r;
}

void collect_program_vars(const ExprPtr& e, std::set<std::string>& out) {
    if (!e) return;
    if (e->kind == EK::Decl || e->kind == EK::Assign) out.insert(e->name);
    for (auto& k : e->kids) collect_program_vars(k, out);
}

struct FieldLoc {
    size_t atom;
    size_t index;
};

class Executor {
public:
    const Program& prog;
    VerifyOptions opts;
    std::vector<TracePoint> trace;
    std::vector<std::string> notes;
    std::set<std::string> progvars;

    Executor(const Program& p, const VerifyOptions& o) : prog(p), opts(o) {}

    const ProcDecl* find_proc(const std::string& n) const {
        if (auto* pd = prog.find_proc(n)) return pd;
        return prelude().find_proc(n);
    }

    void record(Span sp, const std::string& label, const Formula& f) { trace.push_back({sp, label, f}); }

    [[noreturn]] void lemma_fail(const LemmaError& e, Span sp) {
        throw VerifyFail{e.kind, e.lemma, e.message, sp, e.cycle};
    }

    Formula settle(const Formula& f, Span sp, const std::string& label) {
        NormalizeResult r = normalize(f);
        if (r.error) {
            record(sp, label, r.state);
            lemma_fail(*r.error, sp);
        }
        bool changed = false;
        Formula w = apply_w2(r.state, &changed);
        if (changed) {
            if (auto e = check_consistency(w)) {
                record(sp, label + " [W2]", w);
                lemma_fail(*e, sp);
            }
        }
        record(sp, label, w);
        return w;
    }

    // ----- specifications -----

    Instance instantiate(const ProcDecl& pd, const SpecPair& sp, const std::vector<LinExpr>& actuals,
                         const std::string& res, const std::optional<Formula>& ghost, Span at) {
        if (actuals.size() != pd.params.size())
            spec_fail("'" + pd.name + "' expects " + std::to_string(pd.params.size()) + " arguments", at);
        Instance in;
        std::map<std::string, LinExpr> m;
        std::set<std::string> formals;
        for (size_t i = 0; i < pd.params.size(); ++i) {
            m[pd.params[i].name] = actuals[i];
            formals.insert(pd.params[i].name);
        }
        std::set<std::string> logical = free_vars(sp.pre);
        for (auto& v : free_vars(sp.post)) logical.insert(v);
        for (auto& v : logical) {
            if (formals.count(v) || v == "res") continue;
            std::string w = fresh(v);
            m[v] = LinExpr::var(w);
            in.E.insert(w);
        }
        m["res"] = LinExpr::var(res);
        in.pre = substitute(sp.pre, m);
        in.post = substitute(sp.post, m);

        Bindings D;
        std::set<std::string> rv = res_vars(sp.pre);
        for (auto& v : res_vars(sp.post)) rv.insert(v);
        for (auto& g : pd.ghosts) rv.insert(g);
        for (auto& v : rv) {
            bool is_ghost = std::find(pd.ghosts.begin(), pd.ghosts.end(), v) != pd.ghosts.end();
            if (is_ghost && pd.ghosts.size() == 1 && (ghost || pd.name == "create_latch")) {
                D[v] = ghost ? *ghost : emp_payload();
            } else {
                std::string w = fresh(v);
                D[v] = Formula::of_atom(HeapAtom::res_var(w));
                in.E.insert(w);
            }
        }
        in.pre = subst(D, in.pre);
        in.post = subst(D, in.post);

        std::map<std::string, Perm> pm;
        std::set<std::string> pv = perm_vars(sp.pre);
        for (auto& v : perm_vars(sp.post)) pv.insert(v);
        for (auto& v : pv) {
            std::string w = fresh("%" + v);
            pm[v] = Perm::variable(w);
            in.E.insert(w);
        }
        in.pre = substitute_perms(in.pre, pm);
        in.post = substitute_perms(in.post, pm);

        // Anonymous counter and WAIT permissions are threaded from pre to post.
        std::map<std::pair<int, std::string>, std::string> shared;
        for (auto& d : in.pre.ds)
            for (auto& a : d.heap)
                if ((a.kind == AK::Cnt || a.kind == AK::Wait) && a.perm.is_anon()) {
                    auto key = std::make_pair(static_cast<int>(a.kind), a.root);
                    if (!shared.count(key)) {
                        shared[key] = fresh("%f");
                        in.E.insert(shared[key]);
                    }
                    a.perm = Perm::variable(shared[key]);
                }
        for (auto& d : in.post.ds)
            for (auto& a : d.heap)
                if (a.perm.is_anon()) {
                    auto it = shared.find({static_cast<int>(a.kind), a.root});
                    a.perm = it != shared.end() ? Perm::variable(it->second) : Perm(Frac(1));
                }
        return in;
    }

    void precision_lint(const ProcDecl& pd) {
        for (size_t s = 0; s < pd.specs.size(); ++s) {
            const Formula& pre = pd.specs[s].pre;
            for (size_t i = 0; i < pre.ds.size(); ++i)
                for (size_t j = i + 1; j < pre.ds.size(); ++j)
                    if (is_sat(p_and(pre.ds[i].pure, pre.ds[j].pure)).status != SatStatus::Unsat)
                        notes.push_back("precision lint: " + pd.name + " spec " + std::to_string(s + 1) +
                                        " has overlapping disjuncts " + std::to_string(i + 1) + " and " +
                                        std::to_string(j + 1));
        }
    }

    Formula call(const Formula& delta, const std::string& name, const std::vector<LinExpr>& actuals,
                 const std::string& res, const std::optional<Formula>& ghost, Span at) {
        const ProcDecl* pd = find_proc(name);
        if (!pd) spec_fail("call to unknown procedure '" + name + "'", at);
        if (pd->specs.empty()) spec_fail("'" + name + "' has no specification", at);
        std::string reasons;
        for (size_t s = 0; s < pd->specs.size(); ++s) {
            Instance in = instantiate(*pd, pd->specs[s], actuals, res, ghost, at);
            EntailmentOutcome r = entail(in.E, delta, in.pre, EntailOptions{opts.variance});
            if (!r.success) {
                reasons += "\n  spec " + std::to_string(s + 1) + ": " +
                           (r.failure_reason ? r.failure_reason->code + ": " + r.failure_reason->message : "failed");
                continue;
            }
            for (auto& n : r.notes) notes.push_back(name + ": " + n);
            Formula out = Formula::false_();
            for (auto& part : r.parts) {
                Formula post = subst(part.bindings, in.post);
                post = substitute_perms(substitute(post, part.inst), part.perm_inst);
                const Disjunct& matched = in.pre.ds[part.matched_disjunct];
                if (matched.exists.empty()) post = add_pure(post, substitute(matched.pure, part.inst));
                Formula piece = star(Formula(part.residue), post);
                out.ds.insert(out.ds.end(), piece.ds.begin(), piece.ds.end());
            }
            for (size_t t = s + 1; t < pd->specs.size(); ++t) {
                Instance other = instantiate(*pd, pd->specs[t], actuals, res, ghost, at);
                if (entail(other.E, delta, other.pre, EntailOptions{opts.variance}).success) {
                    notes.push_back(name + ": specs " + std::to_string(s + 1) + " and " + std::to_string(t + 1) +
                                    " both apply; using the first");
                    break;
                }
            }
            return out;
        }
        spec_fail("no specification of '" + name + "' is entailed by the current state" + reasons, at);
    }

    // ----- heap helpers -----

    bool same_root(const Disjunct& d, const std::string& a, const std::string& b) {
        if (a == b) return true;
        return implies(d.pure, p_eq(LinExpr::var(a), LinExpr::var(b)));
    }

    std::optional<size_t> find_cell(const Disjunct& d, const std::string& x) {
        for (size_t i = 0; i < d.heap.size(); ++i)
            if (d.heap[i].kind == AK::PointsTo && d.heap[i].root == x) return i;
        for (size_t i = 0; i < d.heap.size(); ++i)
            if (d.heap[i].kind == AK::PointsTo && same_root(d, d.heap[i].root, x)) return i;
        return std::nullopt;
    }

    size_t field_index(const HeapAtom& a, const std::string& field, Span at) {
        const DataDecl* dd = prog.find_data(a.ctor);
        if (!dd) spec_fail("unknown data type '" + a.ctor + "'", at);
        for (size_t i = 0; i < dd->fields.size(); ++i)
            if (dd->fields[i].name == field) return i;
        spec_fail("'" + a.ctor + "' has no field '" + field + "'", at);
    }

    // ----- statements -----

    std::optional<Formula> wrap_payload(const std::optional<Formula>& with) {
        if (!with) return std::nullopt;
        Formula r = *with;
        for (auto& d : r.ds) {
            std::set<std::string> roots;
            for (auto& a : d.heap)
                if (a.kind != AK::ResVar) roots.insert(a.root);
            for (auto& v : free_vars(d)) {
                if (progvars.count(v) || roots.count(v)) continue;
                if (std::find(d.exists.begin(), d.exists.end(), v) == d.exists.end()) d.exists.push_back(v);
            }
        }
        return r;
    }

    Formula assign(const Formula& delta0, const std::string& x, const ExprPtr& rhs, Span sp) {
        std::string old = fresh(x);
        Formula delta = rename_var(delta0, x, old);
        std::map<std::string, LinExpr> m{{x, LinExpr::var(old)}};
        auto args = [&]() {
            std::vector<LinExpr> v;
            for (auto& a : rhs->args) v.push_back(a.subst(m));
            return v;
        };
        switch (rhs->kind) {
            case EK::Const:
            case EK::VarRead:
            case EK::Arith: return add_pure(delta, p_eq(LinExpr::var(x), rhs->term.subst(m)));
            case EK::New: {
                const DataDecl* dd = prog.find_data(rhs->name);
                if (!dd) spec_fail("unknown data type '" + rhs->name + "'", sp);
                return star(delta, Formula::of_atom(HeapAtom::points_to(x, rhs->name, args())));
            }
            case EK::FieldRead: {
                std::string y = rhs->name == x ? old : rhs->name;
                Formula out = delta;
                for (auto& d : out.ds) {
                    auto i = find_cell(d, y);
                    if (!i) spec_fail("reading " + rhs->name + "." + rhs->name2 + " without permission", sp);
                    size_t k = field_index(d.heap[*i], rhs->name2, sp);
                    d.pure = p_and(d.pure, p_eq(LinExpr::var(x), d.heap[*i].args[k]));
                }
                return out;
            }
            case EK::Call: return call(delta, rhs->name, args(), x, std::nullopt, sp);
            case EK::CreateLatch: return call(delta, "create_latch", args(), x, wrap_payload(rhs->with), sp);
            case EK::CreateThread: {
                Formula pre = rhs->with ? *rhs->with : Formula::emp();
                Formula post = rhs->with2 ? *rhs->with2 : Formula::emp();
                return star(delta, Formula::of_atom(HeapAtom::thread_spec(x, ResArg::of(pre), ResArg::of(post))));
            }
            default: {
                Formula r = exec(delta, rhs);
                return r;
            }
        }
    }

    // Latches counted down by an inferred target, in order of appearance.
    std::vector<std::string> inferred_downs;

    Formula infer_target(const ExprPtr& branch) {
        inferred_downs.clear();
        std::vector<ExprPtr> flat;
        std::function<void(const ExprPtr&)> walk = [&](const ExprPtr& e) {
            if (e->kind == EK::Seq || e->kind == EK::Atomic) {
                for (auto& k : e->kids) walk(k);
            } else {
                flat.push_back(e);
            }
        };
        walk(branch);
        if (flat.size() == 1 && flat[0]->kind == EK::Call) {
            const ProcDecl* pd = prog.find_proc(flat[0]->name);
            if (pd && !pd->specs.empty())
                return instantiate(*pd, pd->specs[0], flat[0]->args, fresh("res"), std::nullopt, flat[0]->span).pre;
        }
        std::map<std::string, int> downs;
        std::set<std::string> awaits;
        std::vector<std::string> order;
        for (auto& e : flat) {
            if (e->kind != EK::CountDown && e->kind != EK::Await) continue;
            if (!downs.count(e->name) && !awaits.count(e->name)) order.push_back(e->name);
            if (e->kind == EK::CountDown) {
                ++downs[e->name];
            } else {
                awaits.insert(e->name);
                downs.emplace(e->name, 0);
            }
        }
        Formula t = Formula::emp();
        for (auto& c : order) {
            if (downs[c] > 0) inferred_downs.push_back(c);
            if (downs[c] > 0) t = star(t, Formula::of_atom(HeapAtom::latch_in(c, ResArg::of_var(fresh("V")))));
            if (awaits.count(c)) t = star(t, Formula::of_atom(HeapAtom::latch_out(c, ResArg::of_var(fresh("W")))));
            t = star(t, Formula::of_atom(HeapAtom::cnt(c, LinExpr(downs[c]), Perm::anon())));
        }
        return t;
    }

    // Count that no target asks for goes to the first inferred branch that
    // counts the latch down, so an unmatched count stays visible there.
    void give_surplus(const Formula& delta, std::vector<Formula>& targets,
                      const std::vector<std::vector<std::string>>& downs) {
        if (delta.ds.size() != 1) return;
        for (auto& a : delta.ds[0].heap) {
            if (a.kind != AK::Cnt || !a.count.is_const() || a.count.c < 0) continue;
            int64_t demanded = 0;
            bool symbolic = false;
            for (auto& t : targets)
                for (auto& d : t.ds)
                    for (auto& b : d.heap)
                        if (b.kind == AK::Cnt && b.root == a.root) {
                            if (b.count.is_const()) demanded += b.count.c;
                            else symbolic = true;
                        }
            if (symbolic || demanded >= a.count.c) continue;
            for (size_t i = 0; i < targets.size(); ++i) {
                if (std::find(downs[i].begin(), downs[i].end(), a.root) == downs[i].end()) continue;
                for (auto& d : targets[i].ds)
                    for (auto& b : d.heap)
                        if (b.kind == AK::Cnt && b.root == a.root) b.count.c += a.count.c - demanded;
                break;
            }
        }
    }

    Formula par(const Formula& delta, const Expr& e) {
        std::vector<Formula> targets;
        std::vector<std::vector<std::string>> downs(e.kids.size());
        for (size_t i = 0; i < e.kids.size(); ++i) {
            if (i < e.annots.size() && e.annots[i]) {
                targets.push_back(*e.annots[i]);
            } else {
                targets.push_back(infer_target(e.kids[i]));
                downs[i] = inferred_downs;
            }
        }
        give_surplus(delta, targets, downs);
        SplitOutcome s = split_for(delta, targets, EntailOptions{opts.variance});
        if (!s.ok) spec_fail("cannot split the state for the parallel branches: " + s.failure->message, e.span);
        std::string sum;
        for (size_t i = 0; i < targets.size(); ++i) sum += (i ? " || " : "") + print(s.branches[i]);
        record(e.span, "split: " + sum + " ; frame " + print(s.frame), s.frame);
        Formula joined = s.frame;
        for (size_t i = 0; i < e.kids.size(); ++i) {
            Formula st = settle(s.branches[i], e.kids[i]->span, "branch " + std::to_string(i + 1) + " entry");
            Formula fin = exec(st, e.kids[i]);
            joined = star(joined, fin);
        }
        return settle(joined, e.span, "join of parallel branches");
    }

    Formula exec(const Formula& delta, const ExprPtr& e) {
        switch (e->kind) {
            case EK::Skip: return delta;
            case EK::Seq: {
                Formula d = delta;
                for (auto& k : e->kids) d = exec(d, k);
                return d;
            }
            case EK::Atomic: {
                Formula d = delta;
                for (auto& k : e->kids) d = exec(d, k);
                return d;
            }
            case EK::Decl: {
                if (!e->kids.empty()) return settle(assign(delta, e->name, e->kids[0], e->span), e->span, print(e));
                return rename_var(delta, e->name, fresh(e->name));
            }
            case EK::Assign: return settle(assign(delta, e->name, e->kids[0], e->span), e->span, print(e));
            case EK::Return: {
                Expr r;
                r.kind = e->term.is_const() ? EK::Const : EK::Arith;
                r.term = e->term;
                return settle(assign(delta, "res", std::make_shared<const Expr>(r), e->span), e->span, print(e));
            }
            case EK::Call:
                return settle(call(delta, e->name, e->args, fresh("res"), std::nullopt, e->span), e->span, print(e));
            case EK::CountDown:
            case EK::Await: {
                const char* n = e->kind == EK::CountDown ? "countDown" : "await";
                return settle(call(delta, n, {LinExpr::var(e->name)}, fresh("res"), std::nullopt, e->span), e->span,
                              print(e));
            }
            case EK::CreateLatch:
            case EK::New:
            case EK::CreateThread:
            case EK::FieldRead:
            case EK::Const:
            case EK::VarRead:
            case EK::Arith: return settle(assign(delta, fresh("tmp"), e, e->span), e->span, print(e));
            case EK::Destroy: {
                Formula out = delta;
                for (auto& d : out.ds) {
                    auto i = find_cell(d, e->name);
                    if (!i || d.heap[*i].perm.is_var() || !d.heap[*i].perm.val.is_one())
                        spec_fail("destroy(" + e->name + ") needs full ownership of " + e->name, e->span);
                    d.heap.erase(d.heap.begin() + static_cast<long>(*i));
                }
                return settle(out, e->span, print(e));
            }
            case EK::FieldWrite: {
                Formula out = delta;
                for (auto& d : out.ds) {
                    auto i = find_cell(d, e->name);
                    if (!i || d.heap[*i].perm.is_var() || !d.heap[*i].perm.val.is_one())
                        spec_fail("writing " + e->name + "." + e->name2 + " needs full ownership", e->span);
                    size_t k = field_index(d.heap[*i], e->name2, e->span);
                    d.heap[*i].args[k] = e->term;
                }
                return settle(out, e->span, print(e));
            }
            case EK::Assert: {
                EntailmentOutcome r = entail({}, delta, *e->with, EntailOptions{opts.variance});
                if (!r.success)
                    spec_fail("assertion " + print(*e->with) + " fails: " +
                                  (r.failure_reason ? r.failure_reason->message : ""),
                              e->span);
                return delta;
            }
            case EK::If: {
                Formula yes = settle(add_pure(delta, e->cond), e->span, "if (" + print_pure(e->cond) + ")");
                Formula no = settle(add_pure(delta, p_not(e->cond)), e->span, "else");
                Formula a = exec(yes, e->kids[0]);
                Formula b = e->kids.size() > 1 ? exec(no, e->kids[1]) : no;
                return settle(disj(a, b), e->span, "end if");
            }
            case EK::While: {
                const Formula& inv = *e->with;
                EntailmentOutcome in = entail({}, delta, inv, EntailOptions{opts.variance});
                if (!in.success) spec_fail("loop invariant does not hold on entry", e->span);
                Formula body_in = settle(add_pure(inv, e->cond), e->span, "loop body entry");
                Formula body_out = exec(body_in, e->kids[0]);
                EntailmentOutcome keep = entail({}, body_out, inv, EntailOptions{opts.variance});
                if (!keep.success) spec_fail("loop body does not preserve the invariant", e->span);
                return settle(star(in.residue, add_pure(inv, p_not(e->cond))), e->span, "loop exit");
            }
            case EK::Par: return par(delta, *e);
            case EK::Fork: {
                Formula out = Formula::false_();
                for (auto& d : delta.ds) {
                    const HeapAtom* ts = nullptr;
                    for (auto& a : d.heap)
                        if (a.kind == AK::ThreadSpec && a.root == e->name) ts = &a;
                    if (!ts) spec_fail("fork of " + e->name + " without a thread specification", e->span);
                    Formula need = star(Formula::of_atom(*ts), ts->payload.is_var()
                                                                  ? Formula::of_atom(HeapAtom::res_var(ts->payload.var))
                                                                  : *ts->payload.f);
                    HeapAtom node = HeapAtom::thread(e->name, ts->payload2);
                    EntailmentOutcome r = entail({}, Formula(d), need, EntailOptions{opts.variance});
                    if (!r.success)
                        spec_fail("fork of " + e->name + ": thread precondition not available: " +
                                      (r.failure_reason ? r.failure_reason->message : ""),
                                  e->span);
                    Formula piece = star(r.residue, Formula::of_atom(node));
                    out.ds.insert(out.ds.end(), piece.ds.begin(), piece.ds.end());
                }
                return settle(out, e->span, print(e));
            }
            case EK::Join: {
                Formula out = delta;
                for (auto& d : out.ds) {
                    bool done = false;
                    for (size_t i = 0; i < d.heap.size() && !done; ++i) {
                        if (d.heap[i].kind == AK::Thread && d.heap[i].root == e->name) {
                            HeapAtom node = d.heap[i];
                            d.heap.erase(d.heap.begin() + static_cast<long>(i));
                            Formula q = node.payload.is_var() ? Formula::of_atom(HeapAtom::res_var(node.payload.var))
                                                              : *node.payload.f;
                            if (q.ds.size() != 1) spec_fail("disjunctive thread postcondition", e->span);
                            d = star(d, open_exists(q.ds[0]));
                            d.heap.push_back(HeapAtom::dead(e->name));
                            done = true;
                        }
                    }
                    if (done) continue;
                    for (auto& a : d.heap)
                        if (a.kind == AK::Dead && a.root == e->name) done = true;
                    if (!done) spec_fail("join(" + e->name + ") without a thread node", e->span);
                }
                return settle(out, e->span, print(e));
            }
        }
        return delta;
    }
};

}  // namespace

const char* prelude_source() { return kPrelude; }

const Program& prelude() {
    static const Program p = parse_program(std::string(kPrelude));
    return p;
}

std::optional<Verdict> check_leak(const Formula& residue, bool strict_heap) {
    // A thread node still present before normalization was never joined,
    // even when a dead marker lets normalization release its postcondition.
    NormalizeResult r = normalize(residue);
    std::vector<std::string> trapped;
    for (auto& d : residue.ds)
        for (auto& a : d.heap)
            if (a.kind == AK::Thread) trapped.push_back(print(a));
    for (auto& d : r.state.ds)
        for (auto& a : d.heap) {
            bool leak = a.kind == AK::LatchIn || a.kind == AK::LatchOut || a.kind == AK::Thread ||
                        a.kind == AK::ThreadSpec || a.kind == AK::ResVar || (strict_heap && a.kind == AK::PointsTo);
            if (leak) trapped.push_back(print(a));
        }
    if (trapped.empty()) return std::nullopt;
    Verdict v;
    v.kind = VerdictKind::LeakError;
    v.message = "resources left behind:";
    for (auto& t : trapped) v.message += " " + t;
    return v;
}

static Verdict verify_one(const Program& p, const ProcDecl& pd, size_t s, const VerifyOptions& opts) {
    reset_fresh(opts.seed);
    Executor ex(p, opts);
    collect_program_vars(pd.body, ex.progvars);
    for (auto& prm : pd.params) ex.progvars.insert(prm.name);
    Verdict v;
    v.proc = pd.name;
    v.spec_index = static_cast<int>(s);
    v.at = pd.span;
    const SpecPair& sp = pd.specs[s];
    ex.precision_lint(pd);
    try {
        Formula start = sp.pre;
        for (auto& d : start.ds)
            for (auto& a : d.heap)
                if (a.perm.is_anon()) a.perm = Perm(Frac(1));
        if (pd.name == "main") start = star(start, Formula::of_atom(HeapAtom::wait({}, Perm(Frac(1)))));
        Formula st = ex.settle(start, pd.span, "precondition");
        Formula fin = ex.exec(st, pd.body);
        EntailmentOutcome r = entail({}, fin, sp.post, EntailOptions{opts.variance});
        if (!r.success)
            spec_fail("final state " + print(fin) + " does not entail the postcondition " + print(sp.post) + ": " +
                          (r.failure_reason ? r.failure_reason->code + ": " + r.failure_reason->message : ""),
                      pd.span);
        bool strict = pd.name == "main" && sp.pre.is_emp() && sp.post.is_emp();
        ex.record(pd.span, "residue after postcondition", r.residue);
        if (auto leak = check_leak(r.residue, strict)) {
            v.kind = VerdictKind::LeakError;
            v.message = leak->message;
        } else {
            v.kind = VerdictKind::Verified;
        }
    } catch (const VerifyFail& f) {
        v.kind = f.kind;
        v.lemma = f.lemma;
        v.message = f.message;
        v.at = f.at;
        v.cycle = f.cycle;
    } catch (const std::exception& e) {
        v.kind = VerdictKind::SpecFailure;
        v.message = std::string("internal error: ") + e.what();
    }
    v.trace = std::move(ex.trace);
    v.notes = std::move(ex.notes);
    return v;
}

std::vector<Verdict> verify_program(const Program& p, const VerifyOptions& opts) {
    std::vector<std::pair<const ProcDecl*, size_t>> tasks;
    for (auto& pd : p.proc_decls) {
        if (!pd.body) continue;
        for (size_t s = 0; s < pd.specs.size(); ++s) tasks.push_back({&pd, s});
    }
    (void)prelude();
    std::vector<Verdict> out(tasks.size());
    if (opts.parallel && tasks.size() > 1) {
        std::vector<std::future<Verdict>> fs;
        for (auto& [pd, s] : tasks)
            fs.push_back(std::async(std::launch::async, verify_one, std::cref(p), std::cref(*pd), s, opts));
        for (size_t i = 0; i < fs.size(); ++i) out[i] = fs[i].get();
    } else {
        for (size_t i = 0; i < tasks.size(); ++i) out[i] = verify_one(p, *tasks[i].first, tasks[i].second, opts);
    }
    return out;
}

ExecOutcome exec(const Program& p, const Formula& delta, const ExprPtr& e, const VerifyOptions& opts) {
    ExecOutcome out;
    Executor ex(p, opts);
    collect_program_vars(e, ex.progvars);
    try {
        out.state = ex.exec(ex.settle(delta, e->span, "start"), e);
        out.ok = true;
    } catch (const VerifyFail& f) {
        Verdict v;
        v.kind = f.kind;
        v.lemma = f.lemma;
        v.message = f.message;
        v.at = f.at;
        v.cycle = f.cycle;
        out.error = v;
    }
    out.trace = std::move(ex.trace);
    return out;
}

}  // namespace latchproof
