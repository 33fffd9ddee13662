#include "latchproof/oracle.hpp"

#include <algorithm>
#include <functional>
#include <sstream>
#include <unordered_set>

#include "latchproof/parser.hpp"

namespace latchproof {

const char* to_string(OutcomeKind k) {
    switch (k) {
        case OutcomeKind::Clean: return "Clean";
        case OutcomeKind::Race: return "Race";
        case OutcomeKind::Deadlock: return "Deadlock";
        case OutcomeKind::Leak: return "Leak";
        case OutcomeKind::AssertFailure: return "AssertFailure";
    }
    return "?";
}

bool OracleReport::has(OutcomeKind k) const {
    for (auto& o : outcomes)
        if (o.kind == k) return true;
    return false;
}

std::set<OutcomeKind> OracleReport::kinds() const {
    std::set<OutcomeKind> r;
    for (auto& o : outcomes) r.insert(o.kind);
    return r;
}

static bool is_latch_key(const std::string& k) { return k.rfind("latch:", 0) == 0; }

bool Footprint::conflicts(const Footprint& o) const {
    auto hit = [](const std::set<std::string>& w, const std::set<std::string>& other) {
        for (auto& k : w)
            if (!is_latch_key(k) && other.count(k)) return true;
        return false;
    };
    return hit(writes, o.writes) || hit(writes, o.reads) || hit(o.writes, reads);
}

std::string ConcreteState::key() const {
    std::ostringstream os;
    for (auto& s : slots) os << (s ? std::to_string(*s) : "_") << ',';
    os << '|';
    for (auto& e : envs) {
        for (auto& [n, v] : e) os << n << '=' << v << ',';
        os << ';';
    }
    os << '|';
    for (auto& [l, c] : heap) {
        os << l << ':' << c.ctor;
        for (auto v : c.vals) os << ',' << v;
        os << ';';
    }
    os << '|';
    for (auto c : latches) os << c << ',';
    os << '|';
    for (auto& h : handles) os << h.proc << '@' << h.tid << ',';
    os << '|';
    for (auto& t : threads) {
        os << t.env << '/' << t.parent << '/' << t.waiting << '/' << t.steps << '/' << t.done << '[';
        for (auto& it : t.kont)
            os << it.kind << ':' << static_cast<const void*>(it.e) << ':' << it.index << ':' << it.dest << ':'
               << it.saved_env << ' ';
        os << ']';
    }
    os << '|' << next_loc;
    return os.str();
}

namespace {

struct Fault {
    StepStatus status;
    std::string message;
};

struct Blocked {};

void collect_vars(const ExprPtr& e, std::set<std::string>& out) {
    if (!e) return;
    switch (e->kind) {
        case EK::Decl:
        case EK::Assign: out.insert(e->name); break;
        default: break;
    }
    for (auto& k : e->kids) collect_vars(k, out);
}

class Machine {
public:
    const Program& prog;
    ConcreteState& s;
    Footprint& fp;

    Machine(const Program& p, ConcreteState& st, Footprint& f) : prog(p), s(st), fp(f) {}

    [[noreturn]] static void fault(const std::string& m) { throw Fault{StepStatus::Fault, m}; }

    int slot_of(int env, const std::string& x) {
        auto it = s.envs[env].find(x);
        if (it == s.envs[env].end()) fault("unknown variable " + x);
        return it->second;
    }

    int64_t read_var(int env, const std::string& x) {
        int sl = slot_of(env, x);
        fp.reads.insert("slot:" + std::to_string(sl));
        if (!s.slots[sl]) fault("read of uninitialized " + x);
        return *s.slots[sl];
    }

    void write_var(int env, const std::string& x, int64_t v) {
        int sl = slot_of(env, x);
        fp.writes.insert("slot:" + std::to_string(sl));
        s.slots[sl] = v;
    }

    int64_t eval(int env, const LinExpr& t) {
        int64_t v = t.c;
        for (auto& [x, k] : t.coef) v += k * read_var(env, x);
        return v;
    }

    bool cmp(CmpOp op, int64_t a, int64_t b) {
        switch (op) {
            case CmpOp::EQ: return a == b;
            case CmpOp::NE: return a != b;
            case CmpOp::LT: return a < b;
            case CmpOp::LE: return a <= b;
            case CmpOp::GT: return a > b;
            case CmpOp::GE: return a >= b;
        }
        return false;
    }

    bool eval_pure(int env, const Pure& p) {
        switch (p->kind) {
            case PK::True: return true;
            case PK::False: return false;
            case PK::Cmp: return cmp(p->op, eval(env, p->lhs), eval(env, p->rhs));
            case PK::And:
                for (auto& k : p->kids)
                    if (!eval_pure(env, k)) return false;
                return true;
            case PK::Or:
                for (auto& k : p->kids)
                    if (eval_pure(env, k)) return true;
                return false;
            case PK::Not: return !eval_pure(env, p->kids[0]);
            default: fault("quantifier in a run-time condition");
        }
    }

    // Assertions are checked on the part that mentions program variables only.
    bool check_assert(int env, const Formula& f) {
        for (auto& d : f.ds) {
            std::set<std::string> bound(d.exists.begin(), d.exists.end());
            auto known = [&](const std::set<std::string>& vs) {
                for (auto& v : vs)
                    if (bound.count(v) || !s.envs[env].count(v)) return false;
                return true;
            };
            bool ok = true;
            for (auto& c : conjuncts(d.pure))
                if (known(free_vars(c)) && !eval_pure(env, c)) ok = false;
            for (auto& a : d.heap) {
                if (a.kind != AK::PointsTo || !known({a.root})) continue;
                auto it = s.heap.find(read_var(env, a.root));
                if (it == s.heap.end() || it->second.ctor != a.ctor) {
                    ok = false;
                    continue;
                }
                fp.reads.insert("loc:" + std::to_string(it->first));
                for (size_t i = 0; i < a.args.size() && i < it->second.vals.size(); ++i)
                    if (known(a.args[i].vars()) && eval(env, a.args[i]) != it->second.vals[i]) ok = false;
            }
            if (ok) return true;
        }
        return false;
    }

    Cell& cell_at(int env, const std::string& x, bool write) {
        int64_t l = read_var(env, x);
        auto it = s.heap.find(l);
        if (it == s.heap.end()) fault("access to freed or invalid cell " + x);
        (write ? fp.writes : fp.reads).insert("loc:" + std::to_string(l));
        return it->second;
    }

    size_t field_index(const Cell& c, const std::string& f) {
        const DataDecl* dd = prog.find_data(c.ctor);
        if (!dd) fault("unknown data type " + c.ctor);
        for (size_t i = 0; i < dd->fields.size(); ++i)
            if (dd->fields[i].name == f) return i;
        fault("no field " + f);
    }

    int64_t latch_of(int env, const std::string& c) {
        int64_t id = read_var(env, c);
        if (id < 0 || id >= static_cast<int64_t>(s.latches.size())) fault(c + " is not a latch");
        return id;
    }

    // New environment for a procedure body. Plain variable arguments are
    // passed by reference, other arguments by value.
    int enter(const ProcDecl& pd, int env, const std::vector<LinExpr>& args) {
        if (args.size() != pd.params.size()) fault("arity mismatch calling " + pd.name);
        std::map<std::string, int> ne;
        for (size_t i = 0; i < args.size(); ++i) {
            if (args[i].is_var() && s.envs[env].count(args[i].as_var())) {
                ne[pd.params[i].name] = s.envs[env].at(args[i].as_var());
            } else {
                int64_t v = eval(env, args[i]);
                ne[pd.params[i].name] = static_cast<int>(s.slots.size());
                s.slots.push_back(v);
            }
        }
        std::set<std::string> locals;
        collect_vars(pd.body, locals);
        locals.insert("res");
        for (auto& v : locals)
            if (!ne.count(v)) {
                ne[v] = static_cast<int>(s.slots.size());
                s.slots.push_back(std::nullopt);
            }
        s.envs.push_back(ne);
        return static_cast<int>(s.envs.size()) - 1;
    }

    const ProcDecl& proc(const std::string& n) {
        const ProcDecl* pd = prog.find_proc(n);
        if (!pd || !pd->body) fault("call to procedure without body: " + n);
        return *pd;
    }

    void call(int tid, const std::string& name, const std::vector<LinExpr>& args, int dest) {
        const ProcDecl& pd = proc(name);
        ThreadState& t = s.threads[tid];
        int ne = enter(pd, t.env, args);
        Item end;
        end.kind = Item::CallEnd;
        end.dest = dest;
        end.saved_env = t.env;
        s.threads[tid].kont.push_back(end);
        s.threads[tid].env = ne;
        Item body;
        body.e = pd.body.get();
        s.threads[tid].kont.push_back(body);
    }

    void assign(int tid, const std::string& x, const Expr& rhs) {
        int env = s.threads[tid].env;
        switch (rhs.kind) {
            case EK::Const:
            case EK::VarRead:
            case EK::Arith: write_var(env, x, eval(env, rhs.term)); return;
            case EK::New: {
                const DataDecl* dd = prog.find_data(rhs.name);
                if (!dd) fault("unknown data type " + rhs.name);
                Cell c{rhs.name, {}};
                for (auto& a : rhs.args) c.vals.push_back(eval(env, a));
                int64_t l = s.next_loc++;
                s.heap[l] = c;
                fp.fresh.insert("loc:" + std::to_string(l));
                write_var(env, x, l);
                return;
            }
            case EK::FieldRead: {
                Cell& c = cell_at(env, rhs.name, false);
                int64_t v = c.vals[field_index(c, rhs.name2)];
                write_var(env, x, v);
                return;
            }
            case EK::CreateLatch: {
                int64_t n = eval(env, rhs.args[0]);
                if (n < 0) fault("negative latch count");
                s.latches.push_back(n);
                fp.writes.insert("latch:" + std::to_string(s.latches.size() - 1));
                write_var(env, x, static_cast<int64_t>(s.latches.size()) - 1);
                return;
            }
            case EK::CreateThread: {
                proc(rhs.name);
                s.handles.push_back({rhs.name, -1});
                write_var(env, x, static_cast<int64_t>(s.handles.size()) - 1);
                return;
            }
            case EK::Call: call(tid, rhs.name, rhs.args, slot_of(env, x)); return;
            default: fault("unsupported right-hand side");
        }
    }

    void finish_call(int tid, std::optional<int64_t> value) {
        ThreadState& t = s.threads[tid];
        while (!t.kont.empty() && t.kont.back().kind != Item::CallEnd) t.kont.pop_back();
        if (t.kont.empty()) return;
        Item end = t.kont.back();
        t.kont.pop_back();
        t.env = end.saved_env;
        if (value && end.dest >= 0) {
            s.slots[end.dest] = *value;
            fp.writes.insert("slot:" + std::to_string(end.dest));
        }
    }

    // Bookkeeping items that touch no shared location.
    bool admin(int tid) {
        ThreadState& t = s.threads[tid];
        if (t.done || t.waiting > 0 || t.kont.empty()) return false;
        Item it = t.kont.back();
        if (it.kind == Item::SeqRest) {
            t.kont.pop_back();
            if (it.index < it.e->kids.size()) {
                Item rest = it;
                ++rest.index;
                t.kont.push_back(rest);
                Item k;
                k.e = it.e->kids[it.index].get();
                t.kont.push_back(k);
            }
            return true;
        }
        if (it.kind == Item::ParWait) {
            t.kont.pop_back();
            return true;
        }
        if (it.kind == Item::CallEnd) {
            t.kont.pop_back();
            t.env = it.saved_env;
            return true;
        }
        const Expr& e = *it.e;
        if (e.kind == EK::Skip || (e.kind == EK::Decl && e.kids.empty())) {
            t.kont.pop_back();
            return true;
        }
        if (e.kind == EK::Seq) {
            t.kont.pop_back();
            Item r;
            r.kind = Item::SeqRest;
            r.e = &e;
            t.kont.push_back(r);
            return true;
        }
        if (e.kind == EK::Par) {
            t.kont.pop_back();
            Item w;
            w.kind = Item::ParWait;
            t.kont.push_back(w);
            t.waiting = static_cast<int>(e.kids.size());
            int env = t.env;
            for (auto& k : e.kids) {
                ThreadState c;
                c.env = env;
                c.parent = tid;
                Item ki;
                ki.e = k.get();
                c.kont.push_back(ki);
                s.threads.push_back(c);
            }
            return true;
        }
        return false;
    }

    void settle() {
        bool changed = true;
        while (changed) {
            changed = false;
            for (size_t i = 0; i < s.threads.size(); ++i) {
                while (admin(static_cast<int>(i))) changed = true;
                ThreadState& t = s.threads[i];
                if (!t.done && t.waiting == 0 && t.kont.empty()) {
                    t.done = true;
                    if (t.parent >= 0) --s.threads[t.parent].waiting;
                    changed = true;
                }
            }
        }
    }

    // One primitive of thread tid; throws Blocked or Fault.
    void primitive(int tid, Span& at) {
        ThreadState& t0 = s.threads[tid];
        Item it = t0.kont.back();
        t0.kont.pop_back();
        const Expr& e = *it.e;
        at = e.span;
        int env = t0.env;
        switch (e.kind) {
            case EK::Assign: assign(tid, e.name, *e.kids[0]); break;
            case EK::Decl: assign(tid, e.name, *e.kids[0]); break;
            case EK::Call: call(tid, e.name, e.args, -1); break;
            case EK::Return: finish_call(tid, eval(env, e.term)); break;
            case EK::FieldWrite: {
                int64_t v = eval(env, e.term);
                Cell& c = cell_at(env, e.name, true);
                c.vals[field_index(c, e.name2)] = v;
                break;
            }
            case EK::Destroy: {
                int64_t l = read_var(env, e.name);
                if (!s.heap.count(l)) fault("destroy of freed or invalid cell " + e.name);
                fp.writes.insert("loc:" + std::to_string(l));
                s.heap.erase(l);
                break;
            }
            case EK::CountDown: {
                int64_t id = latch_of(env, e.name);
                fp.writes.insert("latch:" + std::to_string(id));
                if (s.latches[id] > 0) --s.latches[id];
                break;
            }
            case EK::Await: {
                int64_t id = latch_of(env, e.name);
                fp.reads.insert("latch:" + std::to_string(id));
                if (s.latches[id] > 0) throw Blocked{};
                break;
            }
            case EK::Fork: {
                int64_t h = read_var(env, e.name);
                if (h < 0 || h >= static_cast<int64_t>(s.handles.size())) fault(e.name + " is not a thread");
                if (s.handles[h].tid >= 0) fault("thread " + e.name + " forked twice");
                const ProcDecl& pd = proc(s.handles[h].proc);
                int ne = enter(pd, env, e.args);
                ThreadState c;
                c.env = ne;
                Item body;
                body.e = pd.body.get();
                c.kont.push_back(body);
                s.handles[h].tid = static_cast<int>(s.threads.size());
                s.threads.push_back(c);
                break;
            }
            case EK::Join: {
                int64_t h = read_var(env, e.name);
                if (h < 0 || h >= static_cast<int64_t>(s.handles.size())) fault(e.name + " is not a thread");
                int tt = s.handles[h].tid;
                if (tt < 0 || !s.threads[tt].done) throw Blocked{};
                break;
            }
            case EK::If: {
                bool c = eval_pure(env, e.cond);
                if (c || e.kids.size() > 1) {
                    Item k;
                    k.e = e.kids[c ? 0 : 1].get();
                    s.threads[tid].kont.push_back(k);
                }
                break;
            }
            case EK::While: {
                if (eval_pure(env, e.cond)) {
                    s.threads[tid].kont.push_back(it);
                    Item k;
                    k.e = e.kids[0].get();
                    s.threads[tid].kont.push_back(k);
                }
                break;
            }
            case EK::Assert:
                if (!check_assert(env, *e.with)) throw Fault{StepStatus::AssertFailure, "assertion failed"};
                break;
            case EK::Atomic: {
                size_t base = s.threads[tid].kont.size();
                Item r;
                r.kind = Item::SeqRest;
                r.e = &e;
                s.threads[tid].kont.push_back(r);
                while (s.threads[tid].kont.size() > base) {
                    if (admin(tid)) continue;
                    const Item& top = s.threads[tid].kont.back();
                    if (top.kind == Item::Stmt && top.e->kind == EK::Par) fault("parallel block inside atomic");
                    Span inner;
                    primitive(tid, inner);
                }
                break;
            }
            case EK::New:
            case EK::CreateLatch:
            case EK::CreateThread:
            case EK::FieldRead:
            case EK::Const:
            case EK::VarRead:
            case EK::Arith:
                for (auto& a : e.args) eval(env, a);
                break;
            default: fault("unexpected statement");
        }
    }
};

}  // namespace

ConcreteState initial_state(const Program& p, const std::string& entry) {
    ConcreteState s;
    s.envs.emplace_back();
    ThreadState main;
    s.threads.push_back(main);
    Footprint fp;
    Machine m(p, s, fp);
    const ProcDecl* pd = p.find_proc(entry);
    if (!pd || !pd->body) throw std::runtime_error("no procedure '" + entry + "' with a body");
    if (!pd->params.empty()) throw std::runtime_error("entry procedure must not take parameters");
    int env = m.enter(*pd, 0, {});
    s.threads[0].env = env;
    Item body;
    body.e = pd->body.get();
    s.threads[0].kont.push_back(body);
    m.settle();
    return s;
}

StepResult step(const Program& p, const ConcreteState& s, int tid) {
    StepResult r;
    r.next = s;
    const ThreadState& t = s.threads[tid];
    if (t.done || t.waiting > 0 || t.kont.empty()) {
        r.status = StepStatus::Idle;
        return r;
    }
    Machine m(p, r.next, r.fp);
    try {
        m.primitive(tid, r.at);
        ++r.next.threads[tid].steps;
        m.settle();
    } catch (const Blocked&) {
        r.status = StepStatus::Blocked;
        r.next = s;
    } catch (const Fault& f) {
        r.status = f.status;
        r.message = f.message;
    }
    if (r.at.line == 0 && t.kont.back().e) r.at = t.kont.back().e->span;
    return r;
}

Footprint footprint(const Program& p, const ConcreteState& s, int tid) { return step(p, s, tid).fp; }

static std::string line_of(const Span& sp) { return "line " + std::to_string(sp.line); }

OracleReport explore(const Program& p, const OracleBounds& b, const std::string& entry) {
    OracleReport rep;
    rep.entry = entry;
    const ProcDecl* pd = p.find_proc(entry);
    bool leak_check = pd && (pd->specs.empty() || (pd->specs[0].pre.is_emp() && pd->specs[0].post.is_emp()));

    std::unordered_set<std::string> seen;
    std::vector<ConcreteState> stack;
    ConcreteState init = initial_state(p, entry);
    seen.insert(init.key());
    stack.push_back(std::move(init));

    while (!stack.empty()) {
        ConcreteState s = std::move(stack.back());
        stack.pop_back();
        ++rep.explored;

        std::vector<StepResult> moves;
        std::vector<int> movers;
        std::vector<std::string> blocked;
        bool alive = false;
        for (size_t i = 0; i < s.threads.size(); ++i) {
            const ThreadState& t = s.threads[i];
            if (t.done) continue;
            alive = true;
            StepResult r = step(p, s, static_cast<int>(i));
            if (r.status == StepStatus::Idle) continue;
            if (r.status == StepStatus::Blocked) {
                blocked.push_back(line_of(r.at));
                continue;
            }
            moves.push_back(std::move(r));
            movers.push_back(static_cast<int>(i));
        }

        if (!alive) {
            ++rep.terminals;
            if (leak_check && !s.heap.empty()) {
                std::map<std::string, int> ctors;
                for (auto& [l, c] : s.heap) ++ctors[c.ctor];
                std::string d;
                for (auto& [c, n] : ctors) d += (d.empty() ? "" : ", ") + std::to_string(n) + " " + c;
                rep.outcomes.insert({OutcomeKind::Leak, d});
            } else {
                rep.outcomes.insert({OutcomeKind::Clean, ""});
            }
            continue;
        }
        if (moves.empty()) {
            ++rep.terminals;
            std::sort(blocked.begin(), blocked.end());
            std::string d = "blocked at";
            for (auto& x : blocked) d += " " + x;
            rep.outcomes.insert({OutcomeKind::Deadlock, d});
            continue;
        }

        for (size_t i = 0; i < moves.size(); ++i)
            for (size_t j = i + 1; j < moves.size(); ++j)
                if (moves[i].fp.conflicts(moves[j].fp)) {
                    std::string a = line_of(moves[i].at), c = line_of(moves[j].at);
                    if (c < a) std::swap(a, c);
                    rep.outcomes.insert({OutcomeKind::Race, a + " / " + c});
                }

        for (size_t i = 0; i < moves.size(); ++i) {
            StepResult& r = moves[i];
            if (r.status == StepStatus::Fault) {
                rep.outcomes.insert({OutcomeKind::Race, "memory fault at " + line_of(r.at) + ": " + r.message});
                continue;
            }
            if (r.status == StepStatus::AssertFailure) {
                rep.outcomes.insert({OutcomeKind::AssertFailure, line_of(r.at)});
                continue;
            }
            size_t live = 0;
            for (auto& t : r.next.threads)
                if (!t.done) ++live;
            if (r.next.threads[movers[i]].steps > b.max_steps || live > b.max_threads) {
                rep.exhaustive = false;
                continue;
            }
            std::string k = r.next.key();
            if (seen.count(k)) continue;
            if (seen.size() >= b.max_states) {
                rep.exhaustive = false;
                continue;
            }
            seen.insert(k);
            stack.push_back(std::move(r.next));
        }
    }
    return rep;
}

std::vector<std::string> symbolic_payloads(const Program& p) {
    std::vector<std::string> out;
    for (auto& pd : p.proc_decls) {
        std::set<std::string> vars;
        collect_vars(pd.body, vars);
        for (auto& prm : pd.params) vars.insert(prm.name);
        std::function<void(const ExprPtr&)> walk = [&](const ExprPtr& e) {
            if (!e) return;
            if (e->kind == EK::CreateLatch && e->with) {
                for (auto& v : free_vars(*e->with))
                    if (!vars.count(v)) {
                        out.push_back(pd.name + " line " + std::to_string(e->span.line) + ": " + v);
                        break;
                    }
                for (auto& v : res_vars(*e->with)) out.push_back(pd.name + " line " + std::to_string(e->span.line) + ": " + v);
            }
            for (auto& k : e->kids) walk(k);
        };
        walk(pd.body);
    }
    return out;
}

}  // namespace latchproof
