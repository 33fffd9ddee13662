#include "latchproof/ast.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <set>
#include <stdexcept>

namespace latchproof {

// ----- Frac -----

static int64_t gcd64(int64_t a, int64_t b) {
    a = a < 0 ? -a : a;
    b = b < 0 ? -b : b;
    while (b) {
        int64_t t = a % b;
        a = b;
        b = t;
    }
    return a;
}

Frac::Frac(int64_t num, int64_t den) {
    if (den == 0) throw std::invalid_argument("zero denominator");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    int64_t g = gcd64(num, den);
    if (g == 0) g = 1;
    num_ = num / g;
    den_ = den / g;
}

Frac Frac::operator+(const Frac& o) const {
    return Frac(num_ * o.den_ + o.num_ * den_, den_ * o.den_);
}

Frac Frac::operator-(const Frac& o) const {
    return Frac(num_ * o.den_ - o.num_ * den_, den_ * o.den_);
}

Frac Frac::operator/(int64_t k) const { return Frac(num_, den_ * k); }

bool Frac::operator<(const Frac& o) const {
    return static_cast<__int128>(num_) * o.den_ < static_cast<__int128>(o.num_) * den_;
}

std::string Frac::str() const {
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
}

std::optional<Frac> Frac::parse(const std::string& s) {
    try {
        auto slash = s.find('/');
        if (slash != std::string::npos) {
            int64_t n = std::stoll(s.substr(0, slash));
            int64_t d = std::stoll(s.substr(slash + 1));
            if (d == 0) return std::nullopt;
            return Frac(n, d);
        }
        auto dot = s.find('.');
        if (dot != std::string::npos) {
            std::string ip = s.substr(0, dot), fp = s.substr(dot + 1);
            if (fp.empty() || fp.size() > 9) return std::nullopt;
            int64_t den = 1;
            for (size_t i = 0; i < fp.size(); ++i) den *= 10;
            int64_t n = (ip.empty() ? 0 : std::stoll(ip)) * den + std::stoll(fp);
            return Frac(n, den);
        }
        return Frac(std::stoll(s), 1);
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

// ----- LinExpr -----

LinExpr LinExpr::var(const std::string& v) {
    LinExpr e;
    e.coef[v] = 1;
    return e;
}

bool LinExpr::is_var() const {
    return c == 0 && coef.size() == 1 && coef.begin()->second == 1;
}

LinExpr LinExpr::operator+(const LinExpr& o) const {
    LinExpr r = *this;
    r.c += o.c;
    for (auto& [v, k] : o.coef) {
        r.coef[v] += k;
        if (r.coef[v] == 0) r.coef.erase(v);
    }
    return r;
}

LinExpr LinExpr::operator-(const LinExpr& o) const { return *this + (-o); }

LinExpr LinExpr::operator-() const { return scale(-1); }

LinExpr LinExpr::scale(int64_t k) const {
    LinExpr r;
    if (k == 0) return r;
    r.c = c * k;
    for (auto& [v, a] : coef) r.coef[v] = a * k;
    return r;
}

LinExpr LinExpr::subst(const std::map<std::string, LinExpr>& m) const {
    LinExpr r(c);
    for (auto& [v, a] : coef) {
        auto it = m.find(v);
        if (it == m.end()) {
            r = r + LinExpr::var(v).scale(a);
        } else {
            r = r + it->second.scale(a);
        }
    }
    return r;
}

LinExpr LinExpr::rename(const std::map<std::string, std::string>& m) const {
    std::map<std::string, LinExpr> mm;
    for (auto& [a, b] : m) mm[a] = LinExpr::var(b);
    return subst(mm);
}

std::set<std::string> LinExpr::vars() const {
    std::set<std::string> s;
    for (auto& kv : coef) s.insert(kv.first);
    return s;
}

std::string LinExpr::str() const {
    std::string out;
    for (auto& [v, k] : coef) {
        if (k == 0) continue;
        if (out.empty()) {
            if (k == -1) out += "-";
            else if (k != 1) out += std::to_string(k) + "*";
        } else {
            if (k == 1) out += "+";
            else if (k == -1) out += "-";
            else if (k < 0) out += "-" + std::to_string(-k) + "*";
            else out += "+" + std::to_string(k) + "*";
        }
        out += v;
    }
    if (out.empty()) return std::to_string(c);
    if (c > 0) out += "+" + std::to_string(c);
    if (c < 0) out += std::to_string(c);
    return out;
}

// ----- Pure -----

static Pure mk(PureNode n) { return std::make_shared<const PureNode>(std::move(n)); }

Pure p_true() {
    static Pure t = mk(PureNode{});
    return t;
}

Pure p_false() {
    static Pure f = [] { PureNode n; n.kind = PK::False; return mk(n); }();
    return f;
}

Pure p_cmp(CmpOp op, const LinExpr& l, const LinExpr& r) {
    if (l.is_const() && r.is_const()) {
        int64_t a = l.c, b = r.c;
        bool v = false;
        switch (op) {
            case CmpOp::EQ: v = a == b; break;
            case CmpOp::NE: v = a != b; break;
            case CmpOp::LT: v = a < b; break;
            case CmpOp::LE: v = a <= b; break;
            case CmpOp::GT: v = a > b; break;
            case CmpOp::GE: v = a >= b; break;
        }
        return v ? p_true() : p_false();
    }
    PureNode n;
    n.kind = PK::Cmp;
    n.op = op;
    n.lhs = l;
    n.rhs = r;
    // Symmetric relations between two plain variables are stored with the
    // smaller name on the left so equal facts print identically.
    if ((op == CmpOp::EQ || op == CmpOp::NE) && l.is_var() && r.is_var() &&
        r.as_var() < l.as_var()) {
        std::swap(n.lhs, n.rhs);
    }
    return mk(n);
}

Pure p_eq(const LinExpr& l, const LinExpr& r) { return p_cmp(CmpOp::EQ, l, r); }

Pure p_and(const std::vector<Pure>& ps) {
    std::vector<Pure> kids;
    std::set<std::string> seen;
    auto keep = [&](const Pure& k) {
        if (seen.insert(print_pure(k)).second) kids.push_back(k);
    };
    for (auto& p : ps) {
        if (is_true(p)) continue;
        if (is_false(p)) return p_false();
        if (p->kind == PK::And) {
            for (auto& k : p->kids) keep(k);
        } else {
            keep(p);
        }
    }
    if (kids.empty()) return p_true();
    if (kids.size() == 1) return kids[0];
    PureNode n;
    n.kind = PK::And;
    n.kids = std::move(kids);
    return mk(n);
}

Pure p_and(const Pure& a, const Pure& b) { return p_and(std::vector<Pure>{a, b}); }

Pure p_or(const std::vector<Pure>& ps) {
    std::vector<Pure> kids;
    for (auto& p : ps) {
        if (is_false(p)) continue;
        if (is_true(p)) return p_true();
        if (p->kind == PK::Or) {
            for (auto& k : p->kids) kids.push_back(k);
        } else {
            kids.push_back(p);
        }
    }
    if (kids.empty()) return p_false();
    if (kids.size() == 1) return kids[0];
    PureNode n;
    n.kind = PK::Or;
    n.kids = std::move(kids);
    return mk(n);
}

Pure p_not(const Pure& p) {
    if (is_true(p)) return p_false();
    if (is_false(p)) return p_true();
    if (p->kind == PK::Not) return p->kids[0];
    PureNode n;
    n.kind = PK::Not;
    n.kids = {p};
    return mk(n);
}

static Pure p_quant(PK k, const std::vector<std::string>& vs, const Pure& body) {
    auto fv = free_vars(body);
    std::vector<std::string> used;
    for (auto& v : vs)
        if (fv.count(v) && std::find(used.begin(), used.end(), v) == used.end()) used.push_back(v);
    if (used.empty()) return body;
    PureNode n;
    n.kind = k;
    n.vars = used;
    n.kids = {body};
    return mk(n);
}

Pure p_exists(const std::vector<std::string>& vs, const Pure& body) {
    return p_quant(PK::Exists, vs, body);
}

Pure p_forall(const std::vector<std::string>& vs, const Pure& body) {
    return p_quant(PK::Forall, vs, body);
}

bool is_true(const Pure& p) { return !p || p->kind == PK::True; }
bool is_false(const Pure& p) { return p && p->kind == PK::False; }

std::set<std::string> free_vars(const Pure& p) {
    std::set<std::string> s;
    if (!p) return s;
    switch (p->kind) {
        case PK::True:
        case PK::False:
            break;
        case PK::Cmp:
            for (auto& v : p->lhs.vars()) s.insert(v);
            for (auto& v : p->rhs.vars()) s.insert(v);
            break;
        case PK::Exists:
        case PK::Forall: {
            s = free_vars(p->kids[0]);
            for (auto& v : p->vars) s.erase(v);
            break;
        }
        default:
            for (auto& k : p->kids)
                for (auto& v : free_vars(k)) s.insert(v);
    }
    return s;
}

static std::set<std::string> range_vars(const std::map<std::string, LinExpr>& m) {
    std::set<std::string> s;
    for (auto& [k, e] : m)
        for (auto& v : e.vars()) s.insert(v);
    return s;
}

Pure substitute(const Pure& p, const std::map<std::string, LinExpr>& m) {
    if (!p || m.empty()) return p;
    switch (p->kind) {
        case PK::True:
        case PK::False:
            return p;
        case PK::Cmp:
            return p_cmp(p->op, p->lhs.subst(m), p->rhs.subst(m));
        case PK::And: {
            std::vector<Pure> ks;
            for (auto& k : p->kids) ks.push_back(substitute(k, m));
            return p_and(ks);
        }
        case PK::Or: {
            std::vector<Pure> ks;
            for (auto& k : p->kids) ks.push_back(substitute(k, m));
            return p_or(ks);
        }
        case PK::Not:
            return p_not(substitute(p->kids[0], m));
        case PK::Exists:
        case PK::Forall: {
            auto rv = range_vars(m);
            std::map<std::string, LinExpr> inner = m;
            std::vector<std::string> nvars;
            std::map<std::string, LinExpr> ren;
            for (auto& v : p->vars) {
                inner.erase(v);
                if (rv.count(v)) {
                    std::string w = fresh(v);
                    ren[v] = LinExpr::var(w);
                    nvars.push_back(w);
                } else {
                    nvars.push_back(v);
                }
            }
            Pure body = substitute(p->kids[0], ren);
            body = substitute(body, inner);
            return p->kind == PK::Exists ? p_exists(nvars, body) : p_forall(nvars, body);
        }
    }
    return p;
}

std::vector<Pure> conjuncts(const Pure& p) {
    if (is_true(p)) return {};
    if (p->kind == PK::And) return p->kids;
    return {p};
}

// ----- Heap atoms and formulas -----

ResArg ResArg::of(const Formula& f) {
    ResArg r;
    r.f = std::make_shared<const Formula>(f);
    return r;
}

HeapAtom HeapAtom::points_to(const std::string& root, const std::string& ctor,
                             std::vector<LinExpr> args, Perm p) {
    HeapAtom a;
    a.kind = AK::PointsTo;
    a.root = root;
    a.ctor = ctor;
    a.args = std::move(args);
    a.perm = p;
    return a;
}

HeapAtom HeapAtom::latch_in(const std::string& c, ResArg p) {
    HeapAtom a;
    a.kind = AK::LatchIn;
    a.root = c;
    a.payload = std::move(p);
    return a;
}

HeapAtom HeapAtom::latch_out(const std::string& c, ResArg p) {
    HeapAtom a;
    a.kind = AK::LatchOut;
    a.root = c;
    a.payload = std::move(p);
    return a;
}

HeapAtom HeapAtom::cnt(const std::string& c, const LinExpr& n, Perm p) {
    HeapAtom a;
    a.kind = AK::Cnt;
    a.root = c;
    a.count = n;
    a.perm = p;
    return a;
}

HeapAtom HeapAtom::wait(std::set<Arc> arcs, Perm p) {
    HeapAtom a;
    a.kind = AK::Wait;
    a.arcs = std::move(arcs);
    a.perm = p;
    return a;
}

HeapAtom HeapAtom::thread(const std::string& t, ResArg post) {
    HeapAtom a;
    a.kind = AK::Thread;
    a.root = t;
    a.payload = std::move(post);
    return a;
}

HeapAtom HeapAtom::thread_spec(const std::string& t, ResArg pre, ResArg post) {
    HeapAtom a;
    a.kind = AK::ThreadSpec;
    a.root = t;
    a.payload = std::move(pre);
    a.payload2 = std::move(post);
    return a;
}

HeapAtom HeapAtom::dead(const std::string& t) {
    HeapAtom a;
    a.kind = AK::Dead;
    a.root = t;
    return a;
}

HeapAtom HeapAtom::res_var(const std::string& v) {
    HeapAtom a;
    a.kind = AK::ResVar;
    a.root = v;
    return a;
}

Formula Formula::of_atom(const HeapAtom& a, Pure p) {
    Disjunct d;
    d.heap.push_back(a);
    d.pure = std::move(p);
    return Formula(d);
}

bool Formula::is_emp() const {
    return ds.size() == 1 && ds[0].heap.empty() && is_true(ds[0].pure);
}

static void add_payload_vars(const ResArg& r, std::set<std::string>& s) {
    if (r.f)
        for (auto& v : free_vars(*r.f)) s.insert(v);
}

std::set<std::string> free_vars(const HeapAtom& a) {
    std::set<std::string> s;
    switch (a.kind) {
        case AK::PointsTo:
            s.insert(a.root);
            for (auto& e : a.args)
                for (auto& v : e.vars()) s.insert(v);
            break;
        case AK::LatchIn:
        case AK::LatchOut:
            s.insert(a.root);
            add_payload_vars(a.payload, s);
            break;
        case AK::Cnt:
            s.insert(a.root);
            for (auto& v : a.count.vars()) s.insert(v);
            break;
        case AK::Wait:
            for (auto& [x, y] : a.arcs) {
                s.insert(x);
                s.insert(y);
            }
            break;
        case AK::Thread:
            s.insert(a.root);
            add_payload_vars(a.payload, s);
            break;
        case AK::ThreadSpec:
            s.insert(a.root);
            add_payload_vars(a.payload, s);
            add_payload_vars(a.payload2, s);
            break;
        case AK::Dead:
            s.insert(a.root);
            break;
        case AK::ResVar:
            break;
    }
    return s;
}

std::set<std::string> free_vars(const Disjunct& d) {
    std::set<std::string> s = free_vars(d.pure);
    for (auto& a : d.heap)
        for (auto& v : free_vars(a)) s.insert(v);
    for (auto& v : d.exists) s.erase(v);
    return s;
}

std::set<std::string> free_vars(const Formula& f) {
    std::set<std::string> s;
    for (auto& d : f.ds)
        for (auto& v : free_vars(d)) s.insert(v);
    return s;
}

static void collect_res_vars(const Formula& f, std::set<std::string>& s);

static void collect_res_vars(const ResArg& r, std::set<std::string>& s) {
    if (r.is_var()) {
        if (!r.var.empty()) s.insert(r.var);
    } else {
        collect_res_vars(*r.f, s);
    }
}

static void collect_res_vars(const Formula& f, std::set<std::string>& s) {
    for (auto& d : f.ds)
        for (auto& a : d.heap) {
            if (a.kind == AK::ResVar) s.insert(a.root);
            if (a.is_latch_pred() || a.kind == AK::Thread || a.kind == AK::ThreadSpec)
                collect_res_vars(a.payload, s);
            if (a.kind == AK::ThreadSpec) collect_res_vars(a.payload2, s);
        }
}

std::set<std::string> res_vars(const Formula& f) {
    std::set<std::string> s;
    collect_res_vars(f, s);
    return s;
}

static std::string subst_root(const std::string& r, const std::map<std::string, LinExpr>& m) {
    auto it = m.find(r);
    if (it != m.end() && it->second.is_var()) return it->second.as_var();
    return r;
}

static ResArg subst_payload(const ResArg& r, const std::map<std::string, LinExpr>& m) {
    if (r.is_var()) return r;
    return ResArg::of(substitute(*r.f, m));
}

HeapAtom substitute(const HeapAtom& a, const std::map<std::string, LinExpr>& m) {
    if (m.empty()) return a;
    HeapAtom b = a;
    switch (a.kind) {
        case AK::ResVar:
            break;
        case AK::Wait: {
            b.arcs.clear();
            for (auto& [x, y] : a.arcs) b.arcs.insert({subst_root(x, m), subst_root(y, m)});
            break;
        }
        default:
            b.root = subst_root(a.root, m);
    }
    for (auto& e : b.args) e = e.subst(m);
    b.count = a.count.subst(m);
    b.payload = subst_payload(a.payload, m);
    b.payload2 = subst_payload(a.payload2, m);
    return b;
}

Disjunct substitute(const Disjunct& d, const std::map<std::string, LinExpr>& m) {
    if (m.empty()) return d;
    auto rv = range_vars(m);
    std::map<std::string, LinExpr> inner = m;
    std::map<std::string, LinExpr> ren;
    Disjunct r;
    for (auto& v : d.exists) {
        if (m.count(v) || rv.count(v)) {
            std::string w = fresh(v);
            ren[v] = LinExpr::var(w);
            r.exists.push_back(w);
        } else {
            r.exists.push_back(v);
        }
        inner.erase(v);
    }
    for (auto& a : d.heap) r.heap.push_back(substitute(substitute(a, ren), inner));
    r.pure = substitute(substitute(d.pure, ren), inner);
    return r;
}

Formula substitute(const Formula& f, const std::map<std::string, LinExpr>& m) {
    if (m.empty()) return f;
    Formula r = Formula::false_();
    for (auto& d : f.ds) r.ds.push_back(substitute(d, m));
    return r;
}

HeapAtom substitute_perms(const HeapAtom& a, const std::map<std::string, Perm>& m) {
    HeapAtom b = a;
    if (a.perm.is_var()) {
        auto it = m.find(a.perm.var);
        if (it != m.end()) b.perm = it->second;
    }
    if (a.payload.f) b.payload = ResArg::of(substitute_perms(*a.payload.f, m));
    if (a.payload2.f) b.payload2 = ResArg::of(substitute_perms(*a.payload2.f, m));
    return b;
}

Formula substitute_perms(const Formula& f, const std::map<std::string, Perm>& m) {
    if (m.empty()) return f;
    Formula r = f;
    for (auto& d : r.ds)
        for (auto& a : d.heap) a = substitute_perms(a, m);
    return r;
}

Disjunct open_exists(const Disjunct& d, std::vector<std::string>* fresh_names) {
    if (d.exists.empty()) return d;
    std::map<std::string, LinExpr> ren;
    for (auto& v : d.exists) {
        std::string w = fresh(v);
        ren[v] = LinExpr::var(w);
        if (fresh_names) fresh_names->push_back(w);
    }
    Disjunct r;
    for (auto& a : d.heap) r.heap.push_back(substitute(a, ren));
    r.pure = substitute(d.pure, ren);
    return r;
}

Disjunct star(const Disjunct& a, const Disjunct& b) {
    // Keep the existentials, now with globally fresh names.
    Disjunct r;
    std::vector<std::string> na, nb;
    Disjunct x = open_exists(a, &na);
    Disjunct y = open_exists(b, &nb);
    r.exists = na;
    r.exists.insert(r.exists.end(), nb.begin(), nb.end());
    r.heap = x.heap;
    r.heap.insert(r.heap.end(), y.heap.begin(), y.heap.end());
    r.pure = p_and(x.pure, y.pure);
    return r;
}

Formula star(const Formula& a, const Formula& b) {
    Formula r = Formula::false_();
    for (auto& x : a.ds)
        for (auto& y : b.ds) r.ds.push_back(star(x, y));
    return r;
}

Formula disj(const Formula& a, const Formula& b) {
    Formula r = a;
    r.ds.insert(r.ds.end(), b.ds.begin(), b.ds.end());
    return r;
}

Formula add_pure(const Formula& f, const Pure& p) {
    Formula r = f;
    for (auto& d : r.ds) d.pure = p_and(d.pure, p);
    return r;
}

// ----- Fresh names -----

namespace {
thread_local uint64_t g_counter = 0;
thread_local uint64_t g_res_counter = 0;
}  // namespace

std::string base_name(const std::string& s) {
    auto h = s.find('#');
    return h == std::string::npos ? s : s.substr(0, h);
}

bool is_res_var_name(const std::string& s) {
    return !s.empty() && s[0] >= 'A' && s[0] <= 'Z';
}

std::string fresh(const std::string& prefix) {
    std::string b = base_name(prefix);
    if (b.empty()) b = "v";
    uint64_t n = is_res_var_name(b) ? ++g_res_counter : ++g_counter;
    return b + "#" + std::to_string(n);
}

void reset_fresh(uint64_t start) {
    g_counter = start;
    g_res_counter = start;
}

// ----- Programs -----

const ProcDecl* Program::find_proc(const std::string& n) const {
    for (auto& p : proc_decls)
        if (p.name == n) return &p;
    return nullptr;
}

const DataDecl* Program::find_data(const std::string& n) const {
    for (auto& d : data_decls)
        if (d.name == n) return &d;
    return nullptr;
}

namespace {

void walk(const ExprPtr& e, const std::function<void(const Expr&)>& f) {
    if (!e) return;
    f(*e);
    for (auto& k : e->kids) walk(k, f);
}

}  // namespace

std::vector<Diagnostic> check_wellformed(const Program& p) {
    std::vector<Diagnostic> out;
    std::map<std::string, const ProcDecl*> seen;
    for (auto& pd : p.proc_decls) {
        if (seen.count(pd.name)) {
            out.push_back({"DuplicateProc", "procedure '" + pd.name + "' declared twice", pd.span});
        } else {
            seen[pd.name] = &pd;
        }
    }
    if (!seen.count("main")) out.push_back({"NoMain", "no procedure named main", Span{1, 1}});
    for (auto& pd : p.proc_decls) {
        if (pd.specs.empty())
            out.push_back({"MissingSpec", "procedure '" + pd.name + "' has no specification", pd.span});
        walk(pd.body, [&](const Expr& e) {
            if (e.kind == EK::Call) {
                auto it = seen.find(e.name);
                if (it == seen.end()) {
                    out.push_back({"UndeclaredProc", "call to undeclared procedure '" + e.name + "'", e.span});
                } else if (it->second->params.size() != e.args.size()) {
                    out.push_back({"ArityMismatch",
                                   "'" + e.name + "' expects " + std::to_string(it->second->params.size()) +
                                       " arguments, got " + std::to_string(e.args.size()),
                                   e.span});
                }
            } else if (e.kind == EK::CreateThread) {
                if (!seen.count(e.name))
                    out.push_back({"UndeclaredProc", "thread body '" + e.name + "' is not declared", e.span});
            } else if (e.kind == EK::New) {
                const DataDecl* dd = p.find_data(e.name);
                if (!dd) {
                    out.push_back({"UndeclaredData", "unknown data type '" + e.name + "'", e.span});
                } else if (dd->fields.size() != e.args.size()) {
                    out.push_back({"ArityMismatch", "constructor '" + e.name + "' expects " +
                                                        std::to_string(dd->fields.size()) + " arguments",
                                   e.span});
                }
            }
        });
    }
    return out;
}

static void expr_free_vars(const ExprPtr& e, std::set<std::string>& bound, std::set<std::string>& out) {
    if (!e) return;
    auto use = [&](const std::string& v) {
        if (!v.empty() && !bound.count(v)) out.insert(v);
    };
    auto use_lin = [&](const LinExpr& l) {
        for (auto& v : l.vars()) use(v);
    };
    switch (e->kind) {
        case EK::Decl:
            for (auto& k : e->kids) expr_free_vars(k, bound, out);
            bound.insert(e->name);
            return;
        case EK::Seq: {
            for (auto& k : e->kids) expr_free_vars(k, bound, out);
            return;
        }
        case EK::Par: {
            for (auto& k : e->kids) {
                std::set<std::string> b = bound;
                expr_free_vars(k, b, out);
            }
            return;
        }
        case EK::Assign:
            for (auto& k : e->kids) expr_free_vars(k, bound, out);
            use(e->name);
            return;
        case EK::Call:
        case EK::New:
        case EK::Fork:
            if (e->kind == EK::Fork) use(e->name);
            for (auto& a : e->args) use_lin(a);
            return;
        case EK::CreateThread:
            return;
        case EK::CreateLatch:
            for (auto& a : e->args) use_lin(a);
            return;
        case EK::If:
        case EK::While:
            for (auto& v : free_vars(e->cond)) use(v);
            for (auto& k : e->kids) {
                std::set<std::string> b = bound;
                expr_free_vars(k, b, out);
            }
            return;
        case EK::Atomic:
            for (auto& k : e->kids) {
                std::set<std::string> b = bound;
                expr_free_vars(k, b, out);
            }
            return;
        case EK::FieldWrite:
            use(e->name);
            use_lin(e->term);
            return;
        case EK::FieldRead:
        case EK::CountDown:
        case EK::Await:
        case EK::Join:
        case EK::Destroy:
        case EK::VarRead:
            use(e->name);
            return;
        case EK::Const:
        case EK::Arith:
        case EK::Return:
            use_lin(e->term);
            return;
        case EK::Assert:
        case EK::Skip:
            return;
    }
}

std::set<std::string> free_vars(const Expr& e) {
    std::set<std::string> bound, out;
    auto p = std::make_shared<const Expr>(e);
    expr_free_vars(p, bound, out);
    return out;
}

}  // namespace latchproof
