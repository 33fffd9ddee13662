#include "latchproof/solver.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <mutex>
#include <unordered_map>

#include "latchproof/parser.hpp"

namespace latchproof {

namespace {

std::mutex g_cfg_mu;
SolverConfig g_cfg;

struct ResourceLimit {};
struct Overflow {};

constexpr int64_t kLim = int64_t(1) << 60;

int64_t chk(__int128 v) {
    if (v > kLim || v < -kLim) throw Overflow{};
    return static_cast<int64_t>(v);
}

int64_t floor_div(int64_t a, int64_t b) {
    int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

int64_t gcd(int64_t a, int64_t b) {
    a = a < 0 ? -a : a;
    b = b < 0 ? -b : b;
    while (b) {
        int64_t t = a % b;
        a = b;
        b = t;
    }
    return a;
}

// a . x + c  (= 0 when eq, >= 0 otherwise)
struct Cons {
    std::vector<int64_t> a;
    int64_t c = 0;
    bool eq = false;
};

struct Budget {
    int64_t left;
    void step() {
        if (--left < 0) throw ResourceLimit{};
    }
};

void widen(std::vector<Cons>& cs, size_t n) {
    for (auto& c : cs)
        if (c.a.size() < n) c.a.resize(n, 0);
}

bool normalize(std::vector<Cons>& cs) {
    std::vector<Cons> out;
    out.reserve(cs.size());
    for (auto& k : cs) {
        int64_t g = 0;
        for (auto v : k.a) g = gcd(g, v);
        if (g == 0) {
            if (k.eq ? k.c != 0 : k.c < 0) return false;
            continue;
        }
        Cons n = k;
        if (k.eq) {
            if (k.c % g != 0) return false;
            for (auto& v : n.a) v /= g;
            n.c = k.c / g;
        } else {
            for (auto& v : n.a) v /= g;
            n.c = floor_div(k.c, g);
        }
        out.push_back(std::move(n));
    }
    // Keep only the tightest of parallel inequalities and catch direct
    // contradictions between opposite ones.
    std::map<std::vector<int64_t>, int64_t> tight;
    std::vector<Cons> res;
    for (auto& k : out) {
        if (k.eq) {
            res.push_back(k);
            continue;
        }
        auto it = tight.find(k.a);
        if (it == tight.end() || k.c < it->second) tight[k.a] = k.c;
    }
    for (auto& [a, c] : tight) {
        std::vector<int64_t> neg(a.size());
        for (size_t i = 0; i < a.size(); ++i) neg[i] = -a[i];
        auto it = tight.find(neg);
        if (it != tight.end()) {
            if (chk(static_cast<__int128>(c) + it->second) < 0) return false;
        }
        res.push_back(Cons{a, c, false});
    }
    cs = std::move(res);
    return true;
}

// Substitutes x_k := ex . x + exc into every constraint.
void substitute_var(std::vector<Cons>& cs, size_t k, const std::vector<int64_t>& ex, int64_t exc) {
    for (auto& c : cs) {
        int64_t b = c.a[k];
        if (b == 0) continue;
        c.a[k] = 0;
        for (size_t i = 0; i < ex.size(); ++i)
            if (ex[i]) c.a[i] = chk(static_cast<__int128>(c.a[i]) + static_cast<__int128>(b) * ex[i]);
        c.c = chk(static_cast<__int128>(c.c) + static_cast<__int128>(b) * exc);
    }
}

std::vector<Cons> fm(const std::vector<Cons>& cs, size_t x, bool dark) {
    std::vector<Cons> lo, up, rest;
    for (auto& c : cs) {
        if (c.a[x] > 0) lo.push_back(c);
        else if (c.a[x] < 0) up.push_back(c);
        else rest.push_back(c);
    }
    for (auto& l : lo)
        for (auto& u : up) {
            int64_t a = l.a[x], b = -u.a[x];
            Cons n;
            n.a.resize(l.a.size());
            for (size_t i = 0; i < l.a.size(); ++i)
                n.a[i] = chk(static_cast<__int128>(b) * l.a[i] + static_cast<__int128>(a) * u.a[i]);
            n.a[x] = 0;
            __int128 cc = static_cast<__int128>(b) * l.c + static_cast<__int128>(a) * u.c;
            if (dark) cc -= static_cast<__int128>(a - 1) * (b - 1);
            n.c = chk(cc);
            rest.push_back(n);
        }
    return rest;
}

SatStatus omega(std::vector<Cons> cs, size_t nvars, Budget& bud) {
    widen(cs, nvars);
    while (true) {
        bud.step();
        if (!normalize(cs)) return SatStatus::Unsat;
        int ei = -1;
        for (size_t i = 0; i < cs.size(); ++i)
            if (cs[i].eq) {
                ei = static_cast<int>(i);
                break;
            }
        if (ei >= 0) {
            Cons e = cs[ei];
            size_t k = 0;
            int64_t best = 0;
            for (size_t i = 0; i < e.a.size(); ++i) {
                int64_t v = e.a[i] < 0 ? -e.a[i] : e.a[i];
                if (v && (best == 0 || v < best)) {
                    best = v;
                    k = i;
                }
            }
            if (best == 1) {
                int64_t s = e.a[k];
                std::vector<int64_t> ex(e.a.size());
                for (size_t i = 0; i < ex.size(); ++i) ex[i] = (i == k) ? 0 : chk(-static_cast<__int128>(s) * e.a[i]);
                int64_t exc = chk(-static_cast<__int128>(s) * e.c);
                cs.erase(cs.begin() + ei);
                substitute_var(cs, k, ex, exc);
            } else {
                int64_t m = best + 1;
                auto mh = [m](int64_t v) { return v - m * floor_div(2 * v + m, 2 * m); };
                size_t sv = nvars++;
                widen(cs, nvars);
                e.a.resize(nvars, 0);
                int64_t sg = e.a[k] > 0 ? 1 : -1;
                std::vector<int64_t> ex(nvars, 0);
                for (size_t i = 0; i < nvars; ++i)
                    if (i != k && i != sv) ex[i] = sg * mh(e.a[i]);
                ex[sv] = -sg * m;
                int64_t exc = sg * mh(e.c);
                substitute_var(cs, k, ex, exc);
            }
            continue;
        }
        std::vector<int> lo(nvars, 0), up(nvars, 0);
        std::vector<bool> exact(nvars, true);
        std::vector<int64_t> maxlo(nvars, 0), maxup(nvars, 0);
        bool any = false;
        for (auto& c : cs)
            for (size_t i = 0; i < nvars; ++i) {
                if (c.a[i] > 0) {
                    ++lo[i];
                    maxlo[i] = std::max(maxlo[i], c.a[i]);
                    any = true;
                } else if (c.a[i] < 0) {
                    ++up[i];
                    maxup[i] = std::max(maxup[i], -c.a[i]);
                    any = true;
                }
            }
        if (!any) return SatStatus::Sat;
        bool dropped = false;
        for (size_t i = 0; i < nvars; ++i) {
            if ((lo[i] == 0) != (up[i] == 0)) {
                cs.erase(std::remove_if(cs.begin(), cs.end(), [i](const Cons& c) { return c.a[i] != 0; }), cs.end());
                dropped = true;
            }
        }
        if (dropped) continue;
        int pick = -1;
        long best = -1;
        bool pick_exact = false;
        for (size_t i = 0; i < nvars; ++i) {
            if (lo[i] == 0) continue;
            bool ex = maxlo[i] == 1 || maxup[i] == 1;
            long cost = static_cast<long>(lo[i]) * up[i];
            if (pick < 0 || (ex && !pick_exact) || (ex == pick_exact && cost < best)) {
                pick = static_cast<int>(i);
                best = cost;
                pick_exact = ex;
            }
        }
        size_t x = static_cast<size_t>(pick);
        if (pick_exact) {
            cs = fm(cs, x, false);
            continue;
        }
        bool unknown = false;
        SatStatus real = omega(fm(cs, x, false), nvars, bud);
        if (real == SatStatus::Unsat) return SatStatus::Unsat;
        if (real == SatStatus::Unknown) unknown = true;
        SatStatus dark = omega(fm(cs, x, true), nvars, bud);
        if (dark == SatStatus::Sat) return SatStatus::Sat;
        if (dark == SatStatus::Unknown) unknown = true;
        int64_t bmax = maxup[x];
        for (auto& l : cs) {
            if (l.a[x] <= 0) continue;
            int64_t a = l.a[x];
            int64_t jmax = floor_div(chk(static_cast<__int128>(a) * bmax - a - bmax), bmax);
            for (int64_t j = 0; j <= jmax; ++j) {
                std::vector<Cons> c2 = cs;
                Cons e = l;
                e.eq = true;
                e.c = chk(static_cast<__int128>(e.c) - j);
                c2.push_back(e);
                SatStatus r = omega(c2, nvars, bud);
                if (r == SatStatus::Sat) return SatStatus::Sat;
                if (r == SatStatus::Unknown) unknown = true;
            }
        }
        return unknown ? SatStatus::Unknown : SatStatus::Unsat;
    }
}

// Rational bounds of x_i over the real relaxation.
void real_bounds(std::vector<Cons> cs, size_t nvars, size_t xi, std::optional<std::pair<int64_t, int64_t>>& lo,
                 std::optional<std::pair<int64_t, int64_t>>& hi, Budget& bud) {
    widen(cs, nvars);
    std::vector<Cons> ineq;
    for (auto& c : cs) {
        if (c.eq) {
            Cons a = c, b = c;
            a.eq = b.eq = false;
            for (auto& v : b.a) v = -v;
            b.c = -b.c;
            ineq.push_back(a);
            ineq.push_back(b);
        } else {
            ineq.push_back(c);
        }
    }
    for (size_t j = 0; j < nvars; ++j) {
        if (j == xi) continue;
        bud.step();
        ineq = fm(ineq, j, false);
        if (ineq.size() > 5000) throw ResourceLimit{};
    }
    // a x + c >= 0
    for (auto& c : ineq) {
        int64_t a = c.a[xi];
        if (a > 0) {
            // x >= -c/a
            std::pair<int64_t, int64_t> b{-c.c, a};
            if (!lo || static_cast<__int128>(b.first) * lo->second > static_cast<__int128>(lo->first) * b.second) lo = b;
        } else if (a < 0) {
            std::pair<int64_t, int64_t> b{c.c, -a};
            if (!hi || static_cast<__int128>(b.first) * hi->second < static_cast<__int128>(hi->first) * b.second) hi = b;
        }
    }
}

int64_t ceil_div(int64_t a, int64_t b) { return -floor_div(-a, b); }

std::optional<std::vector<int64_t>> extract_model(std::vector<Cons> cs, size_t nvars, size_t nnamed, Budget& bud) {
    std::vector<int64_t> vals(nnamed, 0);
    for (size_t i = 0; i < nnamed; ++i) {
        std::optional<std::pair<int64_t, int64_t>> lo, hi;
        real_bounds(cs, nvars, i, lo, hi, bud);
        std::optional<int64_t> L, H;
        if (lo) L = ceil_div(lo->first, lo->second);
        if (hi) H = floor_div(hi->first, hi->second);
        int64_t center = 0;
        if (L && center < *L) center = *L;
        if (H && center > *H) center = *H;
        bool found = false;
        for (int64_t d = 0; d < 200000 && !found; ++d) {
            for (int sgn : {1, -1}) {
                if (d == 0 && sgn == -1) continue;
                int64_t v = center + sgn * d;
                if ((L && v < *L) || (H && v > *H)) continue;
                std::vector<Cons> c2 = cs;
                Cons e;
                e.a.assign(nvars, 0);
                e.a[i] = 1;
                e.c = -v;
                e.eq = true;
                c2.push_back(e);
                if (omega(c2, nvars, bud) == SatStatus::Sat) {
                    vals[i] = v;
                    cs = std::move(c2);
                    found = true;
                    break;
                }
            }
            if (L && H && center - d < *L && center + d > *H) break;
        }
        if (!found) return std::nullopt;
    }
    return vals;
}

// ----- formula layer -----

struct Ctx {
    std::map<std::string, size_t> idx;
    std::vector<std::string> names;
    Budget* bud;
    uint64_t internal = 0;

    size_t var(const std::string& n) {
        auto it = idx.find(n);
        if (it != idx.end()) return it->second;
        idx[n] = names.size();
        names.push_back(n);
        return names.size() - 1;
    }
    std::string internal_name(const std::string& base) { return "%" + base + std::to_string(++internal); }
};

Pure nnf(const Pure& p, bool neg) {
    switch (p->kind) {
        case PK::True: return neg ? p_false() : p_true();
        case PK::False: return neg ? p_true() : p_false();
        case PK::Cmp: {
            if (!neg) return p;
            CmpOp op = p->op;
            switch (op) {
                case CmpOp::EQ: op = CmpOp::NE; break;
                case CmpOp::NE: op = CmpOp::EQ; break;
                case CmpOp::LT: op = CmpOp::GE; break;
                case CmpOp::LE: op = CmpOp::GT; break;
                case CmpOp::GT: op = CmpOp::LE; break;
                case CmpOp::GE: op = CmpOp::LT; break;
            }
            return p_cmp(op, p->lhs, p->rhs);
        }
        case PK::And:
        case PK::Or: {
            std::vector<Pure> ks;
            for (auto& k : p->kids) ks.push_back(nnf(k, neg));
            bool conj = (p->kind == PK::And) != neg;
            return conj ? p_and(ks) : p_or(ks);
        }
        case PK::Not: return nnf(p->kids[0], !neg);
        case PK::Exists:
        case PK::Forall: {
            bool ex = (p->kind == PK::Exists) != neg;
            Pure b = nnf(p->kids[0], neg);
            return ex ? p_exists(p->vars, b) : p_forall(p->vars, b);
        }
    }
    return p;
}

Cons to_cons(Ctx& ctx, const LinExpr& e, bool eq) {
    Cons c;
    for (auto& [v, k] : e.coef) {
        size_t i = ctx.var(v);
        if (c.a.size() <= i) c.a.resize(i + 1, 0);
        c.a[i] += k;
    }
    c.c = e.c;
    c.eq = eq;
    return c;
}

bool has_quantifier(const Pure& p) {
    if (p->kind == PK::Exists || p->kind == PK::Forall) return true;
    for (auto& k : p->kids)
        if (has_quantifier(k)) return true;
    return false;
}

Pure eliminate_impl(const Pure& p, const std::set<std::string>& vars, Budget& bud);

// Enumerates the conjunctions of the DNF of todo. fn returns false to stop.
// Returns false when enumeration was cut short by fn.
bool enumerate(Ctx& ctx, std::vector<Pure> todo, std::vector<Cons> acc,
               const std::function<bool(std::vector<Cons>&)>& fn) {
    while (!todo.empty()) {
        ctx.bud->step();
        Pure p = todo.back();
        todo.pop_back();
        switch (p->kind) {
            case PK::True: break;
            case PK::False: return true;
            case PK::Cmp: {
                LinExpr d = p->lhs - p->rhs;
                switch (p->op) {
                    case CmpOp::EQ: acc.push_back(to_cons(ctx, d, true)); break;
                    case CmpOp::GE: acc.push_back(to_cons(ctx, d, false)); break;
                    case CmpOp::GT: acc.push_back(to_cons(ctx, d - LinExpr(1), false)); break;
                    case CmpOp::LE: acc.push_back(to_cons(ctx, -d, false)); break;
                    case CmpOp::LT: acc.push_back(to_cons(ctx, -d - LinExpr(1), false)); break;
                    case CmpOp::NE: {
                        auto t1 = todo, t2 = todo;
                        t1.push_back(p_cmp(CmpOp::LT, p->lhs, p->rhs));
                        t2.push_back(p_cmp(CmpOp::GT, p->lhs, p->rhs));
                        if (!enumerate(ctx, t1, acc, fn)) return false;
                        return enumerate(ctx, t2, acc, fn);
                    }
                }
                break;
            }
            case PK::And:
                for (auto& k : p->kids) todo.push_back(k);
                break;
            case PK::Or: {
                for (auto& k : p->kids) {
                    auto t = todo;
                    t.push_back(k);
                    if (!enumerate(ctx, t, acc, fn)) return false;
                }
                return true;
            }
            case PK::Exists: {
                std::map<std::string, LinExpr> ren;
                for (auto& v : p->vars) ren[v] = LinExpr::var(ctx.internal_name(base_name(v)));
                todo.push_back(substitute(p->kids[0], ren));
                break;
            }
            case PK::Forall: {
                std::set<std::string> vs(p->vars.begin(), p->vars.end());
                Pure inner = eliminate_impl(nnf(p->kids[0], true), vs, *ctx.bud);
                if (has_quantifier(inner)) throw ResourceLimit{};
                todo.push_back(nnf(inner, true));
                break;
            }
            case PK::Not:
                todo.push_back(nnf(p->kids[0], true));
                break;
        }
    }
    return fn(acc);
}

Pure cons_to_pure(const Cons& c, const std::vector<std::string>& names) {
    LinExpr e;
    for (size_t i = 0; i < c.a.size(); ++i)
        if (c.a[i]) e = e + LinExpr::var(names[i]).scale(c.a[i]);
    if (c.eq) {
        if (!e.coef.empty() && e.coef.begin()->second < 0) return p_eq(-e, LinExpr(c.c));
        return p_eq(e, LinExpr(-c.c));
    }
    bool allneg = true;
    for (auto& kv : e.coef)
        if (kv.second > 0) allneg = false;
    if (allneg) return p_cmp(CmpOp::LE, -e, LinExpr(c.c));
    return p_cmp(CmpOp::GE, e, LinExpr(-c.c));
}

// Projects x out exactly when possible. Returns false if x must stay bound.
bool project(std::vector<Cons>& cs, size_t x, bool& unsat) {
    if (!normalize(cs)) {
        unsat = true;
        return true;
    }
    int best = -1;
    for (size_t i = 0; i < cs.size(); ++i)
        if (cs[i].eq && (cs[i].a[x] == 1 || cs[i].a[x] == -1)) {
            best = static_cast<int>(i);
            break;
        }
    if (best >= 0) {
        Cons e = cs[best];
        int64_t s = e.a[x];
        std::vector<int64_t> ex(e.a.size());
        for (size_t i = 0; i < ex.size(); ++i) ex[i] = (i == x) ? 0 : chk(-static_cast<__int128>(s) * e.a[i]);
        int64_t exc = chk(-static_cast<__int128>(s) * e.c);
        cs.erase(cs.begin() + best);
        substitute_var(cs, x, ex, exc);
        return true;
    }
    for (auto& c : cs)
        if (c.eq && c.a[x] != 0) return false;
    int64_t maxlo = 0, maxup = 0;
    for (auto& c : cs) {
        if (c.a[x] > 0) maxlo = std::max(maxlo, c.a[x]);
        if (c.a[x] < 0) maxup = std::max(maxup, -c.a[x]);
    }
    if (maxlo == 0 || maxup == 0) {
        cs.erase(std::remove_if(cs.begin(), cs.end(), [x](const Cons& c) { return c.a[x] != 0; }), cs.end());
        return true;
    }
    if (maxlo == 1 || maxup == 1) {
        cs = fm(cs, x, false);
        return true;
    }
    return false;
}

Pure eliminate_impl(const Pure& p, const std::set<std::string>& vars, Budget& bud) {
    Ctx ctx;
    ctx.bud = &bud;
    std::vector<Pure> leaves;
    enumerate(ctx, {nnf(p, false)}, {}, [&](std::vector<Cons>& acc) {
        std::vector<Cons> cs = acc;
        size_t n = ctx.names.size();
        widen(cs, n);
        if (omega(cs, n, bud) == SatStatus::Unsat) return true;
        std::vector<size_t> todo;
        for (size_t i = 0; i < n; ++i)
            if (vars.count(ctx.names[i]) || ctx.names[i][0] == '%') todo.push_back(i);
        bool progress = true, unsat = false;
        while (progress && !todo.empty() && !unsat) {
            progress = false;
            for (size_t k = 0; k < todo.size();) {
                if (project(cs, todo[k], unsat)) {
                    todo.erase(todo.begin() + k);
                    progress = true;
                } else {
                    ++k;
                }
                if (unsat) break;
            }
        }
        if (unsat || !normalize(cs)) return true;
        std::vector<std::string> names = ctx.names;
        std::vector<std::string> residual;
        for (size_t i : todo) {
            bool used = false;
            for (auto& c : cs)
                if (c.a[i]) used = true;
            if (!used) continue;
            std::string fn = fresh(base_name(ctx.names[i][0] == '%' ? "e" : ctx.names[i]));
            names[i] = fn;
            residual.push_back(fn);
        }
        std::vector<Pure> parts;
        for (auto& c : cs) parts.push_back(cons_to_pure(c, names));
        leaves.push_back(p_exists(residual, p_and(parts)));
        return true;
    });
    return p_or(leaves);
}

SolverResult solve(const Pure& p, bool want_model, int64_t cap) {
    Budget bud{cap};
    Ctx ctx;
    ctx.bud = &bud;
    SolverResult res;
    res.status = SatStatus::Unsat;
    auto named = free_vars(p);
    for (auto& v : named) ctx.var(v);
    size_t nnamed = ctx.names.size();
    try {
        enumerate(ctx, {nnf(p, false)}, {}, [&](std::vector<Cons>& acc) {
            size_t n = ctx.names.size();
            SatStatus s = omega(acc, n, bud);
            if (s == SatStatus::Unknown) {
                res.status = SatStatus::Unknown;
                return true;
            }
            if (s == SatStatus::Unsat) return true;
            if (want_model) {
                std::vector<Cons> cs = acc;
                widen(cs, n);
                auto m = extract_model(cs, n, nnamed, bud);
                if (!m) {
                    res.status = SatStatus::Unknown;
                    return true;
                }
                std::map<std::string, int64_t> model;
                for (size_t i = 0; i < nnamed; ++i) model[ctx.names[i]] = (*m)[i];
                res.model = model;
            }
            res.status = SatStatus::Sat;
            return false;
        });
    } catch (const ResourceLimit&) {
        if (res.status != SatStatus::Sat) res.status = SatStatus::Unknown;
    } catch (const Overflow&) {
        if (res.status != SatStatus::Sat) res.status = SatStatus::Unknown;
    }
    return res;
}

thread_local std::unordered_map<std::string, SolverResult> g_cache;

}  // namespace

void set_solver_config(const SolverConfig& cfg) {
    std::lock_guard<std::mutex> lk(g_cfg_mu);
    g_cfg = cfg;
}

SolverConfig solver_config() {
    std::lock_guard<std::mutex> lk(g_cfg_mu);
    return g_cfg;
}

SolverResult is_sat(const Pure& p, bool want_model) {
    SolverConfig cfg = solver_config();
    std::string key = (want_model ? "m:" : "s:") + print_pure(p);
    auto it = g_cache.find(key);
    if (it != g_cache.end()) return it->second;
    SolverResult r;
    if (!cfg.external_path.empty() && !want_model) {
        r.status = external_check(p, cfg.external_path);
    } else {
        r = solve(p, want_model, cfg.iteration_cap);
    }
    if (g_cache.size() > 200000) g_cache.clear();
    g_cache[key] = r;
    return r;
}

SatStatus implies_status(const Pure& a, const Pure& b) {
    if (is_true(b) || is_false(a)) return SatStatus::Sat;
    SolverResult r = is_sat(p_and(a, p_not(b)));
    if (r.status == SatStatus::Unsat) return SatStatus::Sat;
    if (r.status == SatStatus::Sat) return SatStatus::Unsat;
    return SatStatus::Unknown;
}

bool implies(const Pure& a, const Pure& b) { return implies_status(a, b) == SatStatus::Sat; }

Pure eliminate(const Pure& p, const std::set<std::string>& vars) {
    Budget bud{solver_config().iteration_cap};
    try {
        return eliminate_impl(p, vars, bud);
    } catch (const ResourceLimit&) {
    } catch (const Overflow&) {
    }
    std::vector<std::string> vs(vars.begin(), vars.end());
    return p_exists(vs, p);
}

bool evaluate(const Pure& p, const std::map<std::string, int64_t>& m) {
    auto val = [&](const LinExpr& e) {
        __int128 s = e.c;
        for (auto& [v, k] : e.coef) {
            auto it = m.find(v);
            s += static_cast<__int128>(k) * (it == m.end() ? 0 : it->second);
        }
        return s;
    };
    switch (p->kind) {
        case PK::True: return true;
        case PK::False: return false;
        case PK::Cmp: {
            auto l = val(p->lhs), r = val(p->rhs);
            switch (p->op) {
                case CmpOp::EQ: return l == r;
                case CmpOp::NE: return l != r;
                case CmpOp::LT: return l < r;
                case CmpOp::LE: return l <= r;
                case CmpOp::GT: return l > r;
                case CmpOp::GE: return l >= r;
            }
            return false;
        }
        case PK::And:
            for (auto& k : p->kids)
                if (!evaluate(k, m)) return false;
            return true;
        case PK::Or:
            for (auto& k : p->kids)
                if (evaluate(k, m)) return true;
            return false;
        case PK::Not: return !evaluate(p->kids[0], m);
        default: throw std::invalid_argument("evaluate: quantified formula");
    }
}

// ----- SMT-LIB -----

namespace {

std::string smt_name(const std::string& v) {
    for (char c : v)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return "|" + v + "|";
    return v;
}

std::string smt_int(int64_t k) { return k < 0 ? "(- " + std::to_string(-k) + ")" : std::to_string(k); }

std::string smt_term(const LinExpr& e) {
    std::vector<std::string> parts;
    for (auto& [v, k] : e.coef) parts.push_back(k == 1 ? smt_name(v) : "(* " + smt_int(k) + " " + smt_name(v) + ")");
    if (e.c != 0 || parts.empty()) parts.push_back(smt_int(e.c));
    if (parts.size() == 1) return parts[0];
    std::string s = "(+";
    for (auto& p : parts) s += " " + p;
    return s + ")";
}

std::string smt_pure(const Pure& p) {
    switch (p->kind) {
        case PK::True: return "true";
        case PK::False: return "false";
        case PK::Cmp: {
            std::string l = smt_term(p->lhs), r = smt_term(p->rhs);
            switch (p->op) {
                case CmpOp::EQ: return "(= " + l + " " + r + ")";
                case CmpOp::NE: return "(not (= " + l + " " + r + "))";
                case CmpOp::LT: return "(< " + l + " " + r + ")";
                case CmpOp::LE: return "(<= " + l + " " + r + ")";
                case CmpOp::GT: return "(> " + l + " " + r + ")";
                case CmpOp::GE: return "(>= " + l + " " + r + ")";
            }
            return "true";
        }
        case PK::And:
        case PK::Or: {
            std::string s = p->kind == PK::And ? "(and" : "(or";
            for (auto& k : p->kids) s += " " + smt_pure(k);
            return s + ")";
        }
        case PK::Not: return "(not " + smt_pure(p->kids[0]) + ")";
        case PK::Exists:
        case PK::Forall: {
            std::string s = p->kind == PK::Exists ? "(exists (" : "(forall (";
            for (auto& v : p->vars) s += "(" + smt_name(v) + " Int)";
            return s + ") " + smt_pure(p->kids[0]) + ")";
        }
    }
    return "true";
}

}  // namespace

std::string to_smtlib(const Pure& p) {
    std::string s = "(set-logic ALL)\n";
    for (auto& v : free_vars(p)) s += "(declare-fun " + smt_name(v) + " () Int)\n";
    s += "(assert " + smt_pure(p) + ")\n(check-sat)\n";
    return s;
}

SatStatus external_check(const Pure& p, const std::string& path) {
    char tmpl[] = "/tmp/latchproof-XXXXXX";
    int fd = mkstemp(tmpl);
    if (fd < 0) return SatStatus::Unknown;
    std::string text = to_smtlib(p);
    FILE* f = fdopen(fd, "w");
    if (!f) return SatStatus::Unknown;
    fwrite(text.data(), 1, text.size(), f);
    fclose(f);
    std::string cmd = "'" + path + "' '" + std::string(tmpl) + "' 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    SatStatus st = SatStatus::Unknown;
    if (pipe) {
        char buf[256];
        if (fgets(buf, sizeof buf, pipe)) {
            std::string line(buf);
            if (line.rfind("unsat", 0) == 0) st = SatStatus::Unsat;
            else if (line.rfind("sat", 0) == 0) st = SatStatus::Sat;
        }
        pclose(pipe);
    }
    std::remove(tmpl);
    return st;
}

}  // namespace latchproof
