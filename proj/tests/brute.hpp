#pragma once

// Brute-force reference implementations shared by the unit tests and the
// acceptance binary. None of them call into the solver, the wait-for module
// or the entailment engine.

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "latchproof/ast.hpp"
#include "latchproof/parser.hpp"

namespace brute {

using namespace latchproof;

inline std::string read_corpus(const std::string& name) {
    std::ifstream in(std::string(LATCHPROOF_CORPUS_DIR) + "/" + name);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline int64_t eval_term(const LinExpr& t, const std::map<std::string, int64_t>& m) {
    int64_t v = t.c;
    for (auto& [x, k] : t.coef) v += k * m.at(x);
    return v;
}

// Quantifier-free evaluation under a total assignment.
inline bool eval_pure(const Pure& p, const std::map<std::string, int64_t>& m) {
    switch (p->kind) {
        case PK::True: return true;
        case PK::False: return false;
        case PK::Cmp: {
            int64_t a = eval_term(p->lhs, m), b = eval_term(p->rhs, m);
            switch (p->op) {
                case CmpOp::EQ: return a == b;
                case CmpOp::NE: return a != b;
                case CmpOp::LT: return a < b;
                case CmpOp::LE: return a <= b;
                case CmpOp::GT: return a > b;
                case CmpOp::GE: return a >= b;
            }
            return false;
        }
        case PK::And:
            for (auto& k : p->kids)
                if (!eval_pure(k, m)) return false;
            return true;
        case PK::Or:
            for (auto& k : p->kids)
                if (eval_pure(k, m)) return true;
            return false;
        case PK::Not: return !eval_pure(p->kids[0], m);
        default: throw std::logic_error("quantifier in brute-force evaluation");
    }
}

// Searches [lo, hi]^vars for a model.
inline std::optional<std::map<std::string, int64_t>> grid_model(const Pure& p, const std::vector<std::string>& vars,
                                                                int64_t lo, int64_t hi) {
    std::map<std::string, int64_t> m;
    std::function<bool(size_t)> go = [&](size_t i) {
        if (i == vars.size()) return eval_pure(p, m);
        for (int64_t v = lo; v <= hi; ++v) {
            m[vars[i]] = v;
            if (go(i + 1)) return true;
        }
        return false;
    };
    if (go(0)) return m;
    return std::nullopt;
}

// Random linear formula over the given variables with coefficients in
// [-3, 3] and constants in [-5, 5].
inline Pure random_pure(std::mt19937& rng, const std::vector<std::string>& vars, int depth = 2) {
    std::uniform_int_distribution<int> coin(0, 9);
    if (depth == 0 || coin(rng) < 4) {
        std::uniform_int_distribution<int> k(-3, 3), c(-5, 5), op(0, 5);
        LinExpr l(c(rng));
        for (auto& v : vars) {
            int64_t a = k(rng);
            if (a != 0 && coin(rng) < 6) l = l + LinExpr::var(v).scale(a);
        }
        return p_cmp(static_cast<CmpOp>(op(rng)), l, LinExpr(0));
    }
    int shape = coin(rng);
    if (shape < 5) return p_and(random_pure(rng, vars, depth - 1), random_pure(rng, vars, depth - 1));
    if (shape < 8) return p_or({random_pure(rng, vars, depth - 1), random_pure(rng, vars, depth - 1)});
    return p_not(random_pure(rng, vars, depth - 1));
}

// Cycle check by transitive closure (Floyd-Warshall), unrelated to the DFS
// colouring used by the wait-for module.
inline bool closure_cyclic(const std::set<std::pair<std::string, std::string>>& arcs) {
    std::vector<std::string> nodes;
    for (auto& [a, b] : arcs) {
        nodes.push_back(a);
        nodes.push_back(b);
    }
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    size_t n = nodes.size();
    auto idx = [&](const std::string& s) {
        return static_cast<size_t>(std::lower_bound(nodes.begin(), nodes.end(), s) - nodes.begin());
    };
    std::vector<std::vector<bool>> r(n, std::vector<bool>(n, false));
    for (auto& [a, b] : arcs) r[idx(a)][idx(b)] = true;
    for (size_t k = 0; k < n; ++k)
        for (size_t i = 0; i < n; ++i)
            for (size_t j = 0; j < n; ++j)
                if (r[i][k] && r[k][j]) r[i][j] = true;
    for (size_t i = 0; i < n; ++i)
        if (r[i][i]) return true;
    return false;
}

// ----- concrete heaps for points-to formulas over cell(v) -----

// Root name -> stored value. Roots denote pairwise distinct locations.
using Heap = std::map<std::string, int64_t>;

// Whether a disjunct of cell atoms (full permission) describes the heap h
// exactly. Variables missing from env range over [lo, hi].
inline bool disjunct_holds(const Disjunct& d, const Heap& h, std::map<std::string, int64_t> env, int64_t lo,
                           int64_t hi) {
    std::set<std::string> roots;
    for (auto& a : d.heap) {
        if (a.kind != AK::PointsTo || a.args.size() != 1) return false;
        if (!roots.insert(a.root).second) return false;
    }
    if (roots.size() != h.size()) return false;
    for (auto& r : roots)
        if (!h.count(r)) return false;
    std::set<std::string> all = free_vars(d);
    for (auto& v : d.exists) all.insert(v);
    std::vector<std::string> open;
    for (auto& v : all)
        if (!env.count(v) && !h.count(v)) open.push_back(v);
    std::function<bool(size_t)> go = [&](size_t i) {
        if (i == open.size()) {
            for (auto& a : d.heap)
                if (eval_term(a.args[0], env) != h.at(a.root)) return false;
            return eval_pure(d.pure, env);
        }
        for (int64_t v = lo; v <= hi; ++v) {
            env[open[i]] = v;
            if (go(i + 1)) return true;
        }
        env.erase(open[i]);
        return false;
    };
    return go(0);
}

inline bool formula_holds(const Formula& f, const Heap& h, const std::map<std::string, int64_t>& env, int64_t lo,
                          int64_t hi) {
    for (auto& d : f.ds)
        if (disjunct_holds(d, h, env, lo, hi)) return true;
    return false;
}

}  // namespace brute

namespace brute {

// Random single-disjunct latch state over latches a and b, in concrete
// syntax. Not an oracle; shared input generator for the lemma properties.
inline std::string random_latch_state(std::mt19937& rng) {
    static const char* latches[] = {"a", "b"};
    static const char* perms[] = {"1", "1/2", "1/3", "1/4", "2/3"};
    std::uniform_int_distribution<int> n_atoms(1, 6), kind(0, 5), lat(0, 1), cnt(-1, 2), pm(0, 4), val(0, 3);
    std::vector<std::string> atoms;
    int k = n_atoms(rng);
    for (int i = 0; i < k; ++i) {
        std::string l = latches[lat(rng)];
        switch (kind(rng)) {
            case 0:
            case 1:
                atoms.push_back("CNT(" + l + "," + std::to_string(cnt(rng)) + ")@" + perms[pm(rng)]);
                break;
            case 2: atoms.push_back("LatchIn(" + l + ", p" + std::to_string(i) + "::cell(" + std::to_string(val(rng)) + "))"); break;
            case 3: atoms.push_back("LatchOut(" + l + ", q" + std::to_string(i) + "::cell(" + std::to_string(val(rng)) + "))"); break;
            case 4: {
                std::string arcs;
                if (val(rng) % 2) arcs = std::string(latches[lat(rng)]) + "->" + latches[lat(rng)];
                atoms.push_back("WAIT{" + arcs + "}@" + perms[pm(rng)]);
                break;
            }
            default: atoms.push_back("h" + std::to_string(i) + "::cell(" + std::to_string(val(rng)) + ")");
        }
    }
    std::string s;
    for (auto& a : atoms) s += (s.empty() ? "" : " * ") + a;
    return s;
}

}  // namespace brute
