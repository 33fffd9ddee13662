#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace latchproof {

// Exact rational permission in (0, 1]. Arithmetic results outside that
// interval are representable so callers can detect overflow.
class Frac {
public:
    Frac() = default;
    Frac(int64_t num, int64_t den = 1);

    int64_t num() const { return num_; }
    int64_t den() const { return den_; }

    bool valid_perm() const { return num_ > 0 && num_ <= den_; }
    bool is_one() const { return num_ == den_; }

    Frac operator+(const Frac& o) const;
    Frac operator-(const Frac& o) const;
    Frac operator/(int64_t k) const;
    bool operator==(const Frac& o) const { return num_ == o.num_ && den_ == o.den_; }
    bool operator!=(const Frac& o) const { return !(*this == o); }
    bool operator<(const Frac& o) const;
    bool operator<=(const Frac& o) const { return !(o < *this); }

    std::string str() const;
    // Accepts "1", "1/2", "0.6".
    static std::optional<Frac> parse(const std::string& s);

private:
    int64_t num_ = 1;
    int64_t den_ = 1;
};

// Linear integer term: sum of coef*var plus a constant.
struct LinExpr {
    std::map<std::string, int64_t> coef;
    int64_t c = 0;

    LinExpr() = default;
    explicit LinExpr(int64_t k) : c(k) {}
    static LinExpr var(const std::string& v);

    bool is_const() const { return coef.empty(); }
    bool is_var() const;  // exactly one variable with coefficient 1 and no constant
    const std::string& as_var() const { return coef.begin()->first; }

    LinExpr operator+(const LinExpr& o) const;
    LinExpr operator-(const LinExpr& o) const;
    LinExpr operator-() const;
    LinExpr scale(int64_t k) const;
    LinExpr subst(const std::map<std::string, LinExpr>& m) const;
    LinExpr rename(const std::map<std::string, std::string>& m) const;
    std::set<std::string> vars() const;
    bool operator==(const LinExpr& o) const { return c == o.c && coef == o.coef; }
    bool operator!=(const LinExpr& o) const { return !(*this == o); }
    std::string str() const;
};

enum class CmpOp { EQ, NE, LT, LE, GT, GE };
enum class PK { True, False, Cmp, And, Or, Not, Exists, Forall };

struct PureNode;
using Pure = std::shared_ptr<const PureNode>;

struct PureNode {
    PK kind = PK::True;
    CmpOp op = CmpOp::EQ;
    LinExpr lhs, rhs;
    std::vector<Pure> kids;
    std::vector<std::string> vars;  // binders for Exists/Forall
};

Pure p_true();
Pure p_false();
Pure p_cmp(CmpOp op, const LinExpr& l, const LinExpr& r);
Pure p_eq(const LinExpr& l, const LinExpr& r);
Pure p_and(const std::vector<Pure>& ps);
Pure p_and(const Pure& a, const Pure& b);
Pure p_or(const std::vector<Pure>& ps);
Pure p_not(const Pure& p);
Pure p_exists(const std::vector<std::string>& vs, const Pure& body);
Pure p_forall(const std::vector<std::string>& vs, const Pure& body);
bool is_true(const Pure& p);
bool is_false(const Pure& p);

std::set<std::string> free_vars(const Pure& p);
Pure substitute(const Pure& p, const std::map<std::string, LinExpr>& m);
// Flattens top-level conjunctions.
std::vector<Pure> conjuncts(const Pure& p);
std::string print_pure(const Pure& p);

// A permission is either an exact fraction or a symbolic permission
// variable. The variable "_" is anonymous and matches any permission.
struct Perm {
    Frac val;
    std::string var;

    Perm() = default;
    Perm(Frac f) : val(f) {}
    static Perm variable(const std::string& v) { Perm p; p.var = v; return p; }
    static Perm anon() { return variable("_"); }
    bool is_var() const { return !var.empty(); }
    bool is_anon() const { return var == "_"; }
    bool operator==(const Perm& o) const { return var == o.var && (is_var() || val == o.val); }
    std::string str() const { return is_var() ? var : val.str(); }
};

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

// Payload of a resource predicate: a resource variable or a concrete formula.
struct ResArg {
    std::string var;
    FormulaPtr f;

    bool is_var() const { return !f; }
    static ResArg of_var(const std::string& v) { ResArg r; r.var = v; return r; }
    static ResArg of(const Formula& f);
};

enum class AK { PointsTo, LatchIn, LatchOut, Cnt, Wait, Thread, ThreadSpec, Dead, ResVar };

using Arc = std::pair<std::string, std::string>;

struct HeapAtom {
    AK kind = AK::PointsTo;
    // Points-to root, latch id, thread id or resource variable name.
    std::string root;
    std::string ctor;
    std::vector<LinExpr> args;
    Perm perm;
    LinExpr count;
    std::set<Arc> arcs;
    ResArg payload;   // LatchIn/LatchOut payload, thread post, threadspec pre
    ResArg payload2;  // threadspec post

    static HeapAtom points_to(const std::string& root, const std::string& ctor,
                              std::vector<LinExpr> args, Perm p = Perm(Frac(1)));
    static HeapAtom latch_in(const std::string& c, ResArg p);
    static HeapAtom latch_out(const std::string& c, ResArg p);
    static HeapAtom cnt(const std::string& c, const LinExpr& n, Perm p = Perm(Frac(1)));
    static HeapAtom wait(std::set<Arc> arcs, Perm p = Perm(Frac(1)));
    static HeapAtom thread(const std::string& t, ResArg post);
    static HeapAtom thread_spec(const std::string& t, ResArg pre, ResArg post);
    static HeapAtom dead(const std::string& t);
    static HeapAtom res_var(const std::string& v);

    bool is_latch_pred() const { return kind == AK::LatchIn || kind == AK::LatchOut; }
};

struct Disjunct {
    std::vector<std::string> exists;
    std::vector<HeapAtom> heap;
    Pure pure = p_true();
};

struct Formula {
    std::vector<Disjunct> ds;

    Formula() : ds(1) {}
    explicit Formula(Disjunct d) : ds{std::move(d)} {}
    static Formula emp() { return Formula(); }
    static Formula of_atom(const HeapAtom& a, Pure p = p_true());
    static Formula false_() { Formula f; f.ds.clear(); return f; }
    bool is_emp() const;
};

std::set<std::string> free_vars(const Formula& f);
std::set<std::string> free_vars(const Disjunct& d);
std::set<std::string> free_vars(const HeapAtom& a);
std::set<std::string> res_vars(const Formula& f);
// Capture-avoiding simultaneous substitution of terms for variables.
Formula substitute(const Formula& f, const std::map<std::string, LinExpr>& m);
Disjunct substitute(const Disjunct& d, const std::map<std::string, LinExpr>& m);
HeapAtom substitute(const HeapAtom& a, const std::map<std::string, LinExpr>& m);
// Substitutes permission variables.
Formula substitute_perms(const Formula& f, const std::map<std::string, Perm>& m);
HeapAtom substitute_perms(const HeapAtom& a, const std::map<std::string, Perm>& m);
// Renames bound variables of every disjunct to fresh names.
Disjunct open_exists(const Disjunct& d, std::vector<std::string>* fresh_names = nullptr);
// Separating conjunction of two formulas, distributing over disjunction.
Formula star(const Formula& a, const Formula& b);
Disjunct star(const Disjunct& a, const Disjunct& b);
Formula disj(const Formula& a, const Formula& b);
Formula add_pure(const Formula& f, const Pure& p);

// Fresh names. Lower-case prefixes and resource variables (upper-case
// initial) draw from separate counters. The counters are thread-local so
// independent verification tasks stay deterministic.
std::string fresh(const std::string& prefix);
void reset_fresh(uint64_t start = 0);
bool is_res_var_name(const std::string& s);
std::string base_name(const std::string& s);

// ----- Programs -----

struct Span {
    int line = 0;
    int col = 0;
};

enum class EK {
    Skip, VarRead, FieldRead, Const, Arith, New, Seq, Par, Atomic, CreateLatch,
    CountDown, Await, Call, Fork, Join, CreateThread, If, While, Assign,
    FieldWrite, Assert, Destroy, Decl, Return
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
    EK kind = EK::Skip;
    Span span;
    std::string name;    // variable, procedure, constructor or latch/thread var
    std::string name2;   // field name, declared type
    LinExpr term;        // Const/Arith/VarRead value, FieldWrite rhs, Return value
    Pure cond = p_true();
    std::vector<LinExpr> args;
    std::vector<ExprPtr> kids;
    std::vector<std::optional<Formula>> annots;  // Par branch preconditions
    std::optional<Formula> with;   // create_latch payload, create_thread pre, assert, invariant
    std::optional<Formula> with2;  // create_thread post
};

struct TypedName {
    std::string type;
    std::string name;
};

struct DataDecl {
    std::string name;
    std::vector<TypedName> fields;
    Span span;
};

struct SpecPair {
    Formula pre;
    Formula post;
    std::optional<Formula> ghost_resource;
};

struct ProcDecl {
    std::string name;
    std::string return_type = "void";
    std::vector<TypedName> params;
    std::vector<std::string> ghosts;  // `with P` higher-order parameters
    std::vector<SpecPair> specs;
    ExprPtr body;  // null for primitives
    Span span;
};

struct Program {
    std::vector<DataDecl> data_decls;
    std::vector<ProcDecl> proc_decls;

    const ProcDecl* find_proc(const std::string& n) const;
    const DataDecl* find_data(const std::string& n) const;
};

struct Diagnostic {
    std::string code;
    std::string message;
    Span span;
};

// Checks procedure-name uniqueness, presence of main, declared callees and
// arity. Built-in primitives count as declared.
std::vector<Diagnostic> check_wellformed(const Program& p);

// Free program variables of an expression, excluding locals it declares.
std::set<std::string> free_vars(const Expr& e);

}  // namespace latchproof
