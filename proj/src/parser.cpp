#include "latchproof/parser.hpp"

#include <cctype>

namespace latchproof {

namespace {

enum class TK { Ident, Int, Decimal, Sym, End };

struct Token {
    TK kind;
    std::string text;
    int line;
    int col;
};

void check_utf8(const std::string& s) {
    int line = 1, col = 1;
    size_t i = 0;
    while (i < s.size()) {
        unsigned char c = static_cast<unsigned char>(s[i]);
        size_t len = 1;
        if (c >= 0x80) {
            if ((c & 0xE0) == 0xC0) len = 2;
            else if ((c & 0xF0) == 0xE0) len = 3;
            else if ((c & 0xF8) == 0xF0) len = 4;
            else throw ParseError(line, col, "valid UTF-8", "");
            if (i + len > s.size()) throw ParseError(line, col, "valid UTF-8", "");
            for (size_t k = 1; k < len; ++k)
                if ((static_cast<unsigned char>(s[i + k]) & 0xC0) != 0x80)
                    throw ParseError(line, col, "valid UTF-8", "");
        }
        if (c == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
        i += len;
    }
}

std::vector<Token> lex(const std::string& s) {
    check_utf8(s);
    std::vector<Token> out;
    int line = 1, col = 1;
    size_t i = 0;
    auto adv = [&](size_t n) {
        for (size_t k = 0; k < n && i < s.size(); ++k, ++i) {
            if (s[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
    };
    static const char* two[] = {"::", "->", "||", "<=", ">=", "==", "!="};
    while (i < s.size()) {
        char c = s[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            adv(1);
            continue;
        }
        if (c == '/' && i + 1 < s.size() && s[i + 1] == '/') {
            while (i < s.size() && s[i] != '\n') adv(1);
            continue;
        }
        if (c == '/' && i + 1 < s.size() && s[i + 1] == '*') {
            int l0 = line, c0 = col;
            adv(2);
            while (i + 1 < s.size() && !(s[i] == '*' && s[i + 1] == '/')) adv(1);
            if (i + 1 >= s.size()) throw ParseError(l0, c0, "end of comment", "");
            adv(2);
            continue;
        }
        Token t{TK::Sym, "", line, col};
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t j = i;
            while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_' || s[j] == '#')) ++j;
            t.kind = TK::Ident;
            t.text = s.substr(i, j - i);
            adv(j - i);
            out.push_back(t);
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            size_t j = i;
            while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
            t.kind = TK::Int;
            if (j + 1 < s.size() && s[j] == '.' && std::isdigit(static_cast<unsigned char>(s[j + 1]))) {
                ++j;
                while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
                t.kind = TK::Decimal;
            }
            t.text = s.substr(i, j - i);
            adv(j - i);
            out.push_back(t);
            continue;
        }
        bool matched = false;
        for (auto* tw : two) {
            if (s.compare(i, 2, tw) == 0) {
                t.text = tw;
                adv(2);
                matched = true;
                break;
            }
        }
        if (!matched) {
            if (std::string("(){}[],;.*&|@/-+=<>!").find(c) == std::string::npos)
                throw ParseError(line, col, "token", std::string(1, c));
            t.text = std::string(1, c);
            adv(1);
        }
        out.push_back(t);
    }
    out.push_back({TK::End, "", line, col});
    return out;
}

bool is_upper_ident(const Token& t) {
    return t.kind == TK::Ident && !t.text.empty() && std::isupper(static_cast<unsigned char>(t.text[0]));
}

const std::set<std::string> kHeapKeywords = {"emp", "LatchIn", "LatchOut", "CNT", "WAIT", "thread", "threadspec", "dead"};

class Parser {
public:
    explicit Parser(std::vector<Token> toks) : t_(std::move(toks)) {}

    const Token& peek(size_t k = 0) const { return t_[std::min(p_ + k, t_.size() - 1)]; }
    bool at_end() const { return peek().kind == TK::End; }

    bool is_sym(const std::string& s, size_t k = 0) const {
        return peek(k).kind == TK::Sym && peek(k).text == s;
    }
    bool is_kw(const std::string& s, size_t k = 0) const {
        return peek(k).kind == TK::Ident && peek(k).text == s;
    }
    bool accept(const std::string& s) {
        if (is_sym(s)) {
            ++p_;
            return true;
        }
        return false;
    }
    bool accept_kw(const std::string& s) {
        if (is_kw(s)) {
            ++p_;
            return true;
        }
        return false;
    }
    [[noreturn]] void fail(const std::string& expected) const {
        throw ParseError(peek().line, peek().col, expected, peek().kind == TK::End ? "end of input" : peek().text);
    }
    void expect(const std::string& s) {
        if (!accept(s)) fail("'" + s + "'");
    }
    void expect_kw(const std::string& s) {
        if (!accept_kw(s)) fail("'" + s + "'");
    }
    std::string ident(const std::string& what = "identifier") {
        if (peek().kind != TK::Ident) fail(what);
        return t_[p_++].text;
    }
    Span span() const { return Span{peek().line, peek().col}; }

    // ----- terms and pure formulas -----

    LinExpr factor() {
        if (peek().kind == TK::Int) {
            int64_t k = std::stoll(t_[p_++].text);
            if (accept("*")) return factor().scale(k);
            return LinExpr(k);
        }
        if (peek().kind == TK::Ident) {
            std::string v = t_[p_++].text;
            return LinExpr::var(v);
        }
        if (accept("(")) {
            LinExpr e = term();
            expect(")");
            if (accept("*")) {
                LinExpr r = factor();
                if (e.is_const()) return r.scale(e.c);
                if (r.is_const()) return e.scale(r.c);
                fail("linear term");
            }
            return e;
        }
        fail("term");
    }

    LinExpr tterm() {
        if (accept("-")) return -tterm();
        LinExpr f = factor();
        if (is_sym("*") && f.is_const() == false) {
            ++p_;
            LinExpr r = factor();
            if (!r.is_const()) fail("linear term");
            return f.scale(r.c);
        }
        return f;
    }

    LinExpr term() {
        LinExpr e = tterm();
        while (true) {
            if (accept("+")) e = e + tterm();
            else if (accept("-")) e = e - tterm();
            else break;
        }
        return e;
    }

    bool rel_op(CmpOp& op) {
        if (accept("=") || accept("==")) op = CmpOp::EQ;
        else if (accept("!=")) op = CmpOp::NE;
        else if (accept("<=")) op = CmpOp::LE;
        else if (accept(">=")) op = CmpOp::GE;
        else if (accept("<")) op = CmpOp::LT;
        else if (accept(">")) op = CmpOp::GT;
        else return false;
        return true;
    }

    Pure cmp() {
        LinExpr l = term();
        CmpOp op;
        if (!rel_op(op)) fail("comparison operator");
        LinExpr r = term();
        return p_cmp(op, l, r);
    }

    std::vector<std::string> id_list() {
        std::vector<std::string> v{ident()};
        while (accept(",")) v.push_back(ident());
        return v;
    }

    Pure pure_unary() {
        if (accept("!")) return p_not(pure_unary());
        if (is_kw("ex") || is_kw("all")) {
            bool ex = peek().text == "ex";
            ++p_;
            auto vs = id_list();
            expect(".");
            Pure b = pure_unary();
            return ex ? p_exists(vs, b) : p_forall(vs, b);
        }
        if (accept_kw("true")) return p_true();
        if (accept_kw("false")) return p_false();
        if (is_sym("(")) {
            size_t save = p_;
            try {
                ++p_;
                Pure inner = pure_or();
                expect(")");
                CmpOp op;
                size_t after = p_;
                if (!rel_op(op) && !is_sym("+") && !is_sym("-") && !is_sym("*")) return inner;
                p_ = after;
            } catch (const ParseError&) {
            }
            p_ = save;
        }
        return cmp();
    }

    Pure pure_and() {
        std::vector<Pure> ps{pure_unary()};
        while (accept("&")) ps.push_back(pure_unary());
        return p_and(ps);
    }

    Pure pure_or() {
        std::vector<Pure> ps{pure_and()};
        while (accept_kw("or")) ps.push_back(pure_and());
        return p_or(ps);
    }

    // ----- heap formulas -----

    bool starts_heap() const {
        const Token& t = peek();
        if (t.kind != TK::Ident) return false;
        if (kHeapKeywords.count(t.text)) return true;
        if (peek(1).kind == TK::Sym && peek(1).text == "::") return true;
        return is_upper_ident(t);
    }

    Perm perm(Perm dflt) {
        if (!accept("@")) return dflt;
        const Token& t = peek();
        Span sp = span();
        if (t.kind == TK::Ident) {
            ++p_;
            return Perm::variable(t.text);
        }
        std::string txt;
        if (t.kind == TK::Decimal) {
            txt = t.text;
            ++p_;
        } else if (t.kind == TK::Int) {
            txt = t.text;
            ++p_;
            if (accept("/")) {
                if (peek().kind != TK::Int) fail("denominator");
                txt += "/" + t_[p_++].text;
            }
        } else {
            fail("permission");
        }
        auto f = Frac::parse(txt);
        if (!f || !f->valid_perm()) throw ParseError(sp.line, sp.col, "permission in (0,1]", txt);
        return Perm(*f);
    }

    ResArg payload() {
        if (is_upper_ident(peek()) && (is_sym(",", 1) || is_sym(")", 1))) return ResArg::of_var(t_[p_++].text);
        return ResArg::of(formula());
    }

    void close_pred(const std::string& name, int arity) {
        if (!accept(")")) fail("')' (" + name + " takes " + std::to_string(arity) + " arguments)");
    }

    std::optional<HeapAtom> atom() {
        const Token& t = peek();
        if (accept_kw("emp")) return std::nullopt;
        if (t.text == "LatchIn" || t.text == "LatchOut") {
            bool in = t.text == "LatchIn";
            std::string name = t.text;
            ++p_;
            expect("(");
            std::string c = ident("latch identifier");
            if (!accept(",")) fail("',' (" + name + " takes 2 arguments)");
            ResArg r = payload();
            close_pred(name, 2);
            return in ? HeapAtom::latch_in(c, r) : HeapAtom::latch_out(c, r);
        }
        if (t.text == "CNT") {
            ++p_;
            expect("(");
            std::string c = ident("latch identifier");
            if (!accept(",")) fail("',' (CNT takes 2 arguments)");
            LinExpr n = term();
            close_pred("CNT", 2);
            return HeapAtom::cnt(c, n, perm(Perm::anon()));
        }
        if (t.text == "WAIT") {
            ++p_;
            expect("{");
            std::set<Arc> arcs;
            if (!is_sym("}")) {
                do {
                    std::string a = ident();
                    expect("->");
                    std::string b = ident();
                    arcs.insert({a, b});
                } while (accept(","));
            }
            expect("}");
            return HeapAtom::wait(arcs, perm(Perm::anon()));
        }
        if (t.text == "thread") {
            ++p_;
            expect("(");
            std::string tid = ident();
            if (!accept(",")) fail("',' (thread takes 2 arguments)");
            ResArg q = payload();
            close_pred("thread", 2);
            return HeapAtom::thread(tid, q);
        }
        if (t.text == "threadspec") {
            ++p_;
            expect("(");
            std::string tid = ident();
            if (!accept(",")) fail("',' (threadspec takes 3 arguments)");
            ResArg pre = payload();
            if (!accept(",")) fail("',' (threadspec takes 3 arguments)");
            ResArg post = payload();
            close_pred("threadspec", 3);
            return HeapAtom::thread_spec(tid, pre, post);
        }
        if (t.text == "dead") {
            ++p_;
            expect("(");
            std::string tid = ident();
            close_pred("dead", 1);
            return HeapAtom::dead(tid);
        }
        if (is_sym("::", 1)) {
            std::string root = ident();
            expect("::");
            std::string ctor = ident("constructor");
            expect("(");
            std::vector<LinExpr> args;
            if (!is_sym(")")) {
                args.push_back(term());
                while (accept(",")) args.push_back(term());
            }
            expect(")");
            return HeapAtom::points_to(root, ctor, args, perm(Perm(Frac(1))));
        }
        if (is_upper_ident(t)) {
            ++p_;
            return HeapAtom::res_var(t.text);
        }
        fail("heap atom");
    }

    Disjunct disjunct() {
        Disjunct d;
        if (is_kw("ex")) {
            ++p_;
            d.exists = id_list();
            expect(".");
        }
        if (starts_heap()) {
            auto a = atom();
            if (a) d.heap.push_back(*a);
            while (accept("*")) {
                auto b = atom();
                if (b) d.heap.push_back(*b);
            }
            if (accept("&")) d.pure = pure_and_or_in_disjunct();
        } else {
            d.pure = pure_and_or_in_disjunct();
        }
        return d;
    }

    Pure pure_and_or_in_disjunct() { return pure_or(); }

    Formula formula() {
        Formula f(disjunct());
        while (accept("|")) f.ds.push_back(disjunct());
        return f;
    }

    // ----- programs -----

    ExprPtr mk(Expr e) { return std::make_shared<const Expr>(std::move(e)); }

    static ExprPtr seq(std::vector<ExprPtr> v, Span sp) {
        if (v.empty()) {
            Expr e;
            e.kind = EK::Skip;
            e.span = sp;
            return std::make_shared<const Expr>(e);
        }
        if (v.size() == 1) return v[0];
        Expr e;
        e.kind = EK::Seq;
        e.span = v[0]->span;
        e.kids = std::move(v);
        return std::make_shared<const Expr>(e);
    }

    std::vector<LinExpr> term_args() {
        std::vector<LinExpr> args;
        expect("(");
        if (!is_sym(")")) {
            args.push_back(term());
            while (accept(",")) args.push_back(term());
        }
        expect(")");
        return args;
    }

    ExprPtr rhs() {
        Expr e;
        e.span = span();
        if (accept_kw("new")) {
            e.kind = EK::New;
            e.name = ident("constructor");
            e.args = term_args();
            return mk(e);
        }
        if (accept_kw("create_latch")) {
            e.kind = EK::CreateLatch;
            e.args = term_args();
            if (e.args.size() != 1) throw ParseError(e.span.line, e.span.col, "one count argument", "");
            if (accept_kw("with")) e.with = formula();
            return mk(e);
        }
        if (accept_kw("create_thread")) {
            e.kind = EK::CreateThread;
            expect("(");
            e.name = ident("procedure name");
            expect(")");
            expect_kw("with");
            e.with = formula();
            expect(",");
            e.with2 = formula();
            return mk(e);
        }
        if (peek().kind == TK::Ident && is_sym("(", 1)) {
            e.kind = EK::Call;
            e.name = ident();
            e.args = term_args();
            return mk(e);
        }
        if (peek().kind == TK::Ident && is_sym(".", 1) && peek(2).kind == TK::Ident) {
            e.kind = EK::FieldRead;
            e.name = ident();
            expect(".");
            e.name2 = ident("field");
            return mk(e);
        }
        e.term = term();
        e.kind = e.term.is_const() ? EK::Const : e.term.is_var() ? EK::VarRead : EK::Arith;
        if (e.kind == EK::VarRead) e.name = e.term.as_var();
        return mk(e);
    }

    ExprPtr block() {
        Span sp = span();
        expect("{");
        std::vector<ExprPtr> v;
        while (!is_sym("}")) {
            if (at_end()) fail("'}'");
            v.push_back(stmt());
        }
        expect("}");
        return seq(std::move(v), sp);
    }

    ExprPtr par() {
        Span sp = span();
        expect("(");
        std::vector<ExprPtr> branches;
        std::vector<std::optional<Formula>> annots;
        while (true) {
            std::optional<Formula> ann;
            if (accept("[")) {
                ann = formula();
                expect("]");
            }
            Span bsp = span();
            std::vector<ExprPtr> v;
            while (!is_sym("||") && !is_sym(")")) {
                if (at_end()) fail("')'");
                v.push_back(stmt());
            }
            branches.push_back(seq(std::move(v), bsp));
            annots.push_back(ann);
            if (accept("||")) continue;
            expect(")");
            break;
        }
        accept(";");
        if (branches.size() == 1 && !annots[0]) return branches[0];
        Expr e;
        e.kind = EK::Par;
        e.span = sp;
        e.kids = std::move(branches);
        e.annots = std::move(annots);
        return mk(e);
    }

    // The final statement of a parallel branch or block may omit its ';'.
    void end_stmt() {
        if (accept(";")) return;
        if (is_sym("||") || is_sym(")") || is_sym("}")) return;
        expect(";");
    }

    ExprPtr simple_var_stmt(EK k) {
        Expr e;
        e.kind = k;
        e.span = span();
        ++p_;
        expect("(");
        e.name = ident();
        expect(")");
        end_stmt();
        return mk(e);
    }

    ExprPtr stmt() {
        Span sp = span();
        if (is_sym("(")) return par();
        if (is_sym("{")) return block();
        if (peek().kind != TK::Ident) fail("statement");
        const std::string& w = peek().text;
        Expr e;
        e.span = sp;
        if (w == "skip") {
            ++p_;
            if (accept("(")) expect(")");
            end_stmt();
            e.kind = EK::Skip;
            return mk(e);
        }
        if (w == "countDown" && is_sym("(", 1)) return simple_var_stmt(EK::CountDown);
        if (w == "await" && is_sym("(", 1)) return simple_var_stmt(EK::Await);
        if (w == "join" && is_sym("(", 1)) return simple_var_stmt(EK::Join);
        if (w == "destroy" && is_sym("(", 1)) return simple_var_stmt(EK::Destroy);
        if (w == "fork" && is_sym("(", 1)) {
            ++p_;
            expect("(");
            e.kind = EK::Fork;
            e.name = ident("thread variable");
            while (accept(",")) e.args.push_back(term());
            expect(")");
            end_stmt();
            return mk(e);
        }
        if (w == "assert") {
            ++p_;
            e.kind = EK::Assert;
            e.with = formula();
            end_stmt();
            return mk(e);
        }
        if (w == "return") {
            ++p_;
            e.kind = EK::Return;
            e.term = term();
            end_stmt();
            return mk(e);
        }
        if (w == "atomic") {
            ++p_;
            e.kind = EK::Atomic;
            e.kids = {block()};
            return mk(e);
        }
        if (w == "if") {
            ++p_;
            e.kind = EK::If;
            expect("(");
            e.cond = pure_or();
            expect(")");
            e.kids.push_back(block());
            if (accept_kw("else")) {
                e.kids.push_back(is_kw("if") ? stmt() : block());
            } else {
                Expr sk;
                sk.kind = EK::Skip;
                sk.span = sp;
                e.kids.push_back(mk(sk));
            }
            return mk(e);
        }
        if (w == "while") {
            ++p_;
            e.kind = EK::While;
            expect("(");
            e.cond = pure_or();
            expect(")");
            expect_kw("invariant");
            e.with = formula();
            e.kids.push_back(block());
            return mk(e);
        }
        if (is_sym("(", 1)) {
            e.kind = EK::Call;
            e.name = ident();
            e.args = term_args();
            end_stmt();
            return mk(e);
        }
        if (is_sym(".", 1)) {
            e.kind = EK::FieldWrite;
            e.name = ident();
            expect(".");
            e.name2 = ident("field");
            expect("=");
            e.term = term();
            end_stmt();
            return mk(e);
        }
        if (is_sym("=", 1)) {
            e.kind = EK::Assign;
            e.name = ident();
            expect("=");
            e.kids.push_back(rhs());
            end_stmt();
            return mk(e);
        }
        if (peek(1).kind == TK::Ident) {
            e.kind = EK::Decl;
            e.name2 = ident("type");
            e.name = ident();
            if (accept("=")) e.kids.push_back(rhs());
            end_stmt();
            return mk(e);
        }
        fail("statement");
    }

    TypedName typed_name() {
        TypedName tn;
        tn.type = ident("type");
        tn.name = ident();
        return tn;
    }

    DataDecl data_decl() {
        DataDecl d;
        d.span = span();
        expect_kw("data");
        d.name = ident("data type name");
        expect("{");
        while (!accept("}")) {
            if (at_end()) fail("'}'");
            d.fields.push_back(typed_name());
            end_stmt();
        }
        return d;
    }

    ProcDecl proc_decl() {
        ProcDecl pd;
        pd.span = span();
        pd.return_type = ident("return type");
        pd.span = span();
        pd.name = ident("procedure name");
        expect("(");
        if (!is_sym(")")) {
            pd.params.push_back(typed_name());
            while (accept(",")) pd.params.push_back(typed_name());
        }
        expect(")");
        if (accept_kw("with")) pd.ghosts = id_list();
        while (accept_kw("requires")) {
            SpecPair sp;
            sp.pre = formula();
            expect_kw("ensures");
            sp.post = formula();
            end_stmt();
            pd.specs.push_back(std::move(sp));
        }
        if (is_sym("{")) pd.body = block();
        return pd;
    }

    Program program() {
        Program p;
        while (!at_end()) {
            if (is_kw("data")) p.data_decls.push_back(data_decl());
            else p.proc_decls.push_back(proc_decl());
        }
        return p;
    }

    void expect_end() {
        if (!at_end()) fail("end of input");
    }

private:
    std::vector<Token> t_;
    size_t p_ = 0;
};

}  // namespace

Program parse_program(const SourceFile& src) {
    Parser ps(lex(src.text));
    return ps.program();
}

Program parse_program(const std::string& text) { return parse_program(SourceFile{"<input>", text}); }

Formula parse_formula(const std::string& text) {
    Parser ps(lex(text));
    Formula f = ps.formula();
    ps.expect_end();
    return f;
}

Pure parse_pure(const std::string& text) {
    Parser ps(lex(text));
    Pure p = ps.pure_or();
    ps.expect_end();
    return p;
}

}  // namespace latchproof
