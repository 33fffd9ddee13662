#include <algorithm>
#include <sstream>

#include "latchproof/parser.hpp"

namespace latchproof {

static const char* op_str(CmpOp op) {
    switch (op) {
        case CmpOp::EQ: return "=";
        case CmpOp::NE: return "!=";
        case CmpOp::LT: return "<";
        case CmpOp::LE: return "<=";
        case CmpOp::GT: return ">";
        case CmpOp::GE: return ">=";
    }
    return "?";
}

static std::string join(const std::vector<std::string>& v, const std::string& sep) {
    std::string out;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) out += sep;
        out += v[i];
    }
    return out;
}

static std::string pure_atom(const Pure& p, bool in_and);

std::string print_pure(const Pure& p) { return pure_atom(p, false); }

static std::string pure_atom(const Pure& p, bool in_and) {
    if (!p) return "true";
    switch (p->kind) {
        case PK::True: return "true";
        case PK::False: return "false";
        case PK::Cmp: return p->lhs.str() + op_str(p->op) + p->rhs.str();
        case PK::And: {
            std::vector<std::string> parts;
            for (auto& k : p->kids) parts.push_back(pure_atom(k, true));
            std::sort(parts.begin(), parts.end());
            std::string s = join(parts, " & ");
            return in_and ? "(" + s + ")" : s;
        }
        case PK::Or: {
            std::vector<std::string> parts;
            for (auto& k : p->kids) parts.push_back(pure_atom(k, true));
            std::sort(parts.begin(), parts.end());
            return "(" + join(parts, " or ") + ")";
        }
        case PK::Not: return "!(" + pure_atom(p->kids[0], false) + ")";
        case PK::Exists:
        case PK::Forall:
            return std::string(p->kind == PK::Exists ? "ex " : "all ") + join(p->vars, ",") + ". (" +
                   pure_atom(p->kids[0], false) + ")";
    }
    return "?";
}

static std::string perm_suffix(const Perm& p) {
    if (p.is_anon()) return "";
    return "@" + p.str();
}

static std::string print_payload(const ResArg& r) {
    if (r.is_var()) return r.var;
    return print(*r.f);
}

std::string print(const HeapAtom& a) {
    switch (a.kind) {
        case AK::PointsTo: {
            std::vector<std::string> args;
            for (auto& e : a.args) args.push_back(e.str());
            return a.root + "::" + a.ctor + "(" + join(args, ",") + ")" + perm_suffix(a.perm);
        }
        case AK::LatchIn: return "LatchIn(" + a.root + ", " + print_payload(a.payload) + ")";
        case AK::LatchOut: return "LatchOut(" + a.root + ", " + print_payload(a.payload) + ")";
        case AK::Cnt: return "CNT(" + a.root + "," + a.count.str() + ")" + perm_suffix(a.perm);
        case AK::Wait: {
            std::vector<std::string> arcs;
            for (auto& [x, y] : a.arcs) arcs.push_back(x + "->" + y);
            return "WAIT{" + join(arcs, ",") + "}" + perm_suffix(a.perm);
        }
        case AK::Thread: return "thread(" + a.root + ", " + print_payload(a.payload) + ")";
        case AK::ThreadSpec:
            return "threadspec(" + a.root + ", " + print_payload(a.payload) + ", " + print_payload(a.payload2) + ")";
        case AK::Dead: return "dead(" + a.root + ")";
        case AK::ResVar: return a.root;
    }
    return "?";
}

std::string print(const Disjunct& d) {
    std::vector<std::pair<std::pair<int, std::string>, std::string>> keyed;
    for (auto& a : d.heap) keyed.push_back({{static_cast<int>(a.kind), a.root}, print(a)});
    std::sort(keyed.begin(), keyed.end());
    std::vector<std::string> atoms;
    for (auto& k : keyed) atoms.push_back(k.second);
    std::string s;
    if (!d.exists.empty()) s += "ex " + join(d.exists, ",") + ". ";
    if (atoms.empty()) {
        s += "emp & " + print_pure(d.pure);
    } else {
        s += join(atoms, " * ");
        if (!is_true(d.pure)) s += " & " + print_pure(d.pure);
    }
    return s;
}

std::string print(const Formula& f) {
    if (f.ds.empty()) return "emp & false";
    std::vector<std::string> parts;
    for (auto& d : f.ds) parts.push_back(print(d));
    return join(parts, " | ");
}

// ----- Programs -----

static std::string ind(int n) { return std::string(n * 2, ' '); }

static std::string args_str(const std::vector<LinExpr>& args) {
    std::vector<std::string> v;
    for (auto& a : args) v.push_back(a.str());
    return join(v, ", ");
}

static std::string block(const ExprPtr& e, int indent) {
    return "{\n" + print(e, indent + 1) + ind(indent) + "}";
}

static std::string rhs_str(const ExprPtr& e) {
    switch (e->kind) {
        case EK::New: return "new " + e->name + "(" + args_str(e->args) + ")";
        case EK::CreateLatch: {
            std::string s = "create_latch(" + args_str(e->args) + ")";
            if (e->with) s += " with " + print(*e->with);
            return s;
        }
        case EK::CreateThread:
            return "create_thread(" + e->name + ") with " + print(*e->with) + ", " + print(*e->with2);
        case EK::Call: return e->name + "(" + args_str(e->args) + ")";
        case EK::FieldRead: return e->name + "." + e->name2;
        default: return e->term.str();
    }
}

std::string print(const ExprPtr& e, int indent) {
    if (!e) return "";
    std::string I = ind(indent);
    switch (e->kind) {
        case EK::Seq: {
            std::string s;
            for (auto& k : e->kids) s += print(k, indent);
            return s;
        }
        case EK::Skip: return I + "skip;\n";
        case EK::Decl: {
            std::string s = I + e->name2 + " " + e->name;
            if (!e->kids.empty()) s += " = " + rhs_str(e->kids[0]);
            return s + ";\n";
        }
        case EK::Assign: return I + e->name + " = " + rhs_str(e->kids[0]) + ";\n";
        case EK::FieldWrite: return I + e->name + "." + e->name2 + " = " + e->term.str() + ";\n";
        case EK::CountDown: return I + "countDown(" + e->name + ");\n";
        case EK::Await: return I + "await(" + e->name + ");\n";
        case EK::Join: return I + "join(" + e->name + ");\n";
        case EK::Destroy: return I + "destroy(" + e->name + ");\n";
        case EK::Fork: {
            std::string s = I + "fork(" + e->name;
            for (auto& a : e->args) s += ", " + a.str();
            return s + ");\n";
        }
        case EK::Call: return I + rhs_str(e) + ";\n";
        case EK::Assert: return I + "assert " + print(*e->with) + ";\n";
        case EK::Return: return I + "return " + e->term.str() + ";\n";
        case EK::Atomic: return I + "atomic " + block(e->kids[0], indent) + "\n";
        case EK::If: {
            std::string s = I + "if (" + print_pure(e->cond) + ") " + block(e->kids[0], indent);
            if (e->kids.size() > 1) s += " else " + block(e->kids[1], indent);
            return s + "\n";
        }
        case EK::While:
            return I + "while (" + print_pure(e->cond) + ") invariant " + print(*e->with) + " " +
                   block(e->kids[0], indent) + "\n";
        case EK::Par: {
            std::string s = I + "(\n";
            for (size_t i = 0; i < e->kids.size(); ++i) {
                if (i) s += I + "||\n";
                if (i < e->annots.size() && e->annots[i]) s += ind(indent + 1) + "[" + print(*e->annots[i]) + "]\n";
                s += print(e->kids[i], indent + 1);
            }
            return s + I + ");\n";
        }
        default: return I + rhs_str(e) + ";\n";
    }
}

std::string print(const Program& p) {
    std::ostringstream os;
    for (auto& d : p.data_decls) {
        os << "data " << d.name << " {";
        for (auto& f : d.fields) os << " " << f.type << " " << f.name << ";";
        os << " }\n";
    }
    for (auto& pd : p.proc_decls) {
        os << pd.return_type << " " << pd.name << "(";
        for (size_t i = 0; i < pd.params.size(); ++i) {
            if (i) os << ", ";
            os << pd.params[i].type << " " << pd.params[i].name;
        }
        os << ")";
        if (!pd.ghosts.empty()) os << " with " << join(pd.ghosts, ", ");
        os << "\n";
        for (auto& sp : pd.specs) os << "  requires " << print(sp.pre) << " ensures " << print(sp.post) << ";\n";
        if (pd.body) os << block(pd.body, 0) << "\n";
    }
    return os.str();
}

}  // namespace latchproof
