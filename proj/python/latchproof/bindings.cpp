#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "latchproof/entail.hpp"
#include "latchproof/lemmas.hpp"
#include "latchproof/oracle.hpp"
#include "latchproof/parser.hpp"
#include "latchproof/solver.hpp"
#include "latchproof/verifier.hpp"
#include "latchproof/waitfor.hpp"

namespace py = pybind11;
using namespace latchproof;

namespace {

py::dict verdict_dict(const Verdict& v) {
    py::dict d;
    d["proc"] = v.proc;
    d["verdict"] = to_string(v.kind);
    d["lemma"] = v.lemma;
    d["message"] = v.message;
    d["line"] = v.at.line;
    d["col"] = v.at.col;
    d["cycle"] = v.cycle;
    d["notes"] = v.notes;
    py::list trace;
    for (auto& t : v.trace) trace.append(py::make_tuple(t.span.line, t.label, print(t.state)));
    d["trace"] = trace;
    return d;
}

py::list verify(const std::string& source, bool variance, uint64_t seed) {
    Program p = parse_program(source);
    VerifyOptions o;
    o.variance = variance;
    o.seed = seed;
    std::vector<Verdict> vs;
    {
        py::gil_scoped_release nogil;
        vs = verify_program(p, o);
    }
    py::list out;
    for (auto& v : vs) out.append(verdict_dict(v));
    return out;
}

py::dict oracle(const std::string& source, size_t max_states, size_t max_steps) {
    Program p = parse_program(source);
    OracleBounds b;
    b.max_states = max_states;
    b.max_steps = max_steps;
    OracleReport r;
    {
        py::gil_scoped_release nogil;
        r = explore(p, b);
    }
    py::dict d;
    d["explored"] = r.explored;
    d["exhaustive"] = r.exhaustive;
    py::list outs;
    for (auto& o : r.outcomes) outs.append(py::make_tuple(to_string(o.kind), o.detail));
    d["outcomes"] = outs;
    return d;
}

py::dict entail_text(const std::string& lhs, const std::string& rhs, bool variance) {
    EntailmentOutcome r = entail({}, parse_formula(lhs), parse_formula(rhs), EntailOptions{variance});
    py::dict d;
    d["success"] = r.success;
    d["residue"] = r.success ? print(r.residue) : "";
    std::map<std::string, std::string> b;
    for (auto& [k, v] : r.bindings) b[k] = print(v);
    d["bindings"] = b;
    d["reason"] = r.failure_reason ? r.failure_reason->code + ": " + r.failure_reason->message : "";
    return d;
}

py::dict normalize_text(const std::string& f) {
    NormalizeResult r = normalize(parse_formula(f));
    py::dict d;
    d["state"] = print(r.state);
    d["error"] = r.error ? r.error->lemma.empty() ? to_string(r.error->kind) : r.error->lemma : "";
    d["fired"] = r.fired;
    return d;
}

}  // namespace

PYBIND11_MODULE(_latchproof, m) {
    m.doc() = "Bindings for the latchproof verifier";

    m.def("verify", &verify, py::arg("source"), py::arg("variance") = false, py::arg("seed") = 0,
          "Verify every procedure of a program; returns one dict per spec pair.");
    m.def("oracle", &oracle, py::arg("source"), py::arg("max_states") = 100000, py::arg("max_steps") = 64);
    m.def("entail", &entail_text, py::arg("lhs"), py::arg("rhs"), py::arg("variance") = false);
    m.def("normalize", &normalize_text, py::arg("formula"));
    m.def("format", [](const std::string& source) { return print(parse_program(source)); });
    m.def("is_sat", [](const std::string& pure) { return is_sat(parse_pure(pure)).status == SatStatus::Sat; });
    m.def("is_cyclic", [](const std::vector<std::pair<std::string, std::string>>& arcs) {
        return is_cyclic(std::set<Arc>(arcs.begin(), arcs.end()));
    });
    m.def("prelude", &prelude_source);

    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
}
