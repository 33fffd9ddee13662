#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "latchproof/ast.hpp"

namespace latchproof {

// Resource bindings D: resource variable -> formula.
using Bindings = std::map<std::string, Formula>;

struct EntailOptions {
    // Off: latch payloads are unified (renaming only). On: LatchIn payloads
    // are checked contravariantly and LatchOut payloads covariantly.
    bool variance = false;
};

// Result for one antecedent disjunct.
struct DisjunctOutcome {
    Bindings bindings;
    std::map<std::string, LinExpr> inst;
    std::map<std::string, Perm> perm_inst;
    Disjunct residue;
    int matched_disjunct = 0;  // index into the consequent
};

struct EntailmentOutcome {
    bool success = false;
    Bindings bindings;      // D, merged over antecedent disjuncts
    Formula residue = Formula::false_();
    std::optional<Diagnostic> failure_reason;
    std::vector<DisjunctOutcome> parts;
    std::vector<std::string> notes;
};

// E |- A ⊑ C ~> (D, residue). E names consequent variables that may be
// instantiated without leaving an equation in the residue.
EntailmentOutcome entail(const std::set<std::string>& E, const Formula& A, const Formula& C,
                         const EntailOptions& opts = {});

Pure free_eqn(const std::map<std::string, LinExpr>& rho, const std::set<std::string>& E);

struct AddVarResult {
    std::string var;
    Formula payload;                 // Φ3
    std::optional<HeapAtom> leftover;  // the predicate carrying var, when fresh
    bool fresh = false;
};
// `pred` must be a LatchIn or LatchOut atom.
AddVarResult add_var(const HeapAtom& pred);

Formula apply(const Formula& f, const std::string& var, const Formula& def);
Formula subst(const Bindings& D, const Formula& f);

enum class Polarity { In, Out, Neutral };

struct ResourceOutcome {
    bool success = false;
    Bindings bindings;
    std::map<std::string, LinExpr> rho;
    Formula leftover = Formula::emp();  // unmatched part of the antecedent payload
    std::optional<Diagnostic> failure;
};

// Payload entailment used by latch-predicate matching. With variance on,
// In checks phi2 |- phi1 and Out checks phi1 |- phi2.
ResourceOutcome resource_entail(const std::set<std::string>& E, const Formula& phi1, const Formula& phi2,
                                Polarity pol, bool variance);

// Perm variables occurring in a formula, payloads included.
std::set<std::string> perm_vars(const Formula& f);

}  // namespace latchproof
