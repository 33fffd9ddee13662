#pragma once

#include <optional>
#include <string>
#include <vector>

#include "latchproof/ast.hpp"
#include "latchproof/lemmas.hpp"

namespace latchproof {

struct TracePoint {
    Span span;
    std::string label;  // the statement or rule that produced the state
    Formula state;
};

struct Verdict {
    std::string proc;
    int spec_index = 0;
    VerdictKind kind = VerdictKind::Verified;
    Span at;
    std::vector<TracePoint> trace;
    std::string lemma;  // E1, E2, E3 when an inconsistency lemma fired
    std::string message;
    std::vector<Arc> cycle;
    std::vector<std::string> notes;

    // Error verdicts come from an over-approximation and are potential errors.
    bool potential() const { return kind != VerdictKind::Verified; }
};

struct VerifyOptions {
    bool variance = false;
    bool parallel = true;
    uint64_t seed = 0;  // start value of the fresh-name counters
};

// Specifications of create_latch, countDown and await.
const Program& prelude();
const char* prelude_source();

// Verifies every procedure with a body against each of its spec pairs.
std::vector<Verdict> verify_program(const Program& p, const VerifyOptions& opts = {});

struct ExecOutcome {
    bool ok = false;
    Formula state = Formula::false_();
    std::optional<Verdict> error;
    std::vector<TracePoint> trace;
};

// Runs one statement from delta inside the context of program p. Program
// variables are all names that are not logical.
ExecOutcome exec(const Program& p, const Formula& delta, const ExprPtr& e, const VerifyOptions& opts = {});

// LeakError when the residue still holds latch predicates or thread atoms,
// and with strict_heap also when it holds points-to cells.
std::optional<Verdict> check_leak(const Formula& residue, bool strict_heap = false);

}  // namespace latchproof
