#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "latchproof/ast.hpp"
#include "latchproof/entail.hpp"

namespace latchproof {

enum class VerdictKind { Verified, RaceError, DeadlockError, LeakError, SpecFailure };
const char* to_string(VerdictKind k);

// An inconsistency detected in a symbolic state.
struct LemmaError {
    VerdictKind kind = VerdictKind::SpecFailure;
    std::string lemma;  // E1, E2, E3 or empty
    std::string message;
    std::vector<Arc> cycle;  // E3 only
};

struct NormalizeResult {
    Formula state;
    std::optional<LemmaError> error;
    std::vector<std::string> fired;  // lemma names in application order
};

// Rewrites every disjunct to a fixpoint of N2, N1, N3, DeadIdem, DeadRelease,
// W3 and W1, checking consistency after each step. Disjuncts with an
// unsatisfiable pure part are dropped.
NormalizeResult normalize(const Formula& f);

std::optional<LemmaError> check_consistency(const Formula& f);
std::optional<LemmaError> check_consistency(const Disjunct& d);

// Adds c2->c1 to every WAIT atom whenever CNT(c1,a) & a>0 and CNT(c2,-1)
// coexist in a disjunct.
Formula apply_w2(const Formula& f, bool* changed = nullptr);

struct SplitOutcome {
    bool ok = false;
    std::vector<Formula> branches;
    Formula frame = Formula::emp();
    std::optional<Diagnostic> failure;
    int failed_target = -1;
};

// Distributes delta among the targets (one per parallel branch). Counter
// atoms are split by demanded count, permissions evenly over the branches
// that demand the latch plus the frame, and WAIT atoms go to everyone.
SplitOutcome split_for(const Formula& delta, const std::vector<Formula>& targets, const EntailOptions& opts = {});

struct RSItem {
    bool plus = true;
    std::string payload;  // printed atom

    bool operator<(const RSItem& o) const { return std::tie(plus, payload) < std::tie(o.plus, o.payload); }
    bool operator==(const RSItem& o) const { return plus == o.plus && payload == o.payload; }
};

std::vector<RSItem> rs(const Formula& f);
// RS(post) minus RS(pre), with opposite-polarity pairs cancelled.
std::vector<RSItem> rs_net(const Formula& pre, const Formula& post);

struct LemmaSpec {
    std::string name;
    Formula lhs;
    Formula rhs;  // unused when error is set
    bool error = false;
};

const std::vector<LemmaSpec>& lemma_table();
// Names of non-error lemmas whose rs_net is non-empty.
std::vector<std::string> rs_violations();

// Sum of the concrete CNT permissions held for each latch.
std::map<std::string, Frac> cnt_permissions(const Disjunct& d);

}  // namespace latchproof
