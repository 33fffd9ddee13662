#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>

#include "latchproof/ast.hpp"

namespace latchproof {

enum class SatStatus { Sat, Unsat, Unknown };

struct SolverResult {
    SatStatus status = SatStatus::Unknown;
    std::optional<std::map<std::string, int64_t>> model;
};

struct SolverConfig {
    int64_t iteration_cap = 100000;
    // Path of an external SMT-LIB 2 solver binary; empty disables it.
    std::string external_path;
};

void set_solver_config(const SolverConfig& cfg);
SolverConfig solver_config();

SolverResult is_sat(const Pure& p, bool want_model = false);
SatStatus implies_status(const Pure& a, const Pure& b);
// True only when the implication is proved; Unknown counts as false.
bool implies(const Pure& a, const Pure& b);
// Quantifier-free equivalent of ex vars. p over the integers. When a
// variable cannot be projected exactly (non-unit coefficients on both
// sides) it stays existentially bound in the result.
Pure eliminate(const Pure& p, const std::set<std::string>& vars);
// Evaluates a quantifier-free formula; unassigned variables read as 0.
bool evaluate(const Pure& p, const std::map<std::string, int64_t>& model);

std::string to_smtlib(const Pure& p);
// Runs the configured external solver on p. Returns Unknown when the
// solver is missing or answers something unexpected.
SatStatus external_check(const Pure& p, const std::string& path);

}  // namespace latchproof
