#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "latchproof/ast.hpp"

namespace latchproof {

struct OracleBounds {
    size_t max_threads = 6;
    size_t max_states = 100000;
    size_t max_steps = 64;  // per thread
};

enum class OutcomeKind { Clean, Race, Deadlock, Leak, AssertFailure };
const char* to_string(OutcomeKind k);

struct Outcome {
    OutcomeKind kind = OutcomeKind::Clean;
    std::string detail;

    bool operator<(const Outcome& o) const {
        return kind != o.kind ? kind < o.kind : detail < o.detail;
    }
    bool operator==(const Outcome& o) const { return kind == o.kind && detail == o.detail; }
};

struct OracleReport {
    std::string entry;
    size_t explored = 0;   // distinct states visited
    size_t terminals = 0;  // states with no successor
    std::set<Outcome> outcomes;
    bool exhaustive = true;

    bool has(OutcomeKind k) const;
    std::set<OutcomeKind> kinds() const;
    bool clean() const { return kinds() == std::set<OutcomeKind>{OutcomeKind::Clean}; }
};

// Work item on a thread's continuation stack.
struct Item {
    enum Kind { Stmt, SeqRest, CallEnd, ParWait } kind = Stmt;
    const Expr* e = nullptr;
    size_t index = 0;   // next child for SeqRest
    int dest = -1;      // result slot for CallEnd
    int saved_env = 0;  // caller environment for CallEnd
};

struct ThreadState {
    std::vector<Item> kont;  // top is back()
    int env = 0;
    int parent = -1;
    int waiting = 0;  // children of a parallel block still running
    size_t steps = 0;
    bool done = false;
};

struct Cell {
    std::string ctor;
    std::vector<int64_t> vals;
};

struct ThreadHandle {
    std::string proc;
    int tid = -1;  // -1 until forked
};

struct ConcreteState {
    std::vector<std::optional<int64_t>> slots;
    std::vector<std::map<std::string, int>> envs;  // name -> slot
    std::map<int64_t, Cell> heap;
    std::vector<int64_t> latches;  // count per latch id
    std::vector<ThreadHandle> handles;
    std::vector<ThreadState> threads;
    int64_t next_loc = 1;

    std::string key() const;
};

// Read and write sets of one step. Keys are "slot:N", "loc:N" and "latch:N";
// freshly allocated locations go to `fresh` and never conflict.
struct Footprint {
    std::set<std::string> reads, writes, fresh;
    bool conflicts(const Footprint& o) const;
};

// Initial state running procedure `entry` with no arguments.
ConcreteState initial_state(const Program& p, const std::string& entry = "main");

enum class StepStatus { Ok, Blocked, Fault, AssertFailure, Idle };

struct StepResult {
    StepStatus status = StepStatus::Ok;
    ConcreteState next;
    Footprint fp;
    Span at;
    std::string message;
};

// Executes the next primitive of thread tid. Idle when the thread is done or
// waits for its parallel children.
StepResult step(const Program& p, const ConcreteState& s, int tid);

// Footprint of thread tid's next primitive in s.
Footprint footprint(const Program& p, const ConcreteState& s, int tid);

// Depth-first enumeration of all schedules with memoized states. Leaks are
// reported only when the entry procedure has an emp contract.
OracleReport explore(const Program& p, const OracleBounds& b = {}, const std::string& entry = "main");

// Names of `with` payloads that still mention logical variables.
std::vector<std::string> symbolic_payloads(const Program& p);

}  // namespace latchproof
