#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "latchproof/oracle.hpp"
#include "latchproof/verifier.hpp"

namespace latchproof {

enum class RunMode { Verify, Oracle, Both };

struct RunConfig {
    std::vector<std::string> files;
    RunMode mode = RunMode::Verify;
    bool variance = false;
    bool json = false;
    bool dump_trace = false;
    OracleBounds bounds;
    std::string smt_external;
    uint64_t seed = 0;
};

// State annotation per program point, one block per trace point.
std::string format_trace(const Verdict& v);

// Entry point behind the latchproof binary. Exit codes: 0 all verified and
// clean, 1 some error verdict or outcome, 2 parse or usage error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace latchproof
