#include <doctest.h>

#include <json.hpp>
#include <sstream>

#include "latchproof/cli.hpp"

using namespace latchproof;

namespace {

struct Run {
    int rc;
    std::string out, err;
};

Run cli(std::vector<std::string> args) {
    args.insert(args.begin(), "latchproof");
    std::vector<const char*> argv;
    for (auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    int rc = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {rc, out.str(), err.str()};
}

std::string corpus(const char* name) { return std::string(LATCHPROOF_CORPUS_DIR) + "/" + name; }

}  // namespace

TEST_CASE("verify a correct program") {
    Run r = cli({"verify", corpus("two_threads.lp")});
    CHECK(r.rc == 0);
    CHECK(r.out.find("main: Verified") != std::string::npos);
}

TEST_CASE("json report for a racy program") {
    Run r = cli({"verify", corpus("race.lp"), "--json"});
    CHECK(r.rc == 1);
    auto j = nlohmann::json::parse(r.out);
    REQUIRE(j.is_array());
    bool found = false;
    for (auto& v : j)
        if (v["proc"] == "main") {
            found = true;
            CHECK(v["verdict"] == "RaceError");
            CHECK(v["lemma"] == "E1");
            CHECK(v["span"].contains("line"));
            CHECK(v["file"] == corpus("race.lp"));
        }
    CHECK(found);
}

TEST_CASE("both modes agree on the intra deadlock") {
    Run r = cli({"both", corpus("deadlock_intra.lp")});
    CHECK(r.rc == 1);
    CHECK(r.out.find("DeadlockError (E2)") != std::string::npos);
    CHECK(r.out.find("Deadlock") != std::string::npos);
    CHECK(r.out.find("agree") != std::string::npos);
    CHECK(r.out.find("disagree") == std::string::npos);
}

TEST_CASE("usage and input errors") {
    CHECK(cli({"check", corpus("two_threads.lp")}).rc == 2);
    CHECK(cli({"verify"}).rc == 2);
    CHECK(cli({"verify", "/nonexistent/file.lp"}).rc == 2);
    CHECK(cli({"oracle", corpus("sender_receiver.lp")}).rc == 2);
    CHECK(cli({"verify", corpus("two_threads.lp"), "--max-states", "0"}).rc == 2);
}

TEST_CASE("variance flag") {
    CHECK(cli({"verify", corpus("sender_receiver.lp")}).rc == 1);
    CHECK(cli({"verify", corpus("sender_receiver.lp"), "--variance"}).rc == 0);
}

TEST_CASE("trace dump") {
    Run r = cli({"verify", corpus("two_threads.lp"), "--dump-trace"});
    CHECK(r.rc == 0);
    CHECK(r.out.find("CNT(c,-1)") != std::string::npos);
    Run j = cli({"verify", corpus("two_threads.lp"), "--dump-trace", "--json"});
    auto doc = nlohmann::json::parse(j.out);
    CHECK(doc[0].contains("trace"));
    CHECK(doc[0]["trace"][0].contains("state"));
}

TEST_CASE("human and json outputs report the same verdicts") {
    std::vector<std::string> files{corpus("cone.lp"), corpus("race.lp"), corpus("deadlock_inter.lp")};
    std::vector<std::string> args{"verify"};
    args.insert(args.end(), files.begin(), files.end());
    Run human = cli(args);
    args.push_back("--json");
    Run machine = cli(args);
    CHECK(human.rc == machine.rc);
    std::set<std::string> a, b;
    std::istringstream in(human.out);
    for (std::string line; std::getline(in, line);)
        if (line.rfind("  ", 0) != 0) {
            auto colon = line.find(": ");
            auto rest = line.substr(colon + 2);
            auto proc_end = rest.find(": ");
            std::string kind = rest.substr(proc_end + 2);
            kind = kind.substr(0, kind.find_first_of(" "));
            a.insert(line.substr(0, colon) + "|" + rest.substr(0, proc_end) + "|" + kind);
        }
    for (auto& v : nlohmann::json::parse(machine.out))
        b.insert(v["file"].get<std::string>() + "|" + v["proc"].get<std::string>() + "|" + v["verdict"].get<std::string>());
    CHECK(a == b);
    Run again = cli(args);
    CHECK(again.out == machine.out);
}
