#include "latchproof/cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <future>
#include <json.hpp>
#include <ostream>
#include <sstream>

#include "latchproof/parser.hpp"
#include "latchproof/solver.hpp"

namespace latchproof {

using nlohmann::json;

std::string format_trace(const Verdict& v) {
    std::ostringstream os;
    for (auto& t : v.trace) {
        std::string label = t.label;
        while (!label.empty() && (label.back() == '\n' || label.back() == ' ')) label.pop_back();
        os << "  " << t.span.line << ":" << t.span.col << "  " << label << "\n";
        os << "      { " << print(t.state) << " }\n";
    }
    return os.str();
}

namespace {

struct FileResult {
    std::string file;
    std::string parse_error;
    std::vector<std::string> usage_errors;
    std::vector<Verdict> verdicts;
    std::optional<OracleReport> oracle;
    std::string oracle_error;
};

bool read_file(const std::string& path, std::string& text) {
    std::ifstream in(path);
    if (!in) return false;
    std::stringstream ss;
    ss << in.rdbuf();
    text = ss.str();
    return true;
}

FileResult run_file(const std::string& path, const RunConfig& cfg) {
    FileResult r;
    r.file = path;
    std::string text;
    if (!read_file(path, text)) {
        r.parse_error = "cannot read " + path;
        return r;
    }
    Program prog;
    try {
        prog = parse_program(SourceFile{path, text});
    } catch (const ParseError& e) {
        r.parse_error = path + ":" + e.what();
        return r;
    }
    for (auto& d : check_wellformed(prog))
        r.usage_errors.push_back(path + ":" + std::to_string(d.span.line) + ":" + std::to_string(d.span.col) + ": " +
                                 d.code + ": " + d.message);
    if (!r.usage_errors.empty()) return r;

    if (cfg.mode != RunMode::Oracle) {
        VerifyOptions opts;
        opts.variance = cfg.variance;
        opts.seed = cfg.seed;
        r.verdicts = verify_program(prog, opts);
    }
    if (cfg.mode != RunMode::Verify) {
        auto sym = symbolic_payloads(prog);
        if (!sym.empty()) {
            for (auto& s : sym) r.usage_errors.push_back(path + ": oracle needs a concrete latch payload (" + s + ")");
            return r;
        }
        try {
            r.oracle = explore(prog, cfg.bounds);
        } catch (const std::exception& e) {
            r.oracle_error = e.what();
        }
    }
    return r;
}

json verdict_json(const std::string& file, const Verdict& v, bool with_trace) {
    json j;
    j["file"] = file;
    j["proc"] = v.proc;
    j["verdict"] = to_string(v.kind);
    if (!v.lemma.empty()) j["lemma"] = v.lemma;
    j["span"] = {{"line", v.at.line}, {"col", v.at.col}};
    if (!v.message.empty()) j["message"] = v.message;
    if (!v.cycle.empty()) {
        json c = json::array();
        for (auto& a : v.cycle) c.push_back({a.first, a.second});
        j["cycle"] = c;
    }
    if (!v.notes.empty()) j["notes"] = v.notes;
    if (with_trace) {
        json t = json::array();
        for (auto& p : v.trace)
            t.push_back({{"span", {{"line", p.span.line}, {"col", p.span.col}}},
                         {"label", p.label},
                         {"state", print(p.state)}});
        j["trace"] = t;
    }
    return j;
}

json oracle_json(const std::string& file, const OracleReport& o) {
    json outs = json::array();
    for (auto& x : o.outcomes) outs.push_back({{"kind", to_string(x.kind)}, {"detail", x.detail}});
    return {{"file", file},
            {"proc", o.entry},
            {"oracle", {{"explored", o.explored}, {"terminals", o.terminals}, {"exhaustive", o.exhaustive}, {"outcomes", outs}}}};
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    std::string mode = "verify";
    CLI::App app{"Static verifier for CountDownLatch programs"};
    app.add_option("mode", mode, "verify, oracle or both")->required()->check(CLI::IsMember({"verify", "oracle", "both"}));
    app.add_option("files", cfg.files, "Program files")->required();
    app.add_flag("--variance", cfg.variance, "Use co/contravariant payload subsumption");
    app.add_flag("--json", cfg.json, "Machine-readable output");
    app.add_flag("--dump-trace", cfg.dump_trace, "Print the symbolic state at each program point");
    app.add_option("--max-states", cfg.bounds.max_states, "Oracle state bound")->check(CLI::PositiveNumber);
    app.add_option("--max-steps", cfg.bounds.max_steps, "Oracle per-thread step bound")->check(CLI::PositiveNumber);
    app.add_option("--smt", cfg.smt_external, "External SMT-LIB 2 solver binary");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e, out, err);
        return rc == 0 ? 0 : 2;
    }
    cfg.mode = mode == "verify" ? RunMode::Verify : mode == "oracle" ? RunMode::Oracle : RunMode::Both;
    if (const char* s = std::getenv("LATCHPROOF_SEED")) {
        try {
            cfg.seed = std::stoull(s);
        } catch (const std::exception&) {
            err << "LATCHPROOF_SEED must be a non-negative integer\n";
            return 2;
        }
    }
    if (!cfg.smt_external.empty()) {
        SolverConfig sc = solver_config();
        sc.external_path = cfg.smt_external;
        set_solver_config(sc);
    }

    std::vector<std::future<FileResult>> jobs;
    for (auto& f : cfg.files) jobs.push_back(std::async(std::launch::async, run_file, f, cfg));

    int rc = 0;
    json all = json::array();
    for (auto& job : jobs) {
        FileResult r = job.get();
        if (!r.parse_error.empty()) {
            err << r.parse_error << "\n";
            rc = 2;
            continue;
        }
        if (!r.usage_errors.empty()) {
            for (auto& u : r.usage_errors) err << u << "\n";
            rc = 2;
            continue;
        }
        for (auto& v : r.verdicts) {
            if (v.kind != VerdictKind::Verified && rc == 0) rc = 1;
            if (cfg.json) {
                all.push_back(verdict_json(r.file, v, cfg.dump_trace));
                continue;
            }
            out << r.file << ": " << v.proc << ": " << to_string(v.kind);
            if (!v.lemma.empty()) out << " (" << v.lemma << ")";
            if (v.kind != VerdictKind::Verified) out << " at " << v.at.line << ":" << v.at.col << ": " << v.message;
            out << "\n";
            for (auto& n : v.notes) out << "  note: " << n << "\n";
            if (cfg.dump_trace) out << format_trace(v);
        }
        if (!r.oracle_error.empty()) {
            err << r.file << ": oracle: " << r.oracle_error << "\n";
            rc = 2;
        } else if (r.oracle) {
            const OracleReport& o = *r.oracle;
            if (!o.clean() && rc == 0) rc = 1;
            if (cfg.json) {
                all.push_back(oracle_json(r.file, o));
            } else {
                out << r.file << ": oracle: ";
                bool first = true;
                for (auto k : o.kinds()) {
                    out << (first ? "" : ", ") << to_string(k);
                    first = false;
                }
                out << " (" << o.explored << " states" << (o.exhaustive ? ", exhaustive" : ", bound hit") << ")\n";
                for (auto& x : o.outcomes)
                    if (x.kind != OutcomeKind::Clean) out << "  " << to_string(x.kind) << ": " << x.detail << "\n";
            }
            if (cfg.mode == RunMode::Both && !cfg.json) {
                bool verified = true;
                for (auto& v : r.verdicts)
                    if (v.kind != VerdictKind::Verified) verified = false;
                bool agree = verified == o.clean();
                out << r.file << ": verifier and oracle " << (agree ? "agree" : "disagree") << "\n";
            }
        }
    }
    if (cfg.json) out << all.dump(2) << "\n";
    return rc;
}

}  // namespace latchproof
