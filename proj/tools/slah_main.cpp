// Copyright (c) slah contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Command-line driver: decides .slah satisfiability and entailment queries,
// optionally cross-checks answers against the bounded oracle, and runs
// benchmark directories with a CSV report.

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "slah/entail.hpp"
#include "slah/oracle.hpp"
#include "slah/parser.hpp"
#include "slah/sat.hpp"

namespace fs = std::filesystem;
using namespace slah;

namespace {

constexpr int kExitSolved = 0;
constexpr int kExitUsage = 1;
constexpr int kExitBackend = 2;

struct Options {
    std::string backend = "internal";
    double timeout_s = 0;  // 0: none (bench mode defaults to 60)
    bool witness = false;
    std::uint64_t oracle_check = 0;  // 0: off
    std::string bench_dir;
    bool no_heuristics = false;
    unsigned jobs = 1;
    std::vector<std::string> files;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

Deadline make_deadline(double seconds) {
    if (seconds <= 0) return {};
    return deadline_after(std::chrono::milliseconds(static_cast<long long>(seconds * 1000)));
}

void print_model(std::ostream& os, const StackModel& model) {
    os << "model";
    for (const auto& [v, n] : model)
        if (v.find('!') == std::string::npos) os << " " << v << "=" << n;
    os << "\n";
}

struct RunOutcome {
    std::string verdict;  // sat/unsat/valid/invalid
    bool timed_out = false;
};

// Decides one parsed query; prints nothing.
RunOutcome run_query(const Query& q, LiaSolver& solver, const Options& opts,
                     const Deadline& deadline, SatResult* sat_out, EntailResult* ent_out) {
    RunOutcome out;
    if (q.kind == Query::Kind::CheckSat) {
        SatResult r = decide_sat(q.antecedent, solver, deadline);
        out.verdict = r ? "sat" : "unsat";
        if (sat_out) *sat_out = std::move(r);
    } else {
        EntailOptions eopts;
        eopts.heuristics = !opts.no_heuristics;
        eopts.deadline = deadline;
        eopts.jobs = opts.jobs;
        EntailResult r = decide_entail(q.antecedent, *q.consequent, solver, eopts);
        out.verdict = r.valid ? "valid" : "invalid";
        if (ent_out) *ent_out = std::move(r);
    }
    return out;
}

// Re-validates a verdict with the bounded reference procedures. Returns
// false on a contradiction.
bool oracle_check(const Query& q, const RunOutcome& out, const SatResult& sat,
                  std::uint64_t bound) {
    oracle::Bounds bounds(bound, bound);
    if (q.kind == Query::Kind::CheckSat) {
        if (out.verdict == "sat") {
            if (!oracle::holds(sat->model, sat->heap, q.antecedent.qf())) {
                std::cerr << "oracle-check: witness fails the semantics\n";
                return false;
            }
            std::cout << "oracle-check: witness verified\n";
            return true;
        }
        if (oracle::brute_sat(q.antecedent, bounds)) {
            std::cerr << "oracle-check: bounded search found a model despite unsat\n";
            return false;
        }
        std::cout << "oracle-check: no model within bounds\n";
        return true;
    }
    auto counter = oracle::brute_entail(q.antecedent, *q.consequent, bounds);
    if (out.verdict == "valid") {
        if (counter) {
            std::cerr << "oracle-check: bounded search found a counterexample despite valid\n";
            return false;
        }
        std::cout << "oracle-check: no counterexample within bounds\n";
        return true;
    }
    if (counter)
        std::cout << "oracle-check: counterexample confirmed\n";
    else
        std::cout << "oracle-check: counterexample not confirmed within bounds\n";
    return true;
}

int run_files(const Options& opts) {
    SolverPtr backend = make_solver(opts.backend);
    for (const auto& path : opts.files) {
        Query q;
        try {
            q = parse_query(read_file(path));
        } catch (const ParseError& e) {
            std::cerr << path << ":" << e.what() << "\n";
            return kExitUsage;
        } catch (const InputError& e) {
            std::cerr << path << ": " << e.what() << "\n";
            return kExitUsage;
        }
        CachingSolver solver(backend);
        SatResult sat;
        EntailResult ent;
        RunOutcome out;
        try {
            out = run_query(q, solver, opts, make_deadline(opts.timeout_s), &sat, &ent);
        } catch (const BackendError& e) {
            std::cerr << path << ": " << e.what() << "\n";
            return kExitBackend;
        } catch (const InputError& e) {
            std::cerr << path << ": " << e.what() << "\n";
            return kExitUsage;
        } catch (const Error& e) {
            std::cerr << path << ": " << e.what() << "\n";
            return kExitBackend;
        }
        std::cout << out.verdict << "\n";
        if (opts.witness) {
            if (q.kind == Query::Kind::CheckSat && sat) {
                print_model(std::cout, sat->model);
                std::cout << "heap " << sat->heap << "\n";
            }
            if (q.kind == Query::Kind::CheckEntail && ent.why) {
                if (ent.why->preorder)
                    std::cout << "preorder " << *ent.why->preorder << "\n";
                if (ent.why->model) print_model(std::cout, *ent.why->model);
                for (const auto& line : ent.why->trace) std::cout << "because " << line << "\n";
            }
        }
        if (opts.oracle_check > 0 && !oracle_check(q, out, sat, opts.oracle_check))
            return kExitBackend;
    }
    return kExitSolved;
}

struct BenchInstance {
    std::string suite;
    fs::path path;
    std::string verdict;
    double time_s = 0;
    bool timed_out = false;
    std::string error;
};

int run_bench(const Options& opts) {
    std::vector<BenchInstance> instances;
    fs::path root(opts.bench_dir);
    if (!fs::is_directory(root)) {
        std::cerr << opts.bench_dir << " is not a directory\n";
        return kExitUsage;
    }
    for (const auto& entry : fs::directory_iterator(root)) {
        if (entry.is_directory()) {
            for (const auto& file : fs::directory_iterator(entry.path()))
                if (file.path().extension() == ".slah")
                    instances.push_back({entry.path().filename().string(), file.path(), "", 0, false, ""});
        } else if (entry.path().extension() == ".slah") {
            instances.push_back({root.filename().string(), entry.path(), "", 0, false, ""});
        }
    }
    std::sort(instances.begin(), instances.end(), [](const auto& a, const auto& b) {
        return std::tie(a.suite, a.path) < std::tie(b.suite, b.path);
    });
    if (instances.empty()) {
        std::cerr << "no .slah instances under " << opts.bench_dir << "\n";
        return kExitUsage;
    }

    double per_query = opts.timeout_s > 0 ? opts.timeout_s : 60.0;
    SolverPtr backend = make_solver(opts.backend);

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= instances.size()) return;
            BenchInstance& inst = instances[i];
            Options single = opts;
            single.jobs = 1;  // query-level parallelism only
            auto start = std::chrono::steady_clock::now();
            try {
                Query q = parse_query(read_file(inst.path.string()));
                CachingSolver solver(backend);
                RunOutcome out =
                    run_query(q, solver, single, make_deadline(per_query), nullptr, nullptr);
                inst.verdict = out.verdict;
            } catch (const BackendError&) {
                inst.timed_out = true;
            } catch (const Error& e) {
                inst.error = e.what();
            }
            inst.time_s =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        }
    };
    unsigned n = std::max(1u, std::min<unsigned>(opts.jobs, instances.size()));
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    std::cout << "suite,instance,verdict,time_s,timeout\n";
    for (const auto& inst : instances) {
        std::cout << inst.suite << "," << inst.path.filename().string() << ","
                  << (inst.timed_out ? "" : (inst.error.empty() ? inst.verdict : "error")) << ","
                  << inst.time_s << "," << (inst.timed_out ? "true" : "false") << "\n";
    }

    // Per-suite summary in the shape of the usual benchmark tables; timing
    // statistics exclude timeout instances.
    std::map<std::string, std::vector<const BenchInstance*>> by_suite;
    for (const auto& inst : instances) by_suite[inst.suite].push_back(&inst);
    std::cerr << "suite\tinstances\ttimeouts\tavg_s\tmin_s\tmax_s\n";
    bool hard_error = false;
    for (const auto& [suite, list] : by_suite) {
        std::size_t timeouts = 0;
        double total = 0, lo = 0, hi = 0;
        std::size_t counted = 0;
        for (const auto* inst : list) {
            if (!inst->error.empty()) hard_error = true;
            if (inst->timed_out) {
                ++timeouts;
                continue;
            }
            total += inst->time_s;
            lo = counted == 0 ? inst->time_s : std::min(lo, inst->time_s);
            hi = counted == 0 ? inst->time_s : std::max(hi, inst->time_s);
            ++counted;
        }
        std::cerr << suite << "\t" << list.size() << "\t" << timeouts << "\t"
                  << (counted ? total / counted : 0) << "\t" << lo << "\t" << hi << "\n";
    }
    return hard_error ? kExitBackend : kExitSolved;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"slah: satisfiability and entailment for symbolic heaps with heap lists"};
    Options opts;
    app.add_option("--backend", opts.backend, "Arithmetic backend: internal or external:<cmd>")
        ->envname("SLAH_BACKEND");
    app.add_option("--timeout", opts.timeout_s, "Per-query timeout in seconds");
    app.add_flag("--witness", opts.witness, "Print the model and heap (or refutation) found");
    app.add_option("--oracle-check", opts.oracle_check,
                   "Re-validate answers with the bounded oracle up to this address bound");
    app.add_option("--bench", opts.bench_dir, "Run every .slah under a directory; CSV on stdout");
    app.add_flag("--no-heuristics", opts.no_heuristics, "Disable entailment pre-decomposition");
    app.add_option("--jobs", opts.jobs, "Worker threads for benchmarks and preorder checking");
    app.add_option("files", opts.files, "Query files (.slah)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitSolved : kExitUsage;
    }

    try {
        if (!opts.bench_dir.empty()) return run_bench(opts);
        if (opts.files.empty()) {
            std::cerr << "no input files (see --help)\n";
            return kExitUsage;
        }
        return run_files(opts);
    } catch (const InputError& e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return kExitBackend;
    }
}
