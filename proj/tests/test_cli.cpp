// Copyright (c) slah contributors.
// SPDX-License-Identifier: Apache-2.0
//
// End-to-end checks of the command-line driver: verdict lines, exit codes,
// witnesses, benchmark CSV, and the external-backend plumbing.

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "test_support.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string output;
};

RunResult run(const std::string& command) {
    RunResult r;
    FILE* pipe = popen((command + " 2>/dev/null").c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::array<char, 512> buf;
    while (fgets(buf.data(), buf.size(), pipe)) r.output += buf.data();
    int status = pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

fs::path write_temp(const std::string& name, const std::string& contents) {
    fs::path dir = fs::temp_directory_path() / "slah-cli-tests";
    fs::create_directories(dir);
    fs::path file = dir / name;
    std::ofstream out(file);
    out << contents;
    return file;
}

const std::string kSatQuery =
    "(declare-var b)(declare-var e)"
    "(check-sat (and (< 0 b) (< b e)) (sep (hls b e inf)))\n";

const std::string kUnsatQuery =
    "(declare-var x)(declare-var y)"
    "(check-sat (and (= (+ x 5) y)) (sep (hls x y 2)))\n";

const std::string kValidEntail =
    "(declare-var x)(declare-var y)(declare-var z)"
    "(check-entail (true (sep (blk x y) (blk y z))) (true (sep (blk x z))))\n";

const std::string kInvalidEntail =
    "(declare-var x)(declare-var y)"
    "(check-entail ((and (< x y)) (sep (hls x y 3))) (true (sep (hls x y 2))))\n";

}  // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("verdict lines and exit codes") {
    auto sat = run(std::string(SLAH_BIN_PATH) + " " + write_temp("sat.slah", kSatQuery).string());
    CHECK(sat.exit_code == 0);
    CHECK(sat.output == "sat\n");

    auto unsat =
        run(std::string(SLAH_BIN_PATH) + " " + write_temp("unsat.slah", kUnsatQuery).string());
    CHECK(unsat.exit_code == 0);
    CHECK(unsat.output == "unsat\n");

    auto valid =
        run(std::string(SLAH_BIN_PATH) + " " + write_temp("valid.slah", kValidEntail).string());
    CHECK(valid.exit_code == 0);
    CHECK(valid.output == "valid\n");

    auto invalid = run(std::string(SLAH_BIN_PATH) + " " +
                       write_temp("invalid.slah", kInvalidEntail).string());
    CHECK(invalid.exit_code == 0);
    CHECK(invalid.output == "invalid\n");
}

TEST_CASE("usage and parse errors exit with 1") {
    CHECK(run(std::string(SLAH_BIN_PATH)).exit_code == 1);
    auto bad = run(std::string(SLAH_BIN_PATH) + " " +
                   write_temp("bad.slah", "(check-sat true (sep (pto a b)))").string());
    CHECK(bad.exit_code == 1);
    CHECK(run(std::string(SLAH_BIN_PATH) + " /no/such/file.slah").exit_code == 1);
}

TEST_CASE("backend failures exit with 2") {
    auto r = run(std::string(SLAH_BIN_PATH) + " --backend external:/no/such/solver " +
                 write_temp("sat2.slah", kSatQuery).string());
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("sat") == std::string::npos);
}

TEST_CASE("witness printing") {
    auto r = run(std::string(SLAH_BIN_PATH) + " --witness " +
                 write_temp("sat3.slah", kSatQuery).string());
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("sat\n") == 0);
    CHECK(r.output.find("model") != std::string::npos);
    CHECK(r.output.find("heap") != std::string::npos);
}

TEST_CASE("oracle cross-checking") {
    auto r = run(std::string(SLAH_BIN_PATH) + " --oracle-check 8 " +
                 write_temp("sat4.slah", kSatQuery).string() + " " +
                 write_temp("unsat4.slah", kUnsatQuery).string());
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("witness verified") != std::string::npos);
    CHECK(r.output.find("no model within bounds") != std::string::npos);
}

TEST_CASE("external backend via the shim and the environment variable") {
    auto direct = run(std::string(SLAH_BIN_PATH) + " --backend \"external:" + SLAH_SHIM_PATH +
                      "\" " + write_temp("sat5.slah", kSatQuery).string());
    CHECK(direct.exit_code == 0);
    CHECK(direct.output == "sat\n");

    auto via_env = run("SLAH_BACKEND=\"external:" + std::string(SLAH_SHIM_PATH) + "\" " +
                       std::string(SLAH_BIN_PATH) + " " +
                       write_temp("valid5.slah", kValidEntail).string());
    CHECK(via_env.exit_code == 0);
    CHECK(via_env.output == "valid\n");
}

TEST_CASE("flags for heuristics and parallelism are accepted") {
    fs::path f = write_temp("valid6.slah", kValidEntail);
    auto plain = run(std::string(SLAH_BIN_PATH) + " " + f.string());
    auto no_h = run(std::string(SLAH_BIN_PATH) + " --no-heuristics " + f.string());
    auto jobs = run(std::string(SLAH_BIN_PATH) + " --jobs 2 " + f.string());
    CHECK(plain.output == no_h.output);
    CHECK(plain.output == jobs.output);
}

TEST_CASE("benchmark runner emits per-suite csv") {
    fs::path dir = fs::temp_directory_path() / "slah-cli-tests" / "bench";
    fs::create_directories(dir / "mini");
    {
        std::ofstream(dir / "mini" / "a.slah") << kSatQuery;
        std::ofstream(dir / "mini" / "b.slah") << kValidEntail;
    }
    auto r = run(std::string(SLAH_BIN_PATH) + " --bench " + dir.string() + " --jobs 2");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("suite,instance,verdict,time_s,timeout") == 0);
    CHECK(r.output.find("mini,a.slah,sat,") != std::string::npos);
    CHECK(r.output.find("mini,b.slah,valid,") != std::string::npos);
}

TEST_SUITE_END();
