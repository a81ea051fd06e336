// Copyright (c) slah contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Generates random .slah query files for scalability testing: plain random
// satisfiability instances, random entailment pairs, and variants with
// heap-list atoms replaced by their unfoldings.

#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "slah/oracle.hpp"
#include "slah/parser.hpp"

namespace fs = std::filesystem;
using namespace slah;

namespace {

Query to_sat_query(const SymbolicHeap& h) {
    Query q;
    q.kind = Query::Kind::CheckSat;
    for (const auto& v : h.all_vars()) q.declarations.push_back(v);
    q.antecedent = h;
    return q;
}

std::optional<Query> to_entail_query(const SymbolicHeap& ante, std::uint64_t seed,
                                     const oracle::GenParams& base) {
    std::set<VarId> fv = ante.fv();
    if (fv.empty()) return std::nullopt;
    oracle::GenParams cparams = base;
    cparams.max_atoms = std::max(1u, base.max_atoms - 1);
    cparams.var_pool.assign(fv.begin(), fv.end());
    cparams.allow_existential = false;
    cparams.unfold_depth = 0;
    SymbolicHeap conseq = oracle::random_formula(seed, cparams);

    Query q;
    q.kind = Query::Kind::CheckEntail;
    std::set<VarId> all = ante.all_vars();
    for (const auto& v : conseq.all_vars()) all.insert(v);
    q.declarations.assign(all.begin(), all.end());
    q.antecedent = ante;
    q.consequent = std::move(conseq);
    return q;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Generate random .slah instances"};
    std::string out_dir;
    std::string kind = "sat";
    std::uint64_t seed = 1;
    unsigned count = 10;
    oracle::GenParams params;
    app.add_option("--out", out_dir, "Output directory")->required();
    app.add_option("--kind", kind, "sat or ent")->check(CLI::IsMember({"sat", "ent"}));
    app.add_option("--seed", seed, "Base seed");
    app.add_option("--count", count, "Number of instances");
    app.add_option("--max-atoms", params.max_atoms, "Atoms per formula");
    app.add_option("--max-vars", params.max_vars, "Variables per formula");
    app.add_option("--max-const", params.max_const, "Largest constant");
    app.add_option("--unfold", params.unfold_depth, "Heap-list unfolding depth");
    CLI11_PARSE(app, argc, argv);

    fs::create_directories(out_dir);
    unsigned written = 0;
    for (std::uint64_t i = 0; written < count && i < std::uint64_t{count} * 50; ++i) {
        std::uint64_t s = seed + i;
        SymbolicHeap h = oracle::random_formula(s, params);
        std::optional<Query> q;
        if (kind == "sat") {
            q = to_sat_query(h);
        } else {
            q = to_entail_query(h, s * 2654435761u + 1, params);
            if (q && q->consequent->spatial().empty() && h.spatial().empty()) q.reset();
        }
        if (!q) continue;
        char name[32];
        std::snprintf(name, sizeof name, "%s-%03u.slah", kind.c_str(), written);
        std::ofstream out(fs::path(out_dir) / name);
        out << print_query(*q);
        ++written;
    }
    std::cout << "wrote " << written << " instances to " << out_dir << "\n";
    return written == count ? 0 : 1;
}
