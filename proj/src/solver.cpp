// Copyright (c) slah contributors.
// SPDX-License-Identifier: Apache-2.0
#include "slah/solver.hpp"

#include <mutex>
#include <sstream>
#include <unordered_map>

#include "slah/internal_solver.hpp"
#include "slah/smtlib_solver.hpp"

namespace slah {

std::optional<StackModel> check_sat(const lia::Formula& f, LiaSolver& solver,
                                    const Deadline& deadline) {
    if (lia::classify(f) == lia::Fragment::Other)
        throw InputError("formula is outside the QFPA/EPA fragments");
    // Existentials become free variables of the matrix under fresh names, so
    // the model carries their witness values.
    lia::Formula matrix = lia::prenex_matrix(f);
    auto model = solver.solve_qf(matrix, deadline);
    if (!model) return std::nullopt;
    if (!lia::evaluate(matrix, *model))
        throw BackendError("backend '" + solver.name() + "' returned a model that fails evaluation");
    return model;
}

bool check_valid_implication(const lia::Formula& hyp, const lia::Formula& concl,
                             LiaSolver& solver, const Deadline& deadline) {
    lia::Formula refutation = lia::Formula::conj({hyp, lia::Formula::neg(concl)});
    return !check_sat(refutation, solver, deadline).has_value();
}

SolverPtr make_solver(const std::string& spec) {
    if (spec == "internal") return std::make_shared<InternalSolver>();
    if (spec.rfind("external:", 0) == 0) {
        std::string command = spec.substr(9);
        if (command.empty()) throw InputError("external backend needs a command: external:<cmd>");
        return std::make_shared<SmtLibSolver>(command);
    }
    throw InputError("unknown backend '" + spec + "' (expected internal or external:<cmd>)");
}

struct CachingSolver::Impl {
    SolverPtr inner;
    std::mutex mutex;
    std::unordered_map<std::string, std::optional<StackModel>> cache;
    std::size_t hits = 0;
    std::size_t misses = 0;
};

CachingSolver::CachingSolver(SolverPtr inner) : impl_(std::make_unique<Impl>()) {
    impl_->inner = std::move(inner);
}

CachingSolver::~CachingSolver() = default;

std::optional<StackModel> CachingSolver::solve_qf(const lia::Formula& matrix,
                                                  const Deadline& deadline) {
    std::ostringstream key;
    key << matrix;
    {
        std::lock_guard<std::mutex> lock(impl_->mutex);
        auto it = impl_->cache.find(key.str());
        if (it != impl_->cache.end()) {
            ++impl_->hits;
            return it->second;
        }
    }
    auto result = impl_->inner->solve_qf(matrix, deadline);
    std::lock_guard<std::mutex> lock(impl_->mutex);
    ++impl_->misses;
    impl_->cache.emplace(key.str(), result);
    return result;
}

std::string CachingSolver::name() const { return impl_->inner->name(); }
std::size_t CachingSolver::hits() const { return impl_->hits; }
std::size_t CachingSolver::misses() const { return impl_->misses; }

}  // namespace slah
