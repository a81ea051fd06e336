// Copyright (c) slah contributors.
// SPDX-License-Identifier: Apache-2.0
//
// A minimal SMT-LIB 2 server over the internal LIA engine, reading a script
// on stdin and answering on stdout. It exists so the external-backend code
// path can be exercised end to end without a system SMT solver, and doubles
// as a usable --backend external target.
//
// Supported: set-logic/set-option/set-info (ignored), (declare-const x Int),
// (declare-fun x () Int), (assert expr), (check-sat), (get-model), (exit).
// Expressions: integer literals, and/or/not/=>, =/distinct/</<=/>/>=,
// +/-/unary -, and linear * with a literal factor.

#include <iostream>
#include <map>
#include <sstream>
#include <vector>

#include "slah/internal_solver.hpp"
#include "slah/sexp.hpp"

using namespace slah;
using lia::Formula;
using lia::LinExpr;
using sexp::Node;

namespace {

struct Shim {
    // Integer variables are split into a nonnegative pair v = pos - neg so
    // the naturals-based engine can host them.
    std::map<std::string, LinExpr> vars;
    std::vector<Formula> asserts;
    std::optional<StackModel> model;
    bool answered_sat = false;

    LinExpr expr(const Node& n) {
        if (n.is_number()) return LinExpr(static_cast<std::int64_t>(n.number));
        if (n.is_symbol()) {
            auto it = vars.find(n.text);
            if (it == vars.end()) throw InputError("undeclared constant: " + n.text);
            return it->second;
        }
        if (n.children.empty() || !n.children.front().is_symbol())
            throw InputError("bad term");
        const std::string& op = n.children.front().text;
        if (op == "+") {
            LinExpr sum;
            for (std::size_t i = 1; i < n.children.size(); ++i) sum += expr(n.children[i]);
            return sum;
        }
        if (op == "-") {
            if (n.children.size() == 2) return LinExpr(0) - expr(n.children[1]);
            LinExpr acc = expr(n.children[1]);
            for (std::size_t i = 2; i < n.children.size(); ++i) acc -= expr(n.children[i]);
            return acc;
        }
        if (op == "*") {
            if (n.children.size() != 3) throw InputError("* takes two arguments");
            const Node& a = n.children[1];
            const Node& b = n.children[2];
            auto literal = [&](const Node& x) -> std::optional<std::int64_t> {
                if (x.is_number()) return static_cast<std::int64_t>(x.number);
                if (x.is_list() && x.children.size() == 2 && x.children[0].is_symbol("-") &&
                    x.children[1].is_number())
                    return -static_cast<std::int64_t>(x.children[1].number);
                return std::nullopt;
            };
            if (auto k = literal(a)) return expr(b) * *k;
            if (auto k = literal(b)) return expr(a) * *k;
            throw InputError("nonlinear multiplication is not supported");
        }
        throw InputError("unsupported term operator: " + op);
    }

    Formula formula(const Node& n) {
        if (n.is_symbol("true")) return Formula::tt();
        if (n.is_symbol("false")) return Formula::ff();
        if (!n.is_list() || n.children.empty() || !n.children.front().is_symbol())
            throw InputError("bad formula");
        const std::string& op = n.children.front().text;
        auto nary = [&](std::size_t from) {
            std::vector<Formula> fs;
            for (std::size_t i = from; i < n.children.size(); ++i) fs.push_back(formula(n.children[i]));
            return fs;
        };
        if (op == "and") return Formula::conj(nary(1));
        if (op == "or") return Formula::disj(nary(1));
        if (op == "not") {
            if (n.children.size() != 2) throw InputError("not takes one argument");
            return Formula::neg(formula(n.children[1]));
        }
        if (op == "=>") {
            if (n.children.size() != 3) throw InputError("=> takes two arguments");
            return lia::implies(formula(n.children[1]), formula(n.children[2]));
        }
        if (n.children.size() != 3) throw InputError(op + " takes two arguments");
        LinExpr l = expr(n.children[1]);
        LinExpr r = expr(n.children[2]);
        if (op == "=") return lia::eq(l, r);
        if (op == "distinct") return lia::ne(l, r);
        if (op == "<") return lia::lt(l, r);
        if (op == "<=") return lia::le(l, r);
        if (op == ">") return lia::lt(r, l);
        if (op == ">=") return lia::le(r, l);
        throw InputError("unsupported predicate: " + op);
    }

    void declare(const std::string& name) {
        if (vars.count(name)) throw InputError("duplicate declaration: " + name);
        vars.emplace(name,
                     LinExpr::var(name + "!p") - LinExpr::var(name + "!n"));
    }

    void check_sat() {
        InternalSolver engine;
        Formula matrix = lia::prenex_matrix(Formula::conj(asserts));
        model = engine.solve_qf(matrix, {});
        answered_sat = model.has_value();
        if (model) {
            // Declared constants the assertions never mention default to 0.
            for (const auto& [name, split] : vars) {
                model->emplace(name + "!p", 0);
                model->emplace(name + "!n", 0);
            }
        }
        std::cout << (answered_sat ? "sat" : "unsat") << "\n";
    }

    void get_model() {
        if (!answered_sat || !model) throw InputError("no model available");
        std::cout << "(model\n";
        for (const auto& [name, split] : vars) {
            std::int64_t value = split.evaluate(*model);
            std::cout << "  (define-fun " << name << " () Int ";
            if (value < 0)
                std::cout << "(- " << -value << ")";
            else
                std::cout << value;
            std::cout << ")\n";
        }
        std::cout << ")\n";
    }

    // Returns false on (exit).
    bool command(const Node& form) {
        if (!form.is_list() || form.children.empty() || !form.children.front().is_symbol())
            throw InputError("bad command");
        const std::string& head = form.children.front().text;
        if (head == "set-logic" || head == "set-option" || head == "set-info") return true;
        if (head == "declare-const") {
            if (form.children.size() != 3 || !form.children[2].is_symbol("Int"))
                throw InputError("declare-const takes a name and sort Int");
            declare(form.children[1].text);
            return true;
        }
        if (head == "declare-fun") {
            if (form.children.size() != 4 || !form.children[2].is_list() ||
                !form.children[2].children.empty() || !form.children[3].is_symbol("Int"))
                throw InputError("only nullary Int functions are supported");
            declare(form.children[1].text);
            return true;
        }
        if (head == "assert") {
            if (form.children.size() != 2) throw InputError("assert takes one argument");
            asserts.push_back(formula(form.children[1]));
            return true;
        }
        if (head == "check-sat") {
            check_sat();
            return true;
        }
        if (head == "get-model") {
            get_model();
            return true;
        }
        if (head == "exit") return false;
        throw InputError("unsupported command: " + head);
    }
};

}  // namespace

int main() {
    std::ostringstream buf;
    buf << std::cin.rdbuf();
    try {
        Shim shim;
        for (const Node& form : sexp::read_all(buf.str()))
            if (!shim.command(form)) break;
    } catch (const Error& e) {
        std::cout << "(error \"" << e.what() << "\")\n";
        return 1;
    }
    return 0;
}
