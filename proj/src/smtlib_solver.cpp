// Copyright (c) slah contributors.
// SPDX-License-Identifier: Apache-2.0
#include "slah/smtlib_solver.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <sstream>

#include "slah/sexp.hpp"

namespace slah {

namespace {

using lia::Atom;
using lia::Formula;
using lia::LinExpr;

void render_expr(std::ostream& os, const LinExpr& e) {
    auto numeral = [&](std::int64_t n) -> std::string {
        if (n < 0) return "(- " + std::to_string(-n) + ")";
        return std::to_string(n);
    };
    std::size_t terms = e.coefficients().size() + (e.constant() != 0 ? 1 : 0);
    if (terms == 0) {
        os << "0";
        return;
    }
    if (terms > 1) os << "(+ ";
    bool first = true;
    for (const auto& [v, k] : e.coefficients()) {
        if (!first) os << " ";
        first = false;
        if (k == 1)
            os << v;
        else
            os << "(* " << numeral(k) << " " << v << ")";
    }
    if (e.constant() != 0) {
        if (!first) os << " ";
        os << numeral(e.constant());
    }
    if (terms > 1) os << ")";
}

struct CongCounter {
    std::size_t next = 0;
    std::set<VarId> quotients;
};

void render_formula(std::ostream& os, const Formula& f, CongCounter& congs) {
    switch (f.kind()) {
    case Formula::Kind::True: os << "true"; return;
    case Formula::Kind::False: os << "false"; return;
    case Formula::Kind::Atom: {
        const Atom& a = f.get_atom();
        if (a.kind == Atom::Kind::Cong) {
            // l = r (mod n)  ~~>  l - r = n*q for a fresh integer quotient.
            VarId q = "q!" + std::to_string(congs.next++);
            congs.quotients.insert(q);
            os << "(= ";
            render_expr(os, a.lhs - a.rhs);
            os << " (* " << a.modulus << " " << q << "))";
            return;
        }
        const char* op = nullptr;
        switch (a.op) {
        case CmpOp::Eq: op = "="; break;
        case CmpOp::Ne: op = "distinct"; break;
        case CmpOp::Le: op = "<="; break;
        case CmpOp::Lt: op = "<"; break;
        }
        os << "(" << op << " ";
        render_expr(os, a.lhs);
        os << " ";
        render_expr(os, a.rhs);
        os << ")";
        return;
    }
    case Formula::Kind::And:
    case Formula::Kind::Or: {
        os << (f.kind() == Formula::Kind::And ? "(and" : "(or");
        for (const auto& c : f.children()) {
            os << " ";
            render_formula(os, c, congs);
        }
        os << ")";
        return;
    }
    case Formula::Kind::Not:
        os << "(not ";
        render_formula(os, f.children().front(), congs);
        os << ")";
        return;
    case Formula::Kind::Exists:
        throw InternalError("matrix handed to the external backend must be quantifier-free");
    }
}

// First pass only counts congruences so quotient declarations can precede
// the assertion.
void count_congs(const Formula& f, std::size_t& n) {
    if (f.kind() == Formula::Kind::Atom) {
        if (f.get_atom().kind == Atom::Kind::Cong) ++n;
        return;
    }
    for (const auto& c : f.children()) count_congs(c, n);
}

std::string read_fd_until_eof(int fd, const Deadline& deadline, pid_t child) {
    std::string out;
    char buf[4096];
    for (;;) {
        int timeout_ms = -1;
        if (deadline) {
            auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
                            *deadline - std::chrono::steady_clock::now())
                            .count();
            if (left <= 0) {
                kill(child, SIGKILL);
                throw BackendError("external backend timed out");
            }
            timeout_ms = static_cast<int>(left);
        }
        struct pollfd pfd = {fd, POLLIN, 0};
        int rc = poll(&pfd, 1, timeout_ms);
        if (rc == 0) {
            kill(child, SIGKILL);
            throw BackendError("external backend timed out");
        }
        if (rc < 0) {
            if (errno == EINTR) continue;
            throw BackendError(std::string("poll on backend pipe failed: ") + std::strerror(errno));
        }
        ssize_t n = read(fd, buf, sizeof buf);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw BackendError(std::string("read from backend failed: ") + std::strerror(errno));
        }
        if (n == 0) return out;
        out.append(buf, static_cast<std::size_t>(n));
    }
}

std::optional<std::int64_t> parse_int_value(const sexp::Node& v) {
    if (v.is_number()) return static_cast<std::int64_t>(v.number);
    if (v.is_list() && v.children.size() == 2 && v.children[0].is_symbol("-") &&
        v.children[1].is_number())
        return -static_cast<std::int64_t>(v.children[1].number);
    return std::nullopt;
}

}  // namespace

std::string SmtLibSolver::render_script(const Formula& matrix) {
    std::ostringstream os;
    os << "(set-logic LIA)\n";
    for (const auto& v : matrix.free_vars()) {
        os << "(declare-const " << v << " Int)\n";
        os << "(assert (>= " << v << " 0))\n";
    }
    std::size_t ncongs = 0;
    count_congs(matrix, ncongs);
    for (std::size_t i = 0; i < ncongs; ++i) os << "(declare-const q!" << i << " Int)\n";
    os << "(assert ";
    CongCounter congs;
    render_formula(os, matrix, congs);
    os << ")\n(check-sat)\n(get-model)\n(exit)\n";
    return os.str();
}

std::optional<StackModel> SmtLibSolver::parse_answer(const std::string& output,
                                                     const std::set<VarId>& vars) {
    std::vector<sexp::Node> forms;
    try {
        forms = sexp::read_all(output);
    } catch (const sexp::ParseError& e) {
        throw BackendError(std::string("unparsable backend output: ") + e.what());
    }
    if (forms.empty()) throw BackendError("backend produced no answer");
    const sexp::Node& verdict = forms.front();
    if (verdict.is_symbol("unsat")) return std::nullopt;
    if (verdict.is_symbol("unknown")) throw BackendError("backend answered unknown");
    if (!verdict.is_symbol("sat"))
        throw BackendError("backend answered neither sat nor unsat: " + output.substr(0, 200));

    StackModel model;
    for (std::size_t i = 1; i < forms.size(); ++i) {
        // (model (define-fun v () Int 5) ...) or a bare list of define-funs.
        const sexp::Node& group = forms[i];
        if (!group.is_list()) continue;
        for (const sexp::Node& entry : group.children) {
            if (!entry.is_list() || entry.children.size() < 5) continue;
            if (!entry.children[0].is_symbol("define-fun")) continue;
            if (!entry.children[1].is_symbol()) continue;
            const VarId& name = entry.children[1].text;
            if (!vars.count(name)) continue;  // quotient or internal symbol
            auto value = parse_int_value(entry.children[4]);
            if (!value) throw BackendError("unparsable model value for " + name);
            if (*value < 0)
                throw BackendError("backend assigned a negative value to natural variable " + name);
            model[name] = static_cast<std::uint64_t>(*value);
        }
    }
    for (const auto& v : vars) model.emplace(v, 0);
    return model;
}

std::optional<StackModel> SmtLibSolver::solve_qf(const Formula& matrix, const Deadline& deadline) {
    std::string script = render_script(matrix);

    int to_child[2];
    int from_child[2];
    if (pipe(to_child) != 0 || pipe(from_child) != 0)
        throw BackendError(std::string("pipe failed: ") + std::strerror(errno));

    pid_t pid = fork();
    if (pid < 0) throw BackendError(std::string("fork failed: ") + std::strerror(errno));
    if (pid == 0) {
        dup2(to_child[0], STDIN_FILENO);
        dup2(from_child[1], STDOUT_FILENO);
        close(to_child[0]);
        close(to_child[1]);
        close(from_child[0]);
        close(from_child[1]);
        execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }
    close(to_child[0]);
    close(from_child[1]);

    // Scripts are small; they fit the pipe buffer, so write-then-read cannot
    // deadlock.
    std::size_t off = 0;
    while (off < script.size()) {
        ssize_t n = write(to_child[1], script.data() + off, script.size() - off);
        if (n < 0) {
            if (errno == EINTR) continue;
            close(to_child[1]);
            close(from_child[0]);
            kill(pid, SIGKILL);
            waitpid(pid, nullptr, 0);
            throw BackendError(std::string("write to backend failed: ") + std::strerror(errno));
        }
        off += static_cast<std::size_t>(n);
    }
    close(to_child[1]);

    std::string output;
    try {
        output = read_fd_until_eof(from_child[0], deadline, pid);
    } catch (...) {
        close(from_child[0]);
        waitpid(pid, nullptr, 0);
        throw;
    }
    close(from_child[0]);

    int status = 0;
    waitpid(pid, &status, 0);
    if (WIFEXITED(status) && WEXITSTATUS(status) == 127)
        throw BackendError("external backend command not found: " + command_);

    return parse_answer(output, matrix.free_vars());
}

}  // namespace slah
