// Copyright (c) slah contributors.
// SPDX-License-Identifier: Apache-2.0
#include "slah/internal_solver.hpp"

#include <algorithm>
#include <boost/multiprecision/cpp_int.hpp>
#include <map>
#include <limits>
#include <numeric>
#include <vector>

namespace slah {

namespace {

using boost::multiprecision::cpp_int;
using boost::multiprecision::cpp_rational;
using lia::Atom;
using lia::Formula;
using lia::LinExpr;

cpp_int floor_div(const cpp_int& a, const cpp_int& b) {
    cpp_int q = a / b;
    if (a % b != 0 && ((a < 0) != (b < 0))) --q;
    return q;
}

// One inequality sum(a[j] * x[j]) <= c over indexed variables.
struct Row {
    std::vector<cpp_int> coeffs;
    cpp_int bound;
};

// Chvatal-Gomory tightening: divide by the gcd of the coefficients and round
// the bound down. Valid over the integers, and it lets the rational
// relaxation refute classic diagonal systems without branching.
// Returns false if the row is a constant contradiction.
bool tighten(Row& row) {
    cpp_int g = 0;
    for (const auto& a : row.coeffs) g = boost::multiprecision::gcd(g, a);
    if (g == 0) return row.bound >= 0;
    if (g > 1) {
        for (auto& a : row.coeffs) a /= g;
        row.bound = floor_div(row.bound, g);
    }
    return true;
}

// Raised when the machine-word fraction arithmetic would overflow; the
// caller retries with arbitrary-precision rationals.
struct TableauOverflow {};

// Exact fraction on 64-bit words with overflow detection. Pivot arithmetic
// on the instances at hand almost never leaves this range, which keeps the
// relaxation an order of magnitude faster than arbitrary precision.
struct Frac64 {
    std::int64_t num = 0;
    std::int64_t den = 1;  // > 0, gcd(num, den) == 1

    Frac64() = default;
    Frac64(std::int64_t n) : num(n) {}  // NOLINT: implicit by design

    static std::int64_t checked(__int128 v) {
        if (v > std::numeric_limits<std::int64_t>::max() ||
            v < std::numeric_limits<std::int64_t>::min())
            throw TableauOverflow{};
        return static_cast<std::int64_t>(v);
    }

    static Frac64 make(__int128 n, __int128 d) {
        if (d == 0) throw InternalError("fraction with zero denominator");
        if (d < 0) {
            n = -n;
            d = -d;
        }
        __int128 a = n < 0 ? -n : n;
        __int128 b = d;
        while (b != 0) {
            __int128 t = a % b;
            a = b;
            b = t;
        }
        if (a > 1) {
            n /= a;
            d /= a;
        }
        Frac64 f;
        f.num = checked(n);
        f.den = checked(d);
        return f;
    }

    friend Frac64 operator+(const Frac64& a, const Frac64& b) {
        return make(static_cast<__int128>(a.num) * b.den + static_cast<__int128>(b.num) * a.den,
                    static_cast<__int128>(a.den) * b.den);
    }
    friend Frac64 operator-(const Frac64& a, const Frac64& b) {
        return make(static_cast<__int128>(a.num) * b.den - static_cast<__int128>(b.num) * a.den,
                    static_cast<__int128>(a.den) * b.den);
    }
    friend Frac64 operator*(const Frac64& a, const Frac64& b) {
        return make(static_cast<__int128>(a.num) * b.num, static_cast<__int128>(a.den) * b.den);
    }
    friend Frac64 operator/(const Frac64& a, const Frac64& b) {
        if (b.num == 0) throw InternalError("fraction division by zero");
        return make(static_cast<__int128>(a.num) * b.den, static_cast<__int128>(a.den) * b.num);
    }
    Frac64& operator+=(const Frac64& o) { return *this = *this + o; }
    Frac64& operator-=(const Frac64& o) { return *this = *this - o; }
    Frac64& operator/=(const Frac64& o) { return *this = *this / o; }
    Frac64 operator-() const {
        Frac64 f;
        f.num = -num;
        f.den = den;
        return f;
    }
    friend bool operator==(const Frac64& a, const Frac64& b) {
        return a.num == b.num && a.den == b.den;
    }
    friend bool operator!=(const Frac64& a, const Frac64& b) { return !(a == b); }
    friend bool operator<(const Frac64& a, const Frac64& b) {
        return static_cast<__int128>(a.num) * b.den < static_cast<__int128>(b.num) * a.den;
    }
    friend bool operator<=(const Frac64& a, const Frac64& b) { return !(b < a); }
    friend bool operator>(const Frac64& a, const Frac64& b) { return b < a; }
};

// Fraction access shared by the two scalar types.
inline Frac64 scalar_from(const cpp_int& v, const Frac64*) {
    if (v > std::numeric_limits<std::int64_t>::max() ||
        v < std::numeric_limits<std::int64_t>::min())
        throw TableauOverflow{};
    return Frac64(v.convert_to<std::int64_t>());
}
inline cpp_rational scalar_from(const cpp_int& v, const cpp_rational*) { return cpp_rational(v); }
inline cpp_int scalar_num(const Frac64& f) { return cpp_int(f.num); }
inline cpp_int scalar_den(const Frac64& f) { return cpp_int(f.den); }
inline cpp_int scalar_num(const cpp_rational& q) { return cpp_int(numerator(q)); }
inline cpp_int scalar_den(const cpp_rational& q) { return cpp_int(denominator(q)); }

// Phase-1 simplex with Bland's rule over an exact scalar type. Decides
// feasibility of rows over rational x >= 0 and returns a feasible point.
template <class Q>
class Simplex {
  public:
    Simplex(const std::vector<Row>& rows, std::size_t nvars, const Deadline& deadline)
        : nx_(nvars), deadline_(deadline) {
        m_ = rows.size();
        nslack_ = m_;
        // Count artificials: one per row with a negative bound.
        for (const auto& r : rows) {
            if (r.bound < 0) ++nart_;
        }
        n_ = nx_ + nslack_ + nart_;
        tableau_.assign(m_, std::vector<Q>(n_, Q(0)));
        rhs_.assign(m_, Q(0));
        basis_.assign(m_, 0);
        reduced_.assign(n_, Q(0));

        const Q* tag = nullptr;
        std::size_t art = nx_ + nslack_;
        std::vector<std::size_t> art_rows;
        for (std::size_t i = 0; i < m_; ++i) {
            bool flip = rows[i].bound < 0;
            for (std::size_t j = 0; j < nx_ && j < rows[i].coeffs.size(); ++j) {
                Q v = scalar_from(rows[i].coeffs[j], tag);
                tableau_[i][j] = flip ? -v : v;
            }
            tableau_[i][nx_ + i] = Q(flip ? -1 : 1);
            Q b = scalar_from(rows[i].bound, tag);
            rhs_[i] = flip ? -b : b;
            if (flip) {
                tableau_[i][art] = Q(1);
                basis_[i] = art;
                art_rows.push_back(i);
                ++art;
            } else {
                basis_[i] = nx_ + i;
            }
        }
        // Phase-1 cost: one per artificial. Reduced costs price the basis
        // out: r = c - c_B * T, and the objective starts at the sum of the
        // artificial values.
        for (std::size_t j = nx_ + nslack_; j < n_; ++j) reduced_[j] = Q(1);
        for (std::size_t i : art_rows) {
            for (std::size_t j = 0; j < n_; ++j) reduced_[j] -= tableau_[i][j];
            objective_ += rhs_[i];
        }
    }

    // True iff feasible; the feasible point for the problem variables is
    // left in point().
    bool run() {
        std::size_t pivots = 0;
        for (;;) {
            if ((++pivots & 0x3f) == 0 && deadline_expired(deadline_))
                throw BackendError("internal backend timed out in simplex");
            std::size_t enter = n_;
            for (std::size_t j = 0; j < n_; ++j) {
                if (reduced_[j] < Q(0)) {
                    enter = j;
                    break;  // Bland: smallest index, no cycling
                }
            }
            if (enter == n_) break;
            std::size_t leave = m_;
            Q best(0);
            for (std::size_t i = 0; i < m_; ++i) {
                if (!(tableau_[i][enter] > Q(0))) continue;
                Q ratio = rhs_[i] / tableau_[i][enter];
                if (leave == m_ || ratio < best ||
                    (ratio == best && basis_[i] < basis_[leave])) {
                    leave = i;
                    best = ratio;
                }
            }
            if (leave == m_)
                throw InternalError("phase-1 simplex cannot be unbounded");
            pivot(leave, enter);
        }
        if (objective_ != Q(0)) return false;
        point_.assign(nx_, Q(0));
        for (std::size_t i = 0; i < m_; ++i)
            if (basis_[i] < nx_) point_[basis_[i]] = rhs_[i];
        return true;
    }

    const std::vector<Q>& point() const { return point_; }

  private:
    void pivot(std::size_t row, std::size_t col) {
        Q p = tableau_[row][col];
        for (auto& v : tableau_[row]) v /= p;
        rhs_[row] /= p;
        for (std::size_t i = 0; i < m_; ++i) {
            if (i == row) continue;
            Q f = tableau_[i][col];
            if (f == Q(0)) continue;
            for (std::size_t j = 0; j < n_; ++j) tableau_[i][j] -= f * tableau_[row][j];
            rhs_[i] -= f * rhs_[row];
        }
        Q f = reduced_[col];
        if (f != Q(0)) {
            for (std::size_t j = 0; j < n_; ++j) reduced_[j] -= f * tableau_[row][j];
            // Entering at ratio rhs moves the objective by the reduced cost
            // times the step.
            objective_ += f * rhs_[row];
        }
        basis_[row] = col;
    }

    std::size_t nx_, m_ = 0, nslack_ = 0, nart_ = 0, n_ = 0;
    Deadline deadline_;
    std::vector<std::vector<Q>> tableau_;
    std::vector<Q> rhs_;
    std::vector<Q> reduced_;
    std::vector<std::size_t> basis_;
    Q objective_ = Q(0);
    std::vector<Q> point_;
};

// One rational vertex as exact integer fractions, or infeasibility.
struct LpOutcome {
    bool feasible = false;
    std::vector<std::pair<cpp_int, cpp_int>> point;  // (num, den), den > 0
};

// Runs the relaxation on machine words first and falls back to arbitrary
// precision when a pivot overflows.
template <class Q>
LpOutcome lp_run(const std::vector<Row>& rows, std::size_t nvars, const Deadline& deadline) {
    Simplex<Q> lp(rows, nvars, deadline);
    LpOutcome out;
    out.feasible = lp.run();
    if (out.feasible) {
        out.point.reserve(nvars);
        for (const auto& q : lp.point()) out.point.emplace_back(scalar_num(q), scalar_den(q));
    }
    return out;
}

LpOutcome lp_feasible_point(const std::vector<Row>& rows, std::size_t nvars,
                            const Deadline& deadline) {
    try {
        return lp_run<Frac64>(rows, nvars, deadline);
    } catch (const TableauOverflow&) {
        return lp_run<cpp_rational>(rows, nvars, deadline);
    }
}

// Search box for branch and bound. A missing upper bound stands for the
// small-model cap computed from the system.
struct Box {
    std::vector<cpp_int> lower;
    std::vector<std::optional<cpp_int>> upper;
};

class BranchAndBound {
  public:
    BranchAndBound(std::vector<Row> rows, std::size_t nvars, const Deadline& deadline)
        : rows_(std::move(rows)), nvars_(nvars), deadline_(deadline) {
        // Small-model cap: if the tightened system has a solution over the
        // naturals, it has one within this bound (Hadamard-style bound on
        // basis determinants). It exists to make the search space finite;
        // pruning keeps real instances far away from it.
        cpp_int amax = 1;
        for (const auto& r : rows_) {
            for (const auto& a : r.coeffs) amax = std::max(amax, cpp_int(abs(a)));
            amax = std::max(amax, cpp_int(abs(r.bound)));
        }
        cpp_int base = cpp_int(nvars_ + rows_.size() + 2) * (amax + 1);
        std::size_t k = std::min(rows_.size() + nvars_, nvars_ + 1) + 1;
        cap_ = cpp_int(nvars_ + 2);
        for (std::size_t i = 0; i < k; ++i) cap_ *= base;
    }

    std::optional<std::vector<cpp_int>> run() {
        // An infeasible relaxation without any box settles it right away;
        // this is the common exit for refuted branches.
        LpOutcome root = lp_feasible_point(rows_, nvars_, deadline_);
        if (!root.feasible) return std::nullopt;
        if (auto integral = integral_point(root)) return integral;

        // Search a practically sized box first; the full small-model cap is
        // only needed when a solution could hide beyond it.
        cpp_int practical = std::min(cpp_int(1'000'000'000), cap_);
        if (auto found = bounded_search(practical)) return found;
        if (cap_ > practical) return bounded_search(cap_);
        return std::nullopt;
    }

  private:
    static std::optional<std::vector<cpp_int>> integral_point(const LpOutcome& lp) {
        std::vector<cpp_int> out;
        out.reserve(lp.point.size());
        for (const auto& [num, den] : lp.point) {
            if (num % den != 0) return std::nullopt;
            out.push_back(num / den);
        }
        return out;
    }

    // Iterative depth-first search over boxes so deep branch chains cannot
    // overflow the stack. A node budget turns pathological instances into
    // an error, never into a wrong verdict.
    std::optional<std::vector<cpp_int>> bounded_search(const cpp_int& cap) {
        std::vector<Box> stack;
        Box top;
        top.lower.assign(nvars_, 0);
        top.upper.assign(nvars_, std::nullopt);
        stack.push_back(std::move(top));
        std::size_t budget = 200'000;
        while (!stack.empty()) {
            if (deadline_expired(deadline_))
                throw BackendError("internal backend timed out in branch and bound");
            if (budget-- == 0)
                throw BackendError("internal backend exceeded the branch-and-bound budget");
            Box box = std::move(stack.back());
            stack.pop_back();

            std::vector<Row> rows = rows_;
            for (std::size_t j = 0; j < nvars_; ++j) {
                if (box.lower[j] > 0) {
                    Row r;
                    r.coeffs.assign(nvars_, 0);
                    r.coeffs[j] = -1;
                    r.bound = -box.lower[j];
                    rows.push_back(std::move(r));
                }
                Row r;
                r.coeffs.assign(nvars_, 0);
                r.coeffs[j] = 1;
                r.bound = box.upper[j] ? *box.upper[j] : cap;
                rows.push_back(std::move(r));
            }
            LpOutcome lp = lp_feasible_point(rows, nvars_, deadline_);
            if (!lp.feasible) continue;
            if (auto integral = integral_point(lp)) return integral;

            std::size_t frac = nvars_;
            cpp_rational best_dist;
            for (std::size_t j = 0; j < nvars_; ++j) {
                const auto& [num, den] = lp.point[j];
                if (num % den == 0) continue;
                cpp_rational value(num, den);
                cpp_rational dist = value - cpp_rational(floor_div(num, den));
                if (dist > cpp_rational(1, 2)) dist = cpp_rational(1) - cpp_rational(dist);
                if (frac == nvars_ || dist > best_dist) {
                    frac = j;
                    best_dist = dist;
                }
            }
            if (frac == nvars_) throw InternalError("fractional vertex without fractional entry");

            const auto& [num, den] = lp.point[frac];
            cpp_int fl = floor_div(num, den);
            Box down = box;
            down.upper[frac] = fl;
            Box up = std::move(box);
            up.lower[frac] = fl + 1;
            bool round_up = cpp_rational(num, den) - cpp_rational(fl) > cpp_rational(1, 2);
            // The preferred child is explored first, so it goes on top.
            if (round_up) {
                stack.push_back(std::move(down));
                stack.push_back(std::move(up));
            } else {
                stack.push_back(std::move(up));
                stack.push_back(std::move(down));
            }
        }
        return std::nullopt;
    }

    std::vector<Row> rows_;
    std::size_t nvars_;
    Deadline deadline_;
    cpp_int cap_;
};

// A linear system of equalities and inequalities over naturals as produced
// from a conjunction of comparison atoms.
struct LinSystem {
    std::size_t nvars = 0;
    std::vector<Row> equalities;    // coeffs . x = bound
    std::vector<Row> inequalities;  // coeffs . x <= bound
};

// Eliminates equalities before the relaxation. Unit-coefficient equalities
// substitute their variable away; the rest get a gcd feasibility test. This
// is what lets quotient-style encodings (l - r = n*q) fail fast instead of
// sending branch-and-bound on an unbounded diagonal walk.
class EqualityEliminator {
  public:
    struct Elimination {
        std::size_t var = 0;
        std::vector<cpp_int> coeffs;  // expression over the other variables
        cpp_int constant;             // var = constant + coeffs . x
    };

    // Returns false if the system is infeasible over the integers.
    bool run(LinSystem& sys) {
        bool progress = true;
        while (progress) {
            progress = false;
            for (std::size_t e = 0; e < sys.equalities.size(); ++e) {
                std::size_t var = sys.nvars;
                const Row& row = sys.equalities[e];
                for (std::size_t j = 0; j < sys.nvars; ++j) {
                    if ((row.coeffs[j] == 1 || row.coeffs[j] == -1) && !eliminated_[j]) {
                        var = j;
                        break;
                    }
                }
                if (var == sys.nvars) continue;
                substitute(sys, e, var);
                progress = true;
                break;
            }
        }
        for (auto& row : sys.equalities) {
            cpp_int g = 0;
            for (const auto& a : row.coeffs) g = boost::multiprecision::gcd(g, a);
            if (g == 0) {
                if (row.bound != 0) return false;
                continue;
            }
            if (row.bound % g != 0) return false;
            for (auto& a : row.coeffs) a /= g;
            row.bound /= g;
            Row neg;
            neg.coeffs.resize(row.coeffs.size());
            for (std::size_t j = 0; j < row.coeffs.size(); ++j) neg.coeffs[j] = -row.coeffs[j];
            neg.bound = -row.bound;
            sys.inequalities.push_back(row);
            sys.inequalities.push_back(std::move(neg));
        }
        sys.equalities.clear();
        return true;
    }

    // Recovers values for the eliminated variables, latest first.
    void reconstruct(std::vector<cpp_int>& values) const {
        for (auto it = eliminations_.rbegin(); it != eliminations_.rend(); ++it) {
            cpp_int v = it->constant;
            for (std::size_t j = 0; j < it->coeffs.size(); ++j) v += it->coeffs[j] * values[j];
            values[it->var] = v;
        }
    }

    void init(std::size_t nvars) { eliminated_.assign(nvars, false); }

  private:
    void substitute(LinSystem& sys, std::size_t eq_index, std::size_t var) {
        Row row = std::move(sys.equalities[eq_index]);
        sys.equalities.erase(sys.equalities.begin() + eq_index);
        // Normalize to var = constant + coeffs . x.
        cpp_int pivot = row.coeffs[var];
        Elimination elim;
        elim.var = var;
        elim.coeffs.assign(sys.nvars, 0);
        elim.constant = pivot == 1 ? row.bound : -row.bound;
        for (std::size_t j = 0; j < sys.nvars; ++j) {
            if (j == var) continue;
            elim.coeffs[j] = pivot == 1 ? -row.coeffs[j] : row.coeffs[j];
        }
        auto apply = [&](Row& target) {
            cpp_int k = target.coeffs[var];
            if (k == 0) return;
            target.coeffs[var] = 0;
            for (std::size_t j = 0; j < sys.nvars; ++j) target.coeffs[j] += k * elim.coeffs[j];
            target.bound -= k * elim.constant;
        };
        for (auto& r : sys.equalities) apply(r);
        for (auto& r : sys.inequalities) apply(r);
        // The eliminated variable is still a natural: expression >= 0.
        Row nonneg;
        nonneg.coeffs.resize(sys.nvars);
        for (std::size_t j = 0; j < sys.nvars; ++j) nonneg.coeffs[j] = -elim.coeffs[j];
        nonneg.bound = elim.constant;
        sys.inequalities.push_back(std::move(nonneg));
        eliminated_[var] = true;
        eliminations_.push_back(std::move(elim));
    }

    std::vector<bool> eliminated_;
    std::vector<Elimination> eliminations_;
};

// A conjunction of atoms, decided exactly:
// disequalities split two-sided, congruences go away by a residue case
// split, the comparison residue is handed to branch and bound.
class ConjunctionSolver {
  public:
    ConjunctionSolver(const Deadline& deadline) : deadline_(deadline) {}

    std::optional<StackModel> solve(const std::vector<Atom>& atoms) {
        std::vector<Atom> cmps;
        std::vector<Atom> nes;
        std::vector<Atom> congs;
        for (const auto& a : atoms) {
            if (a.kind == Atom::Kind::Cong)
                congs.push_back(a);
            else if (a.op == CmpOp::Ne)
                nes.push_back(a);
            else
                cmps.push_back(a);
        }
        return split_ne(cmps, nes, 0, congs);
    }

  private:
    std::optional<StackModel> split_ne(std::vector<Atom>& cmps, const std::vector<Atom>& nes,
                                       std::size_t idx, const std::vector<Atom>& congs) {
        if (idx == nes.size()) return eliminate_congruences(cmps, congs);
        const Atom& d = nes[idx];
        for (int side = 0; side < 2; ++side) {
            const LinExpr& lo = side == 0 ? d.lhs : d.rhs;
            const LinExpr& hi = side == 0 ? d.rhs : d.lhs;
            cmps.push_back(Atom::cmp(lo + LinExpr(1), CmpOp::Le, hi));
            auto r = split_ne(cmps, nes, idx + 1, congs);
            cmps.pop_back();
            if (r) return r;
        }
        return std::nullopt;
    }

    std::optional<StackModel> eliminate_congruences(const std::vector<Atom>& cmps,
                                                    const std::vector<Atom>& congs) {
        std::set<VarId> cong_vars;
        std::uint64_t m = 1;
        for (const auto& c : congs) {
            c.collect_vars(cong_vars);
            m = std::lcm(m, c.modulus);
            if (m > (1u << 20)) throw BackendError("congruence moduli too large for residue split");
        }
        std::vector<VarId> cvars(cong_vars.begin(), cong_vars.end());
        std::map<VarId, std::uint64_t> residues;
        return residue_search(cmps, congs, cvars, 0, m, residues);
    }

    std::optional<StackModel> residue_search(const std::vector<Atom>& cmps,
                                             const std::vector<Atom>& congs,
                                             const std::vector<VarId>& cvars, std::size_t idx,
                                             std::uint64_t m,
                                             std::map<VarId, std::uint64_t>& residues) {
        if (deadline_expired(deadline_)) throw BackendError("internal backend timed out");
        if (idx == cvars.size()) return solve_linear(cmps, residues, m);
        for (std::uint64_t r = 0; r < m; ++r) {
            residues[cvars[idx]] = r;
            bool viable = true;
            for (const auto& c : congs) {
                // Check congruences whose variables are all assigned.
                bool ready = true;
                std::set<VarId> vs;
                c.collect_vars(vs);
                for (const auto& v : vs)
                    if (!residues.count(v)) {
                        ready = false;
                        break;
                    }
                if (!ready) continue;
                std::int64_t diff = c.lhs.constant() - c.rhs.constant();
                for (const auto& [v, k] : c.lhs.coefficients())
                    diff += k * static_cast<std::int64_t>(residues.at(v));
                for (const auto& [v, k] : c.rhs.coefficients())
                    diff -= k * static_cast<std::int64_t>(residues.at(v));
                std::int64_t mod = static_cast<std::int64_t>(c.modulus);
                if (((diff % mod) + mod) % mod != 0) {
                    viable = false;
                    break;
                }
            }
            if (viable) {
                auto res = residue_search(cmps, congs, cvars, idx + 1, m, residues);
                if (res) return res;
            }
        }
        residues.erase(cvars[idx]);
        return std::nullopt;
    }

    // Substitute x = m*x + residue for congruence variables, eliminate the
    // equalities, then run branch and bound on the inequality residue.
    std::optional<StackModel> solve_linear(const std::vector<Atom>& cmps,
                                           const std::map<VarId, std::uint64_t>& residues,
                                           std::uint64_t m) {
        std::set<VarId> vars;
        for (const auto& a : cmps) a.collect_vars(vars);
        for (const auto& [v, r] : residues) vars.insert(v);
        std::vector<VarId> order(vars.begin(), vars.end());
        std::map<VarId, std::size_t> index;
        for (std::size_t i = 0; i < order.size(); ++i) index[order[i]] = i;

        auto to_coeffs = [&](const LinExpr& lhs, const LinExpr& rhs, Row& row) {
            // lhs - rhs with the residue substitution applied
            LinExpr diff = lhs - rhs;
            row.coeffs.assign(order.size(), 0);
            cpp_int constant = diff.constant();
            for (const auto& [v, k] : diff.coefficients()) {
                auto it = residues.find(v);
                if (it != residues.end()) {
                    constant += cpp_int(k) * it->second;
                    row.coeffs[index[v]] += cpp_int(k) * m;
                } else {
                    row.coeffs[index[v]] += k;
                }
            }
            row.bound = -constant;  // diff <= 0 becomes coeffs <= -constant
        };

        LinSystem sys;
        sys.nvars = order.size();
        for (const auto& a : cmps) {
            Row row;
            to_coeffs(a.lhs, a.rhs, row);
            if (a.op == CmpOp::Eq) {
                sys.equalities.push_back(std::move(row));
            } else {
                if (a.op == CmpOp::Lt) row.bound -= 1;
                if (!tighten(row)) return std::nullopt;
                sys.inequalities.push_back(std::move(row));
            }
        }

        EqualityEliminator elim;
        elim.init(sys.nvars);
        if (!elim.run(sys)) return std::nullopt;
        for (auto& row : sys.inequalities)
            if (!tighten(row)) return std::nullopt;

        BranchAndBound bb(std::move(sys.inequalities), order.size(), deadline_);
        auto sol = bb.run();
        if (!sol) return std::nullopt;
        elim.reconstruct(*sol);
        StackModel model;
        for (std::size_t i = 0; i < order.size(); ++i) {
            cpp_int value = (*sol)[i];
            if (value < 0) throw InternalError("eliminated variable reconstructed negative");
            auto it = residues.find(order[i]);
            if (it != residues.end()) value = value * m + it->second;
            model[order[i]] = value.convert_to<std::uint64_t>();
        }
        return model;
    }

    Deadline deadline_;
};

// Incremental difference-bound reasoning over the variables plus a zero
// node. bound(u, v) is the tightest known upper bound on v - u; the matrix
// is kept transitively closed, so an inconsistency always shows up as a
// direct negative cycle when an edge is added. Everything it derives is a
// consequence of a subset of the pushed atoms, so a conflict soundly prunes
// a branch of the disjunct search.
class DiffBounds {
  public:
    explicit DiffBounds(const std::vector<VarId>& vars) {
        n_ = vars.size() + 1;  // index 0 is the zero node
        for (std::size_t i = 0; i < vars.size(); ++i) index_[vars[i]] = i + 1;
        bound_.assign(n_ * n_, kInf);
        for (std::size_t i = 0; i < n_; ++i) at(i, i) = 0;
        // Naturals: 0 - x <= 0 for every variable.
        for (std::size_t x = 1; x < n_; ++x) at(x, 0) = 0;
    }

    // Adds v - u <= w; returns false on inconsistency.
    bool add(std::size_t u, std::size_t v, std::int64_t w) {
        if (at(v, u) != kInf && at(v, u) + w < 0) return false;
        if (w >= at(u, v)) return true;
        at(u, v) = w;
        for (std::size_t a = 0; a < n_; ++a) {
            if (at(a, u) == kInf) continue;
            for (std::size_t b = 0; b < n_; ++b) {
                if (at(v, b) == kInf) continue;
                std::int64_t via = at(a, u) + w + at(v, b);
                if (via < at(a, b)) at(a, b) = via;
            }
        }
        return true;
    }

    // Classifies an atom; non-difference shapes do not touch the matrix.
    // Returns false on conflict.
    bool push(const Atom& atom) {
        if (atom.kind != Atom::Kind::Cmp || atom.op == CmpOp::Ne) return true;
        LinExpr diff = atom.lhs - atom.rhs;
        std::int64_t k = diff.constant();
        const auto& cs = diff.coefficients();
        std::size_t pos = 0, neg = 0;
        for (const auto& [v, c] : cs) {
            if (c == 1 && pos == 0)
                pos = index_.at(v);
            else if (c == -1 && neg == 0)
                neg = index_.at(v);
            else
                return true;  // not a unit difference shape
        }
        // diff <= bound, i.e. pos - neg <= bound - k.
        std::int64_t slack = atom.op == CmpOp::Lt ? -1 - k : -k;
        if (!add(neg, pos, slack)) return false;
        if (atom.op == CmpOp::Eq) return add(pos, neg, k);
        return true;
    }

    std::vector<std::int64_t> snapshot() const { return bound_; }
    void restore(std::vector<std::int64_t> s) { bound_ = std::move(s); }

  private:
    static constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;

    std::int64_t& at(std::size_t u, std::size_t v) { return bound_[u * n_ + v]; }

    std::size_t n_;
    std::map<VarId, std::size_t> index_;
    std::vector<std::int64_t> bound_;
};

// Lazy walk of the and/or structure: each root-to-leaf choice of disjuncts
// yields one conjunction of atoms. Ground atoms evaluate on the spot,
// duplicates are skipped, and the difference-bound closure of the partial
// conjunction prunes inconsistent branches as soon as an atom arrives; the
// exact decision happens at the leaves.
class PathSearch {
  public:
    PathSearch(const Deadline& deadline) : deadline_(deadline) {}

    std::optional<StackModel> run(const Formula& matrix) {
        std::set<VarId> var_set = matrix.free_vars();
        std::vector<VarId> vars(var_set.begin(), var_set.end());
        dbm_.emplace(vars);
        std::vector<const Formula*> todo{&matrix};
        found_.reset();
        walk(todo, 0);
        return found_;
    }

  private:
    // Returns true when a model has been found and the search can stop.
    bool walk(std::vector<const Formula*>& todo, std::size_t next) {
        if (deadline_expired(deadline_)) throw BackendError("internal backend timed out");
        if (next == todo.size()) {
            ConjunctionSolver leaf(deadline_);
            found_ = leaf.solve(conj_);
            return found_.has_value();
        }
        const Formula& f = *todo[next];
        switch (f.kind()) {
        case Formula::Kind::True: return walk(todo, next + 1);
        case Formula::Kind::False: return false;
        case Formula::Kind::Atom: {
            const Atom& atom = f.get_atom();
            std::set<VarId> used;
            atom.collect_vars(used);
            if (used.empty()) {
                static const StackModel kEmpty;
                if (!atom.evaluate(kEmpty)) return false;
                return walk(todo, next + 1);
            }
            if (std::find(conj_.begin(), conj_.end(), atom) != conj_.end())
                return walk(todo, next + 1);
            std::vector<std::int64_t> saved = dbm_->snapshot();
            if (!dbm_->push(atom)) {
                dbm_->restore(std::move(saved));
                return false;
            }
            conj_.push_back(atom);
            bool done = walk(todo, next + 1);
            conj_.pop_back();
            dbm_->restore(std::move(saved));
            return done;
        }
        case Formula::Kind::And: {
            // Conjuncts are order-insensitive: queue the children at the end
            // and move past the node.
            std::size_t added = f.children().size();
            for (const auto& c : f.children()) todo.push_back(&c);
            bool done = walk(todo, next + 1);
            todo.resize(todo.size() - added);
            return done;
        }
        case Formula::Kind::Or: {
            for (const auto& c : f.children()) {
                const Formula* saved = todo[next];
                todo[next] = &c;
                bool done = walk(todo, next);
                todo[next] = saved;
                if (done) return true;
            }
            return false;
        }
        case Formula::Kind::Not:
        case Formula::Kind::Exists:
            throw InternalError("matrix must be quantifier-free and negation-free");
        }
        throw InternalError("unreachable formula kind");
    }

    Deadline deadline_;
    std::optional<DiffBounds> dbm_;
    std::vector<Atom> conj_;
    std::optional<StackModel> found_;
};

}  // namespace

std::optional<StackModel> InternalSolver::solve_qf(const lia::Formula& matrix,
                                                   const Deadline& deadline) {
    PathSearch search(deadline);
    auto model = search.run(matrix);
    if (!model) return std::nullopt;
    // Unconstrained variables default to zero so the model is total.
    for (const auto& v : matrix.free_vars())
        model->emplace(v, 0);
    return model;
}

}  // namespace slah
