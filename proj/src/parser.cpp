// Copyright (c) slah contributors.
// SPDX-License-Identifier: Apache-2.0
#include "slah/parser.hpp"

#include <cctype>
#include <set>
#include <sstream>

namespace slah {

namespace {

using sexp::Node;

const std::set<std::string> kReserved = {"true", "and",  "sep",         "emp",
                                         "pto",  "blk",  "hls",         "inf",
                                         "+",    "=",    "distinct",    "<",
                                         "<=",   "declare-var", "check-sat", "check-entail"};

bool valid_ident(const std::string& s) {
    if (s.empty()) return false;
    if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
    for (char c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
    return true;
}

class QueryReader {
  public:
    explicit QueryReader(std::string_view text) : forms_(sexp::read_all(text)) {}

    Query read() {
        if (forms_.empty()) throw ParseError({1, 1}, "expected declarations and a query");
        Query q;
        std::size_t i = 0;
        for (; i < forms_.size(); ++i) {
            const Node& form = forms_[i];
            if (!form.is_list() || form.children.empty()) break;
            if (!form.children.front().is_symbol("declare-var")) break;
            expect_arity(form, 2, "declare-var");
            const Node& name = form.children[1];
            if (!name.is_symbol() || !valid_ident(name.text))
                throw ParseError(name.loc, "expected an identifier");
            if (kReserved.count(name.text))
                throw ParseError(name.loc, "reserved word cannot be a variable: " + name.text);
            if (!declared_.insert(name.text).second)
                throw ParseError(name.loc, "duplicate declaration of " + name.text);
            q.declarations.push_back(name.text);
        }
        if (i == forms_.size()) throw ParseError(forms_.back().loc, "missing query form");
        const Node& query = forms_[i];
        if (i + 1 != forms_.size())
            throw ParseError(forms_[i + 1].loc, "unexpected form after the query");
        if (!query.is_list() || query.children.empty() || !query.children.front().is_symbol())
            throw ParseError(query.loc, "expected (check-sat ...) or (check-entail ...)");

        const std::string& head = query.children.front().text;
        if (head == "check-sat") {
            expect_arity(query, 3, "check-sat");
            q.kind = Query::Kind::CheckSat;
            q.antecedent = heap(query.children[1], query.children[2]);
        } else if (head == "check-entail") {
            expect_arity(query, 3, "check-entail");
            q.kind = Query::Kind::CheckEntail;
            q.antecedent = heap_pair(query.children[1]);
            q.consequent = heap_pair(query.children[2]);
            std::set<VarId> afv = q.antecedent.fv();
            for (const auto& v : q.consequent->fv())
                if (!afv.count(v))
                    throw ParseError(query.children[2].loc,
                                     "consequent uses " + v + " which the antecedent does not");
        } else {
            throw ParseError(query.loc, "unknown query form: " + head);
        }
        return q;
    }

  private:
    static void expect_arity(const Node& form, std::size_t n, const std::string& what) {
        if (form.children.size() != n)
            throw ParseError(form.loc, what + " takes " + std::to_string(n - 1) + " argument(s)");
    }

    SymbolicHeap heap_pair(const Node& form) {
        if (!form.is_list() || form.children.size() != 2)
            throw ParseError(form.loc, "expected (pure spatial)");
        return heap(form.children[0], form.children[1]);
    }

    SymbolicHeap heap(const Node& pure_node, const Node& spatial_node) {
        return SymbolicHeap(pure(pure_node), spatial(spatial_node));
    }

    PureFormula pure(const Node& node) {
        if (node.is_symbol("true")) return PureFormula::top();
        if (!node.is_list() || node.children.empty() || !node.children.front().is_symbol("and"))
            throw ParseError(node.loc, "expected true or (and cmp+)");
        if (node.children.size() < 2)
            throw ParseError(node.loc, "(and ...) needs at least one comparison");
        PureFormula p;
        for (std::size_t i = 1; i < node.children.size(); ++i) p.add(comparison(node.children[i]));
        return p;
    }

    PureAtom comparison(const Node& node) {
        if (!node.is_list() || node.children.size() != 3 || !node.children.front().is_symbol())
            throw ParseError(node.loc, "expected (op term term)");
        const std::string& op = node.children.front().text;
        CmpOp cmp;
        if (op == "=")
            cmp = CmpOp::Eq;
        else if (op == "distinct")
            cmp = CmpOp::Ne;
        else if (op == "<")
            cmp = CmpOp::Lt;
        else if (op == "<=")
            cmp = CmpOp::Le;
        else
            throw ParseError(node.children.front().loc, "unknown comparison: " + op);
        return PureAtom{term(node.children[1]), cmp, term(node.children[2])};
    }

    AddrTerm term(const Node& node) {
        if (node.is_number()) return AddrTerm(node.number);
        if (node.is_symbol()) {
            if (!valid_ident(node.text) || kReserved.count(node.text))
                throw ParseError(node.loc, "expected a term, found " + node.text);
            if (!declared_.count(node.text))
                throw ParseError(node.loc, "undeclared variable: " + node.text);
            return AddrTerm::var(node.text);
        }
        if (node.children.empty() || !node.children.front().is_symbol("+") ||
            node.children.size() < 3)
            throw ParseError(node.loc, "expected IDENT, NAT or (+ term term+)");
        AddrTerm sum;
        for (std::size_t i = 1; i < node.children.size(); ++i) sum += term(node.children[i]);
        return sum;
    }

    std::vector<SpatialAtom> spatial(const Node& node) {
        if (!node.is_list() || node.children.empty() || !node.children.front().is_symbol("sep"))
            throw ParseError(node.loc, "expected (sep atom*)");
        std::vector<SpatialAtom> atoms;
        for (std::size_t i = 1; i < node.children.size(); ++i) atoms.push_back(atom(node.children[i]));
        return atoms;
    }

    SpatialAtom atom(const Node& node) {
        if (node.is_symbol("emp")) return SpatialAtom::emp();
        if (!node.is_list() || node.children.empty() || !node.children.front().is_symbol())
            throw ParseError(node.loc, "expected emp, (pto ...), (blk ...) or (hls ...)");
        const std::string& head = node.children.front().text;
        if (head == "pto") {
            expect_arity(node, 3, "pto");
            return SpatialAtom::points_to(term(node.children[1]), term(node.children[2]));
        }
        if (head == "blk") {
            expect_arity(node, 3, "blk");
            return SpatialAtom::blk(term(node.children[1]), term(node.children[2]));
        }
        if (head == "hls") {
            expect_arity(node, 4, "hls");
            Bound b = node.children[3].is_symbol("inf") ? Bound::infinity()
                                                        : Bound(term(node.children[3]));
            return SpatialAtom::hls(term(node.children[1]), term(node.children[2]), std::move(b));
        }
        throw ParseError(node.loc, "unknown spatial atom: " + head);
    }

    std::vector<Node> forms_;
    std::set<VarId> declared_;
};

void print_term(std::ostream& os, const AddrTerm& t) {
    std::vector<std::string> parts;
    for (const auto& [v, k] : t.coefficients())
        for (std::uint64_t i = 0; i < k; ++i) parts.push_back(v);
    if (t.constant() != 0 || parts.empty()) parts.push_back(std::to_string(t.constant()));
    if (parts.size() == 1) {
        os << parts.front();
        return;
    }
    os << "(+";
    for (const auto& p : parts) os << " " << p;
    os << ")";
}

void print_pure(std::ostream& os, const PureFormula& p) {
    if (p.contradiction)
        throw InternalError("the input dialect cannot express a pure contradiction");
    if (p.atoms.empty()) {
        os << "true";
        return;
    }
    os << "(and";
    for (const auto& a : p.atoms) {
        os << " (";
        switch (a.op) {
        case CmpOp::Eq: os << "="; break;
        case CmpOp::Ne: os << "distinct"; break;
        case CmpOp::Lt: os << "<"; break;
        case CmpOp::Le: os << "<="; break;
        }
        os << " ";
        print_term(os, a.lhs);
        os << " ";
        print_term(os, a.rhs);
        os << ")";
    }
    os << ")";
}

void print_spatial(std::ostream& os, const std::vector<SpatialAtom>& atoms) {
    os << "(sep";
    for (const auto& a : atoms) {
        os << " ";
        switch (a.kind()) {
        case SpatialAtom::Kind::Emp: os << "emp"; break;
        case SpatialAtom::Kind::PointsTo:
            os << "(pto ";
            print_term(os, a.pto_addr());
            os << " ";
            print_term(os, a.pto_value());
            os << ")";
            break;
        case SpatialAtom::Kind::Blk:
            os << "(blk ";
            print_term(os, a.from());
            os << " ";
            print_term(os, a.to());
            os << ")";
            break;
        case SpatialAtom::Kind::Hls:
            os << "(hls ";
            print_term(os, a.from());
            os << " ";
            print_term(os, a.to());
            os << " ";
            if (a.bound().is_infinite())
                os << "inf";
            else
                print_term(os, a.bound().term());
            os << ")";
            break;
        }
    }
    os << ")";
}

}  // namespace

Query parse_query(std::string_view text) { return QueryReader(text).read(); }

std::string print_heap_body(const SymbolicHeap& h) {
    if (!h.is_quantifier_free())
        throw InputError("the input dialect has no quantifier syntax");
    std::ostringstream os;
    print_pure(os, h.pure());
    os << " ";
    print_spatial(os, h.spatial());
    return os.str();
}

std::string print_query(const Query& q) {
    std::ostringstream os;
    for (const auto& v : q.declarations) os << "(declare-var " << v << ")\n";
    if (q.kind == Query::Kind::CheckSat) {
        os << "(check-sat " << print_heap_body(q.antecedent) << ")\n";
    } else {
        os << "(check-entail (" << print_heap_body(q.antecedent) << ") ("
           << print_heap_body(*q.consequent) << "))\n";
    }
    return os.str();
}

}  // namespace slah
