// Copyright (c) slah contributors.
// SPDX-License-Identifier: Apache-2.0
#include "slah/sexp.hpp"

#include <cctype>

namespace slah::sexp {

namespace {

class Reader {
  public:
    explicit Reader(std::string_view input) : input_(input) {}

    std::vector<Node> read_all() {
        std::vector<Node> forms;
        skip_blank();
        while (!at_end()) {
            forms.push_back(read_form());
            skip_blank();
        }
        return forms;
    }

  private:
    bool at_end() const { return pos_ >= input_.size(); }
    char peek() const { return input_[pos_]; }

    char advance() {
        char c = input_[pos_++];
        if (c == '\n') {
            ++loc_.line;
            loc_.column = 1;
        } else {
            ++loc_.column;
        }
        return c;
    }

    void skip_blank() {
        while (!at_end()) {
            char c = peek();
            if (c == ';') {
                while (!at_end() && peek() != '\n') advance();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                return;
            }
        }
    }

    static bool is_delimiter(char c) {
        return c == '(' || c == ')' || c == ';' || std::isspace(static_cast<unsigned char>(c));
    }

    Node read_form() {
        SourceLoc start = loc_;
        char c = peek();
        if (c == ')') throw ParseError(start, "unmatched ')'");
        if (c == '(') {
            advance();
            Node list;
            list.kind = Node::Kind::List;
            list.loc = start;
            skip_blank();
            while (true) {
                if (at_end()) throw ParseError(start, "unterminated '('");
                if (peek() == ')') {
                    advance();
                    return list;
                }
                list.children.push_back(read_form());
                skip_blank();
            }
        }
        std::string token;
        while (!at_end() && !is_delimiter(peek())) token.push_back(advance());
        if (token.empty()) throw ParseError(start, "empty token");
        Node node;
        node.loc = start;
        bool all_digits = true;
        for (char t : token)
            if (!std::isdigit(static_cast<unsigned char>(t))) all_digits = false;
        if (all_digits) {
            node.kind = Node::Kind::Number;
            try {
                node.number = std::stoull(token);
            } catch (const std::out_of_range&) {
                throw ParseError(start, "numeral out of range: " + token);
            }
        } else {
            node.kind = Node::Kind::Symbol;
            node.text = std::move(token);
        }
        return node;
    }

    std::string_view input_;
    std::size_t pos_ = 0;
    SourceLoc loc_;
};

}  // namespace

std::vector<Node> read_all(std::string_view input) { return Reader(input).read_all(); }

}  // namespace slah::sexp
