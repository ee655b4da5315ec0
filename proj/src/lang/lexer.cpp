/*
 * Copyright (C) 2026 The upvs authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "lang/lexer.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace upvs {

namespace {

const std::vector<std::string> kUpperKeywords = {
    "THEORY", "BEGIN", "END",   "IMPORTING", "TYPE",   "THEOREM", "LEMMA", "CONJECTURE",
    "IF",     "THEN",  "ELSE",  "ENDIF",     "FORALL", "EXISTS",  "LET",   "IN",
    "AND",    "OR",    "NOT",   "IMPLIES",   "IFF",    "TRUE",    "FALSE",
};

// Base type names are reserved in lower case only.
const std::vector<std::string> kTypeKeywords = {"bool", "boolean", "int", "nat", "real", "string"};

// Longest first.
constexpr std::array<std::string_view, 11> kMultiCharSymbols = {
    "<=>", "=>", "/=", "<=", ">=", ":=", "->", "[#", "#]", "(#", "#)",
};

constexpr std::string_view kSingleCharSymbols = "()[]{},:|.;=<>+-*/&";

bool is_operator_symbol(std::string_view s) {
    static const std::array<std::string_view, 13> ops = {
        "=", "/=", "<", "<=", ">", ">=", "+", "-", "*", "/", "&", "=>", "<=>"};
    return std::find(ops.begin(), ops.end(), s) != ops.end();
}

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }

bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_' || c == '?' || c == '!';
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

class Lexer {
public:
    explicit Lexer(std::string_view text) : text_(text), lines_(text) {}

    LexResult run() {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (is_space(c)) {
                ++pos_;
            } else if (c == '%') {
                std::size_t end = pos_;
                while (end < text_.size() && text_[end] != '\n' && text_[end] != '\r') ++end;
                emit(TokenKind::Comment, end);
            } else if (ident_start(c)) {
                std::size_t end = pos_ + 1;
                while (end < text_.size() && ident_char(text_[end])) ++end;
                auto word = text_.substr(pos_, end - pos_);
                emit(keyword_spelling(word).empty() ? TokenKind::Identifier : TokenKind::Keyword, end);
            } else if (std::isdigit(static_cast<unsigned char>(c))) {
                lex_number();
            } else if (c == '"') {
                lex_string();
            } else if (c == '`') {
                emit(TokenKind::Backtick, pos_ + 1);
            } else if (!lex_symbol()) {
                lex_unknown();
            }
        }
        return std::move(result_);
    }

private:
    void emit(TokenKind kind, std::size_t end) {
        Token tok;
        tok.kind = kind;
        tok.lexeme = std::string(text_.substr(pos_, end - pos_));
        tok.offset = pos_;
        Position start = lines_.advance(cursor_, cursor_offset_, pos_);
        Position stop = lines_.advance(start, pos_, end);
        tok.range = Range{start, stop};
        cursor_ = stop;
        cursor_offset_ = end;
        result_.tokens.push_back(std::move(tok));
        pos_ = end;
    }

    void error(const std::string& message) {
        result_.diagnostics.push_back(
            Diagnostic{result_.tokens.back().range, Severity::Error, message, "parser"});
    }

    void lex_number() {
        std::size_t end = pos_;
        while (end < text_.size() && std::isdigit(static_cast<unsigned char>(text_[end]))) ++end;
        if (end + 1 < text_.size() && text_[end] == '.' &&
            std::isdigit(static_cast<unsigned char>(text_[end + 1]))) {
            ++end;
            while (end < text_.size() && std::isdigit(static_cast<unsigned char>(text_[end]))) ++end;
        }
        emit(TokenKind::Number, end);
    }

    void lex_string() {
        std::size_t end = pos_ + 1;
        while (end < text_.size() && text_[end] != '"' && text_[end] != '\n' && text_[end] != '\r') {
            if (text_[end] == '\\' && end + 1 < text_.size() && text_[end + 1] != '\n' &&
                text_[end + 1] != '\r')
                ++end;
            ++end;
        }
        if (end < text_.size() && text_[end] == '"') {
            emit(TokenKind::String, end + 1);
        } else {
            emit(TokenKind::Error, end);
            error("unterminated string literal");
        }
    }

    bool lex_symbol() {
        auto rest = text_.substr(pos_);
        for (auto sym : kMultiCharSymbols) {
            if (rest.substr(0, sym.size()) == sym) {
                emit(is_operator_symbol(sym) ? TokenKind::Operator : TokenKind::Punctuation,
                     pos_ + sym.size());
                return true;
            }
        }
        if (kSingleCharSymbols.find(rest[0]) != std::string_view::npos) {
            emit(is_operator_symbol(rest.substr(0, 1)) ? TokenKind::Operator : TokenKind::Punctuation,
                 pos_ + 1);
            return true;
        }
        return false;
    }

    void lex_unknown() {
        char32_t cp = 0;
        std::size_t len = 1;
        bool ok = decode_utf8(text_, pos_, cp, len);
        emit(TokenKind::Error, pos_ + len);
        if (ok)
            error("unexpected character '" + result_.tokens.back().lexeme + "'");
        else
            error("invalid UTF-8 byte");
    }

    std::string_view text_;
    LineIndex lines_;
    std::size_t pos_ = 0;
    // Last computed position, so columns are not rescanned from the line start.
    Position cursor_{};
    std::size_t cursor_offset_ = 0;
    LexResult result_;
};

} // namespace

const char* to_string(TokenKind kind) {
    switch (kind) {
    case TokenKind::Keyword: return "keyword";
    case TokenKind::Identifier: return "identifier";
    case TokenKind::Number: return "number";
    case TokenKind::String: return "string";
    case TokenKind::Operator: return "operator";
    case TokenKind::Backtick: return "backtick";
    case TokenKind::Punctuation: return "punctuation";
    case TokenKind::Comment: return "comment";
    case TokenKind::Error: return "error";
    }
    return "error";
}

bool Token::is_keyword(std::string_view upper) const {
    if (kind != TokenKind::Keyword || lexeme.size() != upper.size()) return false;
    for (std::size_t i = 0; i < upper.size(); ++i) {
        if (std::toupper(static_cast<unsigned char>(lexeme[i])) != upper[i]) return false;
    }
    return true;
}

std::string keyword_spelling(std::string_view word) {
    for (const auto& k : kTypeKeywords) {
        if (word == k) return k;
    }
    std::string upper(word);
    for (auto& ch : upper) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    for (const auto& k : kUpperKeywords) {
        if (upper == k) return k;
    }
    return {};
}

const std::vector<std::string>& keywords() {
    static const std::vector<std::string> all = [] {
        std::vector<std::string> v = kUpperKeywords;
        v.insert(v.end(), kTypeKeywords.begin(), kTypeKeywords.end());
        return v;
    }();
    return all;
}

bool is_identifier(std::string_view text) {
    if (text.empty() || !ident_start(text[0])) return false;
    if (!std::all_of(text.begin() + 1, text.end(), ident_char)) return false;
    return keyword_spelling(text).empty();
}

LexResult tokenize(std::string_view text) { return Lexer(text).run(); }

} // namespace upvs
