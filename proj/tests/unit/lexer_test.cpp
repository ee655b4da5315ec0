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


#include <doctest.h>

#include <random>
#include <string>
#include <vector>

#include "lang/lexer.hpp"

using namespace upvs;

namespace {

// Rebuilds the source from tokens plus the gaps between them and checks
// that every gap is whitespace.
std::string reconstruct(const std::string& text, const std::vector<Token>& tokens, bool& gaps_ok) {
    std::string out;
    std::size_t pos = 0;
    gaps_ok = true;
    for (const auto& t : tokens) {
        if (t.offset < pos) {
            gaps_ok = false;
            return out;
        }
        auto gap = text.substr(pos, t.offset - pos);
        for (char c : gap) {
            if (c != ' ' && c != '\t' && c != '\n' && c != '\r' && c != '\f' && c != '\v') gaps_ok = false;
        }
        out += gap;
        out += t.lexeme;
        pos = t.end_offset();
    }
    auto tail = text.substr(std::min(pos, text.size()));
    for (char c : tail) {
        if (c != ' ' && c != '\t' && c != '\n' && c != '\r' && c != '\f' && c != '\v') gaps_ok = false;
    }
    return out + tail;
}

std::string random_upvs_text(std::mt19937& rng) {
    static const std::vector<std::string> pieces = {
        "THEORY", "BEGIN", "END", "x", "foo_bar", "x!1", "p?", "42", "3.14", "1.", ":", ",", "(", ")",
        "[#", "#]", "(#", "#)", ":=", "->", "=>", "<=>", "/=", "<=", ">=", "`", "%c\n", "\"s\"",
        "\"open", " ", "  ", "\n", "\r\n", "\r", "\t", "@", "$", "é", "\xF0\x9F\x98\x80", "\xff",
        "int", "Nat", "IF", "if", "ENDIF", "{", "}", "|", ".", ";", "+", "-", "*", "/", "&", "#"};
    std::uniform_int_distribution<std::size_t> len(0, 40);
    std::uniform_int_distribution<std::size_t> pick(0, pieces.size() - 1);
    std::string out;
    auto n = len(rng);
    for (std::size_t i = 0; i < n; ++i) out += pieces[pick(rng)];
    return out;
}

} // namespace

TEST_CASE("tokenize: empty input") {
    auto r = tokenize("");
    CHECK(r.tokens.empty());
    CHECK(r.diagnostics.empty());
}

TEST_CASE("tokenize: kinds and UTF-16 ranges of a constant declaration") {
    auto r = tokenize("x: int");
    REQUIRE(r.tokens.size() == 3);
    CHECK(r.tokens[0].kind == TokenKind::Identifier);
    CHECK(r.tokens[1].kind == TokenKind::Punctuation);
    CHECK(r.tokens[2].kind == TokenKind::Keyword);
    CHECK(r.tokens[0].range == Range{{0, 0}, {0, 1}});
    CHECK(r.tokens[1].range == Range{{0, 1}, {0, 2}});
    CHECK(r.tokens[2].range == Range{{0, 3}, {0, 6}});
}

TEST_CASE("tokenize: record accessor") {
    auto r = tokenize("r`x");
    REQUIRE(r.tokens.size() == 3);
    CHECK(r.tokens[0].is(TokenKind::Identifier, "r"));
    CHECK(r.tokens[1].kind == TokenKind::Backtick);
    CHECK(r.tokens[2].is(TokenKind::Identifier, "x"));
}

TEST_CASE("tokenize: comments, keywords are case-insensitive, type names are not") {
    auto r = tokenize("if % note\nInt");
    REQUIRE(r.tokens.size() == 3);
    CHECK(r.tokens[0].kind == TokenKind::Keyword);
    CHECK(r.tokens[0].is_keyword("IF"));
    CHECK(r.tokens[1].kind == TokenKind::Comment);
    CHECK(r.tokens[1].lexeme == "% note");
    CHECK(r.tokens[2].kind == TokenKind::Identifier);
}

TEST_CASE("tokenize: columns count UTF-16 code units") {
    // U+1F600 takes two UTF-16 units, U+00E9 one.
    auto r = tokenize("\"\xF0\x9F\x98\x80\xC3\xA9\" y");
    REQUIRE(r.tokens.size() == 2);
    CHECK(r.tokens[0].range == Range{{0, 0}, {0, 5}});
    CHECK(r.tokens[1].range == Range{{0, 6}, {0, 7}});
}

TEST_CASE("tokenize: unknown characters become one-character error tokens") {
    auto r = tokenize("a @ b");
    REQUIRE(r.tokens.size() == 3);
    CHECK(r.tokens[1].kind == TokenKind::Error);
    CHECK(r.tokens[1].lexeme == "@");
    REQUIRE(r.diagnostics.size() == 1);
    CHECK(r.diagnostics[0].range == r.tokens[1].range);

    auto s = tokenize("\"abc");
    REQUIRE(s.tokens.size() == 1);
    CHECK(s.tokens[0].kind == TokenKind::Error);
    CHECK(s.diagnostics.size() == 1);
}

TEST_CASE("tokenize: line terminators") {
    auto r = tokenize("a\r\nb\rc\nd");
    REQUIRE(r.tokens.size() == 4);
    CHECK(r.tokens[1].range.start == Position{1, 0});
    CHECK(r.tokens[2].range.start == Position{2, 0});
    CHECK(r.tokens[3].range.start == Position{3, 0});
}

TEST_CASE("LineIndex round-trips offsets at token boundaries") {
    std::string text = "ab\r\n\xC3\xA9x\n\xF0\x9F\x98\x80z";
    LineIndex idx(text);
    for (const auto& t : tokenize(text).tokens) {
        CHECK(idx.offset_of(t.range.start) == t.offset);
        CHECK(idx.offset_of(t.range.end) == t.end_offset());
    }
    CHECK(idx.offset_of(Position{0, 99}) == 2);
    CHECK(idx.offset_of(Position{99, 0}) == text.size());
}

TEST_CASE("property: lexing is lossless and token ranges ascend") {
    std::mt19937 rng(20261016);
    for (int trial = 0; trial < 3000; ++trial) {
        auto text = random_upvs_text(rng);
        auto r = tokenize(text);
        bool gaps_ok = false;
        auto rebuilt = reconstruct(text, r.tokens, gaps_ok);
        REQUIRE_MESSAGE(gaps_ok, text);
        REQUIRE_MESSAGE(rebuilt == text, text);
        LineIndex idx(text);
        for (std::size_t i = 0; i < r.tokens.size(); ++i) {
            const auto& t = r.tokens[i];
            REQUIRE(t.range.start < t.range.end);
            REQUIRE(idx.position_of(t.offset) == t.range.start);
            if (i > 0) REQUIRE(r.tokens[i - 1].range.end <= t.range.start);
        }
    }
}
