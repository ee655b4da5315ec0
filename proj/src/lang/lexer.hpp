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

#ifndef UPVS_LANG_LEXER_HPP
#define UPVS_LANG_LEXER_HPP

#include <string>
#include <string_view>
#include <vector>

#include "lang/source.hpp"

namespace upvs {

enum class TokenKind {
    Keyword,
    Identifier,
    Number,
    String,
    Operator,
    Backtick,
    Punctuation,
    Comment,
    Error,
};

const char* to_string(TokenKind kind);

struct Token {
    TokenKind kind = TokenKind::Error;
    std::string lexeme;
    Range range;
    std::size_t offset = 0; // byte offset of the first lexeme byte

    std::size_t end_offset() const { return offset + lexeme.size(); }
    /// Keyword comparison is case-insensitive (PVS keywords are); `upper` must be upper case.
    bool is_keyword(std::string_view upper) const;
    bool is(TokenKind k, std::string_view text) const { return kind == k && lexeme == text; }
    bool is_punct(std::string_view text) const {
        return (kind == TokenKind::Punctuation || kind == TokenKind::Operator) && lexeme == text;
    }
};

struct LexResult {
    std::vector<Token> tokens;
    std::vector<Diagnostic> diagnostics;
};

/// Total: lexical problems become Error tokens plus diagnostics.
/// Whitespace is the only text not covered by a token.
LexResult tokenize(std::string_view text);

/// Upper-cased spelling if `word` is a reserved word, otherwise empty.
std::string keyword_spelling(std::string_view word);
const std::vector<std::string>& keywords();
bool is_identifier(std::string_view text);

} // namespace upvs

#endif // UPVS_LANG_LEXER_HPP
