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

#ifndef UPVS_LANG_PARSER_HPP
#define UPVS_LANG_PARSER_HPP

#include <string>
#include <string_view>
#include <vector>

#include "lang/ast.hpp"
#include "lang/lexer.hpp"

namespace upvs {

struct ParseResult {
    SourceFile ast; // possibly partial
    std::vector<Diagnostic> diagnostics;
    std::vector<Token> tokens;
};

/// Never fails. A declaration that does not parse is dropped with one
/// diagnostic and parsing resumes at the next declaration start.
ParseResult parse_theory_file(std::string_view uri, std::string_view text);

template <typename T>
struct FragmentResult {
    T value; // null on failure
    std::vector<Diagnostic> diagnostics;
};

/// Parses a standalone expression (evaluator input, prover terms).
FragmentResult<ExprPtr> parse_expression(std::string_view text);
FragmentResult<TypePtr> parse_type(std::string_view text);

/// Parses a type starting at `tokens[index]` (comments allowed in `tokens`);
/// null when no type parses there. Used for tolerant lookups on broken files.
TypePtr parse_type_at(const std::vector<Token>& tokens, std::size_t index);

} // namespace upvs

#endif // UPVS_LANG_PARSER_HPP
