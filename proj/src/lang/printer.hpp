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

#ifndef UPVS_LANG_PRINTER_HPP
#define UPVS_LANG_PRINTER_HPP

#include <string>

#include "lang/ast.hpp"

namespace upvs {

// Canonical single-line rendering; parentheses only where precedence needs them.
std::string pretty_print(const Expr& e);
std::string pretty_print(const Type& t);
std::string pretty_print(const Decl& d);
std::string pretty_print(const Theory& th);
std::string pretty_print(const SourceFile& file);

std::string pretty_print(const ExprPtr& e);
std::string pretty_print(const TypePtr& t);

/// "x, y: int, b: bool": consecutive binders with equal types share one type.
std::string print_bindings(const std::vector<Binding>& bindings);

} // namespace upvs

#endif // UPVS_LANG_PRINTER_HPP
