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

#ifndef UPVS_LANG_EXPR_UTIL_HPP
#define UPVS_LANG_EXPR_UTIL_HPP

#include <functional>
#include <map>
#include <set>
#include <string>

#include "lang/ast.hpp"

namespace upvs {

/// Names occurring free in `e` (not captured by a FORALL/EXISTS/LET binder
/// inside `e`). Names in binder types are included.
std::set<std::string> free_names(const ExprPtr& e);

/// Every name used anywhere in `e`, bound or free.
std::set<std::string> all_names(const ExprPtr& e);

/// Free names whose typechecker reference is Local, i.e. variables.
std::set<std::string> free_variables(const ExprPtr& e);

/// Capture-avoiding simultaneous substitution of free names. Binders whose
/// variable would capture a free name of a replacement are renamed.
ExprPtr substitute(const ExprPtr& e, const std::map<std::string, ExprPtr>& replacements);

/// Equality up to renaming of bound variables (ignores ranges and annotations).
bool alpha_equal(const ExprPtr& a, const ExprPtr& b);

/// Rebuilds `e` bottom-up: children first, then `fn` on the rebuilt node,
/// which returns a replacement or null to keep it. Nodes without changes are
/// shared, not copied. Binder types are left alone.
ExprPtr rewrite_bottom_up(const ExprPtr& e, const std::function<ExprPtr(const ExprPtr&)>& fn);

/// `base` if unused, otherwise `base_1`, `base_2`, ... avoiding `taken`.
std::string fresh_name(const std::string& base, const std::set<std::string>& taken);

} // namespace upvs

#endif // UPVS_LANG_EXPR_UTIL_HPP
