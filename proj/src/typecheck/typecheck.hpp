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

#ifndef UPVS_TYPECHECK_TYPECHECK_HPP
#define UPVS_TYPECHECK_TYPECHECK_HPP

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "lang/ast.hpp"

namespace upvs {

enum class TccKind { NonzeroDivisor, Subtype };

const char* to_string(TccKind kind);

struct Tcc {
    std::string id;       // "<decl>_TCC<k>"
    TccKind kind = TccKind::Subtype;
    ExprPtr obligation;   // closed, typed
    Range origin;
    std::string decl;     // declaration the obligation came from
};

enum class SymbolKind { Type, Const, Function, Formula, Variable };

const char* to_string(SymbolKind kind);

struct ScopeEntry {
    std::string name;
    Range range; // binding occurrence
    TypePtr type;
};

// Lexical scopes of a theory. Scope 0 is the theory itself; its entries are
// the declarations in source order.
struct Scope {
    int id = 0;
    int parent = -1;
    Range range;
    std::vector<ScopeEntry> entries;
};

// A resolved name occurrence, including binding occurrences.
struct Reference {
    Range range;
    std::string name;
    SymbolRef target;
    Range binding;       // Local: the binder's range
    int scope = 0;       // innermost scope enclosing the occurrence
    bool definition = false;
};

struct TypecheckResult;
using TypecheckResultPtr = std::shared_ptr<const TypecheckResult>;

struct TypecheckResult {
    std::string uri;
    std::shared_ptr<const Theory> theory; // typed copy
    std::vector<TypePtr> decl_types;      // resolved, per decl index (null if the decl failed)
    std::vector<Diagnostic> diagnostics;
    std::vector<Tcc> tccs;
    std::vector<Scope> scopes;
    std::vector<Reference> references;
    // Every theory visible from this one (transitive imports plus prelude),
    // nearest first.
    std::vector<TypecheckResultPtr> imports;

    bool typechecked() const { return !has_errors(diagnostics); }
    const Decl* decl(int index) const;
    /// Looks a Decl reference up here or in `imports`.
    const Decl* lookup(const SymbolRef& ref) const;
    TypePtr lookup_type(const SymbolRef& ref) const;
    const TypecheckResult* theory_result(const std::string& name) const;
    /// Index of the named declaration (last one wins for overloads), or -1.
    int find_decl(const std::string& name) const;
    const Tcc* find_tcc(const std::string& id) const;
};

struct ImportLookup {
    TypecheckResultPtr result; // null when unavailable
    std::string error;         // reason when null
};

using ImportResolver = std::function<ImportLookup(const std::string& theory)>;

/// Total and deterministic. Problems become diagnostics.
TypecheckResultPtr typecheck(const Theory& theory, const std::string& uri, const ImportResolver& imports);

// --- the built-in prelude --------------------------------------------------

constexpr const char* kPreludeUri = "upvs:/prelude.pvs";
const std::string& prelude_source();
/// Parsed and typechecked once, shared by everything.
TypecheckResultPtr prelude();

// --- standalone expressions ------------------------------------------------

/// Extra symbols visible to a standalone expression (prover constants).
struct LocalSymbol {
    std::string name;
    TypePtr type;
    SymbolRef::Kind kind = SymbolRef::Kind::Skolem;
};

struct CheckedExpr {
    ExprPtr expr; // typed; null if diagnostics contain errors
    std::vector<Diagnostic> diagnostics;
    std::vector<Tcc> tccs;
};

/// Typechecks `e` in the scope at the end of `ctx`'s theory. A non-null
/// `expected` type is checked against (subtype predicates become TCCs).
CheckedExpr check_expression(const ExprPtr& e, const TypecheckResult& ctx,
                             const std::vector<LocalSymbol>& locals = {}, const TypePtr& expected = nullptr);

/// Type of `e`; throws Error(UnresolvedName | TypeMismatch) on the first problem.
TypePtr infer_type(const ExprPtr& e, const TypecheckResult& ctx, const std::vector<LocalSymbol>& locals = {});

// --- type utilities --------------------------------------------------------

/// Removes subtype layers (nat counts as a subtype of int) at the top level.
TypePtr strip_subtypes(const TypePtr& t);
/// Removes subtype layers everywhere.
TypePtr max_supertype(const TypePtr& t);
/// Whether a value of type `actual` may be used where `expected` is wanted,
/// ignoring subtype predicates (they produce TCCs instead).
bool compatible(const TypePtr& expected, const TypePtr& actual);
bool is_bool(const TypePtr& t);
bool is_numeric(const TypePtr& t);
bool is_integral(const TypePtr& t);
bool types_equal(const TypePtr& a, const TypePtr& b);

// One `{var: S | predicate}` layer of a subtype; nat contributes `n >= 0`.
struct SubtypeLayer {
    std::string var;
    ExprPtr predicate;
};

/// Predicates a value of type `t` satisfies, outermost supertype first.
std::vector<SubtypeLayer> subtype_layers(const TypePtr& t);
/// `layer.predicate` with `value` for the variable.
ExprPtr instantiate(const SubtypeLayer& layer, const ExprPtr& value);

} // namespace upvs

#endif // UPVS_TYPECHECK_TYPECHECK_HPP
