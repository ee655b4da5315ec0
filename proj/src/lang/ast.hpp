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

#ifndef UPVS_LANG_AST_HPP
#define UPVS_LANG_AST_HPP

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lang/source.hpp"

namespace upvs {

struct Type;
struct Expr;
struct Decl;
using TypePtr = std::shared_ptr<const Type>;
using ExprPtr = std::shared_ptr<const Expr>;
using DeclPtr = std::shared_ptr<const Decl>;

enum class BaseType { Bool, Int, Nat, Real, String };

const char* to_string(BaseType base);

// A binder `name: type`. `resolved` is filled in by the typechecker and is
// the alias-free form of `type`.
struct Binding {
    std::string name;
    TypePtr type;
    Range range; // the name
    TypePtr resolved;
};

struct FieldType {
    std::string name;
    TypePtr type;
    Range range;
};

// Syntactic types and, after resolution, type values. A resolved type never
// contains Named except for uninterpreted types, whose `name` is then
// qualified as "theory.T".
struct Type {
    enum class Kind { Base, Named, Function, Record, Subtype };

    Kind kind = Kind::Base;
    Range range;
    BaseType base = BaseType::Bool;
    std::string name;                // Named; Subtype variable
    Range name_range;                // Subtype variable
    std::vector<TypePtr> domain;     // Function
    TypePtr codomain;                // Function
    std::vector<FieldType> fields;   // Record, in declaration order
    TypePtr supertype;               // Subtype
    ExprPtr predicate;               // Subtype
    bool uninterpreted = false;      // resolved Named
};

enum class ExprKind {
    BoolLit,
    IntLit,
    RealLit,
    StringLit,
    Name,
    Apply,
    Binary,
    Unary,
    If,
    Forall,
    Exists,
    Let,
    Record,
    Field,
};

enum class BinaryOp { Iff, Implies, Or, And, Eq, Neq, Lt, Le, Gt, Ge, Add, Sub, Mul, Div };
enum class UnaryOp { Not, Neg };

const char* to_string(BinaryOp op);
int precedence(BinaryOp op);
bool is_right_assoc(BinaryOp op);
bool is_connective(BinaryOp op);
bool is_comparison(BinaryOp op);
bool is_arithmetic(BinaryOp op);

struct LetBinding {
    std::string name;
    TypePtr type; // optional
    ExprPtr value;
    Range range;
};

struct FieldInit {
    std::string name;
    ExprPtr value;
    Range range;
};

// What a Name occurrence denotes; set by the typechecker.
struct SymbolRef {
    enum class Kind { Unresolved, Local, Decl, Skolem };
    Kind kind = Kind::Unresolved;
    std::string theory;
    int decl_index = -1;

    bool operator==(const SymbolRef&) const = default;
};

// One node type for all expressions; which fields are meaningful depends on `kind`:
//   literals: text (bool_value for BoolLit)
//   Name: text, ref
//   Apply: args[0] is the function, args[1..] the arguments
//   Binary: args = {lhs, rhs}, bop;  Unary: args = {operand}, uop
//   If: args = {cond, then, else}
//   Forall/Exists: bindings, args = {body}
//   Let: lets, args = {body}
//   Record: fields;  Field: args = {record}, text = field name, name_range
struct Expr {
    ExprKind kind = ExprKind::BoolLit;
    Range range;
    std::string text;
    bool bool_value = false;
    BinaryOp bop = BinaryOp::And;
    UnaryOp uop = UnaryOp::Not;
    std::vector<ExprPtr> args;
    std::vector<Binding> bindings;
    std::vector<LetBinding> lets;
    std::vector<FieldInit> fields;
    Range name_range;

    // Typechecker annotations.
    TypePtr type;
    SymbolRef ref;
};

enum class DeclKind { Type, Const, Function, Formula };
enum class FormulaKind { Theorem, Lemma, Conjecture };

const char* to_string(FormulaKind kind);

struct Decl {
    DeclKind kind = DeclKind::Const;
    std::string name;
    Range name_range;
    Range range;
    TypePtr type;                 // Type: definition (optional); Const: type; Function: return type
    ExprPtr body;                 // Const: optional; Function, Formula: required
    std::vector<Binding> params;  // Function
    bool recursive = false;       // Function: body refers to the function itself
    FormulaKind formula_kind = FormulaKind::Theorem;
};

struct Importing {
    std::string name;
    Range range;
};

struct Theory {
    std::string name;
    Range name_range;
    Range range;
    std::vector<Importing> importings;
    std::vector<DeclPtr> decls;
    std::string end_name;
    Range end_name_range;
};

struct SourceFile {
    std::vector<Theory> theories;
};

// --- construction helpers --------------------------------------------------

TypePtr make_base_type(BaseType base, Range range = {});
TypePtr make_named_type(std::string name, Range range = {});
TypePtr make_function_type(std::vector<TypePtr> domain, TypePtr codomain, Range range = {});

ExprPtr make_bool(bool value, Range range = {});
ExprPtr make_int(std::string digits, Range range = {});
ExprPtr make_name(std::string name, Range range = {});
ExprPtr make_binary(BinaryOp op, ExprPtr lhs, ExprPtr rhs, Range range = {});
ExprPtr make_unary(UnaryOp op, ExprPtr operand, Range range = {});
ExprPtr make_if(ExprPtr cond, ExprPtr then_branch, ExprPtr else_branch, Range range = {});
ExprPtr make_apply(ExprPtr fn, std::vector<ExprPtr> args, Range range = {});
ExprPtr make_quantifier(ExprKind kind, std::vector<Binding> bindings, ExprPtr body, Range range = {});

/// Copy of `e` with the given children (all other fields kept).
ExprPtr with_args(const Expr& e, std::vector<ExprPtr> args);

// --- structural comparison -------------------------------------------------

/// Structural equality ignoring ranges and typechecker annotations.
bool structurally_equal(const Type& a, const Type& b);
bool structurally_equal(const Expr& a, const Expr& b);
bool structurally_equal(const Decl& a, const Decl& b);
bool structurally_equal(const Theory& a, const Theory& b);
bool structurally_equal(const SourceFile& a, const SourceFile& b);
bool structurally_equal(const TypePtr& a, const TypePtr& b);
bool structurally_equal(const ExprPtr& a, const ExprPtr& b);

// --- traversal -------------------------------------------------------------

/// Pre-order visit of every expression reachable from `e`, including
/// subtype predicates inside binder types.
void for_each_expr(const ExprPtr& e, const std::function<void(const Expr&)>& fn);

/// Calls fn(parent_range, child_range, what) for every parent/child node pair.
void for_each_range_pair(const Theory& theory,
                         const std::function<void(const Range&, const Range&, const char*)>& fn);

} // namespace upvs

#endif // UPVS_LANG_AST_HPP
