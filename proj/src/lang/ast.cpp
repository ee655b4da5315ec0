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

#include "lang/ast.hpp"

namespace upvs {

const char* to_string(BaseType base) {
    switch (base) {
    case BaseType::Bool: return "bool";
    case BaseType::Int: return "int";
    case BaseType::Nat: return "nat";
    case BaseType::Real: return "real";
    case BaseType::String: return "string";
    }
    return "bool";
}

const char* to_string(BinaryOp op) {
    switch (op) {
    case BinaryOp::Iff: return "IFF";
    case BinaryOp::Implies: return "IMPLIES";
    case BinaryOp::Or: return "OR";
    case BinaryOp::And: return "AND";
    case BinaryOp::Eq: return "=";
    case BinaryOp::Neq: return "/=";
    case BinaryOp::Lt: return "<";
    case BinaryOp::Le: return "<=";
    case BinaryOp::Gt: return ">";
    case BinaryOp::Ge: return ">=";
    case BinaryOp::Add: return "+";
    case BinaryOp::Sub: return "-";
    case BinaryOp::Mul: return "*";
    case BinaryOp::Div: return "/";
    }
    return "?";
}

int precedence(BinaryOp op) {
    switch (op) {
    case BinaryOp::Iff: return 1;
    case BinaryOp::Implies: return 2;
    case BinaryOp::Or: return 3;
    case BinaryOp::And: return 4;
    // NOT sits at 5
    case BinaryOp::Eq:
    case BinaryOp::Neq:
    case BinaryOp::Lt:
    case BinaryOp::Le:
    case BinaryOp::Gt:
    case BinaryOp::Ge: return 6;
    case BinaryOp::Add:
    case BinaryOp::Sub: return 7;
    case BinaryOp::Mul:
    case BinaryOp::Div: return 8;
    }
    return 0;
}

bool is_right_assoc(BinaryOp op) { return op == BinaryOp::Implies; }

bool is_connective(BinaryOp op) {
    return op == BinaryOp::Iff || op == BinaryOp::Implies || op == BinaryOp::Or || op == BinaryOp::And;
}

bool is_comparison(BinaryOp op) { return precedence(op) == 6; }

bool is_arithmetic(BinaryOp op) { return precedence(op) >= 7; }

const char* to_string(FormulaKind kind) {
    switch (kind) {
    case FormulaKind::Theorem: return "THEOREM";
    case FormulaKind::Lemma: return "LEMMA";
    case FormulaKind::Conjecture: return "CONJECTURE";
    }
    return "THEOREM";
}

TypePtr make_base_type(BaseType base, Range range) {
    auto t = std::make_shared<Type>();
    t->kind = Type::Kind::Base;
    t->base = base;
    t->range = range;
    return t;
}

TypePtr make_named_type(std::string name, Range range) {
    auto t = std::make_shared<Type>();
    t->kind = Type::Kind::Named;
    t->name = std::move(name);
    t->range = range;
    return t;
}

TypePtr make_function_type(std::vector<TypePtr> domain, TypePtr codomain, Range range) {
    auto t = std::make_shared<Type>();
    t->kind = Type::Kind::Function;
    t->domain = std::move(domain);
    t->codomain = std::move(codomain);
    t->range = range;
    return t;
}

ExprPtr make_bool(bool value, Range range) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::BoolLit;
    e->bool_value = value;
    e->text = value ? "TRUE" : "FALSE";
    e->range = range;
    e->type = make_base_type(BaseType::Bool);
    return e;
}

ExprPtr make_int(std::string digits, Range range) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::IntLit;
    e->text = std::move(digits);
    e->range = range;
    e->type = make_base_type(BaseType::Int);
    return e;
}

ExprPtr make_name(std::string name, Range range) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Name;
    e->text = std::move(name);
    e->range = range;
    return e;
}

ExprPtr make_binary(BinaryOp op, ExprPtr lhs, ExprPtr rhs, Range range) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Binary;
    e->bop = op;
    e->args = {std::move(lhs), std::move(rhs)};
    e->range = range;
    if (is_connective(op) || is_comparison(op)) e->type = make_base_type(BaseType::Bool);
    return e;
}

ExprPtr make_unary(UnaryOp op, ExprPtr operand, Range range) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Unary;
    e->uop = op;
    if (op == UnaryOp::Not)
        e->type = make_base_type(BaseType::Bool);
    else
        e->type = operand->type;
    e->args = {std::move(operand)};
    e->range = range;
    return e;
}

ExprPtr make_if(ExprPtr cond, ExprPtr then_branch, ExprPtr else_branch, Range range) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::If;
    e->type = then_branch->type;
    e->args = {std::move(cond), std::move(then_branch), std::move(else_branch)};
    e->range = range;
    return e;
}

ExprPtr make_apply(ExprPtr fn, std::vector<ExprPtr> args, Range range) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Apply;
    if (fn->type && fn->type->kind == Type::Kind::Function) e->type = fn->type->codomain;
    e->args.push_back(std::move(fn));
    for (auto& a : args) e->args.push_back(std::move(a));
    e->range = range;
    return e;
}

ExprPtr make_quantifier(ExprKind kind, std::vector<Binding> bindings, ExprPtr body, Range range) {
    auto e = std::make_shared<Expr>();
    e->kind = kind;
    e->bindings = std::move(bindings);
    e->args = {std::move(body)};
    e->range = range;
    e->type = make_base_type(BaseType::Bool);
    return e;
}

ExprPtr with_args(const Expr& e, std::vector<ExprPtr> args) {
    auto copy = std::make_shared<Expr>(e);
    copy->args = std::move(args);
    return copy;
}

// --- structural equality ------------------------------------------------------

bool structurally_equal(const TypePtr& a, const TypePtr& b) {
    if (!a || !b) return !a && !b;
    return structurally_equal(*a, *b);
}

bool structurally_equal(const ExprPtr& a, const ExprPtr& b) {
    if (!a || !b) return !a && !b;
    return structurally_equal(*a, *b);
}

static bool bindings_equal(const std::vector<Binding>& a, const std::vector<Binding>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].name != b[i].name || !structurally_equal(a[i].type, b[i].type)) return false;
    }
    return true;
}

bool structurally_equal(const Type& a, const Type& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
    case Type::Kind::Base: return a.base == b.base;
    case Type::Kind::Named: return a.name == b.name;
    case Type::Kind::Function:
        if (a.domain.size() != b.domain.size()) return false;
        for (std::size_t i = 0; i < a.domain.size(); ++i) {
            if (!structurally_equal(a.domain[i], b.domain[i])) return false;
        }
        return structurally_equal(a.codomain, b.codomain);
    case Type::Kind::Record:
        if (a.fields.size() != b.fields.size()) return false;
        for (std::size_t i = 0; i < a.fields.size(); ++i) {
            if (a.fields[i].name != b.fields[i].name ||
                !structurally_equal(a.fields[i].type, b.fields[i].type))
                return false;
        }
        return true;
    case Type::Kind::Subtype:
        return a.name == b.name && structurally_equal(a.supertype, b.supertype) &&
               structurally_equal(a.predicate, b.predicate);
    }
    return false;
}

bool structurally_equal(const Expr& a, const Expr& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
    case ExprKind::BoolLit: return a.bool_value == b.bool_value;
    case ExprKind::IntLit:
    case ExprKind::RealLit:
    case ExprKind::StringLit:
    case ExprKind::Name: return a.text == b.text;
    case ExprKind::Binary:
        if (a.bop != b.bop) return false;
        break;
    case ExprKind::Unary:
        if (a.uop != b.uop) return false;
        break;
    case ExprKind::Forall:
    case ExprKind::Exists:
        if (!bindings_equal(a.bindings, b.bindings)) return false;
        break;
    case ExprKind::Let:
        if (a.lets.size() != b.lets.size()) return false;
        for (std::size_t i = 0; i < a.lets.size(); ++i) {
            if (a.lets[i].name != b.lets[i].name || !structurally_equal(a.lets[i].type, b.lets[i].type) ||
                !structurally_equal(a.lets[i].value, b.lets[i].value))
                return false;
        }
        break;
    case ExprKind::Record:
        if (a.fields.size() != b.fields.size()) return false;
        for (std::size_t i = 0; i < a.fields.size(); ++i) {
            if (a.fields[i].name != b.fields[i].name ||
                !structurally_equal(a.fields[i].value, b.fields[i].value))
                return false;
        }
        return true;
    case ExprKind::Field:
        if (a.text != b.text) return false;
        break;
    case ExprKind::Apply:
    case ExprKind::If: break;
    }
    if (a.args.size() != b.args.size()) return false;
    for (std::size_t i = 0; i < a.args.size(); ++i) {
        if (!structurally_equal(a.args[i], b.args[i])) return false;
    }
    return true;
}

bool structurally_equal(const Decl& a, const Decl& b) {
    return a.kind == b.kind && a.name == b.name && structurally_equal(a.type, b.type) &&
           structurally_equal(a.body, b.body) && bindings_equal(a.params, b.params) &&
           a.recursive == b.recursive && a.formula_kind == b.formula_kind;
}

bool structurally_equal(const Theory& a, const Theory& b) {
    if (a.name != b.name || a.importings.size() != b.importings.size() || a.decls.size() != b.decls.size())
        return false;
    for (std::size_t i = 0; i < a.importings.size(); ++i) {
        if (a.importings[i].name != b.importings[i].name) return false;
    }
    for (std::size_t i = 0; i < a.decls.size(); ++i) {
        if (!structurally_equal(*a.decls[i], *b.decls[i])) return false;
    }
    return true;
}

bool structurally_equal(const SourceFile& a, const SourceFile& b) {
    if (a.theories.size() != b.theories.size()) return false;
    for (std::size_t i = 0; i < a.theories.size(); ++i) {
        if (!structurally_equal(a.theories[i], b.theories[i])) return false;
    }
    return true;
}

// --- traversal -------------------------------------------------------------------

static void visit_type_exprs(const TypePtr& t, const std::function<void(const Expr&)>& fn);

void for_each_expr(const ExprPtr& e, const std::function<void(const Expr&)>& fn) {
    if (!e) return;
    fn(*e);
    for (const auto& b : e->bindings) visit_type_exprs(b.type, fn);
    for (const auto& l : e->lets) {
        visit_type_exprs(l.type, fn);
        for_each_expr(l.value, fn);
    }
    for (const auto& f : e->fields) for_each_expr(f.value, fn);
    for (const auto& a : e->args) for_each_expr(a, fn);
}

static void visit_type_exprs(const TypePtr& t, const std::function<void(const Expr&)>& fn) {
    if (!t) return;
    for (const auto& d : t->domain) visit_type_exprs(d, fn);
    visit_type_exprs(t->codomain, fn);
    for (const auto& f : t->fields) visit_type_exprs(f.type, fn);
    visit_type_exprs(t->supertype, fn);
    for_each_expr(t->predicate, fn);
}

namespace {

using PairFn = std::function<void(const Range&, const Range&, const char*)>;

void type_pairs(const Type& t, const PairFn& fn);

void expr_pairs(const Expr& e, const PairFn& fn) {
    for (const auto& b : e.bindings) {
        fn(e.range, b.range, "binder");
        if (b.type) {
            fn(e.range, b.type->range, "binder type");
            type_pairs(*b.type, fn);
        }
    }
    for (const auto& l : e.lets) {
        fn(e.range, l.range, "let binding");
        if (l.type) {
            fn(e.range, l.type->range, "let type");
            type_pairs(*l.type, fn);
        }
        fn(e.range, l.value->range, "let value");
        expr_pairs(*l.value, fn);
    }
    for (const auto& f : e.fields) {
        fn(e.range, f.value->range, "field value");
        expr_pairs(*f.value, fn);
    }
    if (e.kind == ExprKind::Field) fn(e.range, e.name_range, "field name");
    for (const auto& a : e.args) {
        fn(e.range, a->range, "operand");
        expr_pairs(*a, fn);
    }
}

void type_pairs(const Type& t, const PairFn& fn) {
    for (const auto& d : t.domain) {
        fn(t.range, d->range, "domain");
        type_pairs(*d, fn);
    }
    if (t.codomain) {
        fn(t.range, t.codomain->range, "codomain");
        type_pairs(*t.codomain, fn);
    }
    for (const auto& f : t.fields) {
        fn(t.range, f.type->range, "field type");
        type_pairs(*f.type, fn);
    }
    if (t.supertype) {
        fn(t.range, t.supertype->range, "supertype");
        type_pairs(*t.supertype, fn);
    }
    if (t.predicate) {
        fn(t.range, t.predicate->range, "predicate");
        expr_pairs(*t.predicate, fn);
    }
}

} // namespace

void for_each_range_pair(const Theory& theory, const PairFn& fn) {
    fn(theory.range, theory.name_range, "theory name");
    for (const auto& imp : theory.importings) fn(theory.range, imp.range, "importing");
    for (const auto& d : theory.decls) {
        fn(theory.range, d->range, "decl");
        fn(d->range, d->name_range, "decl name");
        for (const auto& p : d->params) {
            fn(d->range, p.range, "param");
            fn(d->range, p.type->range, "param type");
            type_pairs(*p.type, fn);
        }
        if (d->type) {
            fn(d->range, d->type->range, "decl type");
            type_pairs(*d->type, fn);
        }
        if (d->body) {
            fn(d->range, d->body->range, "decl body");
            expr_pairs(*d->body, fn);
        }
    }
}

} // namespace upvs
