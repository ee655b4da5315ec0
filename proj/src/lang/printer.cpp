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

#include "lang/printer.hpp"

#include <sstream>

namespace upvs {

namespace {

constexpr int kNotPrec = 5;
constexpr int kNegPrec = 9;
constexpr int kPostfixPrec = 10;

int expr_prec(const Expr& e) {
    switch (e.kind) {
    case ExprKind::Binary: return precedence(e.bop);
    case ExprKind::Unary: return e.uop == UnaryOp::Not ? kNotPrec : kNegPrec;
    // Binders and LET extend as far right as possible.
    case ExprKind::Forall:
    case ExprKind::Exists:
    case ExprKind::Let: return 0;
    default: return kPostfixPrec + 1;
    }
}

std::string print_expr(const Expr& e);

std::string wrap(const Expr& e, bool parens) {
    auto s = print_expr(e);
    return parens ? "(" + s + ")" : s;
}

std::string print_field_inits(const std::vector<FieldInit>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ", ";
        out += fields[i].name + " := " + print_expr(*fields[i].value);
    }
    return out;
}

std::string print_expr(const Expr& e) {
    switch (e.kind) {
    case ExprKind::BoolLit: return e.bool_value ? "TRUE" : "FALSE";
    case ExprKind::IntLit:
    case ExprKind::RealLit:
    case ExprKind::StringLit:
    case ExprKind::Name: return e.text;
    case ExprKind::Apply: {
        std::string out = wrap(*e.args[0], expr_prec(*e.args[0]) < kPostfixPrec + 1);
        out += "(";
        for (std::size_t i = 1; i < e.args.size(); ++i) {
            if (i > 1) out += ", ";
            out += print_expr(*e.args[i]);
        }
        return out + ")";
    }
    case ExprKind::Field:
        return wrap(*e.args[0], expr_prec(*e.args[0]) < kPostfixPrec + 1) + "`" + e.text;
    case ExprKind::Binary: {
        int p = precedence(e.bop);
        const Expr& lhs = *e.args[0];
        const Expr& rhs = *e.args[1];
        int lp = expr_prec(lhs);
        int rp = expr_prec(rhs);
        bool lparen = lp < p || (lp == p && is_right_assoc(e.bop));
        bool rparen = rp < p || (rp == p && !is_right_assoc(e.bop));
        if (rp == 0) rparen = true; // binders as operands are always parenthesized
        return wrap(lhs, lparen) + " " + to_string(e.bop) + " " + wrap(rhs, rparen);
    }
    case ExprKind::Unary: {
        const Expr& operand = *e.args[0];
        if (e.uop == UnaryOp::Not) return "NOT " + wrap(operand, expr_prec(operand) < kNotPrec);
        return "-" + wrap(operand, expr_prec(operand) <= kNegPrec);
    }
    case ExprKind::If:
        return "IF " + print_expr(*e.args[0]) + " THEN " + print_expr(*e.args[1]) + " ELSE " +
               print_expr(*e.args[2]) + " ENDIF";
    case ExprKind::Forall:
    case ExprKind::Exists:
        return std::string(e.kind == ExprKind::Forall ? "FORALL" : "EXISTS") + " (" +
               print_bindings(e.bindings) + "): " + print_expr(*e.args[0]);
    case ExprKind::Let: {
        std::string out = "LET ";
        for (std::size_t i = 0; i < e.lets.size(); ++i) {
            if (i) out += ", ";
            out += e.lets[i].name;
            if (e.lets[i].type) out += ": " + pretty_print(*e.lets[i].type);
            out += " = " + print_expr(*e.lets[i].value);
        }
        return out + " IN " + print_expr(*e.args[0]);
    }
    case ExprKind::Record: return "(# " + print_field_inits(e.fields) + " #)";
    }
    return "";
}

} // namespace

std::string print_bindings(const std::vector<Binding>& bindings) {
    std::string out;
    for (std::size_t i = 0; i < bindings.size(); ++i) {
        out += bindings[i].name;
        bool last_of_group = i + 1 == bindings.size() ||
                             !structurally_equal(bindings[i].type, bindings[i + 1].type);
        if (last_of_group) {
            out += ": " + (bindings[i].type ? pretty_print(*bindings[i].type) : std::string("?"));
            if (i + 1 < bindings.size()) out += ", ";
        } else {
            out += ", ";
        }
    }
    return out;
}

std::string pretty_print(const Expr& e) { return print_expr(e); }

std::string pretty_print(const ExprPtr& e) { return e ? print_expr(*e) : std::string(); }

std::string pretty_print(const TypePtr& t) { return t ? pretty_print(*t) : std::string(); }

std::string pretty_print(const Type& t) {
    switch (t.kind) {
    case Type::Kind::Base: return to_string(t.base);
    case Type::Kind::Named:
        // Uninterpreted types are qualified internally as "theory.T".
        return t.uninterpreted ? t.name.substr(t.name.rfind('.') + 1) : t.name;
    case Type::Kind::Function: {
        std::string out = "[";
        for (std::size_t i = 0; i < t.domain.size(); ++i) {
            if (i) out += ", ";
            out += pretty_print(*t.domain[i]);
        }
        return out + " -> " + pretty_print(*t.codomain) + "]";
    }
    case Type::Kind::Record: {
        std::string out = "[# ";
        for (std::size_t i = 0; i < t.fields.size(); ++i) {
            if (i) out += ", ";
            out += t.fields[i].name + ": " + pretty_print(*t.fields[i].type);
        }
        return out + " #]";
    }
    case Type::Kind::Subtype:
        return "{" + t.name + ": " + pretty_print(*t.supertype) + " | " + print_expr(*t.predicate) + "}";
    }
    return "";
}

std::string pretty_print(const Decl& d) {
    switch (d.kind) {
    case DeclKind::Type: return d.name + ": TYPE" + (d.type ? " = " + pretty_print(*d.type) : "");
    case DeclKind::Const:
        return d.name + ": " + pretty_print(*d.type) + (d.body ? " = " + print_expr(*d.body) : "");
    case DeclKind::Function:
        return d.name + "(" + print_bindings(d.params) + "): " + pretty_print(*d.type) + " = " +
               print_expr(*d.body);
    case DeclKind::Formula: return d.name + ": " + to_string(d.formula_kind) + " " + print_expr(*d.body);
    }
    return "";
}

std::string pretty_print(const Theory& th) {
    std::ostringstream out;
    out << th.name << ": THEORY\nBEGIN\n";
    if (!th.importings.empty()) {
        out << "  IMPORTING ";
        for (std::size_t i = 0; i < th.importings.size(); ++i) {
            if (i) out << ", ";
            out << th.importings[i].name;
        }
        out << "\n";
    }
    for (const auto& d : th.decls) out << "\n  " << pretty_print(*d) << "\n";
    out << "END " << th.name << "\n";
    return out.str();
}

std::string pretty_print(const SourceFile& file) {
    std::string out;
    for (std::size_t i = 0; i < file.theories.size(); ++i) {
        if (i) out += "\n";
        out += pretty_print(file.theories[i]);
    }
    return out;
}

} // namespace upvs
