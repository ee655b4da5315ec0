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

#include "lang/parser.hpp"

#include <algorithm>
#include <optional>

#include "lang/expr_util.hpp"

namespace upvs {

namespace {

struct ParseError {
    Diagnostic diagnostic;
};

constexpr int kMaxNesting = 256;

class Parser {
public:
    Parser(const std::vector<Token>& all_tokens, Position eof)
        : eof_(eof) {
        for (const auto& t : all_tokens) {
            if (t.kind != TokenKind::Comment) tokens_.push_back(t);
        }
    }

    // --- entry points ----------------------------------------------------

    SourceFile parse_file(std::vector<Diagnostic>& diags) {
        SourceFile file;
        while (!at_end()) {
            std::size_t start = pos_;
            try {
                file.theories.push_back(parse_theory(diags));
            } catch (const ParseError& err) {
                report(diags, err.diagnostic);
                pos_ = std::max(pos_, start + 1);
                while (!at_end() && !at_theory_start()) ++pos_;
            }
        }
        return file;
    }

    ExprPtr parse_standalone_expr() {
        auto e = parse_expr();
        if (!at_end()) fail("end of expression");
        return e;
    }

    TypePtr parse_standalone_type() {
        auto t = parse_type();
        if (!at_end()) fail("end of type");
        return t;
    }

    TypePtr parse_type_from(std::size_t index) {
        pos_ = index;
        return parse_type();
    }

    // Index translation for parse_type_at (comments were filtered out).
    std::size_t filtered_index(const std::vector<Token>& all, std::size_t index) const {
        std::size_t n = 0;
        for (std::size_t i = 0; i < index && i < all.size(); ++i) {
            if (all[i].kind != TokenKind::Comment) ++n;
        }
        return n;
    }

private:
    // --- token helpers -------------------------------------------------------

    bool at_end() const { return pos_ >= tokens_.size(); }

    const Token* peek(std::size_t ahead = 0) const {
        return pos_ + ahead < tokens_.size() ? &tokens_[pos_ + ahead] : nullptr;
    }

    bool at_keyword(std::string_view kw, std::size_t ahead = 0) const {
        auto t = peek(ahead);
        return t && t->is_keyword(kw);
    }

    bool at_punct(std::string_view p, std::size_t ahead = 0) const {
        auto t = peek(ahead);
        return t && t->is_punct(p);
    }

    bool at_kind(TokenKind k, std::size_t ahead = 0) const {
        auto t = peek(ahead);
        return t && t->kind == k;
    }

    const Token& advance() {
        const Token& t = tokens_[pos_++];
        last_end_ = t.range.end;
        return t;
    }

    Range current_range() const {
        if (auto t = peek()) return t->range;
        return Range{eof_, eof_};
    }

    Position current_start() const { return current_range().start; }

    [[noreturn]] void fail(const std::string& expected) const {
        std::string found = at_end() ? "end of file" : "'" + peek()->lexeme + "'";
        throw ParseError{Diagnostic{current_range(), Severity::Error,
                                    "expected " + expected + ", found " + found, "parser"}};
    }

    const Token& expect_keyword(std::string_view kw) {
        if (!at_keyword(kw)) fail(std::string(kw));
        return advance();
    }

    const Token& expect_punct(std::string_view p) {
        if (!at_punct(p)) fail("'" + std::string(p) + "'");
        return advance();
    }

    const Token& expect_identifier(const char* what = "identifier") {
        if (!at_kind(TokenKind::Identifier)) fail(what);
        return advance();
    }

    void report(std::vector<Diagnostic>& diags, const Diagnostic& d) const {
        // A lexical error at the same spot already explains the failure.
        bool duplicate = std::any_of(diags.begin(), diags.end(),
                                     [&](const Diagnostic& x) { return x.range == d.range; });
        if (!duplicate) diags.push_back(d);
    }

    bool at_theory_start() const {
        return at_kind(TokenKind::Identifier) && at_punct(":", 1) && at_keyword("THEORY", 2);
    }

    // A token where a declaration can plausibly start: END, IMPORTING, an
    // identifier followed by ':' outside binder lists, or an identifier
    // followed by '(' at the start of a line.
    bool at_sync_point() const {
        if (at_end() || at_keyword("END") || at_keyword("IMPORTING")) return true;
        if (!at_kind(TokenKind::Identifier)) return false;
        const Token* prev = pos_ > 0 ? &tokens_[pos_ - 1] : nullptr;
        if (at_punct(":", 1)) {
            if (!prev) return true;
            return !(prev->is_punct("(") || prev->is_punct(",") || prev->is_punct("{") ||
                     prev->is_punct("[#") || prev->is_keyword("LET"));
        }
        if (at_punct("(", 1)) return !prev || prev->range.end.line < peek()->range.start.line;
        return false;
    }

    // --- theories and declarations ------------------------------------------------

    Theory parse_theory(std::vector<Diagnostic>& diags) {
        Theory th;
        Position start = current_start();
        const Token& name = expect_identifier("theory name");
        th.name = name.lexeme;
        th.name_range = name.range;
        expect_punct(":");
        expect_keyword("THEORY");
        expect_keyword("BEGIN");

        while (true) {
            if (at_end()) {
                report(diags, Diagnostic{Range{eof_, eof_}, Severity::Error,
                                         "expected END, found end of file", "parser"});
                th.range = Range{start, last_end_};
                return th;
            }
            if (at_keyword("END")) break;
            if (at_theory_start()) {
                report(diags, Diagnostic{peek()->range, Severity::Error,
                                         "missing END for theory '" + th.name + "'", "parser"});
                th.range = Range{start, last_end_};
                return th;
            }
            std::size_t decl_start = pos_;
            decl_column_ = peek()->range.start.character;
            try {
                if (at_keyword("IMPORTING")) {
                    parse_importing(th);
                } else {
                    th.decls.push_back(parse_decl());
                }
            } catch (const ParseError& err) {
                report(diags, err.diagnostic);
                pos_ = std::max(pos_, decl_start + 1);
                while (!at_sync_point()) ++pos_;
            }
        }
        expect_keyword("END");
        if (at_kind(TokenKind::Identifier)) {
            const Token& end_name = advance();
            th.end_name = end_name.lexeme;
            th.end_name_range = end_name.range;
            if (end_name.lexeme != th.name) {
                report(diags, Diagnostic{end_name.range, Severity::Error,
                                         "END name '" + end_name.lexeme + "' does not match theory name '" +
                                             th.name + "'",
                                         "parser"});
            }
        } else {
            report(diags, Diagnostic{current_range(), Severity::Error,
                                     "expected theory name after END", "parser"});
        }
        th.range = Range{start, last_end_};
        return th;
    }

    void parse_importing(Theory& th) {
        advance();
        do {
            const Token& name = expect_identifier("theory name");
            th.importings.push_back(Importing{name.lexeme, name.range});
        } while (at_punct(",") && (advance(), true));
    }

    DeclPtr parse_decl() {
        auto d = std::make_shared<Decl>();
        Position start = current_start();
        const Token& name = expect_identifier("declaration");
        d->name = name.lexeme;
        d->name_range = name.range;

        if (at_punct("(")) {
            advance();
            d->kind = DeclKind::Function;
            d->params = parse_bindings();
            expect_punct(")");
            expect_punct(":");
            d->type = parse_type();
            expect_punct("=");
            d->body = parse_expr();
            d->recursive = free_names(d->body).count(d->name) != 0;
            for (const auto& p : d->params) {
                if (p.name == d->name) d->recursive = false;
            }
        } else {
            expect_punct(":");
            if (at_keyword("TYPE")) {
                advance();
                d->kind = DeclKind::Type;
                if (at_punct("=")) {
                    advance();
                    d->type = parse_type();
                }
            } else if (at_keyword("THEOREM") || at_keyword("LEMMA") || at_keyword("CONJECTURE")) {
                const Token& kw = advance();
                d->kind = DeclKind::Formula;
                d->formula_kind = kw.is_keyword("THEOREM") ? FormulaKind::Theorem
                                  : kw.is_keyword("LEMMA") ? FormulaKind::Lemma
                                                           : FormulaKind::Conjecture;
                d->body = parse_expr();
            } else {
                d->kind = DeclKind::Const;
                d->type = parse_type();
                if (at_punct("=")) {
                    advance();
                    d->body = parse_expr();
                }
            }
        }
        d->range = Range{start, last_end_};
        return d;
    }

    // `x, y: T, z: U` (at least one group)
    std::vector<Binding> parse_bindings() {
        std::vector<Binding> out;
        while (true) {
            std::vector<Binding> group;
            while (true) {
                const Token& n = expect_identifier("variable name");
                group.push_back(Binding{n.lexeme, nullptr, n.range, nullptr});
                if (!at_punct(",")) break;
                advance();
            }
            expect_punct(":");
            auto t = parse_type();
            for (auto& b : group) {
                b.type = t;
                out.push_back(std::move(b));
            }
            if (!at_punct(",")) break;
            advance();
        }
        return out;
    }

    // --- types --------------------------------------------------------------------

    TypePtr parse_type() {
        DepthGuard guard(*this);
        Position start = current_start();
        if (at_kind(TokenKind::Keyword)) {
            const Token& t = *peek();
            std::string spelled = keyword_spelling(t.lexeme);
            BaseType base;
            if (spelled == "bool" || spelled == "boolean")
                base = BaseType::Bool;
            else if (spelled == "int")
                base = BaseType::Int;
            else if (spelled == "nat")
                base = BaseType::Nat;
            else if (spelled == "real")
                base = BaseType::Real;
            else if (spelled == "string")
                base = BaseType::String;
            else
                fail("type");
            advance();
            return make_base_type(base, t.range);
        }
        if (at_kind(TokenKind::Identifier)) {
            const Token& t = advance();
            return make_named_type(t.lexeme, t.range);
        }
        if (at_punct("[#")) {
            advance();
            auto t = std::make_shared<Type>();
            t->kind = Type::Kind::Record;
            while (true) {
                const Token& f = expect_identifier("field name");
                expect_punct(":");
                auto ft = parse_type();
                t->fields.push_back(FieldType{f.lexeme, ft, f.range});
                if (!at_punct(",")) break;
                advance();
            }
            expect_punct("#]");
            t->range = Range{start, last_end_};
            return t;
        }
        if (at_punct("[")) {
            advance();
            std::vector<TypePtr> domain{parse_type()};
            while (at_punct(",")) {
                advance();
                domain.push_back(parse_type());
            }
            expect_punct("->");
            auto codomain = parse_type();
            expect_punct("]");
            return make_function_type(std::move(domain), std::move(codomain), Range{start, last_end_});
        }
        if (at_punct("{")) {
            advance();
            auto t = std::make_shared<Type>();
            t->kind = Type::Kind::Subtype;
            const Token& v = expect_identifier("variable name");
            t->name = v.lexeme;
            t->name_range = v.range;
            expect_punct(":");
            t->supertype = parse_type();
            expect_punct("|");
            t->predicate = parse_expr();
            expect_punct("}");
            t->range = Range{start, last_end_};
            return t;
        }
        fail("type");
    }

    // --- expressions ------------------------------------------------------------------

    ExprPtr binary(BinaryOp op, ExprPtr lhs, ExprPtr rhs) {
        Range r{lhs->range.start, rhs->range.end};
        auto e = std::make_shared<Expr>();
        e->kind = ExprKind::Binary;
        e->bop = op;
        e->args = {std::move(lhs), std::move(rhs)};
        e->range = r;
        return e;
    }

    struct DepthGuard {
        Parser& p;
        explicit DepthGuard(Parser& parser) : p(parser) {
            if (++p.depth_ > kMaxNesting) {
                --p.depth_;
                p.fail("less deeply nested input");
            }
        }
        ~DepthGuard() { --p.depth_; }
    };

    ExprPtr parse_expr() {
        DepthGuard guard(*this);
        return parse_iff();
    }

    ExprPtr parse_iff() {
        auto lhs = parse_implies();
        while (at_keyword("IFF") || at_punct("<=>")) {
            advance();
            lhs = binary(BinaryOp::Iff, lhs, parse_implies());
        }
        return lhs;
    }

    ExprPtr parse_implies() {
        auto lhs = parse_or();
        if (at_keyword("IMPLIES") || at_punct("=>")) {
            advance();
            return binary(BinaryOp::Implies, lhs, parse_implies());
        }
        return lhs;
    }

    ExprPtr parse_or() {
        auto lhs = parse_and();
        while (at_keyword("OR")) {
            advance();
            lhs = binary(BinaryOp::Or, lhs, parse_and());
        }
        return lhs;
    }

    ExprPtr parse_and() {
        auto lhs = parse_not();
        while (at_keyword("AND") || at_punct("&")) {
            advance();
            lhs = binary(BinaryOp::And, lhs, parse_not());
        }
        return lhs;
    }

    ExprPtr parse_not() {
        DepthGuard guard(*this);
        if (at_keyword("NOT")) {
            Position start = current_start();
            advance();
            auto operand = parse_not();
            auto e = std::make_shared<Expr>();
            e->kind = ExprKind::Unary;
            e->uop = UnaryOp::Not;
            e->args = {operand};
            e->range = Range{start, operand->range.end};
            return e;
        }
        return parse_comparison();
    }

    std::optional<BinaryOp> comparison_op() const {
        auto t = peek();
        if (!t || t->kind != TokenKind::Operator) return std::nullopt;
        if (t->lexeme == "=") return BinaryOp::Eq;
        if (t->lexeme == "/=") return BinaryOp::Neq;
        if (t->lexeme == "<") return BinaryOp::Lt;
        if (t->lexeme == "<=") return BinaryOp::Le;
        if (t->lexeme == ">") return BinaryOp::Gt;
        if (t->lexeme == ">=") return BinaryOp::Ge;
        return std::nullopt;
    }

    ExprPtr parse_comparison() {
        auto lhs = parse_additive();
        while (auto op = comparison_op()) {
            advance();
            lhs = binary(*op, lhs, parse_additive());
        }
        return lhs;
    }

    ExprPtr parse_additive() {
        auto lhs = parse_multiplicative();
        while (at_punct("+") || at_punct("-")) {
            auto op = advance().lexeme == "+" ? BinaryOp::Add : BinaryOp::Sub;
            lhs = binary(op, lhs, parse_multiplicative());
        }
        return lhs;
    }

    ExprPtr parse_multiplicative() {
        auto lhs = parse_unary();
        while (at_punct("*") || at_punct("/")) {
            auto op = advance().lexeme == "*" ? BinaryOp::Mul : BinaryOp::Div;
            lhs = binary(op, lhs, parse_unary());
        }
        return lhs;
    }

    ExprPtr parse_unary() {
        DepthGuard guard(*this);
        if (at_punct("-")) {
            Position start = current_start();
            advance();
            auto operand = parse_unary();
            auto e = std::make_shared<Expr>();
            e->kind = ExprKind::Unary;
            e->uop = UnaryOp::Neg;
            e->args = {operand};
            e->range = Range{start, operand->range.end};
            return e;
        }
        return parse_postfix();
    }

    ExprPtr parse_postfix() {
        auto e = parse_primary();
        while (true) {
            if (at_punct("(")) {
                advance();
                std::vector<ExprPtr> args{e};
                args.push_back(parse_expr());
                while (at_punct(",")) {
                    advance();
                    args.push_back(parse_expr());
                }
                expect_punct(")");
                auto app = std::make_shared<Expr>();
                app->kind = ExprKind::Apply;
                app->args = std::move(args);
                app->range = Range{e->range.start, last_end_};
                e = app;
            } else if (at_kind(TokenKind::Backtick)) {
                advance();
                const Token& f = expect_identifier("field name");
                auto acc = std::make_shared<Expr>();
                acc->kind = ExprKind::Field;
                acc->args = {e};
                acc->text = f.lexeme;
                acc->name_range = f.range;
                acc->range = Range{e->range.start, f.range.end};
                e = acc;
            } else {
                return e;
            }
        }
    }

    ExprPtr leaf(ExprKind kind, const Token& t) {
        auto e = std::make_shared<Expr>();
        e->kind = kind;
        e->text = t.lexeme;
        e->range = t.range;
        return e;
    }

    ExprPtr parse_primary() {
        Position start = current_start();
        if (at_kind(TokenKind::Number)) {
            const Token& t = advance();
            return leaf(t.lexeme.find('.') == std::string::npos ? ExprKind::IntLit : ExprKind::RealLit, t);
        }
        if (at_kind(TokenKind::String)) return leaf(ExprKind::StringLit, advance());
        if (at_keyword("TRUE") || at_keyword("FALSE")) {
            const Token& t = advance();
            return make_bool(t.is_keyword("TRUE"), t.range);
        }
        if (at_kind(TokenKind::Identifier)) {
            // `name :` outside a binder list starts the next declaration; do
            // not let a dangling operator swallow it.
            if (at_punct(":", 1) && at_sync_point()) fail("expression");
            // Likewise a function declaration starting a line at the
            // indentation of the current declaration.
            if (at_punct("(", 1) && at_sync_point() && peek()->range.start.character <= decl_column_)
                fail("expression");
            return leaf(ExprKind::Name, advance());
        }
        if (at_punct("(#")) {
            advance();
            auto e = std::make_shared<Expr>();
            e->kind = ExprKind::Record;
            while (true) {
                const Token& f = expect_identifier("field name");
                expect_punct(":=");
                auto v = parse_expr();
                e->fields.push_back(FieldInit{f.lexeme, v, f.range});
                if (!at_punct(",")) break;
                advance();
            }
            expect_punct("#)");
            e->range = Range{start, last_end_};
            return e;
        }
        if (at_punct("(")) {
            advance();
            auto inner = parse_expr();
            expect_punct(")");
            return inner;
        }
        if (at_keyword("IF")) {
            advance();
            auto c = parse_expr();
            expect_keyword("THEN");
            auto t = parse_expr();
            expect_keyword("ELSE");
            auto f = parse_expr();
            expect_keyword("ENDIF");
            auto e = std::make_shared<Expr>();
            e->kind = ExprKind::If;
            e->args = {c, t, f};
            e->range = Range{start, last_end_};
            return e;
        }
        if (at_keyword("FORALL") || at_keyword("EXISTS")) {
            bool forall = advance().is_keyword("FORALL");
            expect_punct("(");
            auto bindings = parse_bindings();
            expect_punct(")");
            expect_punct(":");
            auto body = parse_expr();
            auto e = std::make_shared<Expr>();
            e->kind = forall ? ExprKind::Forall : ExprKind::Exists;
            e->bindings = std::move(bindings);
            e->args = {body};
            e->range = Range{start, body->range.end};
            return e;
        }
        if (at_keyword("LET")) {
            advance();
            auto e = std::make_shared<Expr>();
            e->kind = ExprKind::Let;
            while (true) {
                const Token& n = expect_identifier("variable name");
                LetBinding lb{n.lexeme, nullptr, nullptr, n.range};
                if (at_punct(":")) {
                    advance();
                    lb.type = parse_type();
                }
                expect_punct("=");
                lb.value = parse_expr();
                e->lets.push_back(std::move(lb));
                if (!at_punct(",")) break;
                advance();
            }
            expect_keyword("IN");
            auto body = parse_expr();
            e->args = {body};
            e->range = Range{start, body->range.end};
            return e;
        }
        fail("expression");
    }

    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
    int depth_ = 0;
    int decl_column_ = -1; // column of the declaration being parsed
    Position last_end_;
    Position eof_;
};

template <typename T, typename Fn>
FragmentResult<T> parse_fragment(std::string_view text, Fn fn) {
    auto lexed = tokenize(text);
    FragmentResult<T> result;
    result.diagnostics = lexed.diagnostics;
    LineIndex lines(text);
    Parser parser(lexed.tokens, lines.end_position());
    try {
        result.value = fn(parser);
    } catch (const ParseError& err) {
        result.value = nullptr;
        bool duplicate = std::any_of(result.diagnostics.begin(), result.diagnostics.end(),
                                     [&](const Diagnostic& d) { return d.range == err.diagnostic.range; });
        if (!duplicate) result.diagnostics.push_back(err.diagnostic);
    }
    if (has_errors(result.diagnostics)) result.value = nullptr;
    return result;
}

} // namespace

ParseResult parse_theory_file(std::string_view /*uri*/, std::string_view text) {
    ParseResult result;
    auto lexed = tokenize(text);
    result.diagnostics = std::move(lexed.diagnostics);
    LineIndex lines(text);
    Parser parser(lexed.tokens, lines.end_position());
    result.ast = parser.parse_file(result.diagnostics);
    result.tokens = std::move(lexed.tokens);
    std::stable_sort(result.diagnostics.begin(), result.diagnostics.end(),
                     [](const Diagnostic& a, const Diagnostic& b) { return a.range.start < b.range.start; });
    return result;
}

FragmentResult<ExprPtr> parse_expression(std::string_view text) {
    return parse_fragment<ExprPtr>(text, [](Parser& p) { return p.parse_standalone_expr(); });
}

FragmentResult<TypePtr> parse_type(std::string_view text) {
    return parse_fragment<TypePtr>(text, [](Parser& p) { return p.parse_standalone_type(); });
}

TypePtr parse_type_at(const std::vector<Token>& tokens, std::size_t index) {
    Parser parser(tokens, Position{});
    try {
        return parser.parse_type_from(parser.filtered_index(tokens, index));
    } catch (const ParseError&) {
        return nullptr;
    }
}

} // namespace upvs
