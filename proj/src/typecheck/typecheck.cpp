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

#include "typecheck/typecheck.hpp"

#include <algorithm>
#include <mutex>
#include <set>

#include "common/error.hpp"
#include "eval/evaluator.hpp"
#include "lang/expr_util.hpp"
#include "lang/parser.hpp"
#include "lang/printer.hpp"

namespace upvs {

const char* to_string(TccKind kind) {
    return kind == TccKind::NonzeroDivisor ? "nonzero-divisor" : "subtype";
}

const char* to_string(SymbolKind kind) {
    switch (kind) {
    case SymbolKind::Type: return "type";
    case SymbolKind::Const: return "constant";
    case SymbolKind::Function: return "function";
    case SymbolKind::Formula: return "formula";
    case SymbolKind::Variable: return "variable";
    }
    return "";
}

// --- TypecheckResult -------------------------------------------------------

const Decl* TypecheckResult::decl(int index) const {
    if (!theory || index < 0 || index >= static_cast<int>(theory->decls.size())) return nullptr;
    return theory->decls[index].get();
}

const TypecheckResult* TypecheckResult::theory_result(const std::string& name) const {
    if (theory && theory->name == name) return this;
    for (const auto& imp : imports) {
        if (imp->theory && imp->theory->name == name) return imp.get();
    }
    return nullptr;
}

const Decl* TypecheckResult::lookup(const SymbolRef& ref) const {
    if (ref.kind != SymbolRef::Kind::Decl) return nullptr;
    auto r = theory_result(ref.theory);
    return r ? r->decl(ref.decl_index) : nullptr;
}

TypePtr TypecheckResult::lookup_type(const SymbolRef& ref) const {
    if (ref.kind != SymbolRef::Kind::Decl) return nullptr;
    auto r = theory_result(ref.theory);
    if (!r || ref.decl_index < 0 || ref.decl_index >= static_cast<int>(r->decl_types.size())) return nullptr;
    return r->decl_types[ref.decl_index];
}

int TypecheckResult::find_decl(const std::string& name) const {
    if (!theory) return -1;
    for (int i = static_cast<int>(theory->decls.size()) - 1; i >= 0; --i) {
        if (theory->decls[i]->name == name) return i;
    }
    return -1;
}

const Tcc* TypecheckResult::find_tcc(const std::string& id) const {
    for (const auto& t : tccs) {
        if (t.id == id) return &t;
    }
    return nullptr;
}

// --- type utilities --------------------------------------------------------

namespace {

TypePtr bool_type() {
    static const TypePtr t = make_base_type(BaseType::Bool);
    return t;
}

TypePtr int_type() {
    static const TypePtr t = make_base_type(BaseType::Int);
    return t;
}

TypePtr real_type() {
    static const TypePtr t = make_base_type(BaseType::Real);
    return t;
}

using Layer = SubtypeLayer;

ExprPtr typed_local(const std::string& name, TypePtr type) {
    auto n = std::make_shared<Expr>();
    n->kind = ExprKind::Name;
    n->text = name;
    n->ref.kind = SymbolRef::Kind::Local;
    n->type = std::move(type);
    return n;
}

const Layer& nat_layer() {
    static const Layer layer{"n", make_binary(BinaryOp::Ge, typed_local("n", int_type()), make_int("0"))};
    return layer;
}

void collect_layers(const TypePtr& t, std::vector<Layer>& out) {
    if (!t) return;
    if (t->kind == Type::Kind::Base && t->base == BaseType::Nat) {
        out.push_back(nat_layer());
    } else if (t->kind == Type::Kind::Subtype) {
        collect_layers(t->supertype, out);
        out.push_back(Layer{t->name, t->predicate});
    }
}

std::vector<Layer> layers_of(const TypePtr& t) {
    std::vector<Layer> out;
    collect_layers(t, out);
    return out;
}

} // namespace

std::vector<SubtypeLayer> subtype_layers(const TypePtr& t) { return layers_of(t); }

ExprPtr instantiate(const SubtypeLayer& layer, const ExprPtr& value) {
    return substitute(layer.predicate, {{layer.var, value}});
}

namespace {

bool same_layer(const Layer& a, const Layer& b) {
    static const std::string probe = "%probe";
    auto v = typed_local(probe, nullptr);
    return alpha_equal(instantiate(a, v), instantiate(b, v));
}

} // namespace

TypePtr strip_subtypes(const TypePtr& t) {
    TypePtr cur = t;
    while (cur) {
        if (cur->kind == Type::Kind::Subtype) {
            cur = cur->supertype;
        } else if (cur->kind == Type::Kind::Base && cur->base == BaseType::Nat) {
            return int_type();
        } else {
            break;
        }
    }
    return cur;
}

TypePtr max_supertype(const TypePtr& t) {
    TypePtr s = strip_subtypes(t);
    if (!s) return s;
    if (s->kind == Type::Kind::Function) {
        auto copy = std::make_shared<Type>(*s);
        for (auto& d : copy->domain) d = max_supertype(d);
        copy->codomain = max_supertype(copy->codomain);
        return copy;
    }
    if (s->kind == Type::Kind::Record) {
        auto copy = std::make_shared<Type>(*s);
        for (auto& f : copy->fields) f.type = max_supertype(f.type);
        return copy;
    }
    return s;
}

bool is_bool(const TypePtr& t) {
    auto s = strip_subtypes(t);
    return s && s->kind == Type::Kind::Base && s->base == BaseType::Bool;
}

bool is_numeric(const TypePtr& t) {
    auto s = strip_subtypes(t);
    return s && s->kind == Type::Kind::Base && (s->base == BaseType::Int || s->base == BaseType::Real);
}

bool is_integral(const TypePtr& t) {
    auto s = strip_subtypes(t);
    return s && s->kind == Type::Kind::Base && s->base == BaseType::Int;
}

bool types_equal(const TypePtr& a, const TypePtr& b) { return structurally_equal(a, b); }

bool compatible(const TypePtr& expected, const TypePtr& actual) {
    if (!expected || !actual) return true;
    if (is_numeric(expected) && is_numeric(actual)) return !(is_integral(expected) && !is_integral(actual));
    return types_equal(max_supertype(expected), max_supertype(actual));
}

// --- the checker -----------------------------------------------------------

namespace {

struct Candidate {
    SymbolRef ref;
    TypePtr type;
    int level = 0; // 0 locals, 1 this theory, 2 imports, 3 prelude
    Range binding;
    std::string name;
};

struct Local {
    std::string name;
    TypePtr type;
    Range binding;
    SymbolRef::Kind kind = SymbolRef::Kind::Local;
};

std::string describe_types(const std::vector<ExprPtr>& args) {
    std::string out = "(";
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (i) out += ", ";
        out += args[i]->type ? pretty_print(*args[i]->type) : "?";
    }
    return out + ")";
}

bool is_nonzero_literal(const Expr& e) {
    if (e.kind == ExprKind::Unary && e.uop == UnaryOp::Neg) return is_nonzero_literal(*e.args[0]);
    if (e.kind != ExprKind::IntLit && e.kind != ExprKind::RealLit) return false;
    return std::any_of(e.text.begin(), e.text.end(), [](char c) { return c >= '1' && c <= '9'; });
}

bool is_literal(const Expr& e) {
    if (e.kind == ExprKind::Unary && e.uop == UnaryOp::Neg) return is_literal(*e.args[0]);
    return e.kind == ExprKind::IntLit || e.kind == ExprKind::RealLit || e.kind == ExprKind::BoolLit ||
           e.kind == ExprKind::StringLit;
}

class Checker {
public:
    Checker(std::string theory_name, std::string uri, std::vector<TypecheckResultPtr> imports)
        : theory_name_(std::move(theory_name)), uri_(std::move(uri)), imports_(std::move(imports)) {}

    TypecheckResultPtr run(const Theory& th, std::vector<Diagnostic> import_diags) {
        diags_ = std::move(import_diags);
        scopes_.push_back(Scope{0, -1, th.range, {}});
        auto typed = std::make_shared<Theory>(th);
        typed->decls.clear();
        for (std::size_t i = 0; i < th.decls.size(); ++i) {
            typed_decls_.push_back(th.decls[i]);
            decl_types_.push_back(nullptr);
            auto d = check_decl(*th.decls[i], static_cast<int>(i));
            typed_decls_[i] = d;
            typed->decls.push_back(d);
        }
        auto result = std::make_shared<TypecheckResult>();
        result->uri = uri_;
        result->theory = typed;
        result->decl_types = decl_types_;
        result->diagnostics = std::move(diags_);
        std::stable_sort(result->diagnostics.begin(), result->diagnostics.end(),
                         [](const Diagnostic& a, const Diagnostic& b) { return a.range.start < b.range.start; });
        result->tccs = std::move(all_tccs_);
        result->scopes = std::move(scopes_);
        result->references = std::move(refs_);
        result->imports = imports_;
        return result;
    }

    CheckedExpr run_expression(const ExprPtr& e, const TypecheckResult& ctx, const std::vector<LocalSymbol>& locals,
                               const TypePtr& expected) {
        if (ctx.theory) {
            typed_decls_ = ctx.theory->decls;
            decl_types_ = ctx.decl_types;
        }
        scopes_.push_back(Scope{0, -1, {}, {}});
        for (const auto& l : locals) locals_.push_back(Local{l.name, l.type, {}, l.kind});
        current_decl_ = "expr";
        ExprPtr typed = expected ? check(e, expected) : infer(e);
        CheckedExpr out;
        out.diagnostics = std::move(diags_);
        finish_tccs();
        out.tccs = std::move(all_tccs_);
        if (!has_errors(out.diagnostics)) out.expr = typed;
        return out;
    }

private:
    // --- diagnostics and references ------------------------------------

    void error(const Range& range, std::string message) {
        diags_.push_back(Diagnostic{range, Severity::Error, std::move(message), "typechecker"});
    }

    void mismatch(const Range& range, const TypePtr& expected, const TypePtr& actual) {
        error(range, "expected " + pretty_print(expected) + ", found " + pretty_print(actual));
    }

    void record_ref(const Range& range, const std::string& name, const SymbolRef& target, const Range& binding,
                    bool definition = false) {
        refs_.push_back(Reference{range, name, target, binding, current_scope_, definition});
    }

    int open_scope(const Range& range) {
        int id = static_cast<int>(scopes_.size());
        scopes_.push_back(Scope{id, current_scope_, range, {}});
        current_scope_ = id;
        return id;
    }

    void close_scope(int id, std::size_t locals_mark) {
        current_scope_ = scopes_[id].parent;
        locals_.resize(locals_mark);
    }

    void add_local(const std::string& name, const TypePtr& type, const Range& binding) {
        locals_.push_back(Local{name, type, binding, SymbolRef::Kind::Local});
        scopes_[current_scope_].entries.push_back(ScopeEntry{name, binding, type});
        record_ref(binding, name, SymbolRef{SymbolRef::Kind::Local, "", -1}, binding, true);
    }

    // --- name lookup ---------------------------------------------------

    template <typename Fn>
    void for_each_visible_decl(Fn fn) const {
        for (std::size_t i = 0; i < typed_decls_.size(); ++i)
            fn(*typed_decls_[i], theory_name_, static_cast<int>(i), decl_types_[i], 1);
        for (const auto& imp : imports_) {
            if (!imp->theory) continue;
            int level = imp->theory->name == "prelude" ? 3 : 2;
            for (std::size_t i = 0; i < imp->theory->decls.size(); ++i)
                fn(*imp->theory->decls[i], imp->theory->name, static_cast<int>(i), imp->decl_types[i], level);
        }
    }

    const Local* find_local(const std::string& name) const {
        for (auto it = locals_.rbegin(); it != locals_.rend(); ++it) {
            if (it->name == name) return &*it;
        }
        return nullptr;
    }

    std::vector<Candidate> value_candidates(const std::string& name) const {
        std::vector<Candidate> out;
        if (auto l = find_local(name)) {
            out.push_back(Candidate{SymbolRef{l->kind, "", -1}, l->type, 0, l->binding, name});
            return out;
        }
        for_each_visible_decl([&](const Decl& d, const std::string& th, int index, const TypePtr& type, int level) {
            if (d.name != name) return;
            if (d.kind != DeclKind::Const && d.kind != DeclKind::Function) return;
            out.push_back(Candidate{SymbolRef{SymbolRef::Kind::Decl, th, index}, type, level, d.name_range, name});
        });
        return out;
    }

    std::optional<Candidate> type_candidate(const std::string& name) const {
        std::optional<Candidate> best;
        for_each_visible_decl([&](const Decl& d, const std::string& th, int index, const TypePtr& type, int level) {
            if (d.name != name || d.kind != DeclKind::Type) return;
            if (!best || level < best->level)
                best = Candidate{SymbolRef{SymbolRef::Kind::Decl, th, index}, type, level, d.name_range, name};
        });
        return best;
    }

    // --- types ---------------------------------------------------------

    TypePtr resolve_type(const TypePtr& t) {
        if (!t) return nullptr;
        switch (t->kind) {
        case Type::Kind::Base: return t;
        case Type::Kind::Named: {
            auto c = type_candidate(t->name);
            if (!c) {
                error(t->range, "unknown type '" + t->name + "'");
                return nullptr;
            }
            record_ref(t->range, t->name, c->ref, c->binding);
            return c->type;
        }
        case Type::Kind::Function: {
            auto copy = std::make_shared<Type>(*t);
            bool ok = true;
            for (auto& d : copy->domain) {
                d = resolve_type(d);
                ok = ok && d;
            }
            copy->codomain = resolve_type(copy->codomain);
            return ok && copy->codomain ? copy : nullptr;
        }
        case Type::Kind::Record: {
            auto copy = std::make_shared<Type>(*t);
            std::set<std::string> seen;
            bool ok = true;
            for (auto& f : copy->fields) {
                if (!seen.insert(f.name).second) error(f.range, "duplicate field '" + f.name + "'");
                f.type = resolve_type(f.type);
                ok = ok && f.type;
            }
            return ok ? copy : nullptr;
        }
        case Type::Kind::Subtype: {
            auto super = resolve_type(t->supertype);
            if (!super) return nullptr;
            auto copy = std::make_shared<Type>(*t);
            copy->supertype = super;
            std::size_t mark = locals_.size();
            int scope = open_scope(t->range);
            add_local(t->name, super, t->name_range);
            tcc_vars_.push_back(Binding{t->name, t->supertype, t->name_range, super});
            copy->predicate = check(t->predicate, bool_type());
            tcc_vars_.pop_back();
            close_scope(scope, mark);
            return copy;
        }
        }
        return nullptr;
    }

    TypePtr join(const TypePtr& a, const TypePtr& b) {
        if (!a || !b) return a ? a : b;
        if (types_equal(a, b)) return a;
        if (is_numeric(a) && is_numeric(b)) return is_integral(a) && is_integral(b) ? int_type() : real_type();
        return max_supertype(a);
    }

    // --- TCCs ----------------------------------------------------------

    ExprPtr let_substituted(const ExprPtr& e) const {
        if (let_values_.empty()) return e;
        std::map<std::string, ExprPtr> sub;
        for (const auto& [name, value] : let_values_) sub[name] = value;
        return substitute(e, sub);
    }

    void add_tcc(TccKind kind, ExprPtr body, const Range& origin) {
        ExprPtr obligation = std::move(body);
        if (!conditions_.empty()) {
            ExprPtr hyp = conditions_[0];
            for (std::size_t i = 1; i < conditions_.size(); ++i) hyp = make_binary(BinaryOp::And, hyp, conditions_[i]);
            obligation = make_binary(BinaryOp::Implies, hyp, obligation);
        }
        if (!tcc_vars_.empty()) obligation = make_quantifier(ExprKind::Forall, tcc_vars_, obligation);
        pending_tccs_.push_back(Tcc{"", kind, obligation, origin, current_decl_});
    }

    void finish_tccs() {
        std::stable_sort(pending_tccs_.begin(), pending_tccs_.end(),
                         [](const Tcc& a, const Tcc& b) { return a.origin.start < b.origin.start; });
        int k = 0;
        for (auto& t : pending_tccs_) {
            t.id = current_decl_ + "_TCC" + std::to_string(++k);
            all_tccs_.push_back(std::move(t));
        }
        pending_tccs_.clear();
    }

    DeclLookup partial_lookup() const {
        return [this](const SymbolRef& ref) -> const Decl* {
            if (ref.kind != SymbolRef::Kind::Decl) return nullptr;
            if (ref.theory == theory_name_) {
                if (ref.decl_index >= 0 && ref.decl_index < static_cast<int>(typed_decls_.size()))
                    return typed_decls_[ref.decl_index].get();
                return nullptr;
            }
            for (const auto& imp : imports_) {
                if (imp->theory && imp->theory->name == ref.theory) return imp->decl(ref.decl_index);
            }
            return nullptr;
        };
    }

    bool entailed(const Layer& layer, const ExprPtr& e) const {
        for (const auto& have : layers_of(e->type)) {
            if (same_layer(have, layer)) return true;
        }
        if (is_literal(*e)) {
            auto v = try_evaluate_bool(instantiate(layer, e), partial_lookup());
            return v && *v;
        }
        return false;
    }

    // Checks that typed expression `e` fits `expected`; predicates of
    // `expected` that `e` does not already carry become TCCs.
    ExprPtr coerce(const ExprPtr& e, const TypePtr& expected) {
        if (!e || !e->type || !expected) return e;
        if (!compatible(expected, e->type)) {
            mismatch(e->range, expected, e->type);
            return e;
        }
        for (const auto& layer : layers_of(expected)) {
            if (entailed(layer, e)) continue;
            add_tcc(TccKind::Subtype, instantiate(layer, let_substituted(e)), e->range);
        }
        return e;
    }

    // --- expressions ---------------------------------------------------

    ExprPtr check(const ExprPtr& e, const TypePtr& expected) {
        if (!e) return e;
        switch (e->kind) {
        case ExprKind::If: {
            auto copy = std::make_shared<Expr>(*e);
            auto cond = check(e->args[0], bool_type());
            conditions_.push_back(let_substituted(cond));
            auto a = check(e->args[1], expected);
            conditions_.back() = make_unary(UnaryOp::Not, let_substituted(cond));
            auto b = check(e->args[2], expected);
            conditions_.pop_back();
            copy->args = {cond, a, b};
            copy->type = join(a->type, b->type);
            return copy;
        }
        case ExprKind::Let: return check_let(e, expected);
        case ExprKind::Record: {
            auto target = strip_subtypes(expected);
            if (!target || target->kind != Type::Kind::Record || target->fields.size() != e->fields.size() ||
                !layers_of(expected).empty())
                break;
            for (std::size_t i = 0; i < e->fields.size(); ++i) {
                if (e->fields[i].name != target->fields[i].name) return coerce(infer(e), expected);
            }
            auto copy = std::make_shared<Expr>(*e);
            auto rtype = std::make_shared<Type>();
            rtype->kind = Type::Kind::Record;
            for (std::size_t i = 0; i < e->fields.size(); ++i) {
                copy->fields[i].value = check(e->fields[i].value, target->fields[i].type);
                rtype->fields.push_back(FieldType{e->fields[i].name, copy->fields[i].value->type, e->fields[i].range});
            }
            copy->type = rtype;
            return copy;
        }
        default: break;
        }
        return coerce(infer(e), expected);
    }

    ExprPtr check_let(const ExprPtr& e, const TypePtr& expected) {
        auto copy = std::make_shared<Expr>(*e);
        std::size_t mark = locals_.size();
        std::size_t let_mark = let_values_.size();
        int scope = open_scope(e->range);
        for (auto& l : copy->lets) {
            TypePtr declared = l.type ? resolve_type(l.type) : nullptr;
            l.value = declared ? check(l.value, declared) : infer(l.value);
            TypePtr type = declared ? declared : l.value->type;
            add_local(l.name, type, l.range);
            let_values_.emplace_back(l.name, let_substituted(l.value));
        }
        copy->args[0] = expected ? check(e->args[0], expected) : infer(e->args[0]);
        copy->type = copy->args[0]->type;
        let_values_.resize(let_mark);
        close_scope(scope, mark);
        return copy;
    }

    ExprPtr infer(const ExprPtr& e) {
        auto copy = std::make_shared<Expr>(*e);
        switch (e->kind) {
        case ExprKind::BoolLit: copy->type = bool_type(); return copy;
        case ExprKind::IntLit: copy->type = int_type(); return copy;
        case ExprKind::RealLit: copy->type = real_type(); return copy;
        case ExprKind::StringLit: copy->type = make_base_type(BaseType::String); return copy;
        case ExprKind::Name: return infer_name(e);
        case ExprKind::Apply: return infer_apply(e);
        case ExprKind::Binary: return infer_binary(e);
        case ExprKind::Unary: {
            if (e->uop == UnaryOp::Not) {
                copy->args[0] = check(e->args[0], bool_type());
                copy->type = bool_type();
            } else {
                copy->args[0] = infer(e->args[0]);
                auto t = copy->args[0]->type;
                if (t && !is_numeric(t)) mismatch(e->args[0]->range, int_type(), t);
                copy->type = t ? (is_integral(t) ? int_type() : real_type()) : nullptr;
            }
            return copy;
        }
        case ExprKind::If: return check(e, nullptr);
        case ExprKind::Forall:
        case ExprKind::Exists: {
            std::size_t mark = locals_.size();
            std::size_t vars_mark = tcc_vars_.size();
            int scope = open_scope(e->range);
            for (auto& b : copy->bindings) {
                b.resolved = resolve_type(b.type);
                add_local(b.name, b.resolved, b.range);
                tcc_vars_.push_back(b);
            }
            copy->args[0] = check(e->args[0], bool_type());
            copy->type = bool_type();
            tcc_vars_.resize(vars_mark);
            close_scope(scope, mark);
            return copy;
        }
        case ExprKind::Let: return check_let(e, nullptr);
        case ExprKind::Record: {
            auto rtype = std::make_shared<Type>();
            rtype->kind = Type::Kind::Record;
            std::set<std::string> seen;
            bool ok = true;
            for (auto& f : copy->fields) {
                if (!seen.insert(f.name).second) error(f.range, "duplicate field '" + f.name + "'");
                f.value = infer(f.value);
                ok = ok && f.value->type;
                rtype->fields.push_back(FieldType{f.name, f.value->type, f.range});
            }
            if (ok) copy->type = rtype;
            return copy;
        }
        case ExprKind::Field: {
            copy->args[0] = infer(e->args[0]);
            auto t = strip_subtypes(copy->args[0]->type);
            if (!t) return copy;
            if (t->kind != Type::Kind::Record) {
                error(e->args[0]->range, "expected a record, found " + pretty_print(copy->args[0]->type));
                return copy;
            }
            for (const auto& f : t->fields) {
                if (f.name == e->text) {
                    copy->type = f.type;
                    return copy;
                }
            }
            error(e->name_range, "no field '" + e->text + "' in " + pretty_print(t));
            return copy;
        }
        }
        return copy;
    }

    ExprPtr resolved_name(const ExprPtr& e, const Candidate& c) {
        auto copy = std::make_shared<Expr>(*e);
        copy->ref = c.ref;
        copy->type = c.type;
        record_ref(e->range, e->text, c.ref, c.binding);
        return copy;
    }

    ExprPtr infer_name(const ExprPtr& e) {
        auto cands = value_candidates(e->text);
        if (cands.empty()) {
            error(e->range, "unresolved name '" + e->text + "'");
            return std::make_shared<Expr>(*e);
        }
        int level = cands[0].level;
        for (const auto& c : cands) level = std::min(level, c.level);
        std::vector<Candidate> best;
        for (const auto& c : cands) {
            if (c.level == level) best.push_back(c);
        }
        if (best.size() > 1) {
            error(e->range, "ambiguous name '" + e->text + "': " + std::to_string(best.size()) + " candidates");
            return std::make_shared<Expr>(*e);
        }
        return resolved_name(e, best[0]);
    }

    ExprPtr infer_apply(const ExprPtr& e) {
        auto copy = std::make_shared<Expr>(*e);
        for (std::size_t i = 1; i < e->args.size(); ++i) copy->args[i] = infer(e->args[i]);
        std::vector<ExprPtr> args(copy->args.begin() + 1, copy->args.end());
        bool args_ok = std::all_of(args.begin(), args.end(), [](const ExprPtr& a) { return a->type != nullptr; });

        const Expr& fn = *e->args[0];
        TypePtr fn_type;
        if (fn.kind == ExprKind::Name && !find_local(fn.text)) {
            auto cands = value_candidates(fn.text);
            if (cands.empty()) {
                error(fn.range, "unresolved name '" + fn.text + "'");
                return copy;
            }
            auto fits = [&](const Candidate& c, bool check_types) {
                auto t = strip_subtypes(c.type);
                if (!t || t->kind != Type::Kind::Function || t->domain.size() != args.size()) return false;
                if (!check_types) return true;
                for (std::size_t i = 0; i < args.size(); ++i) {
                    if (!compatible(t->domain[i], args[i]->type)) return false;
                }
                return true;
            };
            std::vector<Candidate> viable;
            for (const auto& c : cands) {
                if (fits(c, args_ok)) viable.push_back(c);
            }
            if (viable.empty()) {
                std::vector<Candidate> by_arity;
                for (const auto& c : cands) {
                    if (fits(c, false)) by_arity.push_back(c);
                }
                if (by_arity.size() == 1) {
                    // Report the offending argument against the only candidate.
                    copy->args[0] = resolved_name(e->args[0], by_arity[0]);
                    fn_type = strip_subtypes(by_arity[0].type);
                } else if (cands.size() == 1 && !fits(cands[0], false)) {
                    auto t = strip_subtypes(cands[0].type);
                    if (!t || t->kind != Type::Kind::Function)
                        error(fn.range, "'" + fn.text + "' is not a function");
                    else
                        error(e->range, "'" + fn.text + "' expects " + std::to_string(t->domain.size()) +
                                            " argument(s), found " + std::to_string(args.size()));
                    return copy;
                } else {
                    error(e->range, "no declaration of '" + fn.text + "' accepts " + describe_types(args));
                    return copy;
                }
            } else {
                int level = viable[0].level;
                for (const auto& c : viable) level = std::min(level, c.level);
                std::vector<Candidate> best;
                for (const auto& c : viable) {
                    if (c.level == level) best.push_back(c);
                }
                if (best.size() > 1) {
                    error(fn.range,
                          "ambiguous name '" + fn.text + "': " + std::to_string(best.size()) + " candidates");
                    return copy;
                }
                copy->args[0] = resolved_name(e->args[0], best[0]);
                fn_type = strip_subtypes(best[0].type);
            }
        } else {
            copy->args[0] = infer(e->args[0]);
            fn_type = strip_subtypes(copy->args[0]->type);
            if (!fn_type) return copy;
            if (fn_type->kind != Type::Kind::Function) {
                error(fn.range, "expected a function, found " + pretty_print(copy->args[0]->type));
                return copy;
            }
            if (fn_type->domain.size() != args.size()) {
                error(e->range, "expected " + std::to_string(fn_type->domain.size()) + " argument(s), found " +
                                    std::to_string(args.size()));
                return copy;
            }
        }
        for (std::size_t i = 0; i < args.size(); ++i) copy->args[i + 1] = coerce(args[i], fn_type->domain[i]);
        copy->type = fn_type->codomain;
        return copy;
    }

    ExprPtr infer_binary(const ExprPtr& e) {
        auto copy = std::make_shared<Expr>(*e);
        BinaryOp op = e->bop;
        if (is_connective(op)) {
            auto lhs = check(e->args[0], bool_type());
            bool guarded = op == BinaryOp::And || op == BinaryOp::Implies || op == BinaryOp::Or;
            if (guarded) {
                auto cond = let_substituted(lhs);
                conditions_.push_back(op == BinaryOp::Or ? make_unary(UnaryOp::Not, cond) : cond);
            }
            auto rhs = check(e->args[1], bool_type());
            if (guarded) conditions_.pop_back();
            copy->args = {lhs, rhs};
            copy->type = bool_type();
            return copy;
        }
        auto lhs = infer(e->args[0]);
        auto rhs = infer(e->args[1]);
        copy->args = {lhs, rhs};
        if (op == BinaryOp::Eq || op == BinaryOp::Neq) {
            copy->type = bool_type();
            if (lhs->type && rhs->type && !compatible(lhs->type, rhs->type) && !compatible(rhs->type, lhs->type))
                mismatch(rhs->range, lhs->type, rhs->type);
            return copy;
        }
        bool ok = true;
        for (const auto& side : {lhs, rhs}) {
            if (side->type && !is_numeric(side->type)) {
                mismatch(side->range, is_integral(lhs->type) || !lhs->type ? int_type() : real_type(), side->type);
                ok = false;
            }
            ok = ok && side->type;
        }
        if (is_comparison(op)) {
            copy->type = bool_type();
            return copy;
        }
        if (op == BinaryOp::Div && !is_nonzero_literal(*rhs)) {
            add_tcc(TccKind::NonzeroDivisor, make_binary(BinaryOp::Neq, let_substituted(rhs), make_int("0")),
                    rhs->range);
        }
        if (ok) copy->type = is_integral(lhs->type) && is_integral(rhs->type) ? int_type() : real_type();
        return copy;
    }

    // --- declarations --------------------------------------------------

    DeclPtr check_decl(const Decl& d, int index) {
        current_decl_ = d.name;
        locals_.clear();
        tcc_vars_.clear();
        conditions_.clear();
        let_values_.clear();
        current_scope_ = 0;
        check_duplicate(d, index);
        SymbolRef self{SymbolRef::Kind::Decl, theory_name_, index};
        auto copy = std::make_shared<Decl>(d);
        switch (d.kind) {
        case DeclKind::Type: {
            if (d.type) {
                decl_types_[index] = resolve_type(d.type);
            } else {
                auto t = std::make_shared<Type>();
                t->kind = Type::Kind::Named;
                t->name = theory_name_ + "." + d.name;
                t->uninterpreted = true;
                decl_types_[index] = t;
            }
            break;
        }
        case DeclKind::Const: {
            auto t = resolve_type(d.type);
            if (d.body) copy->body = t ? check(d.body, t) : infer(d.body);
            decl_types_[index] = t;
            break;
        }
        case DeclKind::Function: {
            int scope = open_scope(d.range);
            std::vector<TypePtr> domain;
            bool ok = true;
            for (auto& p : copy->params) {
                p.resolved = resolve_type(p.type);
                ok = ok && p.resolved;
                domain.push_back(p.resolved);
                add_local(p.name, p.resolved, p.range);
                tcc_vars_.push_back(p);
            }
            auto ret = resolve_type(d.type);
            if (ok && ret) decl_types_[index] = make_function_type(domain, ret);
            // Visible in its own body (recursion).
            typed_decls_[index] = copy;
            copy->body = ret ? check(d.body, ret) : infer(d.body);
            close_scope(scope, 0);
            break;
        }
        case DeclKind::Formula: copy->body = check(d.body, bool_type()); decl_types_[index] = bool_type(); break;
        }
        scopes_[0].entries.push_back(ScopeEntry{d.name, d.name_range, decl_types_[index]});
        current_scope_ = 0;
        record_ref(d.name_range, d.name, self, d.name_range, true);
        finish_tccs();
        return copy;
    }

    void check_duplicate(const Decl& d, int index) {
        for (int i = 0; i < index; ++i) {
            const Decl& other = *typed_decls_[i];
            if (other.name != d.name) continue;
            bool both_values = (other.kind == DeclKind::Const || other.kind == DeclKind::Function) &&
                               (d.kind == DeclKind::Const || d.kind == DeclKind::Function);
            if (both_values && other.kind == DeclKind::Function && d.kind == DeclKind::Function &&
                other.params.size() != d.params.size())
                continue;
            if (both_values && d.kind == DeclKind::Function && other.kind == DeclKind::Function) {
                // Same arity: overloading needs distinct parameter types.
                bool same = true;
                for (std::size_t k = 0; k < d.params.size() && same; ++k)
                    same = structurally_equal(d.params[k].type, other.params[k].type);
                if (!same) continue;
            }
            if (both_values || other.kind == d.kind) {
                error(d.name_range, "duplicate declaration '" + d.name + "'");
                return;
            }
        }
    }

    std::string theory_name_;
    std::string uri_;
    std::vector<TypecheckResultPtr> imports_;
    std::vector<DeclPtr> typed_decls_;
    std::vector<TypePtr> decl_types_;
    std::vector<Diagnostic> diags_;
    std::vector<Tcc> pending_tccs_;
    std::vector<Tcc> all_tccs_;
    std::vector<Scope> scopes_;
    std::vector<Reference> refs_;
    std::vector<Local> locals_;
    int current_scope_ = 0;
    std::vector<Binding> tcc_vars_;
    std::vector<ExprPtr> conditions_;
    std::vector<std::pair<std::string, ExprPtr>> let_values_;
    std::string current_decl_;
};

std::vector<TypecheckResultPtr> visible_imports(const Theory& th, const ImportResolver& resolver,
                                                std::vector<Diagnostic>& diags) {
    std::vector<TypecheckResultPtr> out;
    std::set<std::string> seen;
    auto add = [&](const TypecheckResultPtr& r) {
        if (r && r->theory && r->theory->name != "prelude" && seen.insert(r->theory->name).second) out.push_back(r);
    };
    for (const auto& imp : th.importings) {
        if (imp.name == th.name) {
            diags.push_back(Diagnostic{imp.range, Severity::Error, "theory '" + imp.name + "' imports itself",
                                       "typechecker"});
            continue;
        }
        ImportLookup found = resolver ? resolver(imp.name) : ImportLookup{nullptr, "unknown theory '" + imp.name + "'"};
        if (!found.result) {
            diags.push_back(Diagnostic{imp.range, Severity::Error,
                                       found.error.empty() ? "unknown theory '" + imp.name + "'" : found.error,
                                       "typechecker"});
            continue;
        }
        add(found.result);
        for (const auto& transitive : found.result->imports) add(transitive);
    }
    if (th.name != "prelude") out.push_back(prelude());
    return out;
}

} // namespace

TypecheckResultPtr typecheck(const Theory& theory, const std::string& uri, const ImportResolver& imports) {
    std::vector<Diagnostic> diags;
    auto visible = visible_imports(theory, imports, diags);
    Checker checker(theory.name, uri, std::move(visible));
    return checker.run(theory, std::move(diags));
}

CheckedExpr check_expression(const ExprPtr& e, const TypecheckResult& ctx, const std::vector<LocalSymbol>& locals,
                             const TypePtr& expected) {
    Checker checker(ctx.theory ? ctx.theory->name : "", ctx.uri, ctx.imports);
    return checker.run_expression(e, ctx, locals, expected);
}

TypePtr infer_type(const ExprPtr& e, const TypecheckResult& ctx, const std::vector<LocalSymbol>& locals) {
    auto r = check_expression(e, ctx, locals);
    for (const auto& d : r.diagnostics) {
        if (d.severity != Severity::Error) continue;
        bool unresolved = d.message.rfind("unresolved name", 0) == 0;
        throw Error(unresolved ? ErrorCode::UnresolvedName : ErrorCode::TypeMismatch, d.message,
                    {{"range",
                      {{"start", {{"line", d.range.start.line}, {"character", d.range.start.character}}},
                       {"end", {{"line", d.range.end.line}, {"character", d.range.end.character}}}}}});
    }
    return r.expr->type;
}

// --- prelude -----------------------------------------------------------------

const std::string& prelude_source() {
    static const std::string source = R"(% Built-in declarations available in every theory.
prelude: THEORY
BEGIN
  posint: TYPE = {i: int | i > 0}

  abs(x: int): int = IF x < 0 THEN -x ELSE x ENDIF
  min(x, y: int): int = IF x <= y THEN x ELSE y ENDIF
  max(x, y: int): int = IF x >= y THEN x ELSE y ENDIF
  id(x: int): int = x

  xor(a, b: bool): bool = NOT (a IFF b)
  nand(a, b: bool): bool = NOT (a AND b)
  nor(a, b: bool): bool = NOT (a OR b)
END prelude
)";
    return source;
}

TypecheckResultPtr prelude() {
    static const TypecheckResultPtr result = [] {
        auto parsed = parse_theory_file(kPreludeUri, prelude_source());
        std::vector<Diagnostic> none;
        Checker checker("prelude", kPreludeUri, {});
        return checker.run(parsed.ast.theories.at(0), std::move(none));
    }();
    return result;
}

} // namespace upvs
