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

#include "prover/rules.hpp"

#include <set>

#include "common/error.hpp"
#include "eval/evaluator.hpp"
#include "lang/expr_util.hpp"
#include "lang/parser.hpp"
#include "lang/printer.hpp"

namespace upvs {

namespace {

ExprPtr implies(const ExprPtr& a, const ExprPtr& b) { return make_binary(BinaryOp::Implies, a, b); }

template <typename T>
void insert_front(std::vector<T>& v, T x) {
    v.insert(v.begin(), std::move(x));
}

std::size_t max_index(const Sequent& s) { return std::max(s.antecedents.size(), s.consequents.size()); }

} // namespace

// --- flatten -------------------------------------------------------------------

std::optional<Sequent> flatten(const Sequent& in) {
    Sequent s = in;
    bool changed = false;
    bool progress = true;
    while (progress) {
        progress = false;
        for (std::size_t i = 0; i < s.consequents.size() && !progress; ++i) {
            PropView v = prop_view(s.consequents[i]);
            switch (v.kind) {
            case PropKind::Implies:
                insert_front(s.antecedents, v.a);
                s.consequents[i] = v.b;
                progress = true;
                break;
            case PropKind::Or:
                s.consequents[i] = v.a;
                s.consequents.insert(s.consequents.begin() + i + 1, v.b);
                progress = true;
                break;
            case PropKind::Not:
                s.consequents.erase(s.consequents.begin() + i);
                insert_front(s.antecedents, v.a);
                progress = true;
                break;
            default: break;
            }
        }
        for (std::size_t i = 0; i < s.antecedents.size() && !progress; ++i) {
            PropView v = prop_view(s.antecedents[i]);
            switch (v.kind) {
            case PropKind::And:
                s.antecedents[i] = v.a;
                s.antecedents.insert(s.antecedents.begin() + i + 1, v.b);
                progress = true;
                break;
            case PropKind::Not:
                s.antecedents.erase(s.antecedents.begin() + i);
                insert_front(s.consequents, v.a);
                progress = true;
                break;
            default: break;
            }
        }
        changed = changed || progress;
    }
    if (!changed) return std::nullopt;
    return s;
}

// --- split -----------------------------------------------------------------------

namespace {

std::optional<std::vector<Sequent>> split_antecedent(const Sequent& s, std::size_t i) {
    PropView v = prop_view(s.antecedents[i]);
    Sequent l = s, r = s;
    switch (v.kind) {
    case PropKind::Or:
        l.antecedents[i] = v.a;
        r.antecedents[i] = v.b;
        break;
    case PropKind::Implies:
        l.antecedents.erase(l.antecedents.begin() + i);
        insert_front(l.consequents, v.a);
        r.antecedents[i] = v.b;
        break;
    case PropKind::Iff:
        l.antecedents[i] = v.a;
        l.antecedents.insert(l.antecedents.begin() + i + 1, v.b);
        r.antecedents.erase(r.antecedents.begin() + i);
        insert_front(r.consequents, v.b);
        insert_front(r.consequents, v.a);
        break;
    case PropKind::If:
        l.antecedents[i] = v.b;
        insert_front(l.antecedents, v.a);
        r.antecedents[i] = v.c;
        insert_front(r.consequents, v.a);
        break;
    default: return std::nullopt;
    }
    return std::vector<Sequent>{l, r};
}

std::optional<std::vector<Sequent>> split_consequent(const Sequent& s, std::size_t i) {
    PropView v = prop_view(s.consequents[i]);
    Sequent l = s, r = s;
    switch (v.kind) {
    case PropKind::And:
        l.consequents[i] = v.a;
        r.consequents[i] = v.b;
        break;
    case PropKind::Iff:
        l.consequents[i] = implies(v.a, v.b);
        r.consequents[i] = implies(v.b, v.a);
        break;
    case PropKind::If:
        l.consequents[i] = v.b;
        insert_front(l.antecedents, v.a);
        r.consequents[i] = v.c;
        insert_front(r.consequents, v.a);
        break;
    default: return std::nullopt;
    }
    return std::vector<Sequent>{l, r};
}

} // namespace

std::optional<std::vector<Sequent>> split(const Sequent& s) {
    for (std::size_t i = 0; i < max_index(s); ++i) {
        if (i < s.antecedents.size()) {
            if (auto r = split_antecedent(s, i)) return r;
        }
        if (i < s.consequents.size()) {
            if (auto r = split_consequent(s, i)) return r;
        }
    }
    return std::nullopt;
}

// --- skolem ------------------------------------------------------------------------

namespace {

std::set<std::string> taken_names(const Sequent& s, const ProofContext& pc) {
    std::set<std::string> taken;
    for (const auto& f : s.antecedents) {
        auto n = all_names(f);
        taken.insert(n.begin(), n.end());
    }
    for (const auto& f : s.consequents) {
        auto n = all_names(f);
        taken.insert(n.begin(), n.end());
    }
    for (const auto& c : pc.constants) taken.insert(c.name);
    if (pc.theory) {
        auto add_decls = [&](const TypecheckResult& r) {
            if (!r.theory) return;
            for (const auto& d : r.theory->decls) taken.insert(d->name);
        };
        add_decls(*pc.theory);
        for (const auto& imp : pc.theory->imports) add_decls(*imp);
    }
    return taken;
}

ExprPtr skolem_constant(const std::string& name, const TypePtr& type) {
    auto c = std::make_shared<Expr>();
    c->kind = ExprKind::Name;
    c->text = name;
    c->ref.kind = SymbolRef::Kind::Skolem;
    c->type = type;
    return c;
}

} // namespace

std::optional<Sequent> skolemize(const Sequent& in, ProofContext& pc) {
    for (std::size_t i = 0; i < max_index(in); ++i) {
        for (int side = 0; side < 2; ++side) {
            const auto& list = side == 0 ? in.antecedents : in.consequents;
            if (i >= list.size()) continue;
            const Expr& f = *list[i];
            if (!(side == 0 && f.kind == ExprKind::Exists) && !(side == 1 && f.kind == ExprKind::Forall)) continue;
            Sequent s = in;
            auto taken = taken_names(in, pc);
            std::map<std::string, ExprPtr> sub;
            std::vector<ExprPtr> facts;
            for (const auto& b : f.bindings) {
                std::string name;
                do {
                    name = b.name + "!" + std::to_string(++pc.skolem_counter);
                } while (taken.count(name));
                taken.insert(name);
                TypePtr type = b.resolved ? b.resolved : b.type;
                auto c = skolem_constant(name, type);
                sub[b.name] = c;
                pc.constants.push_back(LocalSymbol{name, type, SymbolRef::Kind::Skolem});
                // The constant ranges over the binder's subtype.
                for (const auto& layer : subtype_layers(type)) facts.push_back(instantiate(layer, c));
            }
            auto body = substitute(f.args[0], sub);
            (side == 0 ? s.antecedents : s.consequents)[i] = body;
            for (auto it = facts.rbegin(); it != facts.rend(); ++it) insert_front(s.antecedents, *it);
            return s;
        }
    }
    return std::nullopt;
}

// --- inst ------------------------------------------------------------------------------

std::vector<Sequent> instantiate(const Sequent& s, int fnum, const std::string& term, ProofContext& pc) {
    auto f = formula_at(s, fnum);
    if (!f) throw Error(ErrorCode::BadFnum, "no formula numbered " + std::to_string(fnum));
    bool ok = (fnum < 0 && f->kind == ExprKind::Forall) || (fnum > 0 && f->kind == ExprKind::Exists);
    if (!ok)
        throw Error(ErrorCode::BadFnum,
                    "formula " + std::to_string(fnum) + " is not a FORALL antecedent or EXISTS consequent");
    auto parsed = parse_expression(term);
    if (!parsed.value || has_errors(parsed.diagnostics))
        throw Error(ErrorCode::IllTypedTerm,
                    parsed.diagnostics.empty() ? "cannot parse term" : parsed.diagnostics[0].message);
    const Binding& binder = f->bindings[0];
    TypePtr type = binder.resolved ? binder.resolved : binder.type;
    auto checked = check_expression(parsed.value, *pc.theory, pc.constants, type);
    if (!checked.expr) {
        std::string msg = "ill-typed term";
        for (const auto& d : checked.diagnostics) {
            if (d.severity == Severity::Error) {
                msg = d.message;
                break;
            }
        }
        throw Error(ErrorCode::IllTypedTerm, msg);
    }
    ExprPtr target;
    if (f->bindings.size() > 1) {
        auto rest = std::make_shared<Expr>(*f);
        rest->bindings.erase(rest->bindings.begin());
        target = rest;
    } else {
        target = f->args[0];
    }
    auto result = substitute(target, {{binder.name, checked.expr}});
    std::vector<Sequent> out;
    Sequent main = s;
    (fnum < 0 ? main.antecedents[-fnum - 1] : main.consequents[fnum - 1]) = result;
    out.push_back(main);
    for (const auto& tcc : checked.tccs) {
        Sequent side;
        side.antecedents = s.antecedents;
        side.consequents = {tcc.obligation};
        out.push_back(side);
    }
    return out;
}

// --- expand ---------------------------------------------------------------------------

namespace {

bool has_definition(const std::string& name, const TypecheckResult& ctx) {
    auto check = [&](const TypecheckResult& r) {
        if (!r.theory) return false;
        for (const auto& d : r.theory->decls) {
            if (d->name == name && d->body && (d->kind == DeclKind::Function || d->kind == DeclKind::Const))
                return true;
        }
        return false;
    };
    if (check(ctx)) return true;
    for (const auto& imp : ctx.imports) {
        if (check(*imp)) return true;
    }
    return false;
}

// Replaces uses of definitions accepted by `want` with their bodies,
// beta-reducing applications.
ExprPtr expand_in(const ExprPtr& e, const TypecheckResult& ctx, const std::function<bool(const Decl&)>& want) {
    return rewrite_bottom_up(e, [&](const ExprPtr& n) -> ExprPtr {
        if (n->kind == ExprKind::Apply && n->args[0]->kind == ExprKind::Name &&
            n->args[0]->ref.kind == SymbolRef::Kind::Decl) {
            const Decl* d = ctx.lookup(n->args[0]->ref);
            if (d && d->kind == DeclKind::Function && d->body && want(*d) &&
                d->params.size() + 1 == n->args.size()) {
                std::map<std::string, ExprPtr> sub;
                for (std::size_t i = 0; i < d->params.size(); ++i) sub[d->params[i].name] = n->args[i + 1];
                return substitute(d->body, sub);
            }
        }
        if (n->kind == ExprKind::Name && n->ref.kind == SymbolRef::Kind::Decl) {
            const Decl* d = ctx.lookup(n->ref);
            if (d && d->kind == DeclKind::Const && d->body && want(*d)) return d->body;
        }
        return nullptr;
    });
}

std::optional<Sequent> expand_where(const Sequent& s, const TypecheckResult& ctx,
                                    const std::function<bool(const Decl&)>& want) {
    Sequent out = s;
    bool changed = false;
    for (auto* list : {&out.antecedents, &out.consequents}) {
        for (auto& f : *list) {
            auto r = expand_in(f, ctx, want);
            if (r != f) {
                f = r;
                changed = true;
            }
        }
    }
    if (!changed) return std::nullopt;
    return out;
}

} // namespace

std::optional<Sequent> expand(const Sequent& s, const std::string& name, const TypecheckResult& ctx) {
    if (!has_definition(name, ctx)) throw Error(ErrorCode::InvalidArgument, "no definition of '" + name + "'");
    return expand_where(s, ctx, [&](const Decl& d) { return d.name == name; });
}

// --- assert ----------------------------------------------------------------------------

namespace {

bool mentions_constants(const Expr& e) {
    if (e.kind == ExprKind::Name && e.ref.kind != SymbolRef::Kind::Decl && e.ref.kind != SymbolRef::Kind::Local)
        return true;
    for (const auto& a : e.args) {
        if (mentions_constants(*a)) return true;
    }
    for (const auto& l : e.lets) {
        if (mentions_constants(*l.value)) return true;
    }
    for (const auto& f : e.fields) {
        if (mentions_constants(*f.value)) return true;
    }
    return false;
}

bool is_ground(const ExprPtr& e) { return free_variables(e).empty() && !mentions_constants(*e); }

bool worth_evaluating(const Expr& e) {
    switch (e.kind) {
    case ExprKind::Binary: return !is_connective(e.bop);
    case ExprKind::Apply:
    case ExprKind::Name:
    case ExprKind::Field:
    case ExprKind::Let: return true;
    default: return false;
    }
}

std::optional<bool> literal_bool(const ExprPtr& e) {
    if (e->kind == ExprKind::BoolLit) return e->bool_value;
    return std::nullopt;
}

ExprPtr simplify_node(const ExprPtr& n, const TypecheckResult& ctx) {
    switch (n->kind) {
    case ExprKind::If:
        if (auto c = literal_bool(n->args[0])) return *c ? n->args[1] : n->args[2];
        if (alpha_equal(n->args[1], n->args[2])) return n->args[1];
        break;
    case ExprKind::Field:
        if (n->args[0]->kind == ExprKind::Record) {
            for (const auto& f : n->args[0]->fields) {
                if (f.name == n->text) return f.value;
            }
        }
        break;
    case ExprKind::Unary:
        if (n->uop == UnaryOp::Not) {
            if (auto v = literal_bool(n->args[0])) return make_bool(!*v);
        }
        break;
    case ExprKind::Binary: {
        const ExprPtr& a = n->args[0];
        const ExprPtr& b = n->args[1];
        auto la = literal_bool(a), lb = literal_bool(b);
        switch (n->bop) {
        case BinaryOp::Eq:
        case BinaryOp::Iff:
        case BinaryOp::Le:
        case BinaryOp::Ge:
            if (alpha_equal(a, b)) return make_bool(true);
            break;
        case BinaryOp::Neq:
        case BinaryOp::Lt:
        case BinaryOp::Gt:
            if (alpha_equal(a, b)) return make_bool(false);
            break;
        default: break;
        }
        switch (n->bop) {
        case BinaryOp::And:
            if (la) return *la ? b : make_bool(false);
            if (lb) return *lb ? a : make_bool(false);
            break;
        case BinaryOp::Or:
            if (la) return *la ? make_bool(true) : b;
            if (lb) return *lb ? make_bool(true) : a;
            break;
        case BinaryOp::Implies:
            if (la) return *la ? b : make_bool(true);
            if (lb && *lb) return make_bool(true);
            if (lb) return make_unary(UnaryOp::Not, a);
            break;
        case BinaryOp::Iff:
            if (la) return *la ? b : make_unary(UnaryOp::Not, b);
            if (lb) return *lb ? a : make_unary(UnaryOp::Not, a);
            break;
        default: break;
        }
        break;
    }
    default: break;
    }
    if (is_bool(n->type) && worth_evaluating(*n) && is_ground(n)) {
        if (auto v = try_evaluate_bool(n, lookup_in(ctx), 100'000)) return make_bool(*v);
    }
    return nullptr;
}

} // namespace

ExprPtr simplify_ground(const ExprPtr& e, const TypecheckResult& ctx) {
    return rewrite_bottom_up(e, [&](const ExprPtr& n) { return simplify_node(n, ctx); });
}

AssertOutcome assert_sequent(const Sequent& s, const TypecheckResult& ctx) {
    Sequent out;
    for (const auto& f : s.antecedents) {
        auto g = simplify_ground(f, ctx);
        auto lit = literal_bool(g);
        if (lit && !*lit) return AssertOutcome{true, std::nullopt};
        if (!lit) out.antecedents.push_back(g);
    }
    for (const auto& f : s.consequents) {
        auto g = simplify_ground(f, ctx);
        auto lit = literal_bool(g);
        if (lit && *lit) return AssertOutcome{true, std::nullopt};
        if (!lit) out.consequents.push_back(g);
    }
    if (is_propositional_tautology(out)) return AssertOutcome{true, std::nullopt};
    if (alpha_equal(out, s)) return AssertOutcome{false, std::nullopt};
    return AssertOutcome{false, out};
}

// --- prop and grind -------------------------------------------------------------------

namespace {

void check_cancel(const std::atomic<bool>* cancel) {
    if (cancel && cancel->load()) throw Error(ErrorCode::Cancelled, "command cancelled");
}

void prop_into(Sequent s, const TypecheckResult& ctx, std::vector<Sequent>& leaves, const std::atomic<bool>* cancel) {
    while (true) {
        check_cancel(cancel);
        auto a = assert_sequent(s, ctx);
        if (a.closed) return;
        if (a.simplified) s = *a.simplified;
        if (auto f = flatten(s)) {
            s = *f;
            continue;
        }
        if (auto parts = split(s)) {
            for (auto& part : *parts) prop_into(std::move(part), ctx, leaves, cancel);
            return;
        }
        leaves.push_back(std::move(s));
        return;
    }
}

constexpr int kGrindExpandRounds = 16;
constexpr int kGrindDepth = 8;

void grind_into(Sequent s, ProofContext& pc, std::vector<Sequent>& leaves, int depth) {
    const TypecheckResult& ctx = *pc.theory;
    auto non_recursive = [](const Decl& d) { return !d.recursive; };
    for (int round = 0; round < kGrindExpandRounds; ++round) {
        auto e = expand_where(s, ctx, non_recursive);
        if (!e) break;
        s = *e;
    }
    while (true) {
        if (auto f = flatten(s)) {
            s = *f;
            continue;
        }
        if (auto k = skolemize(s, pc)) {
            s = *k;
            continue;
        }
        break;
    }
    check_cancel(pc.cancel);
    std::vector<Sequent> open;
    prop_into(s, ctx, open, pc.cancel);
    for (auto& leaf : open) {
        // Splitting can expose quantifiers that were nested in connectives.
        if (depth < kGrindDepth && skolemize(leaf, pc)) {
            auto k = skolemize(leaf, pc);
            grind_into(*k, pc, leaves, depth + 1);
        } else {
            leaves.push_back(std::move(leaf));
        }
    }
}

} // namespace

std::vector<Sequent> prop_leaves(const Sequent& s, const TypecheckResult& ctx, const std::atomic<bool>* cancel) {
    std::vector<Sequent> leaves;
    prop_into(s, ctx, leaves, cancel);
    return leaves;
}

std::vector<Sequent> grind_leaves(const Sequent& s, ProofContext& pc) {
    std::vector<Sequent> leaves;
    grind_into(s, pc, leaves, 0);
    return leaves;
}

} // namespace upvs
