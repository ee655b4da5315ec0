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

#include "lang/expr_util.hpp"

namespace upvs {

namespace {

// Binders may shadow names that are already bound, so the bound set is a multiset.
struct Scope {
    std::map<std::string, int> counts;
    bool has(const std::string& n) const {
        auto it = counts.find(n);
        return it != counts.end() && it->second > 0;
    }
};

void collect_free_scoped(const ExprPtr& e, Scope& scope, std::set<std::string>& out, bool variables_only);

void collect_free_type_scoped(const TypePtr& t, Scope& scope, std::set<std::string>& out,
                              bool variables_only) {
    if (!t) return;
    for (const auto& d : t->domain) collect_free_type_scoped(d, scope, out, variables_only);
    collect_free_type_scoped(t->codomain, scope, out, variables_only);
    for (const auto& f : t->fields) collect_free_type_scoped(f.type, scope, out, variables_only);
    collect_free_type_scoped(t->supertype, scope, out, variables_only);
    if (t->predicate) {
        ++scope.counts[t->name];
        collect_free_scoped(t->predicate, scope, out, variables_only);
        --scope.counts[t->name];
    }
}

void collect_free_scoped(const ExprPtr& e, Scope& scope, std::set<std::string>& out, bool variables_only) {
    if (!e) return;
    switch (e->kind) {
    case ExprKind::Name:
        if (!scope.has(e->text) && (!variables_only || e->ref.kind == SymbolRef::Kind::Local))
            out.insert(e->text);
        return;
    case ExprKind::Forall:
    case ExprKind::Exists:
        for (const auto& b : e->bindings) {
            collect_free_type_scoped(b.type, scope, out, variables_only);
            ++scope.counts[b.name];
        }
        collect_free_scoped(e->args[0], scope, out, variables_only);
        for (const auto& b : e->bindings) --scope.counts[b.name];
        return;
    case ExprKind::Let:
        for (const auto& l : e->lets) {
            collect_free_type_scoped(l.type, scope, out, variables_only);
            collect_free_scoped(l.value, scope, out, variables_only);
            ++scope.counts[l.name];
        }
        collect_free_scoped(e->args[0], scope, out, variables_only);
        for (const auto& l : e->lets) --scope.counts[l.name];
        return;
    case ExprKind::Record:
        for (const auto& f : e->fields) collect_free_scoped(f.value, scope, out, variables_only);
        return;
    default:
        for (const auto& a : e->args) collect_free_scoped(a, scope, out, variables_only);
        return;
    }
}

void collect_free(const ExprPtr& e, std::set<std::string>& out, bool variables_only) {
    Scope scope;
    collect_free_scoped(e, scope, out, variables_only);
}

ExprPtr subst(const ExprPtr& e, std::map<std::string, ExprPtr> sub);

TypePtr subst_type(const TypePtr& t, const std::map<std::string, ExprPtr>& sub) {
    if (!t || sub.empty()) return t;
    bool changed = false;
    auto copy = std::make_shared<Type>(*t);
    for (auto& d : copy->domain) {
        auto nd = subst_type(d, sub);
        changed |= nd != d;
        d = nd;
    }
    if (copy->codomain) {
        auto nc = subst_type(copy->codomain, sub);
        changed |= nc != copy->codomain;
        copy->codomain = nc;
    }
    for (auto& f : copy->fields) {
        auto nf = subst_type(f.type, sub);
        changed |= nf != f.type;
        f.type = nf;
    }
    if (copy->supertype) {
        auto ns = subst_type(copy->supertype, sub);
        changed |= ns != copy->supertype;
        copy->supertype = ns;
    }
    if (copy->predicate) {
        auto inner = sub;
        inner.erase(copy->name);
        auto np = subst(copy->predicate, inner);
        changed |= np != copy->predicate;
        copy->predicate = np;
    }
    return changed ? copy : t;
}

std::set<std::string> replacement_free_names(const std::map<std::string, ExprPtr>& sub) {
    std::set<std::string> names;
    for (const auto& [_, r] : sub) {
        auto f = free_names(r);
        names.insert(f.begin(), f.end());
    }
    return names;
}

ExprPtr renamed_var(const std::string& name, TypePtr type, const Range& range) {
    auto n = std::make_shared<Expr>();
    n->kind = ExprKind::Name;
    n->text = name;
    n->range = range;
    n->ref.kind = SymbolRef::Kind::Local;
    n->type = std::move(type);
    return n;
}

ExprPtr subst(const ExprPtr& e, std::map<std::string, ExprPtr> sub) {
    if (!e || sub.empty()) return e;
    switch (e->kind) {
    case ExprKind::Name: {
        auto it = sub.find(e->text);
        return it == sub.end() ? e : it->second;
    }
    case ExprKind::BoolLit:
    case ExprKind::IntLit:
    case ExprKind::RealLit:
    case ExprKind::StringLit: return e;
    case ExprKind::Forall:
    case ExprKind::Exists: {
        auto copy = std::make_shared<Expr>(*e);
        auto taken = replacement_free_names(sub);
        auto body_names = all_names(e->args[0]);
        for (auto& b : copy->bindings) {
            b.type = subst_type(b.type, sub);
            if (b.resolved) b.resolved = subst_type(b.resolved, sub);
            sub.erase(b.name);
        }
        for (auto& b : copy->bindings) {
            if (taken.count(b.name) != 0) {
                std::set<std::string> avoid = taken;
                avoid.insert(body_names.begin(), body_names.end());
                for (const auto& other : copy->bindings) avoid.insert(other.name);
                auto fresh = fresh_name(b.name, avoid);
                sub[b.name] = renamed_var(fresh, b.resolved ? b.resolved : b.type, b.range);
                b.name = fresh;
            }
        }
        copy->args = {subst(e->args[0], sub)};
        return copy;
    }
    case ExprKind::Let: {
        auto copy = std::make_shared<Expr>(*e);
        auto taken = replacement_free_names(sub);
        auto body_names = all_names(e->args[0]);
        for (auto& l : copy->lets) {
            l.type = subst_type(l.type, sub);
            l.value = subst(l.value, sub);
            sub.erase(l.name);
            if (taken.count(l.name) != 0) {
                std::set<std::string> avoid = taken;
                avoid.insert(body_names.begin(), body_names.end());
                auto fresh = fresh_name(l.name, avoid);
                sub[l.name] = renamed_var(fresh, l.value->type, l.range);
                l.name = fresh;
            }
        }
        copy->args = {subst(e->args[0], sub)};
        return copy;
    }
    case ExprKind::Record: {
        auto copy = std::make_shared<Expr>(*e);
        for (auto& f : copy->fields) f.value = subst(f.value, sub);
        return copy;
    }
    default: {
        std::vector<ExprPtr> args;
        bool changed = false;
        for (const auto& a : e->args) {
            args.push_back(subst(a, sub));
            changed |= args.back() != a;
        }
        return changed ? with_args(*e, std::move(args)) : e;
    }
    }
}

using Env = std::map<std::string, int>;

bool alpha_eq(const ExprPtr& a, const ExprPtr& b, Env ea, Env eb, int depth);

bool alpha_eq_type(const TypePtr& a, const TypePtr& b, const Env& ea, const Env& eb, int depth) {
    if (!a || !b) return !a && !b;
    if (a->kind != b->kind) return false;
    switch (a->kind) {
    case Type::Kind::Base: return a->base == b->base;
    case Type::Kind::Named: return a->name == b->name;
    case Type::Kind::Function:
        if (a->domain.size() != b->domain.size()) return false;
        for (std::size_t i = 0; i < a->domain.size(); ++i) {
            if (!alpha_eq_type(a->domain[i], b->domain[i], ea, eb, depth)) return false;
        }
        return alpha_eq_type(a->codomain, b->codomain, ea, eb, depth);
    case Type::Kind::Record:
        if (a->fields.size() != b->fields.size()) return false;
        for (std::size_t i = 0; i < a->fields.size(); ++i) {
            if (a->fields[i].name != b->fields[i].name ||
                !alpha_eq_type(a->fields[i].type, b->fields[i].type, ea, eb, depth))
                return false;
        }
        return true;
    case Type::Kind::Subtype: {
        if (!alpha_eq_type(a->supertype, b->supertype, ea, eb, depth)) return false;
        Env na = ea, nb = eb;
        na[a->name] = depth;
        nb[b->name] = depth;
        return alpha_eq(a->predicate, b->predicate, na, nb, depth + 1);
    }
    }
    return false;
}

bool alpha_eq(const ExprPtr& a, const ExprPtr& b, Env ea, Env eb, int depth) {
    if (!a || !b) return !a && !b;
    if (a->kind != b->kind) return false;
    switch (a->kind) {
    case ExprKind::BoolLit: return a->bool_value == b->bool_value;
    case ExprKind::IntLit:
    case ExprKind::RealLit:
    case ExprKind::StringLit: return a->text == b->text;
    case ExprKind::Name: {
        auto ia = ea.find(a->text);
        auto ib = eb.find(b->text);
        if (ia == ea.end() || ib == eb.end()) return ia == ea.end() && ib == eb.end() && a->text == b->text;
        return ia->second == ib->second;
    }
    case ExprKind::Forall:
    case ExprKind::Exists:
        if (a->bindings.size() != b->bindings.size()) return false;
        for (std::size_t i = 0; i < a->bindings.size(); ++i) {
            const auto& ta = a->bindings[i].resolved ? a->bindings[i].resolved : a->bindings[i].type;
            const auto& tb = b->bindings[i].resolved ? b->bindings[i].resolved : b->bindings[i].type;
            if (!alpha_eq_type(ta, tb, ea, eb, depth)) return false;
        }
        for (std::size_t i = 0; i < a->bindings.size(); ++i) {
            ea[a->bindings[i].name] = depth;
            eb[b->bindings[i].name] = depth;
            ++depth;
        }
        return alpha_eq(a->args[0], b->args[0], ea, eb, depth);
    case ExprKind::Let:
        if (a->lets.size() != b->lets.size()) return false;
        for (std::size_t i = 0; i < a->lets.size(); ++i) {
            if (!alpha_eq(a->lets[i].value, b->lets[i].value, ea, eb, depth)) return false;
            ea[a->lets[i].name] = depth;
            eb[b->lets[i].name] = depth;
            ++depth;
        }
        return alpha_eq(a->args[0], b->args[0], ea, eb, depth);
    case ExprKind::Record:
        if (a->fields.size() != b->fields.size()) return false;
        for (std::size_t i = 0; i < a->fields.size(); ++i) {
            if (a->fields[i].name != b->fields[i].name ||
                !alpha_eq(a->fields[i].value, b->fields[i].value, ea, eb, depth))
                return false;
        }
        return true;
    case ExprKind::Binary:
        if (a->bop != b->bop) return false;
        break;
    case ExprKind::Unary:
        if (a->uop != b->uop) return false;
        break;
    case ExprKind::Field:
        if (a->text != b->text) return false;
        break;
    case ExprKind::Apply:
    case ExprKind::If: break;
    }
    if (a->args.size() != b->args.size()) return false;
    for (std::size_t i = 0; i < a->args.size(); ++i) {
        if (!alpha_eq(a->args[i], b->args[i], ea, eb, depth)) return false;
    }
    return true;
}

} // namespace

std::set<std::string> free_names(const ExprPtr& e) {
    std::set<std::string> out;
    collect_free(e, out, false);
    return out;
}

std::set<std::string> free_variables(const ExprPtr& e) {
    std::set<std::string> out;
    collect_free(e, out, true);
    return out;
}

std::set<std::string> all_names(const ExprPtr& e) {
    std::set<std::string> out;
    for_each_expr(e, [&](const Expr& x) {
        if (x.kind == ExprKind::Name) out.insert(x.text);
        for (const auto& b : x.bindings) out.insert(b.name);
        for (const auto& l : x.lets) out.insert(l.name);
    });
    return out;
}

ExprPtr substitute(const ExprPtr& e, const std::map<std::string, ExprPtr>& replacements) {
    return subst(e, replacements);
}

bool alpha_equal(const ExprPtr& a, const ExprPtr& b) { return alpha_eq(a, b, {}, {}, 0); }

std::string fresh_name(const std::string& base, const std::set<std::string>& taken) {
    if (taken.count(base) == 0) return base;
    for (int i = 1;; ++i) {
        auto candidate = base + "_" + std::to_string(i);
        if (taken.count(candidate) == 0) return candidate;
    }
}

ExprPtr rewrite_bottom_up(const ExprPtr& e, const std::function<ExprPtr(const ExprPtr&)>& fn) {
    if (!e) return e;
    std::shared_ptr<Expr> copy;
    auto ensure_copy = [&] {
        if (!copy) copy = std::make_shared<Expr>(*e);
    };
    for (std::size_t i = 0; i < e->args.size(); ++i) {
        auto r = rewrite_bottom_up(e->args[i], fn);
        if (r != e->args[i]) {
            ensure_copy();
            copy->args[i] = r;
        }
    }
    for (std::size_t i = 0; i < e->lets.size(); ++i) {
        auto r = rewrite_bottom_up(e->lets[i].value, fn);
        if (r != e->lets[i].value) {
            ensure_copy();
            copy->lets[i].value = r;
        }
    }
    for (std::size_t i = 0; i < e->fields.size(); ++i) {
        auto r = rewrite_bottom_up(e->fields[i].value, fn);
        if (r != e->fields[i].value) {
            ensure_copy();
            copy->fields[i].value = r;
        }
    }
    ExprPtr node = copy ? ExprPtr(copy) : e;
    auto replaced = fn(node);
    return replaced ? replaced : node;
}

} // namespace upvs
