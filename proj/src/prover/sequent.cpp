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

#include "prover/sequent.hpp"

#include "lang/expr_util.hpp"
#include "lang/printer.hpp"
#include "typecheck/typecheck.hpp"

namespace upvs {

std::string render(const Sequent& s) {
    std::string out;
    for (std::size_t i = 0; i < s.antecedents.size(); ++i)
        out += "[-" + std::to_string(i + 1) + "] " + pretty_print(s.antecedents[i]) + "\n";
    out += "|-------\n";
    for (std::size_t i = 0; i < s.consequents.size(); ++i)
        out += "[" + std::to_string(i + 1) + "] " + pretty_print(s.consequents[i]) + "\n";
    return out;
}

bool alpha_equal(const Sequent& a, const Sequent& b) {
    auto same = [](const std::vector<ExprPtr>& x, const std::vector<ExprPtr>& y) {
        if (x.size() != y.size()) return false;
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (!alpha_equal(x[i], y[i])) return false;
        }
        return true;
    };
    return same(a.antecedents, b.antecedents) && same(a.consequents, b.consequents);
}

ExprPtr formula_at(const Sequent& s, int fnum) {
    if (fnum < 0 && static_cast<std::size_t>(-fnum) <= s.antecedents.size()) return s.antecedents[-fnum - 1];
    if (fnum > 0 && static_cast<std::size_t>(fnum) <= s.consequents.size()) return s.consequents[fnum - 1];
    return nullptr;
}

PropView prop_view(const ExprPtr& e) {
    PropView v;
    v.a = e;
    switch (e->kind) {
    case ExprKind::BoolLit: v.kind = e->bool_value ? PropKind::True : PropKind::False; return v;
    case ExprKind::Unary:
        if (e->uop == UnaryOp::Not) {
            v.kind = PropKind::Not;
            v.a = e->args[0];
        }
        return v;
    case ExprKind::If:
        if (is_bool(e->type) || is_bool(e->args[1]->type)) {
            v.kind = PropKind::If;
            v.a = e->args[0];
            v.b = e->args[1];
            v.c = e->args[2];
        }
        return v;
    case ExprKind::Binary: break;
    default: return v;
    }
    const ExprPtr& lhs = e->args[0];
    const ExprPtr& rhs = e->args[1];
    switch (e->bop) {
    case BinaryOp::And: v.kind = PropKind::And; break;
    case BinaryOp::Or: v.kind = PropKind::Or; break;
    case BinaryOp::Implies: v.kind = PropKind::Implies; break;
    case BinaryOp::Iff: v.kind = PropKind::Iff; break;
    case BinaryOp::Eq:
        if (!is_bool(lhs->type)) return v;
        v.kind = PropKind::Iff;
        break;
    case BinaryOp::Neq:
        v.kind = PropKind::Not;
        v.a = make_binary(is_bool(lhs->type) ? BinaryOp::Iff : BinaryOp::Eq, lhs, rhs, e->range);
        return v;
    default: return v;
    }
    v.a = lhs;
    v.b = rhs;
    return v;
}

namespace {

// Formulas compiled to a small DAG over atom indices.
struct PNode {
    PropKind kind;
    int a = -1, b = -1, c = -1;
    int atom = -1;
};

class Compiler {
public:
    int compile(const ExprPtr& e) {
        PropView v = prop_view(e);
        PNode n{v.kind};
        switch (v.kind) {
        case PropKind::Atom: n.atom = atom_index(v.a); break;
        case PropKind::True:
        case PropKind::False: break;
        case PropKind::Not: n.a = compile(v.a); break;
        case PropKind::If:
            n.a = compile(v.a);
            n.b = compile(v.b);
            n.c = compile(v.c);
            break;
        default:
            n.a = compile(v.a);
            n.b = compile(v.b);
            break;
        }
        nodes.push_back(n);
        return static_cast<int>(nodes.size()) - 1;
    }

    bool eval(int i, std::uint32_t assignment) const {
        const PNode& n = nodes[i];
        switch (n.kind) {
        case PropKind::Atom: return (assignment >> n.atom) & 1u;
        case PropKind::True: return true;
        case PropKind::False: return false;
        case PropKind::Not: return !eval(n.a, assignment);
        case PropKind::And: return eval(n.a, assignment) && eval(n.b, assignment);
        case PropKind::Or: return eval(n.a, assignment) || eval(n.b, assignment);
        case PropKind::Implies: return !eval(n.a, assignment) || eval(n.b, assignment);
        case PropKind::Iff: return eval(n.a, assignment) == eval(n.b, assignment);
        case PropKind::If: return eval(n.a, assignment) ? eval(n.b, assignment) : eval(n.c, assignment);
        }
        return false;
    }

    std::vector<PNode> nodes;
    std::vector<ExprPtr> atoms;

private:
    int atom_index(const ExprPtr& e) {
        for (std::size_t i = 0; i < atoms.size(); ++i) {
            if (alpha_equal(atoms[i], e)) return static_cast<int>(i);
        }
        atoms.push_back(e);
        return static_cast<int>(atoms.size()) - 1;
    }
};

bool syntactically_closed(const Sequent& s) {
    for (const auto& a : s.antecedents) {
        if (prop_view(a).kind == PropKind::False) return true;
        for (const auto& c : s.consequents) {
            if (alpha_equal(a, c)) return true;
        }
    }
    for (const auto& c : s.consequents) {
        if (prop_view(c).kind == PropKind::True) return true;
    }
    return false;
}

} // namespace

bool is_propositional_tautology(const Sequent& s) {
    if (syntactically_closed(s)) return true;
    Compiler comp;
    std::vector<int> ante, cons;
    for (const auto& a : s.antecedents) ante.push_back(comp.compile(a));
    for (const auto& c : s.consequents) cons.push_back(comp.compile(c));
    if (comp.atoms.size() > kMaxTruthTableAtoms) return false;
    const std::uint32_t count = 1u << comp.atoms.size();
    for (std::uint32_t assignment = 0; assignment < count; ++assignment) {
        bool premises = true;
        for (int a : ante) {
            if (!comp.eval(a, assignment)) {
                premises = false;
                break;
            }
        }
        if (!premises) continue;
        bool conclusion = false;
        for (int c : cons) {
            if (comp.eval(c, assignment)) {
                conclusion = true;
                break;
            }
        }
        if (!conclusion) return false;
    }
    return true;
}

} // namespace upvs
