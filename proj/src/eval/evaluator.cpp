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

#include "eval/evaluator.hpp"

#include <map>

#include "common/error.hpp"
#include "lang/json_conv.hpp"
#include "lang/parser.hpp"
#include "typecheck/typecheck.hpp"

namespace upvs {

ValuePtr make_bool_value(bool b) {
    auto v = std::make_shared<Value>();
    v->kind = Value::Kind::Bool;
    v->boolean = b;
    return v;
}

ValuePtr make_int_value(BigInt i) {
    auto v = std::make_shared<Value>();
    v->kind = Value::Kind::Int;
    v->integer = std::move(i);
    return v;
}

ValuePtr make_number_value(const Rational& q) {
    if (boost::multiprecision::denominator(q) == 1) return make_int_value(boost::multiprecision::numerator(q));
    auto v = std::make_shared<Value>();
    v->kind = Value::Kind::Rational;
    v->rational = q;
    return v;
}

ValuePtr make_string_value(std::string s) {
    auto v = std::make_shared<Value>();
    v->kind = Value::Kind::String;
    v->string = std::move(s);
    return v;
}

std::string render(const Value& v) {
    switch (v.kind) {
    case Value::Kind::Bool: return v.boolean ? "TRUE" : "FALSE";
    case Value::Kind::Int: return v.integer.str();
    case Value::Kind::Rational: return v.rational.str();
    case Value::Kind::String: return "\"" + v.string + "\"";
    case Value::Kind::Record: {
        std::string out = "(# ";
        for (std::size_t i = 0; i < v.fields.size(); ++i) {
            if (i) out += ", ";
            out += v.fields[i].first + " := " + render(*v.fields[i].second);
        }
        return out + " #)";
    }
    case Value::Kind::Closure: return v.name.empty() ? "<function>" : "<function " + v.name + ">";
    }
    return "";
}

bool values_equal(const Value& a, const Value& b) {
    if (a.kind == Value::Kind::Closure || b.kind == Value::Kind::Closure)
        throw Error(ErrorCode::NonExecutable, "equality of functions is not executable");
    if (a.kind != b.kind) return false;
    switch (a.kind) {
    case Value::Kind::Bool: return a.boolean == b.boolean;
    case Value::Kind::Int: return a.integer == b.integer;
    case Value::Kind::Rational: return a.rational == b.rational;
    case Value::Kind::String: return a.string == b.string;
    case Value::Kind::Record:
        if (a.fields.size() != b.fields.size()) return false;
        for (std::size_t i = 0; i < a.fields.size(); ++i) {
            if (a.fields[i].first != b.fields[i].first) return false;
            if (!values_equal(*a.fields[i].second, *b.fields[i].second)) return false;
        }
        return true;
    case Value::Kind::Closure: break;
    }
    return false;
}

namespace {

Rational as_rational(const Value& v) {
    if (v.kind == Value::Kind::Int) return Rational(v.integer);
    if (v.kind == Value::Kind::Rational) return v.rational;
    throw Error(ErrorCode::NonExecutable, "expected a number, found " + render(v));
}

bool as_bool(const Value& v) {
    if (v.kind != Value::Kind::Bool) throw Error(ErrorCode::NonExecutable, "expected a boolean, found " + render(v));
    return v.boolean;
}

ValuePtr literal_value(const Expr& e) {
    switch (e.kind) {
    case ExprKind::BoolLit: return make_bool_value(e.bool_value);
    case ExprKind::IntLit: return make_int_value(BigInt(e.text));
    case ExprKind::RealLit: {
        auto dot = e.text.find('.');
        std::string digits = e.text.substr(0, dot) + e.text.substr(dot + 1);
        BigInt den = 1;
        for (std::size_t i = dot + 1; i < e.text.size(); ++i) den *= 10;
        return make_number_value(Rational(BigInt(digits.empty() ? "0" : digits), den));
    }
    case ExprKind::StringLit: {
        const std::string& t = e.text;
        return make_string_value(t.size() >= 2 ? t.substr(1, t.size() - 2) : t);
    }
    default: return nullptr;
    }
}

ValuePtr arithmetic(BinaryOp op, const Value& a, const Value& b) {
    if (a.kind == Value::Kind::Int && b.kind == Value::Kind::Int && op != BinaryOp::Div) {
        switch (op) {
        case BinaryOp::Add: return make_int_value(a.integer + b.integer);
        case BinaryOp::Sub: return make_int_value(a.integer - b.integer);
        case BinaryOp::Mul: return make_int_value(a.integer * b.integer);
        default: break;
        }
    }
    Rational x = as_rational(a), y = as_rational(b);
    switch (op) {
    case BinaryOp::Add: return make_number_value(x + y);
    case BinaryOp::Sub: return make_number_value(x - y);
    case BinaryOp::Mul: return make_number_value(x * y);
    case BinaryOp::Div:
        if (y == 0) throw Error(ErrorCode::DivisionByZero, "division by zero");
        return make_number_value(x / y);
    default: break;
    }
    return nullptr;
}

ValuePtr binary(BinaryOp op, const Value& a, const Value& b) {
    switch (op) {
    case BinaryOp::Iff: return make_bool_value(as_bool(a) == as_bool(b));
    case BinaryOp::Eq: return make_bool_value(values_equal(a, b));
    case BinaryOp::Neq: return make_bool_value(!values_equal(a, b));
    case BinaryOp::Lt: return make_bool_value(as_rational(a) < as_rational(b));
    case BinaryOp::Le: return make_bool_value(as_rational(a) <= as_rational(b));
    case BinaryOp::Gt: return make_bool_value(as_rational(a) > as_rational(b));
    case BinaryOp::Ge: return make_bool_value(as_rational(a) >= as_rational(b));
    default: return arithmetic(op, a, b);
    }
}

enum class FrameKind { BinLeft, BinRight, Unary, IfCond, Apply, Let, Record, Field, ConstCache };

struct Frame {
    Frame(FrameKind k, const Expr* expr, Env environment) : kind(k), e(expr), env(std::move(environment)) {}

    FrameKind kind;
    const Expr* e = nullptr;
    Env env;
    ValuePtr value;
    std::vector<ValuePtr> values;
    std::size_t index = 0;
    const Decl* decl = nullptr;
};

Env bind(Env env, std::string name, ValuePtr value) {
    return std::make_shared<const EnvNode>(EnvNode{std::move(name), std::move(value), std::move(env)});
}

// Explicit-stack machine: deep recursion in the evaluated program grows a
// heap vector, not the C++ stack, and tail calls do not grow it at all.
class Machine {
public:
    Machine(const DeclLookup& lookup, const EvalOptions& options) : lookup_(lookup), options_(options) {}

    ValuePtr run(const Expr* root) {
        const Expr* control = root;
        Env env;
        ValuePtr result;
        while (true) {
            if (control) {
                tick();
                result = step(control, env);
                continue;
            }
            if (stack_.empty()) return result;
            Frame frame = std::move(stack_.back());
            stack_.pop_back();
            resume(std::move(frame), result, control, env);
        }
    }

private:
    void tick() {
        if (steps_ >= options_.fuel)
            throw Error(ErrorCode::FuelExhausted,
                        "evaluation ran out of fuel after " + std::to_string(steps_) + " steps");
        ++steps_;
        if (options_.cancel && (steps_ & 0xff) == 0 && options_.cancel->load(std::memory_order_relaxed))
            throw Error(ErrorCode::Cancelled, "evaluation cancelled");
    }

    // Evaluates `e` one step. Returns a value, or sets `control`/`env` to
    // continue with a subexpression (returning null).
    ValuePtr step(const Expr*& control, Env& env) {
        const Expr& e = *control;
        control = nullptr;
        if (auto lit = literal_value(e)) return lit;
        switch (e.kind) {
        case ExprKind::Name: return name_value(e, env, control);
        case ExprKind::Apply:
        case ExprKind::Binary:
        case ExprKind::Unary:
        case ExprKind::If:
        case ExprKind::Field: {
            FrameKind k = e.kind == ExprKind::Apply    ? FrameKind::Apply
                          : e.kind == ExprKind::Binary ? FrameKind::BinLeft
                          : e.kind == ExprKind::Unary  ? FrameKind::Unary
                          : e.kind == ExprKind::If     ? FrameKind::IfCond
                                                       : FrameKind::Field;
            stack_.push_back(Frame{k, &e, env});
            control = e.args[0].get();
            return nullptr;
        }
        case ExprKind::Let:
            if (e.lets.empty()) {
                control = e.args[0].get();
                return nullptr;
            }
            stack_.push_back(Frame{FrameKind::Let, &e, env});
            control = e.lets[0].value.get();
            return nullptr;
        case ExprKind::Record:
            if (e.fields.empty()) {
                auto rec = std::make_shared<Value>();
                rec->kind = Value::Kind::Record;
                return rec;
            }
            stack_.push_back(Frame{FrameKind::Record, &e, env});
            control = e.fields[0].value.get();
            return nullptr;
        case ExprKind::Forall:
        case ExprKind::Exists:
            throw Error(ErrorCode::NonExecutable, "quantified expressions are not executable");
        default: break;
        }
        throw Error(ErrorCode::NonExecutable, "expression is not executable");
    }

    ValuePtr name_value(const Expr& e, const Env& env, const Expr*& control) {
        if (e.ref.kind == SymbolRef::Kind::Local) {
            for (const EnvNode* n = env.get(); n; n = n->next.get()) {
                if (n->name == e.text) return n->value;
            }
            throw Error(ErrorCode::NonExecutable, "variable '" + e.text + "' has no value");
        }
        if (e.ref.kind != SymbolRef::Kind::Decl)
            throw Error(ErrorCode::NonExecutable, "'" + e.text + "' is not executable");
        const Decl* d = lookup_ ? lookup_(e.ref) : nullptr;
        if (!d) throw Error(ErrorCode::NonExecutable, "'" + e.text + "' is not executable");
        if (d->kind == DeclKind::Function) {
            auto v = std::make_shared<Value>();
            v->kind = Value::Kind::Closure;
            for (const auto& p : d->params) v->params.push_back(p.name);
            v->body = d->body;
            v->name = d->name;
            return v;
        }
        if (d->kind == DeclKind::Const && d->body) {
            auto it = consts_.find(d);
            if (it != consts_.end()) return it->second;
            Frame f{FrameKind::ConstCache, &e, nullptr};
            f.decl = d;
            stack_.push_back(std::move(f));
            control = d->body.get();
            return nullptr;
        }
        throw Error(ErrorCode::NonExecutable, "uninterpreted constant '" + e.text + "' has no value");
    }

    void resume(Frame f, ValuePtr& v, const Expr*& control, Env& env) {
        const Expr& e = *f.e;
        switch (f.kind) {
        case FrameKind::BinLeft: {
            bool lhs = e.bop == BinaryOp::And || e.bop == BinaryOp::Or || e.bop == BinaryOp::Implies
                           ? as_bool(*v)
                           : false;
            if ((e.bop == BinaryOp::And && !lhs) || (e.bop == BinaryOp::Or && lhs)) return;
            if (e.bop == BinaryOp::Implies && !lhs) {
                v = make_bool_value(true);
                return;
            }
            env = f.env;
            control = e.args[1].get();
            if (e.bop == BinaryOp::And || e.bop == BinaryOp::Or || e.bop == BinaryOp::Implies) return;
            f.kind = FrameKind::BinRight;
            f.value = v;
            stack_.push_back(std::move(f));
            return;
        }
        case FrameKind::BinRight: v = binary(e.bop, *f.value, *v); return;
        case FrameKind::Unary:
            if (e.uop == UnaryOp::Not)
                v = make_bool_value(!as_bool(*v));
            else
                v = make_number_value(-as_rational(*v));
            return;
        case FrameKind::IfCond:
            env = f.env;
            control = e.args[as_bool(*v) ? 1 : 2].get();
            return;
        case FrameKind::Apply: {
            f.values.push_back(v);
            if (f.values.size() < e.args.size()) {
                env = f.env;
                control = e.args[f.values.size()].get();
                stack_.push_back(std::move(f));
                return;
            }
            const Value& fn = *f.values[0];
            if (fn.kind != Value::Kind::Closure)
                throw Error(ErrorCode::NonExecutable, "applying a non-function value " + render(fn));
            if (fn.params.size() + 1 != f.values.size())
                throw Error(ErrorCode::NonExecutable, "wrong number of arguments for " + render(fn));
            Env call_env = fn.env;
            for (std::size_t i = 0; i < fn.params.size(); ++i) call_env = bind(call_env, fn.params[i], f.values[i + 1]);
            env = std::move(call_env);
            control = fn.body.get();
            return;
        }
        case FrameKind::Let: {
            Env next = bind(f.env, e.lets[f.index].name, v);
            ++f.index;
            env = next;
            if (f.index < e.lets.size()) {
                control = e.lets[f.index].value.get();
                f.env = std::move(next);
                stack_.push_back(std::move(f));
            } else {
                control = e.args[0].get();
            }
            return;
        }
        case FrameKind::Record: {
            f.values.push_back(v);
            if (f.values.size() < e.fields.size()) {
                env = f.env;
                control = e.fields[f.values.size()].value.get();
                stack_.push_back(std::move(f));
                return;
            }
            auto rec = std::make_shared<Value>();
            rec->kind = Value::Kind::Record;
            for (std::size_t i = 0; i < e.fields.size(); ++i) rec->fields.emplace_back(e.fields[i].name, f.values[i]);
            v = rec;
            return;
        }
        case FrameKind::Field:
            if (v->kind == Value::Kind::Record) {
                for (const auto& [name, value] : v->fields) {
                    if (name == e.text) {
                        v = value;
                        return;
                    }
                }
            }
            throw Error(ErrorCode::NonExecutable, "no field '" + e.text + "' in " + render(*v));
        case FrameKind::ConstCache: consts_[f.decl] = v; return;
        }
    }

    const DeclLookup& lookup_;
    const EvalOptions& options_;
    std::vector<Frame> stack_;
    std::map<const Decl*, ValuePtr> consts_;
    std::uint64_t steps_ = 0;
};

} // namespace

ValuePtr evaluate(const ExprPtr& typed, const DeclLookup& lookup, const EvalOptions& options) {
    if (!typed) throw Error(ErrorCode::EvalInvalid, "nothing to evaluate");
    Machine m(lookup, options);
    return m.run(typed.get());
}

DeclLookup lookup_in(const TypecheckResult& ctx) {
    return [c = &ctx](const SymbolRef& ref) { return c->lookup(ref); };
}

ValuePtr evaluate_text(const std::string& text, const TypecheckResult& ctx, const EvalOptions& options) {
    auto parsed = parse_expression(text);
    if (!parsed.value || has_errors(parsed.diagnostics)) {
        throw Error(ErrorCode::EvalInvalid,
                    parsed.diagnostics.empty() ? "cannot parse expression" : parsed.diagnostics[0].message,
                    {{"diagnostics", diagnostics_json(parsed.diagnostics)}});
    }
    auto checked = check_expression(parsed.value, ctx);
    if (!checked.expr) {
        throw Error(ErrorCode::EvalInvalid, checked.diagnostics.at(0).message,
                    {{"diagnostics", diagnostics_json(checked.diagnostics)}});
    }
    return evaluate(checked.expr, lookup_in(ctx), options);
}

std::optional<bool> try_evaluate_bool(const ExprPtr& typed, const DeclLookup& lookup, std::uint64_t fuel) {
    try {
        EvalOptions options;
        options.fuel = fuel;
        auto v = evaluate(typed, lookup, options);
        if (v->kind == Value::Kind::Bool) return v->boolean;
    } catch (const Error&) {
    }
    return std::nullopt;
}

} // namespace upvs
