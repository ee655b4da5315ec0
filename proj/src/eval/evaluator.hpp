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

#ifndef UPVS_EVAL_EVALUATOR_HPP
#define UPVS_EVAL_EVALUATOR_HPP

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "lang/ast.hpp"

namespace upvs {

struct TypecheckResult;

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

struct Value;
using ValuePtr = std::shared_ptr<const Value>;

struct EnvNode;
using Env = std::shared_ptr<const EnvNode>;

struct EnvNode {
    std::string name;
    ValuePtr value;
    Env next;
};

// Integers whose rational form has denominator 1 are always Int.
struct Value {
    enum class Kind { Bool, Int, Rational, String, Record, Closure };

    Kind kind = Kind::Bool;
    bool boolean = false;
    BigInt integer;
    Rational rational;
    std::string string;
    std::vector<std::pair<std::string, ValuePtr>> fields; // declaration order
    // Closure
    std::vector<std::string> params;
    ExprPtr body;
    Env env;
    std::string name; // function name for rendering, may be empty
};

ValuePtr make_bool_value(bool b);
ValuePtr make_int_value(BigInt i);
/// Normalizes to Int when the denominator is 1.
ValuePtr make_number_value(const Rational& q);
ValuePtr make_string_value(std::string s);

/// "7", "5/2", "TRUE", "\"s\"", "(# x := 1 #)", "<function f>".
std::string render(const Value& v);
/// Structural equality; throws Error(NonExecutable) for closures.
bool values_equal(const Value& a, const Value& b);

using DeclLookup = std::function<const Decl*(const SymbolRef&)>;

constexpr std::uint64_t kDefaultFuel = 1'000'000;

struct EvalOptions {
    std::uint64_t fuel = kDefaultFuel;
    const std::atomic<bool>* cancel = nullptr; // polled every few hundred steps
};

/// Call-by-value evaluation of a typed, closed expression. Throws Error with
/// DivisionByZero, FuelExhausted, NonExecutable or Cancelled.
ValuePtr evaluate(const ExprPtr& typed, const DeclLookup& lookup, const EvalOptions& options = {});

/// Parses and typechecks `text` in the scope of `ctx`, then evaluates it.
/// Parse and type errors throw Error(EvalInvalid) with the diagnostics as data.
ValuePtr evaluate_text(const std::string& text, const TypecheckResult& ctx, const EvalOptions& options = {});

DeclLookup lookup_in(const TypecheckResult& ctx);

/// Value of a ground boolean expression, or nullopt when it cannot be
/// evaluated (free constants, errors, fuel).
std::optional<bool> try_evaluate_bool(const ExprPtr& typed, const DeclLookup& lookup,
                                      std::uint64_t fuel = 10'000);

} // namespace upvs

#endif // UPVS_EVAL_EVALUATOR_HPP
